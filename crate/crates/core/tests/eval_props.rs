//! Randomized checks of the metric pipeline against the brute-force
//! prefix-enumeration oracle, plus structural properties of the PR
//! machinery.

use detkit::config::ApInterp;
use detkit::eval::{
    average_precision, brute_force_ap, iou_thresholds, map_at, pr_curve, CoordSpace, Detection,
    GroundTruth,
};
use detkit::geometry::BBox;
use detkit::seed::rng_for;
use proptest::prelude::*;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

fn random_box(rng: &mut ChaCha8Rng) -> BBox {
    let x: f64 = rng.random_range(0.0..80.0);
    let y: f64 = rng.random_range(0.0..80.0);
    let w: f64 = rng.random_range(1.0..30.0);
    let h: f64 = rng.random_range(1.0..30.0);
    BBox::new(x, y, x + w, y + h)
}

/// A small random instance: up to 3 images, up to 4 categories, up to 15
/// detections, 1..=8 ground truths. Confidences are quantized to
/// twentieths so ties actually occur.
fn random_instance(rng: &mut ChaCha8Rng) -> (Vec<Detection>, Vec<GroundTruth>) {
    let images = ["a", "b", "c"];
    let n_images = rng.random_range(1..=3usize);
    let n_cats = rng.random_range(1..=4u32);
    let n_gts = rng.random_range(1..=8usize);
    let n_dets = rng.random_range(0..=15usize);
    let mut gts = Vec::new();
    for _ in 0..n_gts {
        gts.push(GroundTruth {
            image: images[rng.random_range(0..n_images)].to_string(),
            category: rng.random_range(0..n_cats),
            bbox: random_box(rng),
            space: CoordSpace::Pixel,
        });
    }
    let mut dets = Vec::new();
    for _ in 0..n_dets {
        // Half the detections perturb a real ground truth so matches at
        // interesting IoU levels are common; the rest are noise.
        let bbox = if rng.random::<bool>() {
            let g = &gts[rng.random_range(0..gts.len())];
            g.bbox.shifted(rng.random_range(-8.0..8.0), rng.random_range(-8.0..8.0))
        } else {
            random_box(rng)
        };
        let conf = rng.random_range(0..=20) as f64 / 20.0;
        dets.push(
            Detection::new(
                images[rng.random_range(0..n_images)].to_string(),
                rng.random_range(0..n_cats),
                bbox,
                conf,
                CoordSpace::Pixel,
            )
            .unwrap(),
        );
    }
    (dets, gts)
}

#[test]
fn pipeline_matches_brute_force_oracle() {
    let mut rng = rng_for(404);
    let thresholds = iou_thresholds();
    for i in 0..120 {
        let (dets, gts) = random_instance(&mut rng);
        let t = thresholds[i % thresholds.len()];
        let fast = map_at(&dets, &gts, t, ApInterp::All).unwrap();
        let slow = brute_force_ap(&dets, &gts, t, ApInterp::All).unwrap();
        assert!(
            (fast - slow).abs() <= 1e-12,
            "instance {i}: pipeline {fast} vs oracle {slow}"
        );
    }
}

#[test]
fn map_is_invariant_to_detection_input_order_with_distinct_confidences() {
    let mut rng = rng_for(405);
    for _ in 0..40 {
        let (mut dets, gts) = random_instance(&mut rng);
        // Distinct confidences: with ties the in-image submission order
        // is part of the ranking contract, so only the tie-free case is
        // order-free.
        for (i, d) in dets.iter_mut().enumerate() {
            d.confidence = (1000.0 - i as f64) / 1001.0;
        }
        let base = map_at(&dets, &gts, 0.5, ApInterp::All).unwrap();
        let mut shuffled = dets.clone();
        shuffled.reverse();
        let third = shuffled.len() / 3;
        shuffled.rotate_left(third);
        let permuted = map_at(&shuffled, &gts, 0.5, ApInterp::All).unwrap();
        assert!((base - permuted).abs() <= 1e-12);
    }
}

#[test]
fn duplicates_of_one_ground_truth_yield_exactly_one_true_positive() {
    let mut rng = rng_for(406);
    for _ in 0..40 {
        let b = random_box(&mut rng);
        let gts = vec![GroundTruth {
            image: "a".into(),
            category: 0,
            bbox: b,
            space: CoordSpace::Pixel,
        }];
        let n = rng.random_range(2..=6usize);
        let dets: Vec<Detection> = (0..n)
            .map(|i| {
                Detection::new("a", 0, b, 1.0 - i as f64 * 0.01, CoordSpace::Pixel).unwrap()
            })
            .collect();
        let outcome = detkit::eval::match_detections(&dets, &gts, 0.5).unwrap();
        assert_eq!(outcome.tp(), 1);
        assert_eq!(outcome.fp(), n - 1);
    }
}

proptest! {
    #[test]
    fn average_precision_is_bounded(flags in proptest::collection::vec(any::<bool>(), 1..40)) {
        let total_gt = flags.iter().filter(|f| **f).count().max(1);
        let curve = pr_curve(&flags, total_gt, 0, 0.5).unwrap();
        for interp in [ApInterp::All, ApInterp::ElevenPoint, ApInterp::HundredOnePoint] {
            let ap = average_precision(&curve, interp);
            prop_assert!((0.0..=1.0 + 1e-12).contains(&ap), "ap {} out of range", ap);
        }
    }

    #[test]
    fn all_true_prefix_gives_perfect_ap(n in 1..20usize) {
        let flags = vec![true; n];
        let curve = pr_curve(&flags, n, 0, 0.5).unwrap();
        let ap = average_precision(&curve, ApInterp::All);
        prop_assert!((ap - 1.0).abs() < 1e-12);
    }
}
