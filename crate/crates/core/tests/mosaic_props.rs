//! Structural invariants of mosaic plans over randomized inputs: exact
//! viewport tiling, crop containment, leftover hygiene, box conservation,
//! and the blit identity between a tile rendered alone and in a mosaic.

use detkit::config::Resample;
use detkit::geometry::BBox;
use detkit::mosaic::{
    plan_mosaic, recycle_leftovers, remap_boxes, render_mosaic, render_tile, SourceRef,
};
use detkit::raster;
use detkit::seed::rng_for;
use image::RgbImage;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

fn random_sources(rng: &mut ChaCha8Rng) -> [SourceRef; 4] {
    std::array::from_fn(|id| SourceRef {
        id,
        width: rng.random_range(8..160),
        height: rng.random_range(8..160),
    })
}

fn textured(w: u32, h: u32, salt: u32) -> RgbImage {
    RgbImage::from_fn(w, h, |x, y| {
        image::Rgb([
            ((x * 31 + salt * 7) % 256) as u8,
            ((y * 17 + salt * 13) % 256) as u8,
            ((x * y + salt) % 256) as u8,
        ])
    })
}

fn random_norm_boxes(rng: &mut ChaCha8Rng, n: usize) -> Vec<(u32, BBox)> {
    (0..n)
        .map(|_| {
            let w: f64 = rng.random_range(0.05..0.9);
            let h: f64 = rng.random_range(0.05..0.9);
            let x: f64 = rng.random_range(0.0..(1.0 - w));
            let y: f64 = rng.random_range(0.0..(1.0 - h));
            (rng.random_range(0..5u32), BBox::new(x, y, x + w, y + h))
        })
        .collect()
}

#[test]
fn viewports_tile_the_canvas_exactly() {
    let mut rng = rng_for(71);
    for i in 0..300 {
        let canvas = (rng.random_range(16..400u32), rng.random_range(16..400u32));
        let recipe = plan_mosaic(&random_sources(&mut rng), canvas, 9000 + i, (0.25, 0.75)).unwrap();
        let total: f64 = recipe.viewports().iter().map(|v| v.area()).sum();
        assert_eq!(total, canvas.0 as f64 * canvas.1 as f64);
        // The shared center splits rows/columns consistently.
        let (cx, cy) = recipe.center;
        assert!(cx >= 1 && cx < canvas.0 && cy >= 1 && cy < canvas.1);
    }
}

#[test]
fn crops_stay_within_the_resized_source() {
    let mut rng = rng_for(72);
    for i in 0..300 {
        let recipe = plan_mosaic(&random_sources(&mut rng), (200, 150), 500 + i, (0.25, 0.75)).unwrap();
        for tile in &recipe.tiles {
            let (rw, rh) = tile.resized_dims();
            assert!(tile.crop.x_min >= 0.0 && tile.crop.y_min >= 0.0);
            assert!(tile.crop.x_max <= rw + 1e-9 && tile.crop.y_max <= rh + 1e-9);
            // Crop size always equals the viewport size.
            assert!((tile.crop.width() - tile.viewport.width()).abs() < 1e-9);
            assert!((tile.crop.height() - tile.viewport.height()).abs() < 1e-9);
        }
    }
}

#[test]
fn leftovers_are_whole_pixels_inside_the_source_and_clear_of_the_crop() {
    let mut rng = rng_for(73);
    for i in 0..300 {
        let sources = random_sources(&mut rng);
        let recipe = plan_mosaic(&sources, (240, 180), 7000 + i, (0.25, 0.75)).unwrap();
        for (t, tile) in recipe.tiles.iter().enumerate() {
            for r in &recipe.leftovers[t] {
                assert!(r.w >= 1 && r.h >= 1);
                assert!(r.x + r.w <= tile.src_w && r.y + r.h <= tile.src_h);
                // Mapped back to resized coordinates the region may touch
                // the crop only by the snap slack, never overlap it.
                let resized = BBox::new(
                    r.x as f64 * tile.scale,
                    r.y as f64 * tile.scale,
                    (r.x + r.w) as f64 * tile.scale,
                    (r.y + r.h) as f64 * tile.scale,
                );
                let overlap_w = (resized.x_max.min(tile.crop.x_max)
                    - resized.x_min.max(tile.crop.x_min))
                .max(0.0);
                let overlap_h = (resized.y_max.min(tile.crop.y_max)
                    - resized.y_min.max(tile.crop.y_min))
                .max(0.0);
                let overlap = overlap_w.min(overlap_h);
                assert!(
                    overlap <= 1e-6,
                    "leftover {r:?} overlaps crop {:?} by {overlap}",
                    tile.crop
                );
            }
        }
    }
}

#[test]
fn remapped_boxes_never_exceed_source_count_and_stay_in_viewport() {
    let mut rng = rng_for(74);
    for i in 0..200 {
        let sources = random_sources(&mut rng);
        let recipe = plan_mosaic(&sources, (320, 240), 100 + i, (0.25, 0.75)).unwrap();
        for t in 0..4 {
            let boxes = random_norm_boxes(&mut rng, 4);
            let out = remap_boxes(&recipe, t, &boxes, 0.25, 2.0);
            assert!(out.len() <= boxes.len());
            let v = &recipe.tiles[t].viewport;
            for (_, b) in &out {
                assert!(b.x_min >= v.x_min - 1e-9 && b.x_max <= v.x_max + 1e-9);
                assert!(b.y_min >= v.y_min - 1e-9 && b.y_max <= v.y_max + 1e-9);
            }
        }
    }
}

#[test]
fn recycled_crops_always_carry_boxes() {
    let mut rng = rng_for(75);
    for i in 0..100 {
        let sources = random_sources(&mut rng);
        let recipe = plan_mosaic(&sources, (200, 200), 300 + i, (0.25, 0.75)).unwrap();
        let boxes = [
            random_norm_boxes(&mut rng, 3),
            random_norm_boxes(&mut rng, 3),
            random_norm_boxes(&mut rng, 3),
            random_norm_boxes(&mut rng, 3),
        ];
        for crop in recycle_leftovers(&recipe, &boxes, 0.25, 2.0) {
            assert!(!crop.boxes.is_empty());
            for (_, b) in &crop.boxes {
                assert!(b.x_min >= -1e-9 && b.x_max <= 1.0 + 1e-9);
                assert!(b.y_min >= -1e-9 && b.y_max <= 1.0 + 1e-9);
            }
        }
    }
}

#[test]
fn tile_in_mosaic_equals_tile_rendered_alone() {
    let mut rng = rng_for(76);
    for i in 0..20 {
        let sources = random_sources(&mut rng);
        let recipe = plan_mosaic(&sources, (96, 80), 40 + i, (0.25, 0.75)).unwrap();
        let rasters: Vec<RgbImage> = sources
            .iter()
            .map(|s| textured(s.width, s.height, s.id as u32 + i as u32))
            .collect();
        let mosaic = render_mosaic(
            &recipe,
            [&rasters[0], &rasters[1], &rasters[2], &rasters[3]],
            Resample::Bilinear,
        )
        .unwrap();
        for (t, tile) in recipe.tiles.iter().enumerate() {
            let alone = render_tile(tile, &rasters[t], Resample::Bilinear).unwrap();
            let cut = raster::crop(
                &mosaic,
                tile.viewport.x_min as u32,
                tile.viewport.y_min as u32,
                tile.viewport.width() as u32,
                tile.viewport.height() as u32,
            )
            .unwrap();
            assert_eq!(alone.as_raw(), cut.as_raw(), "tile {t} differs in mosaic {i}");
        }
    }
}
