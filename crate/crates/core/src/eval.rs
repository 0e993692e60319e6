//! Detection evaluation: greedy per-image matching at an IoU threshold,
//! precision-recall sweeps, average precision by envelope integration,
//! and the mAP@0.5 / mAP@0.5:0.95 aggregates, together with a brute-force
//! oracle that recomputes everything from scratch at every confidence
//! cutoff.
//!
//! Deterministic tie-breaks are pinned throughout: detections rank by
//! descending confidence, then ascending image id, then ascending index
//! within the image; a detection claims the unmatched ground truth with
//! the highest IoU, earliest index first on ties; `IoU >= threshold`
//! counts as a match.

use std::collections::{BTreeMap, BTreeSet};

use crate::config::ApInterp;
use crate::error::{Error, Result};
use crate::geometry::{iou, BBox};

/// Coordinate space of a box; matching refuses to mix them because an
/// IoU between a normalized and a pixel box is meaningless.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoordSpace {
    Normalized,
    Pixel,
}

/// One predicted box on one image.
#[derive(Debug, Clone, PartialEq)]
pub struct Detection {
    pub image: String,
    pub category: u32,
    pub bbox: BBox,
    pub confidence: f64,
    pub space: CoordSpace,
}

impl Detection {
    pub fn new(
        image: impl Into<String>,
        category: u32,
        bbox: BBox,
        confidence: f64,
        space: CoordSpace,
    ) -> Result<Self> {
        if !(0.0..=1.0).contains(&confidence) {
            return Err(Error::invalid(format!(
                "confidence {confidence} outside [0, 1]"
            )));
        }
        Ok(Self { image: image.into(), category, bbox, confidence, space })
    }
}

/// One ground-truth box on one image.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub image: String,
    pub category: u32,
    pub bbox: BBox,
    pub space: CoordSpace,
}

/// Per-detection and per-ground-truth flags from one matching run.
#[derive(Debug, Clone, PartialEq)]
pub struct MatchOutcome {
    pub iou_threshold: f64,
    /// Indexed like the input detections: true = TP, false = FP.
    pub det_is_tp: Vec<bool>,
    /// Indexed like the input ground truths: true = claimed by some
    /// detection, false = FN.
    pub gt_matched: Vec<bool>,
}

impl MatchOutcome {
    pub fn tp(&self) -> usize {
        self.det_is_tp.iter().filter(|t| **t).count()
    }

    pub fn fp(&self) -> usize {
        self.det_is_tp.len() - self.tp()
    }

    pub fn fn_count(&self) -> usize {
        self.gt_matched.iter().filter(|m| !**m).count()
    }
}

/// Greedy matching for one image and one category: detections in
/// confidence order (ties by input index) each claim the unmatched
/// ground truth with the highest IoU at or above the threshold (ties by
/// ground-truth index).
pub fn match_detections(
    dets: &[Detection],
    gts: &[GroundTruth],
    iou_threshold: f64,
) -> Result<MatchOutcome> {
    let spaces: BTreeSet<_> = dets
        .iter()
        .map(|d| d.space == CoordSpace::Pixel)
        .chain(gts.iter().map(|g| g.space == CoordSpace::Pixel))
        .collect();
    if spaces.len() > 1 {
        return Err(Error::invalid(
            "mixed coordinate spaces: detections and ground truths must all be normalized or all pixel",
        ));
    }
    let categories: BTreeSet<_> = dets
        .iter()
        .map(|d| d.category)
        .chain(gts.iter().map(|g| g.category))
        .collect();
    if categories.len() > 1 {
        return Err(Error::invalid(
            "match_detections expects a single category; partition first",
        ));
    }
    let images: BTreeSet<_> = dets
        .iter()
        .map(|d| &d.image)
        .chain(gts.iter().map(|g| &g.image))
        .collect();
    if images.len() > 1 {
        return Err(Error::invalid(
            "match_detections expects a single image; partition first",
        ));
    }

    let mut order: Vec<usize> = (0..dets.len()).collect();
    // Stable sort keeps ascending input index on confidence ties.
    order.sort_by(|a, b| dets[*b].confidence.partial_cmp(&dets[*a].confidence).unwrap());

    let mut det_is_tp = vec![false; dets.len()];
    let mut gt_matched = vec![false; gts.len()];
    for det_idx in order {
        let det = &dets[det_idx];
        let mut best: Option<(usize, f64)> = None;
        for (gt_idx, gt) in gts.iter().enumerate() {
            if gt_matched[gt_idx] {
                continue;
            }
            let overlap = iou(&det.bbox, &gt.bbox);
            if overlap < iou_threshold {
                continue;
            }
            // Strictly-greater keeps the earliest ground truth on ties.
            if best.map_or(true, |(_, b)| overlap > b) {
                best = Some((gt_idx, overlap));
            }
        }
        if let Some((gt_idx, _)) = best {
            gt_matched[gt_idx] = true;
            det_is_tp[det_idx] = true;
        }
    }
    Ok(MatchOutcome { iou_threshold, det_is_tp, gt_matched })
}

/// One point of a precision-recall sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PRPoint {
    pub recall: f64,
    pub precision: f64,
}

/// The sweep over a category's ranked detections at one IoU threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct PRCurve {
    pub category: u32,
    pub iou_threshold: f64,
    pub points: Vec<PRPoint>,
}

/// Cumulative precision/recall after each ranked detection.
/// `ranked_tp` must already be in global rank order.
pub fn pr_curve(
    ranked_tp: &[bool],
    total_gt: usize,
    category: u32,
    iou_threshold: f64,
) -> Result<PRCurve> {
    if total_gt == 0 {
        return Err(Error::invalid(format!(
            "category {category} has no ground truth"
        )));
    }
    let mut points = Vec::with_capacity(ranked_tp.len());
    let mut tp = 0usize;
    for (i, is_tp) in ranked_tp.iter().enumerate() {
        if *is_tp {
            tp += 1;
        }
        points.push(PRPoint {
            recall: tp as f64 / total_gt as f64,
            precision: tp as f64 / (i + 1) as f64,
        });
    }
    Ok(PRCurve { category, iou_threshold, points })
}

/// Precision envelope: monotone non-increasing from the right.
fn envelope(points: &[PRPoint]) -> Vec<PRPoint> {
    let mut env = points.to_vec();
    let mut best = 0.0f64;
    for p in env.iter_mut().rev() {
        best = best.max(p.precision);
        p.precision = best;
    }
    env
}

/// Area under the PR envelope. `All` integrates the step function
/// exactly; the 11- and 101-point modes sample the envelope on the
/// classic grids and average.
pub fn average_precision(curve: &PRCurve, interp: ApInterp) -> f64 {
    let env = envelope(&curve.points);
    match interp {
        ApInterp::All => {
            let mut area = 0.0;
            let mut prev_recall = 0.0;
            for p in &env {
                area += (p.recall - prev_recall) * p.precision;
                prev_recall = p.recall;
            }
            area
        }
        ApInterp::ElevenPoint => sampled_ap(&env, 11),
        ApInterp::HundredOnePoint => sampled_ap(&env, 101),
    }
}

fn sampled_ap(env: &[PRPoint], samples: usize) -> f64 {
    let mut total = 0.0;
    for i in 0..samples {
        let r = i as f64 / (samples - 1) as f64;
        // Envelope precision at the first point with recall >= r;
        // unreached recall contributes zero.
        let p = env
            .iter()
            .find(|pt| pt.recall >= r)
            .map(|pt| pt.precision)
            .unwrap_or(0.0);
        total += p;
    }
    total / samples as f64
}

/// Arithmetic mean of per-category APs.
pub fn mean_ap(per_category: &[f64]) -> Result<f64> {
    if per_category.is_empty() {
        return Err(Error::invalid("no evaluable categories"));
    }
    Ok(per_category.iter().sum::<f64>() / per_category.len() as f64)
}

/// The ten-threshold grid {0.50, 0.55, ..., 0.95}, built from integer
/// hundredths so constructed fixtures (e.g. exact IoU 0.6) compare
/// bit-for-bit against the grid values.
pub fn iou_thresholds() -> [f64; 10] {
    std::array::from_fn(|i| (50 + 5 * i) as f64 / 100.0)
}

/// Key for grouping: all detections/ground truths of one category on one
/// image. BTreeMap keys make every iteration order deterministic.
type ImageKey = String;

struct CategoryInstance<'a> {
    total_gt: usize,
    /// Per image: (detections, ground truths), both in input order.
    images: BTreeMap<ImageKey, (Vec<&'a Detection>, Vec<&'a GroundTruth>)>,
}

fn partition<'a>(
    dets: &'a [Detection],
    gts: &'a [GroundTruth],
) -> BTreeMap<u32, CategoryInstance<'a>> {
    let mut by_category: BTreeMap<u32, CategoryInstance<'a>> = BTreeMap::new();
    for gt in gts {
        let inst = by_category.entry(gt.category).or_insert_with(|| CategoryInstance {
            total_gt: 0,
            images: BTreeMap::new(),
        });
        inst.total_gt += 1;
        inst.images.entry(gt.image.clone()).or_insert_with(|| (Vec::new(), Vec::new())).1.push(gt);
    }
    for det in dets {
        let inst = by_category.entry(det.category).or_insert_with(|| CategoryInstance {
            total_gt: 0,
            images: BTreeMap::new(),
        });
        inst.images.entry(det.image.clone()).or_insert_with(|| (Vec::new(), Vec::new())).0.push(det);
    }
    by_category
}

/// Match one category per image, then return its detections' TP flags in
/// global rank order (confidence desc, image asc, in-image index asc).
fn ranked_flags(inst: &CategoryInstance<'_>, threshold: f64) -> Result<Vec<bool>> {
    let mut ranked: Vec<(f64, &ImageKey, usize, bool)> = Vec::new();
    for (image, (dets, gts)) in &inst.images {
        let owned_dets: Vec<Detection> = dets.iter().map(|d| (*d).clone()).collect();
        let owned_gts: Vec<GroundTruth> = gts.iter().map(|g| (*g).clone()).collect();
        let outcome = match_detections(&owned_dets, &owned_gts, threshold)?;
        for (i, d) in dets.iter().enumerate() {
            ranked.push((d.confidence, image, i, outcome.det_is_tp[i]));
        }
    }
    ranked.sort_by(|a, b| {
        b.0.partial_cmp(&a.0)
            .unwrap()
            .then_with(|| a.1.cmp(b.1))
            .then_with(|| a.2.cmp(&b.2))
    });
    Ok(ranked.into_iter().map(|(_, _, _, tp)| tp).collect())
}

/// Per-category results at one threshold.
#[derive(Debug, Clone)]
pub struct ThresholdEval {
    pub iou_threshold: f64,
    /// (category, AP), evaluable categories only, ascending category.
    pub per_category: Vec<(u32, f64)>,
    /// Categories with detections but no ground truth, excluded from the
    /// mean.
    pub skipped: Vec<u32>,
    pub map: f64,
}

/// Full match -> curve -> AP -> mean pipeline at one IoU threshold.
pub fn evaluate_at(
    dets: &[Detection],
    gts: &[GroundTruth],
    threshold: f64,
    interp: ApInterp,
) -> Result<ThresholdEval> {
    let by_category = partition(dets, gts);
    let mut per_category = Vec::new();
    let mut skipped = Vec::new();
    for (category, inst) in &by_category {
        if inst.total_gt == 0 {
            skipped.push(*category);
            continue;
        }
        let flags = ranked_flags(inst, threshold)?;
        let curve = pr_curve(&flags, inst.total_gt, *category, threshold)?;
        per_category.push((*category, average_precision(&curve, interp)));
    }
    let map = mean_ap(&per_category.iter().map(|(_, ap)| *ap).collect::<Vec<_>>())?;
    Ok(ThresholdEval { iou_threshold: threshold, per_category, skipped, map })
}

/// mAP at a single IoU threshold.
pub fn map_at(
    dets: &[Detection],
    gts: &[GroundTruth],
    threshold: f64,
    interp: ApInterp,
) -> Result<f64> {
    Ok(evaluate_at(dets, gts, threshold, interp)?.map)
}

/// (mAP@0.5, mAP@0.5:0.95): the value at 0.50 and the mean over the
/// ten-threshold grid.
pub fn map_range(dets: &[Detection], gts: &[GroundTruth], interp: ApInterp) -> Result<(f64, f64)> {
    let thresholds = iou_thresholds();
    let mut maps = Vec::with_capacity(thresholds.len());
    for t in thresholds {
        maps.push(map_at(dets, gts, t, interp)?);
    }
    let mean = maps.iter().sum::<f64>() / maps.len() as f64;
    Ok((maps[0], mean))
}

/// Maximum instance size [`brute_force_ap`] accepts.
pub const BRUTE_FORCE_LIMIT: usize = 50;

/// Independent oracle: enumerate every ranked prefix (equivalently every
/// confidence cutoff), recompute matching from scratch on the prefix,
/// collect the (recall, precision) points, and integrate the same
/// envelope. Refuses instances with more than [`BRUTE_FORCE_LIMIT`]
/// detections.
pub fn brute_force_ap(
    dets: &[Detection],
    gts: &[GroundTruth],
    threshold: f64,
    interp: ApInterp,
) -> Result<f64> {
    if dets.len() > BRUTE_FORCE_LIMIT {
        return Err(Error::invalid(format!(
            "brute-force oracle refuses instances with more than {BRUTE_FORCE_LIMIT} detections"
        )));
    }
    let by_category = partition(dets, gts);
    let mut aps = Vec::new();
    for (category, inst) in &by_category {
        if inst.total_gt == 0 {
            continue;
        }
        // Global rank order, identical to the pipeline's.
        let mut ranked: Vec<(f64, ImageKey, usize)> = Vec::new();
        for (image, (dets, _)) in &inst.images {
            for (i, d) in dets.iter().enumerate() {
                ranked.push((d.confidence, image.clone(), i));
            }
        }
        ranked.sort_by(|a, b| {
            b.0.partial_cmp(&a.0)
                .unwrap()
                .then_with(|| a.1.cmp(&b.1))
                .then_with(|| a.2.cmp(&b.2))
        });

        let total_gt = inst.total_gt;
        let mut points = Vec::new();
        for k in 1..=ranked.len() {
            let prefix: BTreeSet<(ImageKey, usize)> = ranked[..k]
                .iter()
                .map(|(_, img, i)| (img.clone(), *i))
                .collect();
            let mut tp = 0usize;
            for (image, (img_dets, img_gts)) in &inst.images {
                let kept: Vec<Detection> = img_dets
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| prefix.contains(&(image.clone(), *i)))
                    .map(|(_, d)| (*d).clone())
                    .collect();
                let owned_gts: Vec<GroundTruth> = img_gts.iter().map(|g| (*g).clone()).collect();
                tp += match_detections(&kept, &owned_gts, threshold)?.tp();
            }
            points.push(PRPoint {
                recall: tp as f64 / total_gt as f64,
                precision: tp as f64 / k as f64,
            });
        }
        let curve = PRCurve { category: *category, iou_threshold: threshold, points };
        aps.push(average_precision(&curve, interp));
    }
    mean_ap(&aps)
}

/// Everything the eval command reports for one prediction set.
#[derive(Debug, Clone)]
pub struct EvalReport {
    pub map50: f64,
    pub map5095: f64,
    /// (threshold, mAP) over the grid.
    pub per_threshold: Vec<(f64, f64)>,
    pub categories: Vec<CategoryReport>,
    /// No-ground-truth categories excluded from every mean.
    pub skipped: Vec<u32>,
    pub conf_cutoff: f64,
}

/// Per-category block: AP across the grid plus operating-point counts at
/// IoU 0.5 with confidence at or above the cutoff.
#[derive(Debug, Clone)]
pub struct CategoryReport {
    pub category: u32,
    pub gt_count: usize,
    pub ap50: f64,
    pub ap5095: f64,
    pub precision: f64,
    pub recall: f64,
    pub tp: usize,
    pub fp: usize,
    pub fn_count: usize,
}

/// Build the full report: grid of mAPs, per-category APs, and P/R/counts
/// at the confidence cutoff.
pub fn evaluate(
    dets: &[Detection],
    gts: &[GroundTruth],
    interp: ApInterp,
    conf_cutoff: f64,
) -> Result<EvalReport> {
    let thresholds = iou_thresholds();
    let mut per_threshold = Vec::new();
    let mut per_category_aps: BTreeMap<u32, Vec<f64>> = BTreeMap::new();
    let mut skipped = Vec::new();
    for (i, t) in thresholds.iter().enumerate() {
        let eval = evaluate_at(dets, gts, *t, interp)?;
        per_threshold.push((*t, eval.map));
        if i == 0 {
            skipped = eval.skipped.clone();
        }
        for (c, ap) in eval.per_category {
            per_category_aps.entry(c).or_default().push(ap);
        }
    }
    let map50 = per_threshold[0].1;
    let map5095 = per_threshold.iter().map(|(_, m)| m).sum::<f64>() / per_threshold.len() as f64;

    // Operating point: IoU 0.5, confidence >= cutoff.
    let confident: Vec<Detection> = dets
        .iter()
        .filter(|d| d.confidence >= conf_cutoff)
        .cloned()
        .collect();
    let by_category = partition(&confident, gts);
    let mut categories = Vec::new();
    for (category, inst) in &by_category {
        if inst.total_gt == 0 {
            continue;
        }
        let mut tp = 0usize;
        let mut fp = 0usize;
        let mut fn_count = 0usize;
        for (_, (img_dets, img_gts)) in &inst.images {
            let owned_dets: Vec<Detection> = img_dets.iter().map(|d| (*d).clone()).collect();
            let owned_gts: Vec<GroundTruth> = img_gts.iter().map(|g| (*g).clone()).collect();
            let outcome = match_detections(&owned_dets, &owned_gts, 0.5)?;
            tp += outcome.tp();
            fp += outcome.fp();
            fn_count += outcome.fn_count();
        }
        let precision = if tp + fp > 0 { tp as f64 / (tp + fp) as f64 } else { 0.0 };
        let recall = if tp + fn_count > 0 { tp as f64 / (tp + fn_count) as f64 } else { 0.0 };
        let aps = &per_category_aps[category];
        categories.push(CategoryReport {
            category: *category,
            gt_count: inst.total_gt,
            ap50: aps[0],
            ap5095: aps.iter().sum::<f64>() / aps.len() as f64,
            precision,
            recall,
            tp,
            fp,
            fn_count,
        });
    }
    Ok(EvalReport { map50, map5095, per_threshold, categories, skipped, conf_cutoff })
}

impl EvalReport {
    /// Machine-readable block: stable field order, 6 decimals.
    pub fn render_key_values(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("map50={:.6}\n", self.map50));
        out.push_str(&format!("map5095={:.6}\n", self.map5095));
        for (t, m) in &self.per_threshold {
            out.push_str(&format!("threshold.{t:.2}.map={m:.6}\n"));
        }
        for c in &self.categories {
            let id = c.category;
            out.push_str(&format!("category.{id}.gt={}\n", c.gt_count));
            out.push_str(&format!("category.{id}.ap50={:.6}\n", c.ap50));
            out.push_str(&format!("category.{id}.ap5095={:.6}\n", c.ap5095));
            out.push_str(&format!("category.{id}.precision={:.6}\n", c.precision));
            out.push_str(&format!("category.{id}.recall={:.6}\n", c.recall));
            out.push_str(&format!("category.{id}.tp={}\n", c.tp));
            out.push_str(&format!("category.{id}.fp={}\n", c.fp));
            out.push_str(&format!("category.{id}.fn={}\n", c.fn_count));
        }
        out.push_str(&format!("conf_cutoff={:.6}\n", self.conf_cutoff));
        let skipped: Vec<String> = self.skipped.iter().map(|c| c.to_string()).collect();
        out.push_str(&format!("skipped_no_ground_truth={}\n", skipped.join(",")));
        out
    }
}

/// One comparison row: a model/arm name and its two headline numbers.
#[derive(Debug, Clone)]
pub struct TableRow {
    pub name: String,
    pub map50: Option<f64>,
    pub map5095: Option<f64>,
    pub error: Option<String>,
}

/// The two-column comparison table, 4 decimals per value; failed rows
/// carry their error message instead of numbers.
pub fn render_table(rows: &[TableRow]) -> String {
    let mut out = String::from("Models | mAP 0.5 | mAP 0.5:0.95\n");
    for row in rows {
        match (&row.error, row.map50, row.map5095) {
            (None, Some(a), Some(b)) => {
                out.push_str(&format!("{} | {:.4} | {:.4}\n", row.name, a, b));
            }
            _ => {
                let msg = row.error.as_deref().unwrap_or("missing values");
                out.push_str(&format!("{} | error: {msg}\n", row.name));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn det(image: &str, cat: u32, b: BBox, conf: f64) -> Detection {
        Detection::new(image, cat, b, conf, CoordSpace::Pixel).unwrap()
    }

    fn gt(image: &str, cat: u32, b: BBox) -> GroundTruth {
        GroundTruth { image: image.into(), category: cat, bbox: b, space: CoordSpace::Pixel }
    }

    fn unit_at(x: f64, y: f64) -> BBox {
        BBox::new(x, y, x + 10.0, y + 10.0)
    }

    #[test]
    fn perfect_detections_all_tp() {
        let gts = vec![gt("a", 0, unit_at(0.0, 0.0)), gt("a", 0, unit_at(20.0, 0.0))];
        let dets = vec![
            det("a", 0, unit_at(0.0, 0.0), 1.0),
            det("a", 0, unit_at(20.0, 0.0), 1.0),
        ];
        let m = match_detections(&dets, &gts, 0.5).unwrap();
        assert_eq!(m.tp(), 2);
        assert_eq!(m.fp(), 0);
        assert_eq!(m.fn_count(), 0);
    }

    #[test]
    fn no_detections_all_fn() {
        let gts = vec![gt("a", 0, unit_at(0.0, 0.0)), gt("a", 0, unit_at(20.0, 0.0))];
        let m = match_detections(&[], &gts, 0.5).unwrap();
        assert_eq!(m.fn_count(), 2);
    }

    #[test]
    fn higher_confidence_claims_the_ground_truth() {
        let gts = vec![gt("a", 0, unit_at(0.0, 0.0))];
        let dets = vec![
            det("a", 0, unit_at(1.0, 0.0), 0.8),
            det("a", 0, unit_at(0.0, 0.0), 0.9),
        ];
        let m = match_detections(&dets, &gts, 0.5).unwrap();
        // Input index 1 has higher confidence and wins; index 0 is FP.
        assert_eq!(m.det_is_tp, vec![false, true]);
    }

    #[test]
    fn confidence_tie_breaks_by_input_index() {
        let gts = vec![gt("a", 0, unit_at(0.0, 0.0))];
        let dets = vec![
            det("a", 0, unit_at(0.0, 0.0), 0.5),
            det("a", 0, unit_at(0.0, 0.0), 0.5),
        ];
        let m = match_detections(&dets, &gts, 0.5).unwrap();
        assert_eq!(m.det_is_tp, vec![true, false]);
    }

    #[test]
    fn mixed_spaces_rejected() {
        let gts = vec![GroundTruth {
            image: "a".into(),
            category: 0,
            bbox: unit_at(0.0, 0.0),
            space: CoordSpace::Normalized,
        }];
        let dets = vec![det("a", 0, unit_at(0.0, 0.0), 1.0)];
        assert!(match_detections(&dets, &gts, 0.5).is_err());
    }

    #[test]
    fn pr_points_all_tp() {
        let c = pr_curve(&[true, true, true], 3, 0, 0.5).unwrap();
        let expect = [(1.0 / 3.0, 1.0), (2.0 / 3.0, 1.0), (1.0, 1.0)];
        for (p, (r, pr)) in c.points.iter().zip(expect) {
            assert_eq!((p.recall, p.precision), (r, pr));
        }
    }

    #[test]
    fn pr_points_tp_then_fp() {
        let c = pr_curve(&[true, false], 1, 0, 0.5).unwrap();
        assert_eq!(c.points[0], PRPoint { recall: 1.0, precision: 1.0 });
        assert_eq!(c.points[1], PRPoint { recall: 1.0, precision: 0.5 });
    }

    #[test]
    fn zero_ground_truth_is_an_error() {
        assert!(pr_curve(&[true], 0, 3, 0.5).is_err());
    }

    #[test]
    fn perfect_ranking_ap_is_one() {
        let c = pr_curve(&[true, true], 2, 0, 0.5).unwrap();
        assert_eq!(average_precision(&c, ApInterp::All), 1.0);
        assert_eq!(average_precision(&c, ApInterp::ElevenPoint), 1.0);
        assert_eq!(average_precision(&c, ApInterp::HundredOnePoint), 1.0);
    }

    #[test]
    fn zero_tp_ap_is_zero() {
        let c = pr_curve(&[false, false], 2, 0, 0.5).unwrap();
        assert_eq!(average_precision(&c, ApInterp::All), 0.0);
    }

    #[test]
    fn envelope_integrates_late_tp() {
        // FP then TP over one gt: points (0,0), (0.5... wait recall
        // reaches 1 at the second detection: (0,0), (1, 0.5); envelope
        // area = 1 * 0.5.
        let c = pr_curve(&[false, true], 1, 0, 0.5).unwrap();
        assert_eq!(average_precision(&c, ApInterp::All), 0.5);
    }

    #[test]
    fn mean_ap_basics() {
        assert_eq!(mean_ap(&[1.0, 1.0]).unwrap(), 1.0);
        assert_eq!(mean_ap(&[1.0, 0.0]).unwrap(), 0.5);
        assert!(mean_ap(&[]).is_err());
    }

    #[test]
    fn threshold_grid_is_exact() {
        let t = iou_thresholds();
        assert_eq!(t.len(), 10);
        assert_eq!(t[0], 0.5);
        assert_eq!(t[2], 0.6);
        assert_eq!(t[9], 0.95);
    }

    #[test]
    fn perfect_predictions_score_one_everywhere() {
        let gts = vec![gt("a", 0, unit_at(0.0, 0.0)), gt("b", 1, unit_at(5.0, 5.0))];
        let dets = vec![
            det("a", 0, unit_at(0.0, 0.0), 1.0),
            det("b", 1, unit_at(5.0, 5.0), 1.0),
        ];
        let (m50, m5095) = map_range(&dets, &gts, ApInterp::All).unwrap();
        assert_eq!(m50, 1.0);
        assert_eq!(m5095, 1.0);
    }

    #[test]
    fn empty_detections_score_zero() {
        let gts = vec![gt("a", 0, unit_at(0.0, 0.0))];
        let (m50, m5095) = map_range(&[], &gts, ApInterp::All).unwrap();
        assert_eq!((m50, m5095), (0.0, 0.0));
    }

    /// Same-size boxes shifted by a quarter of their side have IoU
    /// exactly (s - s/4) * s / (2 s^2 - (s - s/4) * s) = 3/5, which f64
    /// rounds bit-identically to the 0.60 grid threshold.
    fn iou_06_pair(x: f64, y: f64) -> (BBox, BBox) {
        let side = 8.0;
        let shift = 2.0;
        (
            BBox::new(x, y, x + side, y + side),
            BBox::new(x + shift, y, x + shift + side, y + side),
        )
    }

    #[test]
    fn constructed_iou_point_six_fixture() {
        let mut gts = Vec::new();
        let mut dets = Vec::new();
        for (i, (gx, gy)) in [(0.0, 0.0), (20.0, 0.0), (0.0, 20.0)].iter().enumerate() {
            let (g, d) = iou_06_pair(*gx, *gy);
            gts.push(gt("img", i as u32 % 2, g));
            dets.push(det("img", i as u32 % 2, d, 0.9));
        }
        assert_eq!(iou(&gts[0].bbox, &dets[0].bbox), 0.6);
        let (m50, m5095) = map_range(&dets, &gts, ApInterp::All).unwrap();
        assert_eq!(m50, 1.0);
        assert!((m5095 - 0.3).abs() < 1e-12);
    }

    #[test]
    fn high_threshold_on_coarse_boxes_gives_zero_from_both_paths() {
        let gts = vec![gt("a", 0, unit_at(0.0, 0.0))];
        let dets = vec![det("a", 0, BBox::new(0.0, 0.0, 10.0, 8.0), 0.9)];
        let pipeline = map_at(&dets, &gts, 0.95, ApInterp::All).unwrap();
        let oracle = brute_force_ap(&dets, &gts, 0.95, ApInterp::All).unwrap();
        assert_eq!(pipeline, 0.0);
        assert_eq!(oracle, 0.0);
    }

    #[test]
    fn brute_force_refuses_oversize() {
        let gts = vec![gt("a", 0, unit_at(0.0, 0.0))];
        let dets: Vec<Detection> = (0..51)
            .map(|i| det("a", 0, unit_at(0.0, 0.0), (i as f64) / 100.0))
            .collect();
        assert!(brute_force_ap(&dets, &gts, 0.5, ApInterp::All).is_err());
    }

    #[test]
    fn duplicate_tp_detection_adds_fp_and_never_helps() {
        let gts = vec![gt("a", 0, unit_at(0.0, 0.0)), gt("a", 0, unit_at(20.0, 0.0))];
        let dets = vec![
            det("a", 0, unit_at(0.0, 0.0), 0.9),
            det("a", 0, unit_at(20.0, 0.0), 0.7),
        ];
        let base = map_at(&dets, &gts, 0.5, ApInterp::All).unwrap();
        let mut with_dup = dets.clone();
        with_dup.push(det("a", 0, unit_at(0.0, 0.0), 0.9));
        let out = evaluate_at(&with_dup, &gts, 0.5, ApInterp::All).unwrap();
        assert!(out.map <= base + 1e-12);
    }

    #[test]
    fn report_renders_stable_fields() {
        let gts = vec![gt("a", 0, unit_at(0.0, 0.0))];
        let dets = vec![det("a", 0, unit_at(0.0, 0.0), 1.0)];
        let report = evaluate(&dets, &gts, ApInterp::All, 0.25).unwrap();
        let kv = report.render_key_values();
        assert!(kv.starts_with("map50=1.000000\nmap5095=1.000000\n"));
        assert!(kv.contains("category.0.tp=1\n"));
        assert!(kv.contains("skipped_no_ground_truth=\n"));
        let table = render_table(&[TableRow {
            name: "fixtureA".into(),
            map50: Some(1.0),
            map5095: Some(1.0),
            error: None,
        }]);
        assert_eq!(table, "Models | mAP 0.5 | mAP 0.5:0.95\nfixtureA | 1.0000 | 1.0000\n");
    }

    #[test]
    fn no_ground_truth_category_is_skipped_not_averaged() {
        let gts = vec![gt("a", 0, unit_at(0.0, 0.0))];
        let dets = vec![
            det("a", 0, unit_at(0.0, 0.0), 1.0),
            det("a", 7, unit_at(0.0, 0.0), 1.0),
        ];
        let out = evaluate_at(&dets, &gts, 0.5, ApInterp::All).unwrap();
        assert_eq!(out.map, 1.0);
        assert_eq!(out.skipped, vec![7]);
    }
}
