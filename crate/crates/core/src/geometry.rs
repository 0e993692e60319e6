//! Axis-aligned bounding-box arithmetic.
//!
//! Everything downstream (mosaic composition, partial crops, matching,
//! losses) runs on the primitives in this module: IoU, the complete-IoU
//! decomposition, rectangle clipping, and affine transforms with hull
//! semantics for boxes.
//!
//! Coordinate convention: origin top-left, x rightward, y downward,
//! matching image raster order. A box may be tagged as pixel-space or
//! normalized-space by its context; no operation mixes the two.

/// Height guard for aspect ratios of degenerate (clipped-to-nothing) boxes.
const ASPECT_EPS: f64 = 1e-9;

/// Axis-aligned rectangle `[x_min, x_max] x [y_min, y_max]`.
///
/// Invariant: `x_min <= x_max` and `y_min <= y_max`. Zero-area boxes are
/// permitted as degenerate values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BBox {
    pub x_min: f64,
    pub y_min: f64,
    pub x_max: f64,
    pub y_max: f64,
}

impl BBox {
    pub fn new(x_min: f64, y_min: f64, x_max: f64, y_max: f64) -> Self {
        debug_assert!(x_min <= x_max && y_min <= y_max, "inverted box");
        Self {
            x_min,
            y_min,
            x_max,
            y_max,
        }
    }

    /// Box from center/size form (the parametrization used by label files).
    pub fn from_cxcywh(cx: f64, cy: f64, w: f64, h: f64) -> Self {
        Self::new(cx - w / 2.0, cy - h / 2.0, cx + w / 2.0, cy + h / 2.0)
    }

    pub fn to_cxcywh(&self) -> (f64, f64, f64, f64) {
        (
            (self.x_min + self.x_max) / 2.0,
            (self.y_min + self.y_max) / 2.0,
            self.width(),
            self.height(),
        )
    }

    pub fn width(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn height(&self) -> f64 {
        self.y_max - self.y_min
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn center(&self) -> (f64, f64) {
        (
            (self.x_min + self.x_max) / 2.0,
            (self.y_min + self.y_max) / 2.0,
        )
    }

    pub fn is_degenerate(&self) -> bool {
        self.width() <= 0.0 || self.height() <= 0.0
    }

    /// Scale a normalized-space box up to pixel space.
    pub fn to_pixels(&self, img_w: f64, img_h: f64) -> Self {
        Self::new(
            self.x_min * img_w,
            self.y_min * img_h,
            self.x_max * img_w,
            self.y_max * img_h,
        )
    }

    /// Scale a pixel-space box down to normalized space.
    pub fn to_normalized(&self, img_w: f64, img_h: f64) -> Self {
        Self::new(
            self.x_min / img_w,
            self.y_min / img_h,
            self.x_max / img_w,
            self.y_max / img_h,
        )
    }

    /// Translate by `(dx, dy)`.
    pub fn shifted(&self, dx: f64, dy: f64) -> Self {
        Self::new(
            self.x_min + dx,
            self.y_min + dy,
            self.x_max + dx,
            self.y_max + dy,
        )
    }
}

/// Intersection-over-union of two boxes in the same coordinate space.
///
/// Returns 0 when the union has zero area (two degenerate boxes).
pub fn iou(a: &BBox, b: &BBox) -> f64 {
    let inter = intersection_area(a, b);
    let union = a.area() + b.area() - inter;
    if union <= 0.0 {
        return 0.0;
    }
    inter / union
}

fn intersection_area(a: &BBox, b: &BBox) -> f64 {
    let iw = a.x_max.min(b.x_max) - a.x_min.max(b.x_min);
    let ih = a.y_max.min(b.y_max) - a.y_min.max(b.y_min);
    if iw > 0.0 && ih > 0.0 {
        iw * ih
    } else {
        0.0
    }
}

/// Intersection rectangle of `b` with `viewport`, or `None` when the
/// intersection has zero area.
pub fn clip(b: &BBox, viewport: &BBox) -> Option<BBox> {
    let x_min = b.x_min.max(viewport.x_min);
    let y_min = b.y_min.max(viewport.y_min);
    let x_max = b.x_max.min(viewport.x_max);
    let y_max = b.y_max.min(viewport.y_max);
    if x_max > x_min && y_max > y_min {
        Some(BBox::new(x_min, y_min, x_max, y_max))
    } else {
        None
    }
}

/// The three-part complete-IoU decomposition of a predicted box against a
/// ground-truth box: overlap, normalized center distance, and aspect-ratio
/// consistency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CIoUTerms {
    pub iou: f64,
    pub center_distance_sq: f64,
    pub enclosing_diag_sq: f64,
    pub v: f64,
    pub alpha_tradeoff: f64,
}

/// Complete-IoU terms for `b` against `gt`, both in pixel space.
///
/// `gt` must have positive width and height. Aspect ratios guard the
/// height at `1e-9` so degenerate predicted boxes (after aggressive
/// clipping) never divide by zero.
pub fn ciou_terms(b: &BBox, gt: &BBox) -> CIoUTerms {
    let overlap = iou(b, gt);

    let (bcx, bcy) = b.center();
    let (gcx, gcy) = gt.center();
    let center_distance_sq = (bcx - gcx).powi(2) + (bcy - gcy).powi(2);

    let enc_w = b.x_max.max(gt.x_max) - b.x_min.min(gt.x_min);
    let enc_h = b.y_max.max(gt.y_max) - b.y_min.min(gt.y_min);
    let enclosing_diag_sq = enc_w * enc_w + enc_h * enc_h;

    let v = aspect_term(b.width(), b.height(), gt.width(), gt.height());

    let denom = (1.0 - overlap) + v;
    let alpha_tradeoff = if denom > 0.0 { v / denom } else { 0.0 };

    CIoUTerms {
        iou: overlap,
        center_distance_sq,
        enclosing_diag_sq,
        v,
        alpha_tradeoff,
    }
}

fn aspect_term(w: f64, h: f64, w_gt: f64, h_gt: f64) -> f64 {
    let four_over_pi_sq = 4.0 / (std::f64::consts::PI * std::f64::consts::PI);
    let delta = (w_gt / h_gt.max(ASPECT_EPS)).atan() - (w / h.max(ASPECT_EPS)).atan();
    four_over_pi_sq * delta * delta
}

/// Complete-IoU localization loss:
/// `(1 - IoU) + d^2/c^2 + alpha * v`.
///
/// Zero exactly when `b == gt` (for positive-area boxes).
pub fn ciou_loss(b: &BBox, gt: &BBox) -> f64 {
    let t = ciou_terms(b, gt);
    (1.0 - t.iou) + t.center_distance_sq / t.enclosing_diag_sq + t.alpha_tradeoff * t.v
}

/// Analytic gradient of [`ciou_loss`] with respect to
/// `(b.x_min, b.y_min, b.x_max, b.y_max)`, differentiating the full
/// expression including the `alpha = v / ((1 - IoU) + v)` trade-off.
///
/// Valid away from non-smooth points (coordinate ties between `b` and the
/// enclosing/intersection boundaries, and the identity `b == gt`).
pub fn ciou_loss_gradient(b: &BBox, gt: &BBox) -> [f64; 4] {
    let w = b.width();
    let h = b.height();
    let area_b = b.area();
    let area_g = gt.area();

    // Intersection and its partials.
    let iw = b.x_max.min(gt.x_max) - b.x_min.max(gt.x_min);
    let ih = b.y_max.min(gt.y_max) - b.y_min.max(gt.y_min);
    let overlapping = iw > 0.0 && ih > 0.0;
    let inter = if overlapping { iw * ih } else { 0.0 };
    let union = area_b + area_g - inter;

    // d/d(coord) order: [x_min, y_min, x_max, y_max]
    let d_area_b = [-h, -w, h, w];
    let mut d_inter = [0.0; 4];
    if overlapping {
        if b.x_min > gt.x_min {
            d_inter[0] = -ih;
        }
        if b.y_min > gt.y_min {
            d_inter[1] = -iw;
        }
        if b.x_max < gt.x_max {
            d_inter[2] = ih;
        }
        if b.y_max < gt.y_max {
            d_inter[3] = iw;
        }
    }

    let iou_val = if union > 0.0 { inter / union } else { 0.0 };
    let mut d_iou = [0.0; 4];
    for i in 0..4 {
        let d_union = d_area_b[i] - d_inter[i];
        d_iou[i] = (d_inter[i] * union - inter * d_union) / (union * union);
    }

    // Center-distance term.
    let (bcx, bcy) = b.center();
    let (gcx, gcy) = gt.center();
    let d2 = (bcx - gcx).powi(2) + (bcy - gcy).powi(2);
    let d_d2 = [bcx - gcx, bcy - gcy, bcx - gcx, bcy - gcy];

    let enc_w = b.x_max.max(gt.x_max) - b.x_min.min(gt.x_min);
    let enc_h = b.y_max.max(gt.y_max) - b.y_min.min(gt.y_min);
    let c2 = enc_w * enc_w + enc_h * enc_h;
    let mut d_c2 = [0.0; 4];
    if b.x_min < gt.x_min {
        d_c2[0] = -2.0 * enc_w;
    }
    if b.y_min < gt.y_min {
        d_c2[1] = -2.0 * enc_h;
    }
    if b.x_max > gt.x_max {
        d_c2[2] = 2.0 * enc_w;
    }
    if b.y_max > gt.y_max {
        d_c2[3] = 2.0 * enc_h;
    }

    let mut d_dist = [0.0; 4];
    for i in 0..4 {
        d_dist[i] = (d_d2[i] * c2 - d2 * d_c2[i]) / (c2 * c2);
    }

    // Aspect term v and the full alpha*v = v^2 / ((1 - iou) + v).
    let four_over_pi_sq = 4.0 / (std::f64::consts::PI * std::f64::consts::PI);
    let h_guarded = h.max(ASPECT_EPS);
    let delta = (gt.width() / gt.height().max(ASPECT_EPS)).atan() - (w / h_guarded).atan();
    let v = four_over_pi_sq * delta * delta;
    let dv_dw = -2.0 * four_over_pi_sq * delta * h_guarded / (h_guarded * h_guarded + w * w);
    let dv_dh = if h > ASPECT_EPS {
        2.0 * four_over_pi_sq * delta * w / (h_guarded * h_guarded + w * w)
    } else {
        0.0
    };
    let d_v = [-dv_dw, -dv_dh, dv_dw, dv_dh];

    let s = 1.0 - iou_val;
    let denom = s + v;
    let mut grad = [0.0; 4];
    for i in 0..4 {
        let d_alpha_v = if denom > 0.0 {
            (2.0 * v * d_v[i] * denom - v * v * (-d_iou[i] + d_v[i])) / (denom * denom)
        } else {
            0.0
        };
        grad[i] = -d_iou[i] + d_dist[i] + d_alpha_v;
    }
    grad
}

/// 2D affine transform: a 2x2 linear part plus a translation, acting on
/// pixel coordinates as `p' = M p + t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Affine2D {
    /// Row-major linear part `[[a, b], [c, d]]`.
    pub linear: [[f64; 2]; 2],
    pub translation: [f64; 2],
}

impl Affine2D {
    pub fn identity() -> Self {
        Self {
            linear: [[1.0, 0.0], [0.0, 1.0]],
            translation: [0.0, 0.0],
        }
    }

    pub fn translate(dx: f64, dy: f64) -> Self {
        Self {
            linear: [[1.0, 0.0], [0.0, 1.0]],
            translation: [dx, dy],
        }
    }

    pub fn scale(sx: f64, sy: f64) -> Self {
        Self {
            linear: [[sx, 0.0], [0.0, sy]],
            translation: [0.0, 0.0],
        }
    }

    /// Uniform scale followed by a translation.
    pub fn scale_then_translate(s: f64, dx: f64, dy: f64) -> Self {
        Self {
            linear: [[s, 0.0], [0.0, s]],
            translation: [dx, dy],
        }
    }

    /// Horizontal shear: `x' = x + k*y`.
    pub fn shear_h(k: f64) -> Self {
        Self {
            linear: [[1.0, k], [0.0, 1.0]],
            translation: [0.0, 0.0],
        }
    }

    /// Vertical shear: `y' = y + k*x`.
    pub fn shear_v(k: f64) -> Self {
        Self {
            linear: [[1.0, 0.0], [k, 1.0]],
            translation: [0.0, 0.0],
        }
    }

    /// Mirror x across a vertical axis at `width / 2`: `x' = width - x`.
    pub fn hflip(width: f64) -> Self {
        Self {
            linear: [[-1.0, 0.0], [0.0, 1.0]],
            translation: [width, 0.0],
        }
    }

    pub fn apply_point(&self, x: f64, y: f64) -> (f64, f64) {
        (
            self.linear[0][0] * x + self.linear[0][1] * y + self.translation[0],
            self.linear[1][0] * x + self.linear[1][1] * y + self.translation[1],
        )
    }

    /// `self` after `first`: `(self ∘ first)(p) = self(first(p))`.
    pub fn compose(&self, first: &Affine2D) -> Self {
        let a = &self.linear;
        let b = &first.linear;
        Self {
            linear: [
                [
                    a[0][0] * b[0][0] + a[0][1] * b[1][0],
                    a[0][0] * b[0][1] + a[0][1] * b[1][1],
                ],
                [
                    a[1][0] * b[0][0] + a[1][1] * b[1][0],
                    a[1][0] * b[0][1] + a[1][1] * b[1][1],
                ],
            ],
            translation: [
                a[0][0] * first.translation[0]
                    + a[0][1] * first.translation[1]
                    + self.translation[0],
                a[1][0] * first.translation[0]
                    + a[1][1] * first.translation[1]
                    + self.translation[1],
            ],
        }
    }

    /// Inverse transform. Panics if the linear part is singular.
    pub fn inverse(&self) -> Self {
        let [[a, b], [c, d]] = self.linear;
        let det = a * d - b * c;
        assert!(det.abs() > 1e-300, "singular affine transform");
        let inv = [[d / det, -b / det], [-c / det, a / det]];
        let tx = -(inv[0][0] * self.translation[0] + inv[0][1] * self.translation[1]);
        let ty = -(inv[1][0] * self.translation[0] + inv[1][1] * self.translation[1]);
        Self {
            linear: inv,
            translation: [tx, ty],
        }
    }
}

/// Image of a box under an affine transform: the axis-aligned hull of the
/// four transformed corners. Exact for scale/translate/flip, conservative
/// for shear.
pub fn affine_apply(b: &BBox, t: &Affine2D) -> BBox {
    let corners = [
        t.apply_point(b.x_min, b.y_min),
        t.apply_point(b.x_max, b.y_min),
        t.apply_point(b.x_min, b.y_max),
        t.apply_point(b.x_max, b.y_max),
    ];
    let mut x_min = f64::INFINITY;
    let mut y_min = f64::INFINITY;
    let mut x_max = f64::NEG_INFINITY;
    let mut y_max = f64::NEG_INFINITY;
    for (x, y) in corners {
        x_min = x_min.min(x);
        y_min = y_min.min(y);
        x_max = x_max.max(x);
        y_max = y_max.max(y);
    }
    BBox::new(x_min, y_min, x_max, y_max)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bx(x0: f64, y0: f64, x1: f64, y1: f64) -> BBox {
        BBox::new(x0, y0, x1, y1)
    }

    #[test]
    fn iou_identity() {
        let a = bx(0.0, 0.0, 2.0, 2.0);
        assert_eq!(iou(&a, &a), 1.0);
    }

    #[test]
    fn iou_disjoint() {
        let a = bx(0.0, 0.0, 1.0, 1.0);
        let b = bx(5.0, 5.0, 6.0, 6.0);
        assert_eq!(iou(&a, &b), 0.0);
    }

    #[test]
    fn iou_one_third() {
        // intersection 2, union 6
        let a = bx(0.0, 0.0, 2.0, 2.0);
        let b = bx(1.0, 0.0, 3.0, 2.0);
        assert!((iou(&a, &b) - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn iou_zero_area_pair() {
        let a = bx(1.0, 1.0, 1.0, 1.0);
        let b = bx(1.0, 1.0, 1.0, 1.0);
        assert_eq!(iou(&a, &b), 0.0);
    }

    #[test]
    fn ciou_terms_identity() {
        let a = bx(3.0, 4.0, 7.0, 9.0);
        let t = ciou_terms(&a, &a);
        assert_eq!(t.iou, 1.0);
        assert_eq!(t.center_distance_sq, 0.0);
        assert_eq!(t.v, 0.0);
        assert_eq!(t.alpha_tradeoff, 0.0);
        assert_eq!(ciou_loss(&a, &a), 0.0);
    }

    #[test]
    fn ciou_concentric_same_aspect() {
        let b = bx(1.0, 1.0, 3.0, 3.0);
        let gt = bx(0.0, 0.0, 4.0, 4.0);
        let t = ciou_terms(&b, &gt);
        assert_eq!(t.center_distance_sq, 0.0);
        assert_eq!(t.v, 0.0);
        assert!((t.iou - 0.25).abs() < 1e-15);
        assert!((ciou_loss(&b, &gt) - 0.75).abs() < 1e-15);
    }

    #[test]
    fn ciou_terms_generic_pair_matches_oracle() {
        // Frozen from a 50-digit evaluation of the closed forms.
        let b = bx(0.0, 0.0, 2.0, 4.0);
        let gt = bx(1.0, 1.0, 4.0, 3.0);
        let t = ciou_terms(&b, &gt);
        assert!((t.iou - 1.0 / 6.0).abs() < 1e-12);
        assert!((t.center_distance_sq - 2.25).abs() < 1e-12);
        assert!((t.enclosing_diag_sq - 32.0).abs() < 1e-12);
        assert!((t.v - 0.10922937819372633).abs() < 1e-12);
        assert!((t.alpha_tradeoff - 0.11588552873767117).abs() < 1e-12);
        assert!((ciou_loss(&b, &gt) - 0.9163039375790004).abs() < 1e-12);
    }

    #[test]
    fn ciou_degenerate_prediction_is_finite() {
        let b = bx(1.0, 1.0, 1.0, 1.0);
        let gt = bx(0.0, 0.0, 4.0, 4.0);
        let loss = ciou_loss(&b, &gt);
        assert!(loss.is_finite());
        assert!(loss >= 0.0);
    }

    #[test]
    fn clip_cases() {
        let v = bx(0.0, 0.0, 10.0, 10.0);
        let inside = bx(2.0, 2.0, 5.0, 5.0);
        assert_eq!(clip(&inside, &v), Some(inside));
        let outside = bx(20.0, 20.0, 30.0, 30.0);
        assert_eq!(clip(&outside, &v), None);
        let straddle = bx(-5.0, -5.0, 5.0, 5.0);
        assert_eq!(clip(&straddle, &v), Some(bx(0.0, 0.0, 5.0, 5.0)));
    }

    #[test]
    fn clip_is_idempotent() {
        let v = bx(0.0, 0.0, 10.0, 10.0);
        let b = bx(-3.0, 4.0, 12.0, 9.0);
        let once = clip(&b, &v).unwrap();
        let twice = clip(&once, &v).unwrap();
        assert_eq!(once, twice);
    }

    #[test]
    fn affine_identity_and_scale() {
        let b = bx(1.0, 1.0, 2.0, 2.0);
        assert_eq!(affine_apply(&b, &Affine2D::identity()), b);
        let scaled = affine_apply(&b, &Affine2D::scale(2.0, 2.0));
        assert_eq!(scaled, bx(2.0, 2.0, 4.0, 4.0));
    }

    #[test]
    fn affine_shear_hull() {
        // Corner transform: (0,0),(2,0),(1,2),(3,2) -> hull [0,0,3,2].
        let b = bx(0.0, 0.0, 2.0, 2.0);
        let sheared = affine_apply(&b, &Affine2D::shear_h(0.5));
        assert_eq!(sheared, bx(0.0, 0.0, 3.0, 2.0));
    }

    #[test]
    fn affine_compose_matches_iterated() {
        let b = bx(1.0, 2.0, 4.0, 6.0);
        let t1 = Affine2D::scale_then_translate(2.0, 3.0, -1.0);
        let t2 = Affine2D::scale_then_translate(0.5, 10.0, 5.0);
        let composed = affine_apply(&b, &t2.compose(&t1));
        let iterated = affine_apply(&affine_apply(&b, &t1), &t2);
        assert!((composed.x_min - iterated.x_min).abs() < 1e-12);
        assert!((composed.y_min - iterated.y_min).abs() < 1e-12);
        assert!((composed.x_max - iterated.x_max).abs() < 1e-12);
        assert!((composed.y_max - iterated.y_max).abs() < 1e-12);
    }

    #[test]
    fn affine_inverse_roundtrip() {
        let t = Affine2D::scale_then_translate(1.75, -4.0, 9.5);
        let (x, y) = t.inverse().compose(&t).apply_point(3.2, -7.1);
        assert!((x - 3.2).abs() < 1e-12);
        assert!((y - -7.1).abs() < 1e-12);
    }

    #[test]
    fn ciou_gradient_matches_finite_differences() {
        let b = bx(0.0, 0.0, 2.0, 4.0);
        let gt = bx(1.0, 1.0, 4.0, 3.0);
        let grad = ciou_loss_gradient(&b, &gt);
        let eps = 1e-6;
        let coords = [b.x_min, b.y_min, b.x_max, b.y_max];
        for i in 0..4 {
            let mut lo = coords;
            let mut hi = coords;
            lo[i] -= eps;
            hi[i] += eps;
            let f_lo = ciou_loss(&bx(lo[0], lo[1], lo[2], lo[3]), &gt);
            let f_hi = ciou_loss(&bx(hi[0], hi[1], hi[2], hi[3]), &gt);
            let fd = (f_hi - f_lo) / (2.0 * eps);
            let rel = (grad[i] - fd).abs() / fd.abs().max(1e-12);
            assert!(rel < 1e-6, "coord {i}: analytic {} vs fd {}", grad[i], fd);
        }
    }
}
