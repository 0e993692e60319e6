//! Numerical loss kernels: sigmoid cross-entropy over logits, focal loss,
//! quality focal loss, label smoothing, and their analytic gradients, plus
//! a central-difference checker used to verify every gradient.
//!
//! Conventions at domain endpoints: `0 * log 0 = 0` and `0^0 = 1`, so the
//! `beta = 0` reduction of quality focal loss and its `sigma = y` zeros
//! hold exactly.

use crate::error::{Error, Result};

/// Batched inputs for [`bce_with_logits`]: row-major `[batch, classes]`
/// arrays of logits, targets and per-sample weights, plus one positive
/// class weight per class.
#[derive(Debug, Clone)]
pub struct BCEInputs {
    logits: Vec<f64>,
    targets: Vec<f64>,
    sample_weights: Vec<f64>,
    positive_class_weight: Vec<f64>,
    batch: usize,
    classes: usize,
}

impl BCEInputs {
    pub fn new(
        logits: Vec<f64>,
        targets: Vec<f64>,
        sample_weights: Vec<f64>,
        positive_class_weight: Vec<f64>,
        batch: usize,
        classes: usize,
    ) -> Result<Self> {
        let n = batch * classes;
        if logits.len() != n || targets.len() != n || sample_weights.len() != n {
            return Err(Error::invalid(format!(
                "shape mismatch: expected {batch}x{classes}={n} elements, got logits={}, targets={}, weights={}",
                logits.len(),
                targets.len(),
                sample_weights.len()
            )));
        }
        if positive_class_weight.len() != classes {
            return Err(Error::invalid(format!(
                "positive_class_weight has {} entries, expected {classes}",
                positive_class_weight.len()
            )));
        }
        if let Some(t) = targets.iter().find(|t| !(0.0..=1.0).contains(*t)) {
            return Err(Error::invalid(format!("target {t} outside [0, 1]")));
        }
        if let Some(w) = sample_weights.iter().find(|w| **w < 0.0) {
            return Err(Error::invalid(format!("negative sample weight {w}")));
        }
        if let Some(p) = positive_class_weight.iter().find(|p| **p <= 0.0) {
            return Err(Error::invalid(format!(
                "positive class weight {p} must be > 0"
            )));
        }
        Ok(Self {
            logits,
            targets,
            sample_weights,
            positive_class_weight,
            batch,
            classes,
        })
    }

    /// Single scalar element, the shape the CLI debug surface uses.
    pub fn scalar(logit: f64, target: f64, weight: f64, pos_weight: f64) -> Result<Self> {
        Self::new(vec![logit], vec![target], vec![weight], vec![pos_weight], 1, 1)
    }

    pub fn len(&self) -> usize {
        self.batch * self.classes
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Reduction {
    None,
    #[default]
    Mean,
    Sum,
}

/// Per-element losses, or a scalar once a reduction is applied.
#[derive(Debug, Clone, PartialEq)]
pub enum LossValue {
    Elements(Vec<f64>),
    Scalar(f64),
}

impl LossValue {
    pub fn scalar(&self) -> Option<f64> {
        match self {
            LossValue::Scalar(v) => Some(*v),
            LossValue::Elements(_) => None,
        }
    }
}

fn softplus(t: f64) -> f64 {
    t.max(0.0) + (-t.abs()).exp().ln_1p()
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Sigmoid cross-entropy evaluated directly from logits:
/// `l = -w * [p_c * y * log(sigmoid(x)) + (1 - y) * log(1 - sigmoid(x))]`,
/// computed in softplus form so any finite logit yields a finite loss.
pub fn bce_with_logits(inputs: &BCEInputs, reduction: Reduction) -> Result<LossValue> {
    let elements: Vec<f64> = (0..inputs.len())
        .map(|i| {
            let x = inputs.logits[i];
            let y = inputs.targets[i];
            let w = inputs.sample_weights[i];
            let pc = inputs.positive_class_weight[i % inputs.classes];
            w * (pc * y * softplus(-x) + (1.0 - y) * softplus(x))
        })
        .collect();
    Ok(reduce(elements, reduction))
}

/// Per-element derivative of [`bce_with_logits`] with respect to each
/// logit (reduction `None`; divide by the element count for `Mean`).
pub fn bce_with_logits_gradient(inputs: &BCEInputs) -> Vec<f64> {
    (0..inputs.len())
        .map(|i| {
            let s = sigmoid(inputs.logits[i]);
            let y = inputs.targets[i];
            let w = inputs.sample_weights[i];
            let pc = inputs.positive_class_weight[i % inputs.classes];
            w * (pc * y * (s - 1.0) + (1.0 - y) * s)
        })
        .collect()
}

fn reduce(elements: Vec<f64>, reduction: Reduction) -> LossValue {
    match reduction {
        Reduction::None => LossValue::Elements(elements),
        Reduction::Sum => LossValue::Scalar(elements.iter().sum()),
        Reduction::Mean => {
            let n = elements.len().max(1) as f64;
            LossValue::Scalar(elements.iter().sum::<f64>() / n)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FocalParams {
    pub alpha: f64,
    pub gamma: f64,
}

impl FocalParams {
    pub fn new(alpha: f64, gamma: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::invalid(format!("focal alpha {alpha} outside [0, 1]")));
        }
        if gamma < 0.0 {
            return Err(Error::invalid(format!("focal gamma {gamma} must be >= 0")));
        }
        Ok(Self { alpha, gamma })
    }
}

fn focal_pt(p: f64, y_positive: bool) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::invalid(format!("probability {p} outside [0, 1]")));
    }
    let pt = if y_positive { p } else { 1.0 - p };
    if pt <= 0.0 {
        return Err(Error::domain(
            "focal loss is infinite at p_t = 0; p must satisfy p > 0 for y = 1 and p < 1 for y = 0",
        ));
    }
    Ok(pt)
}

/// Focal loss `-alpha * (1 - p_t)^gamma * log(p_t)` with
/// `p_t = p` for a positive label and `1 - p` otherwise.
pub fn focal_loss(p: f64, y_positive: bool, params: &FocalParams) -> Result<f64> {
    let pt = focal_pt(p, y_positive)?;
    Ok(-params.alpha * (1.0 - pt).powf(params.gamma) * pt.ln())
}

/// Derivative of [`focal_loss`] with respect to `p`.
pub fn focal_loss_gradient(p: f64, y_positive: bool, params: &FocalParams) -> Result<f64> {
    let pt = focal_pt(p, y_positive)?;
    let one_minus = 1.0 - pt;
    // gamma * (1-pt)^(gamma-1) needs guarding where the power is singular
    // but its coefficient vanishes.
    let modulation = if params.gamma == 0.0 || pt == 1.0 {
        0.0
    } else {
        params.gamma * one_minus.powf(params.gamma - 1.0) * pt.ln()
    };
    let d_pt = params.alpha * (modulation - one_minus.powf(params.gamma) / pt);
    Ok(if y_positive { d_pt } else { -d_pt })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QFLParams {
    pub beta: f64,
}

impl Default for QFLParams {
    fn default() -> Self {
        Self { beta: 2.0 }
    }
}

impl QFLParams {
    pub fn new(beta: f64) -> Result<Self> {
        if beta < 0.0 {
            return Err(Error::invalid(format!("qfl beta {beta} must be >= 0")));
        }
        Ok(Self { beta })
    }
}

fn qfl_check_domain(sigma: f64, y: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&sigma) || !(0.0..=1.0).contains(&y) {
        return Err(Error::invalid(format!(
            "qfl inputs sigma={sigma}, y={y} must lie in [0, 1]"
        )));
    }
    // log(0) with a nonzero coefficient is the only true singularity.
    if sigma == 0.0 && y > 0.0 {
        return Err(Error::domain("qfl: log(sigma) diverges at sigma = 0 with y > 0"));
    }
    if sigma == 1.0 && y < 1.0 {
        return Err(Error::domain("qfl: log(1 - sigma) diverges at sigma = 1 with y < 1"));
    }
    Ok(())
}

/// Quality focal loss
/// `-|y - sigma|^beta * ((1 - y) * log(1 - sigma) + y * log(sigma))`
/// for a continuous quality target `y` in `[0, 1]`.
pub fn quality_focal_loss(sigma: f64, y: f64, params: &QFLParams) -> Result<f64> {
    qfl_check_domain(sigma, y)?;
    let modulator = (y - sigma).abs().powf(params.beta);
    if modulator == 0.0 {
        return Ok(0.0);
    }
    Ok(modulator * qfl_cross_entropy(sigma, y))
}

fn qfl_cross_entropy(sigma: f64, y: f64) -> f64 {
    let pos = if y == 0.0 { 0.0 } else { y * sigma.ln() };
    let neg = if y == 1.0 { 0.0 } else { (1.0 - y) * (1.0 - sigma).ln() };
    -(pos + neg)
}

/// Derivative of [`quality_focal_loss`] with respect to `sigma`.
///
/// At the kink `sigma == y` the subgradient 0 is returned.
pub fn quality_focal_loss_gradient(sigma: f64, y: f64, params: &QFLParams) -> Result<f64> {
    qfl_check_domain(sigma, y)?;
    let diff = y - sigma;
    if diff == 0.0 {
        return Ok(0.0);
    }
    let ce = qfl_cross_entropy(sigma, y);
    let modulator = diff.abs().powf(params.beta);
    let d_modulator = if params.beta == 0.0 {
        0.0
    } else {
        -params.beta * diff.abs().powf(params.beta - 1.0) * diff.signum()
    };
    let d_ce = (1.0 - y) / (1.0 - sigma) - y / sigma;
    Ok(d_modulator * ce + modulator * d_ce)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoothingParams {
    pub label_smoothing: f64,
}

impl Default for SmoothingParams {
    fn default() -> Self {
        Self { label_smoothing: 0.1 }
    }
}

impl SmoothingParams {
    pub fn new(label_smoothing: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&label_smoothing) {
            return Err(Error::invalid(format!(
                "label_smoothing {label_smoothing} outside [0, 1)"
            )));
        }
        Ok(Self { label_smoothing })
    }
}

/// Shrink a target toward 0.5:
/// `y_true * (1.0 - label_smoothing) + 0.5 * label_smoothing`.
///
/// Evaluated as `y + ls * (0.5 - y)` (algebraically identical) so that the
/// endpoints land exactly on `1 - ls/2` and `ls/2` in floating point and
/// `ls = 0` is a bitwise identity.
pub fn smooth_labels(y_true: f64, params: &SmoothingParams) -> f64 {
    y_true + params.label_smoothing * (0.5 - y_true)
}

/// Derivative of [`smooth_labels`] with respect to `y_true`.
pub fn smooth_labels_gradient(params: &SmoothingParams) -> f64 {
    1.0 - params.label_smoothing
}

/// Central-difference gradient of `f` at `point`:
/// `(f(x + eps e_i) - f(x - eps e_i)) / (2 eps)` per coordinate.
///
/// Fails naming the coordinate if an evaluation is non-finite.
pub fn finite_difference_gradient<F>(f: F, point: &[f64], eps: f64) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> f64,
{
    let mut grad = Vec::with_capacity(point.len());
    let mut probe = point.to_vec();
    for i in 0..point.len() {
        probe[i] = point[i] + eps;
        let hi = f(&probe);
        probe[i] = point[i] - eps;
        let lo = f(&probe);
        probe[i] = point[i];
        if !hi.is_finite() || !lo.is_finite() {
            return Err(Error::domain(format!(
                "non-finite evaluation while differencing coordinate {i}"
            )));
        }
        grad.push((hi - lo) / (2.0 * eps));
    }
    Ok(grad)
}
