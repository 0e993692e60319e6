//! Run configuration shared by every pipeline stage: one flat key = value
//! grammar, documented defaults, and a canonical rendering that commands
//! echo into their output directories so runs can be audited and replayed.

use std::fmt;

use crate::error::{Error, Result};

/// How average precision integrates the precision-recall curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ApInterp {
    /// Exact area under the monotone precision envelope (all points).
    #[default]
    All,
    /// Pascal VOC 2007 style 11-point sampling.
    ElevenPoint,
    /// COCO style 101-point sampling.
    HundredOnePoint,
}

impl ApInterp {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "all" => Ok(Self::All),
            "11pt" => Ok(Self::ElevenPoint),
            "101pt" => Ok(Self::HundredOnePoint),
            other => Err(Error::invalid(format!(
                "ap_interp must be one of all|11pt|101pt, got {other:?}"
            ))),
        }
    }
}

impl fmt::Display for ApInterp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::All => "all",
            Self::ElevenPoint => "11pt",
            Self::HundredOnePoint => "101pt",
        })
    }
}

/// Pixel resampling used when rendering (box remapping is analytic and
/// never depends on this).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Resample {
    #[default]
    Bilinear,
    Nearest,
}

impl Resample {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "bilinear" => Ok(Self::Bilinear),
            "nearest" => Ok(Self::Nearest),
            other => Err(Error::invalid(format!(
                "resample must be bilinear|nearest, got {other:?}"
            ))),
        }
    }
}

impl fmt::Display for Resample {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Bilinear => "bilinear",
            Self::Nearest => "nearest",
        })
    }
}

/// Every tunable the pipeline exposes, with one documented default each.
/// Precedence when assembling a run: command-line flags, then a config
/// file, then these defaults.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    /// Master seed for every random draw. Default 42.
    pub seed: u64,
    /// Mosaic canvas width in pixels. Default 640.
    pub canvas_w: u32,
    /// Mosaic canvas height in pixels. Default 640.
    pub canvas_h: u32,
    /// Train fraction of the split. Default 0.7.
    pub train_ratio: f64,
    /// Validation fraction of the split. Default 0.2.
    pub val_ratio: f64,
    /// Test fraction of the split. Default 0.1.
    pub test_ratio: f64,
    /// Stratify the split per category. Default on.
    pub stratify: bool,
    /// Minimum surviving-area fraction for a clipped box. Default 0.25.
    pub min_visible: f64,
    /// Minimum surviving box side in pixels. Default 2.
    pub min_box_pixels: f64,
    /// Mosaic center lower bound as a fraction of canvas dims. Default 0.25.
    pub center_min_frac: f64,
    /// Mosaic center upper bound as a fraction of canvas dims. Default 0.75.
    pub center_max_frac: f64,
    /// Shear factor magnitude for the basic augmentations. Default 0.1.
    pub shear_magnitude: f64,
    /// AP integration mode. Default all.
    pub ap_interp: ApInterp,
    /// Emit mosaics during augment. Default on.
    pub mosaic: bool,
    /// Recycle mosaic leftovers one generation deep. Default off.
    pub recycle: bool,
    /// Weight mosaic source draws by contained-box area. Default off.
    pub scored_crops: bool,
    /// Pixel resampling filter. Default bilinear.
    pub resample: Resample,
    /// Confidence cutoff for the report's per-category P/R. Default 0.25.
    pub conf_cutoff: f64,
    /// Mosaics per pass; `auto` means one per source image. Default auto.
    pub mosaic_count: Option<usize>,
    /// Dataset root directory. Default ".".
    pub dataset_root: String,
    /// Output root directory. Default "out".
    pub output_root: String,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 42,
            canvas_w: 640,
            canvas_h: 640,
            train_ratio: 0.7,
            val_ratio: 0.2,
            test_ratio: 0.1,
            stratify: true,
            min_visible: 0.25,
            min_box_pixels: 2.0,
            center_min_frac: 0.25,
            center_max_frac: 0.75,
            shear_magnitude: 0.1,
            ap_interp: ApInterp::All,
            mosaic: true,
            recycle: false,
            scored_crops: false,
            resample: Resample::Bilinear,
            conf_cutoff: 0.25,
            mosaic_count: None,
            dataset_root: ".".to_string(),
            output_root: "out".to_string(),
        }
    }
}

fn parse_bool(key: &str, v: &str) -> Result<bool> {
    match v {
        "true" | "on" => Ok(true),
        "false" | "off" => Ok(false),
        other => Err(Error::invalid(format!(
            "{key} must be on|off (or true|false), got {other:?}"
        ))),
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| Error::invalid(format!("{key}: cannot parse {v:?}")))
}

impl RunConfig {
    /// Apply one `key = value` assignment. Unknown keys are rejected so
    /// typos never silently fall back to defaults.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "seed" => self.seed = parse_num(key, value)?,
            "canvas_w" => self.canvas_w = parse_num(key, value)?,
            "canvas_h" => self.canvas_h = parse_num(key, value)?,
            "train_ratio" => self.train_ratio = parse_num(key, value)?,
            "val_ratio" => self.val_ratio = parse_num(key, value)?,
            "test_ratio" => self.test_ratio = parse_num(key, value)?,
            "stratify" => self.stratify = parse_bool(key, value)?,
            "min_visible" => self.min_visible = parse_num(key, value)?,
            "min_box_pixels" => self.min_box_pixels = parse_num(key, value)?,
            "center_min_frac" => self.center_min_frac = parse_num(key, value)?,
            "center_max_frac" => self.center_max_frac = parse_num(key, value)?,
            "shear_magnitude" => self.shear_magnitude = parse_num(key, value)?,
            "ap_interp" => self.ap_interp = ApInterp::parse(value)?,
            "mosaic" => self.mosaic = parse_bool(key, value)?,
            "recycle" => self.recycle = parse_bool(key, value)?,
            "scored_crops" => self.scored_crops = parse_bool(key, value)?,
            "resample" => self.resample = Resample::parse(value)?,
            "conf_cutoff" => self.conf_cutoff = parse_num(key, value)?,
            "mosaic_count" => {
                self.mosaic_count = if value == "auto" {
                    None
                } else {
                    Some(parse_num(key, value)?)
                }
            }
            "dataset_root" => self.dataset_root = value.to_string(),
            "output_root" => self.output_root = value.to_string(),
            other => return Err(Error::invalid(format!("unknown config key {other:?}"))),
        }
        Ok(())
    }

    /// Parse a config file body: `key = value` per line, `#` comments and
    /// blank lines ignored. Errors name the offending line.
    pub fn apply_file_text(&mut self, text: &str) -> Result<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::invalid(format!("config line {}: expected key = value", i + 1))
            })?;
            self.set(key.trim(), value.trim())
                .map_err(|e| Error::invalid(format!("config line {}: {e}", i + 1)))?;
        }
        self.validate()
    }

    /// Check cross-field invariants after all sources are merged.
    pub fn validate(&self) -> Result<()> {
        let ratio_sum = self.train_ratio + self.val_ratio + self.test_ratio;
        if self.train_ratio < 0.0 || self.val_ratio < 0.0 || self.test_ratio < 0.0 {
            return Err(Error::invalid("split ratios must be non-negative"));
        }
        if (ratio_sum - 1.0).abs() > 1e-9 {
            return Err(Error::invalid(format!(
                "split ratios must sum to 1 (got {ratio_sum})"
            )));
        }
        if !(0.0..=1.0).contains(&self.min_visible) {
            return Err(Error::invalid("min_visible must lie in [0, 1]"));
        }
        if self.min_box_pixels < 0.0 {
            return Err(Error::invalid("min_box_pixels must be >= 0"));
        }
        if !(0.0 < self.center_min_frac
            && self.center_min_frac <= self.center_max_frac
            && self.center_max_frac < 1.0)
        {
            return Err(Error::invalid(
                "center fractions must satisfy 0 < min <= max < 1",
            ));
        }
        if self.shear_magnitude.abs() > 0.5 {
            return Err(Error::invalid("shear_magnitude must lie in [-0.5, 0.5]"));
        }
        if !(0.0..=1.0).contains(&self.conf_cutoff) {
            return Err(Error::invalid("conf_cutoff must lie in [0, 1]"));
        }
        if self.canvas_w < 2 || self.canvas_h < 2 {
            return Err(Error::invalid("canvas must be at least 2x2"));
        }
        Ok(())
    }

    /// Canonical rendering in fixed key order; `apply_file_text` of the
    /// output reproduces the config. This is what commands echo to
    /// `effective_config.txt`.
    pub fn render(&self) -> String {
        fn b(v: bool) -> &'static str {
            if v {
                "on"
            } else {
                "off"
            }
        }
        let mosaic_count = match self.mosaic_count {
            None => "auto".to_string(),
            Some(n) => n.to_string(),
        };
        format!(
            "seed = {}\n\
             canvas_w = {}\n\
             canvas_h = {}\n\
             train_ratio = {}\n\
             val_ratio = {}\n\
             test_ratio = {}\n\
             stratify = {}\n\
             min_visible = {}\n\
             min_box_pixels = {}\n\
             center_min_frac = {}\n\
             center_max_frac = {}\n\
             shear_magnitude = {}\n\
             ap_interp = {}\n\
             mosaic = {}\n\
             recycle = {}\n\
             scored_crops = {}\n\
             resample = {}\n\
             conf_cutoff = {}\n\
             mosaic_count = {}\n\
             dataset_root = {}\n\
             output_root = {}\n",
            self.seed,
            self.canvas_w,
            self.canvas_h,
            self.train_ratio,
            self.val_ratio,
            self.test_ratio,
            b(self.stratify),
            self.min_visible,
            self.min_box_pixels,
            self.center_min_frac,
            self.center_max_frac,
            self.shear_magnitude,
            self.ap_interp,
            b(self.mosaic),
            b(self.recycle),
            b(self.scored_crops),
            self.resample,
            self.conf_cutoff,
            mosaic_count,
            self.dataset_root,
            self.output_root,
        )
    }

    /// One `key (default)` line per field, for `--help` epilogues.
    pub fn help_block() -> String {
        let d = RunConfig::default();
        format!(
            "Config keys (flags > config file > defaults):\n{}",
            d.render()
                .lines()
                .map(|l| format!("  {l}\n"))
                .collect::<String>()
        )
    }

    pub fn split_ratios(&self) -> (f64, f64, f64) {
        (self.train_ratio, self.val_ratio, self.test_ratio)
    }
}
