//! Dataset plumbing: the normalized label grammar and its canonical
//! writer, prediction files, split manifests, seeded stratified
//! train/val/test splitting, dataset discovery, and the half-crop
//! generator used to build partial test sets.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::{Component, Path, PathBuf};

use image::RgbImage;
use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::geometry::BBox;
use crate::raster;
use crate::seed::{derive_seed, rng_for};

/// Slack when checking that a normalized box stays inside [0, 1]: label
/// files carry 6 decimals, so an edge can overshoot by half an ulp of the
/// written precision.
const EDGE_SLACK: f64 = 1e-6;

/// One normalized ground-truth box: category plus center/size in [0, 1].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LabelRecord {
    pub category: u32,
    pub cx: f64,
    pub cy: f64,
    pub w: f64,
    pub h: f64,
}

impl LabelRecord {
    pub fn new(category: u32, cx: f64, cy: f64, w: f64, h: f64) -> Result<Self> {
        let r = Self { category, cx, cy, w, h };
        r.validate()?;
        Ok(r)
    }

    /// Boxes must have positive size and stay inside the unit square
    /// (within formatting slack).
    pub fn validate(&self) -> Result<()> {
        if !(self.w > 0.0 && self.h > 0.0) {
            return Err(Error::invalid(format!(
                "box size must be positive, got w={} h={}",
                self.w, self.h
            )));
        }
        let edges = [
            self.cx - self.w / 2.0,
            1.0 - (self.cx + self.w / 2.0),
            self.cy - self.h / 2.0,
            1.0 - (self.cy + self.h / 2.0),
        ];
        if edges.iter().any(|e| *e < -EDGE_SLACK) {
            return Err(Error::invalid(format!(
                "box ({} {} {} {}) extends outside [0, 1]",
                self.cx, self.cy, self.w, self.h
            )));
        }
        Ok(())
    }

    pub fn to_bbox(&self) -> BBox {
        BBox::from_cxcywh(self.cx, self.cy, self.w, self.h)
    }

    pub fn from_bbox(category: u32, b: &BBox) -> Self {
        let (cx, cy, w, h) = b.to_cxcywh();
        Self { category, cx, cy, w, h }
    }
}

/// One predicted box: a [`LabelRecord`] plus a confidence score.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PredRecord {
    pub category: u32,
    pub cx: f64,
    pub cy: f64,
    pub w: f64,
    pub h: f64,
    pub confidence: f64,
}

impl PredRecord {
    pub fn validate(&self) -> Result<()> {
        LabelRecord {
            category: self.category,
            cx: self.cx,
            cy: self.cy,
            w: self.w,
            h: self.h,
        }
        .validate()?;
        if !(0.0..=1.0).contains(&self.confidence) {
            return Err(Error::invalid(format!(
                "confidence {} outside [0, 1]",
                self.confidence
            )));
        }
        Ok(())
    }

    pub fn to_bbox(&self) -> BBox {
        BBox::from_cxcywh(self.cx, self.cy, self.w, self.h)
    }
}

fn parse_error(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: PathBuf::new(),
        line,
        message: message.into(),
    }
}

fn attribute_path(err: Error, path: &Path) -> Error {
    match err {
        Error::Parse { line, message, .. } => Error::Parse {
            path: path.to_path_buf(),
            line,
            message,
        },
        other => other,
    }
}

fn parse_fields(line_no: usize, line: &str, expected: usize) -> Result<Vec<f64>> {
    let tokens: Vec<&str> = line.split_whitespace().collect();
    if tokens.len() != expected {
        return Err(parse_error(
            line_no,
            format!("expected {expected} fields, got {}", tokens.len()),
        ));
    }
    tokens
        .iter()
        .map(|t| {
            t.parse::<f64>()
                .map_err(|_| parse_error(line_no, format!("bad number {t:?}")))
        })
        .collect()
}

fn parse_category(line_no: usize, token: f64) -> Result<u32> {
    if token < 0.0 {
        return Err(parse_error(line_no, format!("negative category {token}")));
    }
    if token.fract() != 0.0 || token > u32::MAX as f64 {
        return Err(parse_error(
            line_no,
            format!("category {token} is not a valid index"),
        ));
    }
    Ok(token as u32)
}

/// Parse label text: one `<category> <cx> <cy> <w> <h>` record per
/// non-empty line. Range violations are rejected with their line number.
pub fn parse_label_file(text: &str) -> Result<Vec<LabelRecord>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let line_no = i + 1;
        let f = parse_fields(line_no, line, 5)?;
        let rec = LabelRecord {
            category: parse_category(line_no, f[0])?,
            cx: f[1],
            cy: f[2],
            w: f[3],
            h: f[4],
        };
        rec.validate().map_err(|e| parse_error(line_no, e.to_string()))?;
        out.push(rec);
    }
    Ok(out)
}

/// Parse prediction text: label grammar plus a trailing confidence field.
pub fn parse_prediction_file(text: &str) -> Result<Vec<PredRecord>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let line_no = i + 1;
        let f = parse_fields(line_no, line, 6)?;
        let rec = PredRecord {
            category: parse_category(line_no, f[0])?,
            cx: f[1],
            cy: f[2],
            w: f[3],
            h: f[4],
            confidence: f[5],
        };
        rec.validate().map_err(|e| parse_error(line_no, e.to_string()))?;
        out.push(rec);
    }
    Ok(out)
}

/// Canonical label text: 6 decimal places, single spaces, one trailing
/// newline per record. `parse(write(r))` recovers every field within
/// 5e-7.
pub fn write_label_file(records: &[LabelRecord]) -> Result<String> {
    let mut out = String::new();
    for r in records {
        r.validate()?;
        out.push_str(&format!(
            "{} {:.6} {:.6} {:.6} {:.6}\n",
            r.category, r.cx, r.cy, r.w, r.h
        ));
    }
    Ok(out)
}

/// Canonical prediction text; same formatting as labels with the
/// confidence appended.
pub fn write_prediction_file(records: &[PredRecord]) -> Result<String> {
    let mut out = String::new();
    for r in records {
        r.validate()?;
        out.push_str(&format!(
            "{} {:.6} {:.6} {:.6} {:.6} {:.6}\n",
            r.category, r.cx, r.cy, r.w, r.h, r.confidence
        ));
    }
    Ok(out)
}

pub fn read_label_file(path: &Path) -> Result<Vec<LabelRecord>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_label_file(&text).map_err(|e| attribute_path(e, path))
}

pub fn read_prediction_file(path: &Path) -> Result<Vec<PredRecord>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_prediction_file(&text).map_err(|e| attribute_path(e, path))
}

/// Which split a manifest belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SplitTag {
    Train,
    Val,
    Test,
    None,
}

impl fmt::Display for SplitTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SplitTag::Train => "train",
            SplitTag::Val => "val",
            SplitTag::Test => "test",
            SplitTag::None => "none",
        })
    }
}

impl SplitTag {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "train" => Ok(SplitTag::Train),
            "val" => Ok(SplitTag::Val),
            "test" => Ok(SplitTag::Test),
            "none" => Ok(SplitTag::None),
            other => Err(Error::invalid(format!("unknown split tag {other:?}"))),
        }
    }
}

/// One manifest row: image path plus its sibling label path. Paths are
/// stored exactly as written (the writer uses paths relative to the
/// manifest's own directory).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestEntry {
    pub image: PathBuf,
    pub label: PathBuf,
}

/// A split manifest: `# seed=` / `# split=` headers, optional
/// `# warning=` lines, then one tab-separated `<image>\t<label>` row per
/// entry.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetManifest {
    pub seed: u64,
    pub split: SplitTag,
    pub warnings: Vec<String>,
    pub entries: Vec<ManifestEntry>,
}

impl DatasetManifest {
    pub fn new(seed: u64, split: SplitTag, entries: Vec<ManifestEntry>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for e in &entries {
            if !seen.insert(e.image.clone()) {
                return Err(Error::invalid(format!(
                    "duplicate image path {} in manifest",
                    e.image.display()
                )));
            }
        }
        Ok(Self { seed, split, warnings: Vec::new(), entries })
    }

    pub fn render(&self) -> String {
        let mut out = format!("# seed={}\n# split={}\n", self.seed, self.split);
        for w in &self.warnings {
            out.push_str(&format!("# warning={w}\n"));
        }
        for e in &self.entries {
            out.push_str(&format!("{}\t{}\n", e.image.display(), e.label.display()));
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut seed = None;
        let mut split = None;
        let mut warnings = Vec::new();
        let mut entries = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.trim_end();
            if line.is_empty() {
                continue;
            }
            if let Some(header) = line.strip_prefix('#') {
                let header = header.trim();
                if let Some(v) = header.strip_prefix("seed=") {
                    seed = Some(
                        v.parse::<u64>()
                            .map_err(|_| parse_error(line_no, format!("bad seed {v:?}")))?,
                    );
                } else if let Some(v) = header.strip_prefix("split=") {
                    split = Some(SplitTag::parse(v).map_err(|e| parse_error(line_no, e.to_string()))?);
                } else if let Some(v) = header.strip_prefix("warning=") {
                    warnings.push(v.to_string());
                }
                // Other comment lines pass through unparsed.
                continue;
            }
            let (img, lbl) = line.split_once('\t').ok_or_else(|| {
                parse_error(line_no, "expected <image>\\t<label>".to_string())
            })?;
            entries.push(ManifestEntry {
                image: PathBuf::from(img),
                label: PathBuf::from(lbl),
            });
        }
        let mut m = Self::new(
            seed.ok_or_else(|| Error::invalid("manifest missing # seed= header"))?,
            split.ok_or_else(|| Error::invalid("manifest missing # split= header"))?,
            entries,
        )?;
        m.warnings = warnings;
        Ok(m)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text).map_err(|e| attribute_path(e, path))
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.render()).map_err(|e| Error::io(path, e))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// One discovered image with its label file and the categories present.
#[derive(Debug, Clone)]
pub struct IndexedImage {
    /// Relative to the dataset root.
    pub image: PathBuf,
    pub label: PathBuf,
    pub categories: BTreeSet<u32>,
}

/// Walk a dataset root collecting `.png`/`.jpg`/`.jpeg` images and their
/// sibling `.txt` labels, sorted by path so results never depend on
/// filesystem enumeration order.
pub fn discover_dataset(root: &Path) -> Result<Vec<IndexedImage>> {
    let mut images = Vec::new();
    for entry in walkdir::WalkDir::new(root).sort_by_file_name() {
        let entry = entry.map_err(|e| Error::io(root, e))?;
        if !entry.file_type().is_file() {
            continue;
        }
        let path = entry.path();
        let ext = path
            .extension()
            .and_then(|e| e.to_str())
            .map(|e| e.to_ascii_lowercase());
        if matches!(ext.as_deref(), Some("png" | "jpg" | "jpeg")) {
            images.push(path.to_path_buf());
        }
    }
    images.sort();
    if images.is_empty() {
        return Err(Error::invalid("no images found"));
    }
    let mut missing = Vec::new();
    let mut out = Vec::new();
    for image in images {
        let label = image.with_extension("txt");
        if !label.is_file() {
            missing.push(label.display().to_string());
            continue;
        }
        let records = read_label_file(&label)?;
        let rel = image.strip_prefix(root).unwrap_or(&image).to_path_buf();
        let rel_label = label.strip_prefix(root).unwrap_or(&label).to_path_buf();
        out.push(IndexedImage {
            image: rel,
            label: rel_label,
            categories: records.iter().map(|r| r.category).collect(),
        });
    }
    if !missing.is_empty() {
        return Err(Error::invalid(format!(
            "missing label files:\n  {}",
            missing.join("\n  ")
        )));
    }
    Ok(out)
}

/// The three manifests produced by [`split_dataset`].
#[derive(Debug, Clone)]
pub struct SplitOutcome {
    pub train: DatasetManifest,
    pub val: DatasetManifest,
    pub test: DatasetManifest,
}

/// Per-bucket counts from the floor-plus-remainder rule: each split gets
/// `floor(n * ratio)` (with a 1e-9 guard against products like
/// 2900 * 0.7 landing one ulp under the intended integer), and the
/// remainder goes to train, then val.
fn split_counts(n: usize, ratios: (f64, f64, f64)) -> (usize, usize, usize) {
    let f = |r: f64| ((n as f64 * r + 1e-9).floor() as usize).min(n);
    let (mut t, mut v, mut s) = (f(ratios.0), f(ratios.1), f(ratios.2));
    // The guard can only overshoot when a product sits within 1e-9 below
    // an integer; shave any excess from test, then val, then train.
    while t + v + s > n {
        if s > 0 {
            s -= 1;
        } else if v > 0 {
            v -= 1;
        } else {
            t -= 1;
        }
    }
    let mut remainder = n - (t + v + s);
    if remainder > 0 {
        t += 1;
        remainder -= 1;
    }
    if remainder > 0 {
        v += 1;
        remainder -= 1;
    }
    // Three floors each lose strictly less than one element.
    debug_assert_eq!(remainder, 0);
    (t, v, s)
}

fn validate_ratios(ratios: (f64, f64, f64)) -> Result<()> {
    let (a, b, c) = ratios;
    if a < 0.0 || b < 0.0 || c < 0.0 {
        return Err(Error::invalid("split ratios must be non-negative"));
    }
    if (a + b + c - 1.0).abs() > 1e-9 {
        return Err(Error::invalid(format!(
            "split ratios must sum to 1 (got {})",
            a + b + c
        )));
    }
    Ok(())
}

/// Seeded train/val/test split. When `stratify` is set, each category's
/// image list is shuffled and divided independently so every category
/// keeps the requested proportions; an image with several categories is
/// bucketed under its smallest one. Entries are sorted by path before
/// shuffling, so the outcome is independent of discovery order.
pub fn split_dataset(
    images: &[IndexedImage],
    ratios: (f64, f64, f64),
    seed: u64,
    stratify: bool,
) -> Result<SplitOutcome> {
    validate_ratios(ratios)?;
    if images.is_empty() {
        return Err(Error::invalid("cannot split an empty dataset"));
    }

    // Bucket key: smallest category present, or a sentinel for images
    // with empty label files. Unstratified splitting uses one bucket.
    let mut buckets: BTreeMap<u64, Vec<&IndexedImage>> = BTreeMap::new();
    for img in images {
        let key = if stratify {
            img.categories.iter().next().map(|c| *c as u64).unwrap_or(u64::MAX)
        } else {
            0
        };
        buckets.entry(key).or_default().push(img);
    }

    let mut train = Vec::new();
    let mut val = Vec::new();
    let mut test = Vec::new();
    let mut warnings = Vec::new();
    for (key, mut members) in buckets {
        if members.is_empty() {
            return Err(Error::invalid(format!("category {key} has no images")));
        }
        members.sort_by(|a, b| a.image.cmp(&b.image));
        let mut rng = rng_for(derive_seed(seed, key));
        members.shuffle(&mut rng);
        let (nt, nv, _) = split_counts(members.len(), ratios);
        if nt == 0 && stratify {
            warnings.push(format!("category {key} has an empty train split"));
        } else if nt == 0 {
            warnings.push("train split is empty".to_string());
        }
        for (i, img) in members.iter().enumerate() {
            let entry = ManifestEntry {
                image: img.image.clone(),
                label: img.label.clone(),
            };
            if i < nt {
                train.push(entry);
            } else if i < nt + nv {
                val.push(entry);
            } else {
                test.push(entry);
            }
        }
    }
    for list in [&mut train, &mut val, &mut test] {
        list.sort_by(|a, b| a.image.cmp(&b.image));
    }

    let mut train = DatasetManifest::new(seed, SplitTag::Train, train)?;
    train.warnings = warnings;
    Ok(SplitOutcome {
        train,
        val: DatasetManifest::new(seed, SplitTag::Val, val)?,
        test: DatasetManifest::new(seed, SplitTag::Test, test)?,
    })
}

/// Which half of an image a partial crop keeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Half {
    Left,
    Right,
    Upper,
    Lower,
}

pub const ALL_HALVES: [Half; 4] = [Half::Left, Half::Right, Half::Upper, Half::Lower];

impl Half {
    /// Filename suffix for the emitted crop.
    pub fn suffix(self) -> &'static str {
        match self {
            Half::Left => "_L",
            Half::Right => "_R",
            Half::Upper => "_U",
            Half::Lower => "_D",
        }
    }

    /// Pixel viewport `(x, y, w, h)` of this half in a `w x h` image.
    /// Left/upper take `floor(dim / 2)` pixels; right/lower take the
    /// rest, so the two halves always tile the original exactly.
    pub fn viewport(self, w: u32, h: u32) -> (u32, u32, u32, u32) {
        let half_w = w / 2;
        let half_h = h / 2;
        match self {
            Half::Left => (0, 0, half_w, h),
            Half::Right => (half_w, 0, w - half_w, h),
            Half::Upper => (0, 0, w, half_h),
            Half::Lower => (0, half_h, w, h - half_h),
        }
    }
}

/// Clip a pixel-space box to a viewport and apply the shared visibility
/// filter: drop it when the surviving area falls under `min_visible` of
/// the pre-clip area or either side shrinks below `min_box_pixels`.
pub fn clip_with_visibility(
    b: &BBox,
    viewport: &BBox,
    min_visible: f64,
    min_box_pixels: f64,
) -> Option<BBox> {
    let pre_area = b.area();
    let clipped = crate::geometry::clip(b, viewport)?;
    if pre_area > 0.0 && clipped.area() < min_visible * pre_area {
        return None;
    }
    if clipped.width() < min_box_pixels || clipped.height() < min_box_pixels {
        return None;
    }
    Some(clipped)
}

/// Crop one half of an image: raster cut at the floor(dim/2) line, boxes
/// clipped to the viewport, filtered, and re-normalized to the crop.
pub fn crop_partial(
    records: &[LabelRecord],
    raster: &RgbImage,
    half: Half,
    min_visible: f64,
    min_box_pixels: f64,
) -> Result<(Vec<LabelRecord>, RgbImage)> {
    let (w, h) = raster.dimensions();
    if w < 2 || h < 2 {
        return Err(Error::invalid(format!(
            "image must be at least 2x2 pixels, got {w}x{h}"
        )));
    }
    let (vx, vy, vw, vh) = half.viewport(w, h);
    let viewport = BBox::new(vx as f64, vy as f64, (vx + vw) as f64, (vy + vh) as f64);
    let cropped = raster::crop(raster, vx, vy, vw, vh)?;
    let mut out = Vec::new();
    for r in records {
        let pixel_box = r.to_bbox().to_pixels(w as f64, h as f64);
        if let Some(clipped) = clip_with_visibility(&pixel_box, &viewport, min_visible, min_box_pixels)
        {
            let local = clipped.shifted(-(vx as f64), -(vy as f64));
            let renorm = local.to_normalized(vw as f64, vh as f64);
            out.push(LabelRecord::from_bbox(r.category, &renorm));
        }
    }
    Ok((out, cropped))
}

/// All four half crops of an image, in L, R, U, D order.
pub fn emit_partial_suite(
    records: &[LabelRecord],
    raster: &RgbImage,
    min_visible: f64,
    min_box_pixels: f64,
) -> Result<Vec<(Half, Vec<LabelRecord>, RgbImage)>> {
    ALL_HALVES
        .iter()
        .map(|&half| {
            crop_partial(records, raster, half, min_visible, min_box_pixels)
                .map(|(recs, img)| (half, recs, img))
        })
        .collect()
}

/// Dataset descriptor file: `key = value` lines naming the split
/// directories and category inventory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatasetConfig {
    pub train_dir: String,
    pub val_dir: String,
    pub test_dir: String,
    pub category_count: usize,
    pub names: Vec<String>,
}

impl DatasetConfig {
    pub fn render(&self) -> String {
        format!(
            "train_dir = {}\nval_dir = {}\ntest_dir = {}\ncategory_count = {}\nnames = {}\n",
            self.train_dir,
            self.val_dir,
            self.test_dir,
            self.category_count,
            self.names.join(",")
        )
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                parse_error(i + 1, "expected key = value".to_string())
            })?;
            map.insert(k.trim().to_string(), v.trim().to_string());
        }
        let get = |k: &str| {
            map.get(k)
                .cloned()
                .ok_or_else(|| Error::invalid(format!("dataset config missing key {k:?}")))
        };
        let count_text = get("category_count")?;
        let category_count: usize = count_text
            .parse()
            .map_err(|_| Error::invalid(format!("bad category_count {count_text:?}")))?;
        let names_text = get("names")?;
        let names: Vec<String> = if names_text.is_empty() {
            Vec::new()
        } else {
            names_text.split(',').map(|s| s.trim().to_string()).collect()
        };
        if !names.is_empty() && names.len() != category_count {
            return Err(Error::invalid(format!(
                "category_count {} does not match {} names",
                category_count,
                names.len()
            )));
        }
        Ok(Self {
            train_dir: get("train_dir")?,
            val_dir: get("val_dir")?,
            test_dir: get("test_dir")?,
            category_count,
            names,
        })
    }
}

/// Lexical relative path from `base` (a directory) to `target`; both are
/// made absolute against the current directory first. Used so manifests
/// reference images relative to their own location.
pub fn relative_path(target: &Path, base: &Path) -> PathBuf {
    fn absolute(p: &Path) -> PathBuf {
        let joined = if p.is_absolute() {
            p.to_path_buf()
        } else {
            std::env::current_dir().unwrap_or_default().join(p)
        };
        // Lexical normalization: resolve `.` and `..` without touching
        // the filesystem, so the result is deterministic.
        let mut parts: Vec<std::ffi::OsString> = Vec::new();
        for c in joined.components() {
            match c {
                Component::CurDir => {}
                Component::ParentDir => {
                    parts.pop();
                }
                Component::RootDir | Component::Prefix(_) => {}
                Component::Normal(s) => parts.push(s.to_os_string()),
            }
        }
        let mut out = PathBuf::from("/");
        for p in parts {
            out.push(p);
        }
        out
    }
    let target = absolute(target);
    let base = absolute(base);
    let t: Vec<_> = target.components().collect();
    let b: Vec<_> = base.components().collect();
    let common = t.iter().zip(b.iter()).take_while(|(x, y)| x == y).count();
    let mut out = PathBuf::new();
    for _ in common..b.len() {
        out.push("..");
    }
    for c in &t[common..] {
        out.push(c);
    }
    if out.as_os_str().is_empty() {
        out.push(".");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_text_parses_to_no_records() {
        assert!(parse_label_file("").unwrap().is_empty());
    }

    #[test]
    fn full_image_box_roundtrip_format() {
        let rec = LabelRecord::new(0, 0.5, 0.5, 1.0, 1.0).unwrap();
        assert_eq!(
            write_label_file(&[rec]).unwrap(),
            "0 0.500000 0.500000 1.000000 1.000000\n"
        );
    }

    #[test]
    fn two_records_roundtrip_bit_identically() {
        let text = "296 0.512000 0.488000 0.431000 0.402000\n296 0.100000 0.100000 0.050000 0.050000\n";
        let records = parse_label_file(text).unwrap();
        assert_eq!(write_label_file(&records).unwrap(), text);
    }

    #[test]
    fn parse_names_bad_line() {
        let err = parse_label_file("0 0.5 0.5 1 1\n1 0.5 oops 1 1\n").unwrap_err();
        assert!(err.to_string().contains(":2:"), "{err}");
    }

    #[test]
    fn negative_category_rejected() {
        let err = parse_label_file("-3 0.5 0.5 0.1 0.1\n").unwrap_err();
        assert!(err.to_string().contains("negative category"), "{err}");
    }

    #[test]
    fn out_of_range_box_rejected_with_line() {
        let err = parse_label_file("0 0.9 0.5 0.4 0.1\n").unwrap_err();
        assert!(err.to_string().contains(":1:"), "{err}");
    }

    #[test]
    fn prediction_roundtrip() {
        let text = "2 0.250000 0.250000 0.125000 0.125000 0.900000\n";
        let preds = parse_prediction_file(text).unwrap();
        assert_eq!(preds.len(), 1);
        assert_eq!(write_prediction_file(&preds).unwrap(), text);
    }

    #[test]
    fn confidence_out_of_range_rejected() {
        assert!(parse_prediction_file("0 0.5 0.5 0.1 0.1 1.5\n").is_err());
    }

    #[test]
    fn manifest_roundtrip_with_warning() {
        let mut m = DatasetManifest::new(
            7,
            SplitTag::Train,
            vec![ManifestEntry {
                image: "a/b.png".into(),
                label: "a/b.txt".into(),
            }],
        )
        .unwrap();
        m.warnings.push("category 3 has an empty train split".to_string());
        let text = m.render();
        assert!(text.starts_with("# seed=7\n# split=train\n# warning="));
        assert_eq!(DatasetManifest::parse(&text).unwrap(), m);
    }

    #[test]
    fn manifest_rejects_duplicates() {
        let e = ManifestEntry { image: "x.png".into(), label: "x.txt".into() };
        assert!(DatasetManifest::new(0, SplitTag::None, vec![e.clone(), e]).is_err());
    }

    fn synthetic_images(categories: usize, per_category: usize) -> Vec<IndexedImage> {
        let mut out = Vec::new();
        for c in 0..categories {
            for i in 0..per_category {
                out.push(IndexedImage {
                    image: format!("cat{c:03}/img{i:03}.png").into(),
                    label: format!("cat{c:03}/img{i:03}.txt").into(),
                    categories: [c as u32].into_iter().collect(),
                });
            }
        }
        out
    }

    #[test]
    fn ten_images_split_7_2_1() {
        let images = synthetic_images(1, 10);
        let split = split_dataset(&images, (0.7, 0.2, 0.1), 42, true).unwrap();
        assert_eq!(
            (split.train.len(), split.val.len(), split.test.len()),
            (7, 2, 1)
        );
    }

    #[test]
    fn twenty_nine_hundred_images_split_2030_580_290() {
        // 2900 * 0.7 lands one ulp below 2030 in f64; the guard in
        // split_counts must still yield the intended totals.
        let images = synthetic_images(290, 10);
        let split = split_dataset(&images, (0.7, 0.2, 0.1), 1, false).unwrap();
        assert_eq!(
            (split.train.len(), split.val.len(), split.test.len()),
            (2030, 580, 290)
        );
    }

    #[test]
    fn split_is_disjoint_cover_and_deterministic() {
        let images = synthetic_images(5, 7);
        let a = split_dataset(&images, (0.7, 0.2, 0.1), 9, true).unwrap();
        let b = split_dataset(&images, (0.7, 0.2, 0.1), 9, true).unwrap();
        assert_eq!(a.train, b.train);
        assert_eq!(a.val, b.val);
        assert_eq!(a.test, b.test);
        let mut all: Vec<_> = a
            .train
            .entries
            .iter()
            .chain(&a.val.entries)
            .chain(&a.test.entries)
            .map(|e| e.image.clone())
            .collect();
        all.sort();
        all.dedup();
        assert_eq!(all.len(), images.len());
    }

    #[test]
    fn different_seeds_usually_differ() {
        let images = synthetic_images(1, 10);
        let a = split_dataset(&images, (0.7, 0.2, 0.1), 1, true).unwrap();
        let b = split_dataset(&images, (0.7, 0.2, 0.1), 2, true).unwrap();
        assert_ne!(a.train.entries, b.train.entries);
    }

    #[test]
    fn zero_train_ratio_records_warning() {
        let images = synthetic_images(1, 10);
        let split = split_dataset(&images, (0.0, 0.9, 0.1), 3, true).unwrap();
        assert_eq!(split.train.len(), 0);
        assert!(!split.train.warnings.is_empty());
    }

    #[test]
    fn left_crop_of_100x60() {
        let raster = raster::solid(100, 60, [10, 20, 30]);
        let (_, img) = crop_partial(&[], &raster, Half::Left, 0.25, 2.0).unwrap();
        assert_eq!(img.dimensions(), (50, 60));
    }

    #[test]
    fn full_image_box_survives_left_crop_unchanged() {
        let raster = raster::solid(100, 60, [0, 0, 0]);
        let rec = LabelRecord::new(0, 0.5, 0.5, 1.0, 1.0).unwrap();
        let (recs, _) = crop_partial(&[rec], &raster, Half::Left, 0.25, 2.0).unwrap();
        assert_eq!(recs.len(), 1);
        let r = recs[0];
        assert!((r.cx - 0.5).abs() < 1e-12 && (r.w - 1.0).abs() < 1e-12);
    }

    #[test]
    fn worked_left_crop_example() {
        // (0.3, 0.5, 0.2, 0.4) in 100x60 is pixel box [20,18,40,42];
        // inside the left viewport [0,0,50,60] it re-normalizes to
        // (0.6, 0.5, 0.4, 0.4).
        let raster = raster::solid(100, 60, [0, 0, 0]);
        let rec = LabelRecord::new(0, 0.3, 0.5, 0.2, 0.4).unwrap();
        let (recs, _) = crop_partial(&[rec], &raster, Half::Left, 0.25, 2.0).unwrap();
        assert_eq!(recs.len(), 1);
        let r = recs[0];
        for (got, want) in [(r.cx, 0.6), (r.cy, 0.5), (r.w, 0.4), (r.h, 0.4)] {
            assert!((got - want).abs() < 1e-12, "{got} vs {want}");
        }
    }

    #[test]
    fn odd_width_halves_follow_floor_rule() {
        let raster = raster::solid(101, 40, [0, 0, 0]);
        let suite = emit_partial_suite(&[], &raster, 0.25, 2.0).unwrap();
        assert_eq!(suite.len(), 4);
        assert_eq!(suite[0].2.dimensions(), (50, 40));
        assert_eq!(suite[1].2.dimensions(), (51, 40));
    }

    #[test]
    fn dataset_config_roundtrip() {
        let cfg = DatasetConfig {
            train_dir: "out/train".into(),
            val_dir: "out/val".into(),
            test_dir: "out/test".into(),
            category_count: 3,
            names: vec!["0".into(), "1".into(), "2".into()],
        };
        assert_eq!(DatasetConfig::parse(&cfg.render()).unwrap(), cfg);
    }

    #[test]
    fn relative_path_walks_up_and_down() {
        assert_eq!(
            relative_path(Path::new("/data/a/img.png"), Path::new("/data/out")),
            PathBuf::from("../a/img.png")
        );
        assert_eq!(
            relative_path(Path::new("/data/a"), Path::new("/data/a")),
            PathBuf::from(".")
        );
    }
}
