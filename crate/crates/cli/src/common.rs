//! Plumbing shared by the subcommands: config assembly with the
//! documented precedence, output-directory preparation, and path/image
//! helpers that map failures onto the exit-code taxonomy.

use std::fs;
use std::path::{Path, PathBuf};

use clap::Args;
use detkit::config::RunConfig;
use detkit::dataset::{DatasetManifest, ManifestEntry};
use detkit::{Error, Result};
use image::RgbImage;

/// Flags every pipeline subcommand accepts. Precedence when a key is
/// given more than once: dedicated flags beat `--set`, which beats the
/// config file, which beats the built-in defaults.
#[derive(Args, Debug)]
pub struct ConfigArgs {
    /// Plain-text `key = value` config file
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Override one config key, e.g. --set min_visible=0.3 (repeatable)
    #[arg(long, value_name = "KEY=VALUE")]
    pub set: Vec<String>,

    /// Master seed for every random draw
    #[arg(long)]
    pub seed: Option<u64>,
}

impl ConfigArgs {
    /// Defaults, then the config file, then `--set` pairs in order, then
    /// `--seed`. Callers layer their own dedicated flags on top and run
    /// `validate()` once everything is merged.
    pub fn build(&self) -> Result<RunConfig> {
        let mut cfg = RunConfig::default();
        if let Some(path) = &self.config {
            let text = read_text(path)?;
            cfg.apply_file_text(&text)
                .map_err(|e| Error::invalid(format!("{}: {e}", path.display())))?;
        }
        for pair in &self.set {
            let (key, value) = pair
                .split_once('=')
                .ok_or_else(|| Error::invalid(format!("--set expects key=value, got {pair:?}")))?;
            cfg.set(key.trim(), value.trim())?;
        }
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        Ok(cfg)
    }
}

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Create the output directory and echo the effective config into it,
/// so every run leaves an auditable record of what it actually used.
pub fn prepare_output_dir(dir: &Path, cfg: &RunConfig) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    write_text(&dir.join("effective_config.txt"), &cfg.render())
}

/// Decode an image to RGB; decode and read failures both count as I/O.
pub fn load_image(path: &Path) -> Result<RgbImage> {
    let img = image::open(path).map_err(|e| Error::io(path, e))?;
    Ok(img.to_rgb8())
}

pub fn save_image(img: &RgbImage, path: &Path) -> Result<()> {
    img.save(path).map_err(|e| Error::io(path, e))
}

/// Directory a manifest's relative entries are resolved against: the
/// directory holding the manifest file itself.
pub fn manifest_dir(manifest_path: &Path) -> &Path {
    let parent = manifest_path.parent().unwrap_or(Path::new(""));
    if parent.as_os_str().is_empty() {
        Path::new(".")
    } else {
        parent
    }
}

/// Absolute-or-joined path of one manifest entry path.
pub fn resolve_entry(manifest_path: &Path, entry: &Path) -> PathBuf {
    if entry.is_absolute() {
        entry.to_path_buf()
    } else {
        manifest_dir(manifest_path).join(entry)
    }
}

/// A manifest entry resolved to on-disk paths, keeping the manifest's
/// own relative spelling as the stable image id.
pub struct ResolvedEntry {
    pub id: String,
    pub image: PathBuf,
    pub label: PathBuf,
}

pub fn resolve_manifest(path: &Path, manifest: &DatasetManifest) -> Vec<ResolvedEntry> {
    manifest
        .entries
        .iter()
        .map(|e: &ManifestEntry| ResolvedEntry {
            id: e.image.to_string_lossy().into_owned(),
            image: resolve_entry(path, &e.image),
            label: resolve_entry(path, &e.label),
        })
        .collect()
}

/// File stem of an entry's image, used to name derived outputs and to
/// look up prediction files.
pub fn entry_stem(entry_image: &Path) -> Result<String> {
    entry_image
        .file_stem()
        .and_then(|s| s.to_str())
        .map(|s| s.to_string())
        .ok_or_else(|| {
            Error::invalid(format!(
                "cannot derive a file stem from {:?}",
                entry_image.display()
            ))
        })
}
