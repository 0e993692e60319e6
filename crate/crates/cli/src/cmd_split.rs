//! `detkit split`: walk a dataset root, stratify it into train/val/test
//! manifests, and drop a dataset descriptor next to them.

use std::path::PathBuf;

use clap::Args;
use detkit::config::RunConfig;
use detkit::dataset::{
    discover_dataset, relative_path, split_dataset, DatasetConfig, DatasetManifest, IndexedImage,
    ManifestEntry,
};
use detkit::Result;

use crate::common::{prepare_output_dir, write_text, ConfigArgs};

#[derive(Args, Debug)]
#[command(after_help = RunConfig::help_block())]
pub struct SplitArgs {
    /// Dataset root to scan for images and sibling .txt labels
    /// (overrides dataset_root)
    #[arg(long, value_name = "DIR")]
    pub data: Option<PathBuf>,

    /// Directory receiving train.txt/val.txt/test.txt and dataset.cfg
    /// (overrides output_root)
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,

    /// Train,val,test fractions, comma-separated and summing to 1
    #[arg(long, value_name = "A,B,C")]
    pub ratios: Option<String>,

    /// Stratify the split per category
    #[arg(long, value_parser = ["on", "off"])]
    pub stratify: Option<String>,

    #[command(flatten)]
    pub config: ConfigArgs,
}

pub fn run(args: &SplitArgs) -> Result<()> {
    let mut cfg = args.config.build()?;
    if let Some(d) = &args.data {
        cfg.dataset_root = d.to_string_lossy().into_owned();
    }
    if let Some(o) = &args.out {
        cfg.output_root = o.to_string_lossy().into_owned();
    }
    if let Some(r) = &args.ratios {
        let parts: Vec<&str> = r.split(',').map(str::trim).collect();
        if parts.len() != 3 {
            return Err(detkit::Error::invalid(format!(
                "--ratios expects three comma-separated numbers, got {r:?}"
            )));
        }
        cfg.set("train_ratio", parts[0])?;
        cfg.set("val_ratio", parts[1])?;
        cfg.set("test_ratio", parts[2])?;
    }
    if let Some(s) = &args.stratify {
        cfg.set("stratify", s)?;
    }
    cfg.validate()?;

    let root = PathBuf::from(&cfg.dataset_root);
    let out_dir = PathBuf::from(&cfg.output_root);
    let images = discover_dataset(&root)?;
    let outcome = split_dataset(&images, cfg.split_ratios(), cfg.seed, cfg.stratify)?;

    prepare_output_dir(&out_dir, &cfg)?;
    for w in &outcome.train.warnings {
        eprintln!("warning: {w}");
    }
    for (manifest, file) in [
        (&outcome.train, "train.txt"),
        (&outcome.val, "val.txt"),
        (&outcome.test, "test.txt"),
    ] {
        let rebased = rebase(manifest, &root, &out_dir);
        rebased.write(&out_dir.join(file))?;
    }

    // Category inventory for the descriptor: ids present anywhere in the
    // dataset, named cat<id> since label files carry no name strings.
    let mut ids: Vec<u32> = images
        .iter()
        .flat_map(|img: &IndexedImage| img.categories.iter().copied())
        .collect();
    ids.sort_unstable();
    ids.dedup();
    let descriptor = DatasetConfig {
        train_dir: "train.txt".to_string(),
        val_dir: "val.txt".to_string(),
        test_dir: "test.txt".to_string(),
        category_count: ids.len(),
        names: ids.iter().map(|id| format!("cat{id}")).collect(),
    };
    write_text(&out_dir.join("dataset.cfg"), &descriptor.render())?;

    println!("train: {}", outcome.train.len());
    println!("val: {}", outcome.val.len());
    println!("test: {}", outcome.test.len());
    Ok(())
}

/// Re-express entry paths (relative to the dataset root) relative to the
/// directory the manifest is written into, so the manifest works from
/// wherever it lives.
fn rebase(manifest: &DatasetManifest, root: &std::path::Path, out_dir: &std::path::Path) -> DatasetManifest {
    let entries = manifest
        .entries
        .iter()
        .map(|e| ManifestEntry {
            image: relative_path(&root.join(&e.image), out_dir),
            label: relative_path(&root.join(&e.label), out_dir),
        })
        .collect();
    DatasetManifest {
        seed: manifest.seed,
        split: manifest.split,
        warnings: manifest.warnings.clone(),
        entries,
    }
}
