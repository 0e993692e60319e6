//! `detkit eval`: score one prediction directory against a ground-truth
//! manifest and print the key=value report plus the comparison-table row.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use clap::Args;
use detkit::config::RunConfig;
use detkit::dataset::{read_label_file, read_prediction_file, DatasetManifest};
use detkit::eval::{evaluate, evaluate_at, render_table, CoordSpace, Detection, GroundTruth, TableRow};
use detkit::{Error, Result};

use crate::common::{entry_stem, prepare_output_dir, resolve_manifest, write_text, ConfigArgs};

#[derive(Args, Debug)]
#[command(after_help = RunConfig::help_block())]
pub struct EvalArgs {
    /// Ground-truth manifest
    #[arg(long, value_name = "FILE")]
    pub truth: PathBuf,

    /// Directory of prediction files, one <image-stem>.txt per image
    #[arg(long, value_name = "DIR")]
    pub pred: PathBuf,

    /// Optional directory receiving report.txt and the effective config
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,

    /// Score one IoU threshold instead of the full 0.50:0.95 grid
    #[arg(long, value_name = "T")]
    pub threshold: Option<f64>,

    #[command(flatten)]
    pub config: ConfigArgs,
}

/// Ground truths for every manifest entry, keyed by the entry's own
/// relative path string, plus the stems used to look up predictions.
pub fn load_truth(manifest_path: &Path) -> Result<(Vec<GroundTruth>, Vec<(String, String)>)> {
    let manifest = DatasetManifest::read(manifest_path)?;
    let entries = resolve_manifest(manifest_path, &manifest);
    if entries.is_empty() {
        return Err(Error::invalid("ground-truth manifest has no entries"));
    }
    let mut gts = Vec::new();
    let mut stems = Vec::new();
    let mut seen = BTreeSet::new();
    for e in &entries {
        let stem = entry_stem(&PathBuf::from(&e.id))?;
        if !seen.insert(stem.clone()) {
            return Err(Error::invalid(format!(
                "two manifest entries share the prediction stem {stem:?}"
            )));
        }
        for r in read_label_file(&e.label)? {
            gts.push(GroundTruth {
                image: e.id.clone(),
                category: r.category,
                bbox: r.to_bbox(),
                space: CoordSpace::Normalized,
            });
        }
        stems.push((e.id.clone(), stem));
    }
    Ok((gts, stems))
}

/// Detections for every image that has a `<stem>.txt` in `pred_dir`;
/// images without one contribute no detections. Returns how many
/// prediction files were found.
pub fn load_predictions(
    pred_dir: &Path,
    stems: &[(String, String)],
) -> Result<(Vec<Detection>, usize)> {
    let mut dets = Vec::new();
    let mut found = 0;
    for (id, stem) in stems {
        let path = pred_dir.join(format!("{stem}.txt"));
        if !path.is_file() {
            continue;
        }
        found += 1;
        for p in read_prediction_file(&path)? {
            dets.push(Detection::new(
                id.clone(),
                p.category,
                p.to_bbox(),
                p.confidence,
                CoordSpace::Normalized,
            )?);
        }
    }
    Ok((dets, found))
}

pub fn run(args: &EvalArgs) -> Result<()> {
    let cfg = args.config.build()?;
    cfg.validate()?;

    let (gts, stems) = load_truth(&args.truth)?;
    let (dets, found) = load_predictions(&args.pred, &stems)?;
    if found == 0 {
        eprintln!(
            "warning: no prediction files found in {}",
            args.pred.display()
        );
    }

    let text = match args.threshold {
        Some(t) => {
            if !(0.0..=1.0).contains(&t) {
                return Err(Error::invalid(format!(
                    "--threshold must lie in [0, 1], got {t}"
                )));
            }
            let eval = evaluate_at(&dets, &gts, t, cfg.ap_interp)?;
            let mut out = format!("threshold={t:.2}\nmap={:.6}\n", eval.map);
            for (c, ap) in &eval.per_category {
                out.push_str(&format!("category.{c}.ap={ap:.6}\n"));
            }
            let skipped: Vec<String> = eval.skipped.iter().map(|c| c.to_string()).collect();
            out.push_str(&format!("skipped_no_ground_truth={}\n", skipped.join(",")));
            out
        }
        None => {
            let report = evaluate(&dets, &gts, cfg.ap_interp, cfg.conf_cutoff)?;
            let row = TableRow {
                name: arm_name(&args.pred),
                map50: Some(report.map50),
                map5095: Some(report.map5095),
                error: None,
            };
            format!("{}\n{}", report.render_key_values(), render_table(&[row]))
        }
    };

    print!("{text}");
    if let Some(out_dir) = &args.out {
        prepare_output_dir(out_dir, &cfg)?;
        write_text(&out_dir.join("report.txt"), &text)?;
    }
    Ok(())
}

/// Human label for a prediction directory: its final path component.
pub fn arm_name(pred_dir: &Path) -> String {
    pred_dir
        .file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| pred_dir.display().to_string())
}
