//! `detkit report`: score several labeled prediction directories against
//! one ground truth and render them as rows of a single comparison
//! table. A failing arm is marked in its row; the other rows still
//! print, and the first failure decides the exit code.

use std::path::PathBuf;

use clap::Args;
use detkit::config::RunConfig;
use detkit::eval::{map_range, render_table, TableRow};
use detkit::{Error, Result};

use crate::cmd_eval::{load_predictions, load_truth};
use crate::common::{prepare_output_dir, write_text, ConfigArgs};

#[derive(Args, Debug)]
#[command(after_help = RunConfig::help_block())]
pub struct ReportArgs {
    /// Ground-truth manifest
    #[arg(long, value_name = "FILE")]
    pub truth: PathBuf,

    /// Labeled prediction directory, e.g. --arm mosaic-on=preds/on
    /// (repeatable; rows keep this order)
    #[arg(long = "arm", value_name = "NAME=DIR", required = true)]
    pub arms: Vec<String>,

    /// Optional directory receiving report.txt and the effective config
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,

    #[command(flatten)]
    pub config: ConfigArgs,
}

pub fn run(args: &ReportArgs) -> Result<()> {
    let cfg = args.config.build()?;
    cfg.validate()?;

    let (gts, stems) = load_truth(&args.truth)?;
    let mut rows = Vec::new();
    let mut first_error: Option<Error> = None;
    for arm in &args.arms {
        let (name, dir) = arm.split_once('=').ok_or_else(|| {
            Error::invalid(format!("--arm expects NAME=DIR, got {arm:?}"))
        })?;
        let scored = load_predictions(&PathBuf::from(dir), &stems)
            .and_then(|(dets, _)| map_range(&dets, &gts, cfg.ap_interp));
        match scored {
            Ok((map50, map5095)) => rows.push(TableRow {
                name: name.to_string(),
                map50: Some(map50),
                map5095: Some(map5095),
                error: None,
            }),
            Err(e) => {
                rows.push(TableRow {
                    name: name.to_string(),
                    map50: None,
                    map5095: None,
                    error: Some(e.to_string()),
                });
                if first_error.is_none() {
                    first_error = Some(e);
                }
            }
        }
    }

    let table = render_table(&rows);
    print!("{table}");
    if let Some(out_dir) = &args.out {
        prepare_output_dir(out_dir, &cfg)?;
        write_text(&out_dir.join("report.txt"), &table)?;
    }
    match first_error {
        None => Ok(()),
        Some(e) => Err(e),
    }
}
