//! `detkit crop-partial`: cut every manifest image into its left, right,
//! upper, and lower halves, remapping labels into each crop.

use std::collections::HashMap;
use std::path::PathBuf;

use clap::Args;
use detkit::config::RunConfig;
use detkit::dataset::{emit_partial_suite, write_label_file, DatasetManifest};
use detkit::{Error, Result};
use rayon::prelude::*;

use crate::common::{
    entry_stem, load_image, prepare_output_dir, resolve_manifest, save_image, write_text,
    ConfigArgs,
};

#[derive(Args, Debug)]
#[command(after_help = RunConfig::help_block())]
pub struct CropArgs {
    /// Manifest listing the images to crop
    #[arg(long, value_name = "FILE")]
    pub manifest: PathBuf,

    /// Output directory (overrides output_root)
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,

    #[command(flatten)]
    pub config: ConfigArgs,
}

pub fn run(args: &CropArgs) -> Result<()> {
    let mut cfg = args.config.build()?;
    if let Some(o) = &args.out {
        cfg.output_root = o.to_string_lossy().into_owned();
    }
    cfg.validate()?;

    let manifest = DatasetManifest::read(&args.manifest)?;
    let entries = resolve_manifest(&args.manifest, &manifest);
    if entries.is_empty() {
        return Err(Error::invalid("manifest has no entries"));
    }

    // Outputs are written flat as <stem>_L.png etc., so two entries with
    // the same stem would silently overwrite each other; refuse instead.
    let mut stems: HashMap<String, &str> = HashMap::new();
    for e in &entries {
        let stem = entry_stem(&PathBuf::from(&e.id))?;
        if let Some(first) = stems.insert(stem.clone(), &e.id) {
            return Err(Error::invalid(format!(
                "entries {first:?} and {:?} share the output stem {stem:?}",
                e.id
            )));
        }
    }

    let out_dir = PathBuf::from(&cfg.output_root);
    prepare_output_dir(&out_dir, &cfg)?;

    // (boxes before, boxes after) per entry; summed for the summary.
    let counts: Result<Vec<(usize, usize)>> = entries
        .par_iter()
        .map(|e| {
            let records = detkit::dataset::read_label_file(&e.label)?;
            let raster = load_image(&e.image)?;
            let suite = emit_partial_suite(&records, &raster, cfg.min_visible, cfg.min_box_pixels)?;
            let stem = entry_stem(&PathBuf::from(&e.id))?;
            let mut kept = 0;
            for (half, recs, img) in &suite {
                let name = format!("{stem}{}", half.suffix());
                save_image(img, &out_dir.join(format!("{name}.png")))?;
                write_text(&out_dir.join(format!("{name}.txt")), &write_label_file(recs)?)?;
                kept += recs.len();
            }
            Ok((records.len(), kept))
        })
        .collect();
    let counts = counts?;

    let boxes_in: usize = counts.iter().map(|(b, _)| b).sum();
    let boxes_out: usize = counts.iter().map(|(_, k)| k).sum();
    println!("images: {}", entries.len());
    println!("outputs: {}", entries.len() * 4);
    println!("boxes_in: {boxes_in}");
    println!("boxes_out: {boxes_out}");
    Ok(())
}
