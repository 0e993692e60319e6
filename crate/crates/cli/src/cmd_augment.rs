//! `detkit augment`: the two ablation arms. With `--mosaic on`, plan and
//! render a mosaic pass over the manifest; with `--mosaic off`, emit one
//! basic flip/shear augmentation per source image. Both arms are pure
//! functions of the manifest and the master seed.

use std::path::PathBuf;

use clap::Args;
use detkit::config::RunConfig;
use detkit::dataset::{write_label_file, DatasetManifest};
use detkit::mosaic::{
    basic_augment, origin_id, plan_mosaic_pass, planned_records, render_planned, AugmentKind,
    AugmentOp, PassParams, PlannedMosaic, SourceMeta,
};
use detkit::seed::{derive_seed, rng_for};
use detkit::{Error, Result};
use image::RgbImage;
use rand::Rng;
use rayon::prelude::*;

use crate::common::{
    load_image, prepare_output_dir, resolve_manifest, save_image, write_text, ConfigArgs,
    ResolvedEntry,
};

#[derive(Args, Debug)]
#[command(after_help = RunConfig::help_block())]
pub struct AugmentArgs {
    /// Manifest listing the source images and labels
    #[arg(long, value_name = "FILE")]
    pub manifest: PathBuf,

    /// Output directory (overrides output_root)
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,

    /// Emit mosaics (on) or only basic flip/shear augmentations (off)
    #[arg(long, value_parser = ["on", "off"])]
    pub mosaic: Option<String>,

    /// Mosaics to emit; default is one per source image
    #[arg(long, value_name = "N")]
    pub count: Option<usize>,

    /// Recycle mosaic leftovers one generation deep
    #[arg(long, value_parser = ["on", "off"])]
    pub recycle: Option<String>,

    /// Weight mosaic source draws by contained-box area
    #[arg(long = "scored-crops", value_parser = ["on", "off"])]
    pub scored_crops: Option<String>,

    #[command(flatten)]
    pub config: ConfigArgs,
}

pub fn run(args: &AugmentArgs) -> Result<()> {
    let mut cfg = args.config.build()?;
    if let Some(o) = &args.out {
        cfg.output_root = o.to_string_lossy().into_owned();
    }
    if let Some(m) = &args.mosaic {
        cfg.set("mosaic", m)?;
    }
    if let Some(n) = args.count {
        cfg.mosaic_count = Some(n);
    }
    if let Some(r) = &args.recycle {
        cfg.set("recycle", r)?;
    }
    if let Some(s) = &args.scored_crops {
        cfg.set("scored_crops", s)?;
    }
    cfg.validate()?;

    let manifest = DatasetManifest::read(&args.manifest)?;
    let entries = resolve_manifest(&args.manifest, &manifest);
    if entries.is_empty() {
        return Err(Error::invalid("manifest has no entries"));
    }
    let out_dir = PathBuf::from(&cfg.output_root);
    prepare_output_dir(&out_dir, &cfg)?;

    if cfg.mosaic {
        run_mosaic_arm(&cfg, &entries, &out_dir)
    } else {
        run_basic_arm(&cfg, &entries, &out_dir)
    }
}

fn run_mosaic_arm(cfg: &RunConfig, entries: &[ResolvedEntry], out_dir: &std::path::Path) -> Result<()> {
    // Planning needs only dimensions and boxes, so the pass is laid out
    // before any pixels are decoded.
    let metas: Result<Vec<SourceMeta>> = entries
        .iter()
        .map(|e| {
            let (width, height) =
                image::image_dimensions(&e.image).map_err(|err| Error::io(&e.image, err))?;
            let records = detkit::dataset::read_label_file(&e.label)?;
            Ok(SourceMeta {
                id: e.id.clone(),
                width,
                height,
                boxes: records.iter().map(|r| (r.category, r.to_bbox())).collect(),
            })
        })
        .collect();
    let metas = metas?;

    let params = PassParams {
        count: cfg.mosaic_count.unwrap_or(metas.len()),
        canvas: (cfg.canvas_w, cfg.canvas_h),
        master_seed: cfg.seed,
        recycle: cfg.recycle,
        scored_crops: cfg.scored_crops,
        min_visible: cfg.min_visible,
        min_box_pixels: cfg.min_box_pixels,
        center_range: (cfg.center_min_frac, cfg.center_max_frac),
    };
    let planned = plan_mosaic_pass(&metas, &params)?;

    // Decode each source image once, only if some plan actually uses it.
    let mut needed: Vec<usize> = planned
        .iter()
        .flat_map(|p| p.origins.iter().map(|o| o.source))
        .collect();
    needed.sort_unstable();
    needed.dedup();
    let loaded: Result<Vec<(usize, RgbImage)>> = needed
        .par_iter()
        .map(|&i| Ok((i, load_image(&entries[i].image)?)))
        .collect();
    let mut images: Vec<Option<RgbImage>> = (0..entries.len()).map(|_| None).collect();
    for (i, img) in loaded? {
        images[i] = Some(img);
    }

    planned
        .par_iter()
        .map(|p| {
            let originals = p.origins.map(|o| images[o.source].as_ref().expect("loaded above"));
            let rendered = render_planned(p, originals, cfg.resample)?;
            let name = output_name(p);
            save_image(&rendered, &out_dir.join(format!("{name}.png")))?;
            write_text(
                &out_dir.join(format!("{name}.txt")),
                &write_label_file(&planned_records(p))?,
            )
        })
        .collect::<Result<Vec<()>>>()?;

    // Pass manifest: one line per output in output order, naming the
    // image file, its four tile origins, and the per-item seed.
    let mut pass = String::new();
    for p in &planned {
        let ids: Vec<String> = p.origins.iter().map(|o| origin_id(&metas, o)).collect();
        pass.push_str(&format!(
            "{}.png\t{}\t{}\n",
            output_name(p),
            ids.join(","),
            p.item_seed
        ));
    }
    write_text(&out_dir.join("mosaic_pass.txt"), &pass)?;

    let recycled = planned.iter().filter(|p| p.recycled).count();
    println!("mosaics: {}", planned.len());
    println!("recycled: {recycled}");
    Ok(())
}

fn output_name(p: &PlannedMosaic) -> String {
    format!("mosaic_{:05}", p.output_index)
}

fn run_basic_arm(cfg: &RunConfig, entries: &[ResolvedEntry], out_dir: &std::path::Path) -> Result<()> {
    entries
        .par_iter()
        .enumerate()
        .map(|(i, e)| {
            let records = detkit::dataset::read_label_file(&e.label)?;
            let raster = load_image(&e.image)?;
            // Per-item stream: one draw for the op kind, one for the
            // shear direction; flips ignore the magnitude.
            let mut rng = rng_for(derive_seed(cfg.seed, i as u64));
            let kind = match rng.random_range(0..3u8) {
                0 => AugmentKind::Hflip,
                1 => AugmentKind::ShearH,
                _ => AugmentKind::ShearV,
            };
            let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
            let op = match kind {
                AugmentKind::Hflip => AugmentOp::hflip(),
                _ => AugmentOp::new(kind, sign * cfg.shear_magnitude)?,
            };
            let (out_records, out_raster) =
                basic_augment(&records, &raster, op, cfg.min_visible, cfg.min_box_pixels, cfg.resample);
            let name = format!("aug_{i:05}");
            save_image(&out_raster, &out_dir.join(format!("{name}.png")))?;
            write_text(
                &out_dir.join(format!("{name}.txt")),
                &write_label_file(&out_records)?,
            )
        })
        .collect::<Result<Vec<()>>>()?;

    println!("mosaics: 0");
    println!("augmented: {}", entries.len());
    Ok(())
}
