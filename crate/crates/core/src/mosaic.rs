//! Mosaic augmentation: four labeled sources are resized to cover the
//! viewports induced by a seeded center point, cropped at seeded offsets,
//! and placed onto one canvas; boxes are remapped analytically and the
//! uncovered leftovers can feed one further generation of mosaics. Also
//! hosts the basic flip/shear augmentations.
//!
//! Every random draw comes from a per-item seeded stream, so a pass is a
//! pure function of (inputs, master seed) no matter how many workers run
//! it.

use image::RgbImage;
use rayon::prelude::*;

use crate::config::Resample;
use crate::dataset::{clip_with_visibility, LabelRecord};
use crate::error::{Error, Result};
use crate::geometry::{affine_apply, Affine2D, BBox};
use crate::raster;
use crate::seed::{derive_seed, rng_for};
use rand::Rng;

/// Integer pixel rectangle, used for crops and leftover regions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PixelRect {
    pub x: u32,
    pub y: u32,
    pub w: u32,
    pub h: u32,
}

impl PixelRect {
    pub fn to_bbox(self) -> BBox {
        BBox::new(
            self.x as f64,
            self.y as f64,
            (self.x + self.w) as f64,
            (self.y + self.h) as f64,
        )
    }
}

/// One mosaic source: an id the caller understands plus pixel dimensions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SourceRef {
    pub id: usize,
    pub width: u32,
    pub height: u32,
}

/// How one tile gets its pixels: which source, the cover-resize scale,
/// the crop taken from the resized source, and the translation that
/// drops the crop onto the canvas viewport.
#[derive(Debug, Clone, PartialEq)]
pub struct TilePlan {
    pub source: usize,
    pub src_w: u32,
    pub src_h: u32,
    /// Uniform resize factor `max(vw/sw, vh/sh)`, so the resized source
    /// covers the viewport with no letterboxing.
    pub scale: f64,
    /// Crop rectangle in resized-source pixels; same size as the viewport.
    pub crop: BBox,
    /// Resized-source space to canvas space; a pure translation because
    /// crop and viewport sizes agree.
    pub placement: Affine2D,
    /// Canvas-space viewport this tile fills.
    pub viewport: BBox,
}

impl TilePlan {
    /// Resized-source dimensions (real-valued).
    pub fn resized_dims(&self) -> (f64, f64) {
        (self.src_w as f64 * self.scale, self.src_h as f64 * self.scale)
    }
}

/// A fully planned mosaic: center, four tile plans, and the uncovered
/// leftover regions per tile (in original source pixels, snapped inward
/// to whole pixels).
#[derive(Debug, Clone, PartialEq)]
pub struct MosaicRecipe {
    pub canvas_w: u32,
    pub canvas_h: u32,
    pub center: (u32, u32),
    pub tiles: [TilePlan; 4],
    pub leftovers: [Vec<PixelRect>; 4],
    pub seed: u64,
}

impl MosaicRecipe {
    pub fn viewports(&self) -> [BBox; 4] {
        [
            self.tiles[0].viewport,
            self.tiles[1].viewport,
            self.tiles[2].viewport,
            self.tiles[3].viewport,
        ]
    }
}

/// Plan one mosaic: sample the center on the seeded stream (integer
/// pixels inside `center_range` fractions of the canvas), then for each
/// of the four tiles (top-left, top-right, bottom-left, bottom-right in
/// that draw order) sample the crop offset within the slack the cover
/// resize leaves. Identical inputs and seed give an identical recipe.
pub fn plan_mosaic(
    sources: &[SourceRef; 4],
    canvas: (u32, u32),
    seed: u64,
    center_range: (f64, f64),
) -> Result<MosaicRecipe> {
    let (w, h) = canvas;
    if w < 2 || h < 2 {
        return Err(Error::invalid(format!("canvas {w}x{h} must be at least 2x2")));
    }
    for s in sources {
        if s.width == 0 || s.height == 0 {
            return Err(Error::invalid(format!(
                "source {} has zero dimension {}x{}",
                s.id, s.width, s.height
            )));
        }
    }
    let mut rng = rng_for(seed);
    let sample_center = |rng: &mut rand_chacha::ChaCha8Rng, dim: u32| -> Result<u32> {
        let lo = ((center_range.0 * dim as f64).ceil() as u32).max(1);
        let hi = ((center_range.1 * dim as f64).floor() as u32).min(dim - 1);
        if lo > hi {
            return Err(Error::invalid(format!(
                "center range {:?} leaves no valid pixel in dimension {dim}",
                center_range
            )));
        }
        Ok(rng.random_range(lo..=hi))
    };
    let cx = sample_center(&mut rng, w)?;
    let cy = sample_center(&mut rng, h)?;

    let viewports = [
        BBox::new(0.0, 0.0, cx as f64, cy as f64),
        BBox::new(cx as f64, 0.0, w as f64, cy as f64),
        BBox::new(0.0, cy as f64, cx as f64, h as f64),
        BBox::new(cx as f64, cy as f64, w as f64, h as f64),
    ];

    let mut tiles = Vec::with_capacity(4);
    let mut leftovers: [Vec<PixelRect>; 4] = Default::default();
    for (i, viewport) in viewports.iter().enumerate() {
        let s = sources[i];
        let (vw, vh) = (viewport.width(), viewport.height());
        let scale = (vw / s.width as f64).max(vh / s.height as f64);
        let (rw, rh) = (s.width as f64 * scale, s.height as f64 * scale);
        let span_x = (rw - vw).max(0.0);
        let span_y = (rh - vh).max(0.0);
        let ox = rng.random_range(0.0..=span_x);
        let oy = rng.random_range(0.0..=span_y);
        let crop = BBox::new(ox, oy, ox + vw, oy + vh);
        let placement = Affine2D::translate(viewport.x_min - ox, viewport.y_min - oy);
        leftovers[i] = uncovered_regions(&crop, rw, rh, scale);
        tiles.push(TilePlan {
            source: s.id,
            src_w: s.width,
            src_h: s.height,
            scale,
            crop,
            placement,
            viewport: *viewport,
        });
    }
    let tiles: [TilePlan; 4] = tiles.try_into().expect("exactly four tiles");
    Ok(MosaicRecipe {
        canvas_w: w,
        canvas_h: h,
        center: (cx, cy),
        tiles,
        leftovers,
        seed,
    })
}

/// Decompose the resized-source complement of the crop into up to four
/// strips (left, right, above, below), then map them back to original
/// source pixels and snap inward to whole pixels. Strips thinner than a
/// pixel vanish.
fn uncovered_regions(crop: &BBox, rw: f64, rh: f64, scale: f64) -> Vec<PixelRect> {
    // Corner coordinates can land an ulp past rw/rh when the cover
    // resize fits exactly; only keep strips with genuinely positive
    // extent so no inverted rectangle is ever constructed.
    let candidates = [
        (0.0, 0.0, crop.x_min, rh),
        (crop.x_max, 0.0, rw, rh),
        (crop.x_min, 0.0, crop.x_max, crop.y_min),
        (crop.x_min, crop.y_max, crop.x_max, rh),
    ];
    let mut out = Vec::new();
    for (x0, y0, x1, y1) in candidates {
        if x1 - x0 <= 0.0 || y1 - y0 <= 0.0 {
            continue;
        }
        let s = BBox::new(x0, y0, x1, y1);
        // Back to original pixels; the 1e-9 slack keeps analytically
        // integer edges from losing a pixel to rounding.
        let x0 = ((s.x_min / scale) - 1e-9).ceil().max(0.0);
        let y0 = ((s.y_min / scale) - 1e-9).ceil().max(0.0);
        let x1 = ((s.x_max / scale) + 1e-9).floor();
        let y1 = ((s.y_max / scale) + 1e-9).floor();
        if x1 - x0 >= 1.0 && y1 - y0 >= 1.0 {
            out.push(PixelRect {
                x: x0 as u32,
                y: y0 as u32,
                w: (x1 - x0) as u32,
                h: (y1 - y0) as u32,
            });
        }
    }
    out
}

/// Remap one tile's normalized source boxes onto the canvas: scale into
/// resized-source pixels, translate into place, clip to the viewport,
/// and apply the shared visibility filter. Survivors are in canvas
/// pixels.
pub fn remap_boxes(
    recipe: &MosaicRecipe,
    tile_index: usize,
    source_boxes: &[(u32, BBox)],
    min_visible: f64,
    min_box_pixels: f64,
) -> Vec<(u32, BBox)> {
    let tile = &recipe.tiles[tile_index];
    let (rw, rh) = tile.resized_dims();
    let mut out = Vec::new();
    for (category, b) in source_boxes {
        let resized = b.to_pixels(rw, rh);
        let placed = affine_apply(&resized, &tile.placement);
        if let Some(clipped) =
            clip_with_visibility(&placed, &tile.viewport, min_visible, min_box_pixels)
        {
            out.push((*category, clipped));
        }
    }
    out
}

/// Render one tile standalone: a viewport-sized raster sampled from the
/// source through the tile's resize and crop.
pub fn render_tile(tile: &TilePlan, source: &RgbImage, filter: Resample) -> Result<RgbImage> {
    if source.dimensions() != (tile.src_w, tile.src_h) {
        return Err(Error::invalid(format!(
            "source is {}x{} but the recipe was planned for {}x{}",
            source.width(),
            source.height(),
            tile.src_w,
            tile.src_h
        )));
    }
    let vw = tile.viewport.width() as u32;
    let vh = tile.viewport.height() as u32;
    let mut out = RgbImage::new(vw, vh);
    for py in 0..vh {
        for px in 0..vw {
            // Tile-local pixel center -> resized-source -> source
            // pixel-center coordinates.
            let rx = px as f64 + 0.5 + tile.crop.x_min;
            let ry = py as f64 + 0.5 + tile.crop.y_min;
            let sx = rx / tile.scale - 0.5;
            let sy = ry / tile.scale - 0.5;
            out.put_pixel(px, py, raster::sample(source, sx, sy, filter));
        }
    }
    Ok(out)
}

/// Render the full canvas by blitting each tile's standalone render at
/// its viewport origin, so a tile in the mosaic always equals the same
/// tile rendered alone.
pub fn render_mosaic(
    recipe: &MosaicRecipe,
    sources: [&RgbImage; 4],
    filter: Resample,
) -> Result<RgbImage> {
    let mut canvas = RgbImage::new(recipe.canvas_w, recipe.canvas_h);
    for (tile, source) in recipe.tiles.iter().zip(sources) {
        let rendered = render_tile(tile, source, filter)?;
        let ox = tile.viewport.x_min as u32;
        let oy = tile.viewport.y_min as u32;
        for (px, py, pixel) in rendered.enumerate_pixels() {
            canvas.put_pixel(ox + px, oy + py, *pixel);
        }
    }
    Ok(canvas)
}

/// A leftover region promoted to a mosaic source candidate: the original
/// source it crops, the pixel region, and the surviving boxes
/// re-normalized to that region.
#[derive(Debug, Clone, PartialEq)]
pub struct LeftoverCrop {
    pub tile_index: usize,
    pub source: usize,
    pub region: PixelRect,
    pub boxes: Vec<(u32, BBox)>,
}

/// Harvest the uncovered regions that still contain boxes. Boxes go
/// through the same visibility filter (in original source pixels) and
/// come out normalized to their region; regions left without boxes are
/// dropped.
pub fn recycle_leftovers(
    recipe: &MosaicRecipe,
    source_boxes: &[Vec<(u32, BBox)>; 4],
    min_visible: f64,
    min_box_pixels: f64,
) -> Vec<LeftoverCrop> {
    let mut out = Vec::new();
    for (tile_index, tile) in recipe.tiles.iter().enumerate() {
        let (sw, sh) = (tile.src_w as f64, tile.src_h as f64);
        for region in &recipe.leftovers[tile_index] {
            let region_box = region.to_bbox();
            let mut survivors = Vec::new();
            for (category, b) in &source_boxes[tile_index] {
                let pixel_box = b.to_pixels(sw, sh);
                if let Some(clipped) =
                    clip_with_visibility(&pixel_box, &region_box, min_visible, min_box_pixels)
                {
                    let local = clipped.shifted(-(region.x as f64), -(region.y as f64));
                    survivors.push((*category, local.to_normalized(region.w as f64, region.h as f64)));
                }
            }
            if !survivors.is_empty() {
                out.push(LeftoverCrop {
                    tile_index,
                    source: tile.source,
                    region: *region,
                    boxes: survivors,
                });
            }
        }
    }
    out
}

/// Kind of basic augmentation from the ablation protocol.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AugmentKind {
    Hflip,
    ShearH,
    ShearV,
}

/// A basic augmentation: horizontal flip or a shear with a bounded
/// factor (the magnitude is ignored for flips).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AugmentOp {
    pub kind: AugmentKind,
    pub magnitude: f64,
}

impl AugmentOp {
    pub fn new(kind: AugmentKind, magnitude: f64) -> Result<Self> {
        if !(-0.5..=0.5).contains(&magnitude) {
            return Err(Error::invalid(format!(
                "shear magnitude {magnitude} outside [-0.5, 0.5]"
            )));
        }
        Ok(Self { kind, magnitude })
    }

    pub fn hflip() -> Self {
        Self { kind: AugmentKind::Hflip, magnitude: 0.0 }
    }
}

/// Apply one basic augmentation to an image and its labels. Flips remap
/// `cx` to exactly `1 - cx`; shears keep the canvas size, take the
/// bounding hull of each sheared box, clip it to the image, and filter
/// with the shared visibility thresholds.
pub fn basic_augment(
    records: &[LabelRecord],
    raster: &RgbImage,
    op: AugmentOp,
    min_visible: f64,
    min_box_pixels: f64,
    filter: Resample,
) -> (Vec<LabelRecord>, RgbImage) {
    let (w, h) = raster.dimensions();
    match op.kind {
        AugmentKind::Hflip => {
            let records = records
                .iter()
                .map(|r| LabelRecord { cx: 1.0 - r.cx, ..*r })
                .collect();
            (records, raster::hflip(raster))
        }
        AugmentKind::ShearH | AugmentKind::ShearV => {
            let horizontal = op.kind == AugmentKind::ShearH;
            let transform = if horizontal {
                Affine2D::shear_h(op.magnitude)
            } else {
                Affine2D::shear_v(op.magnitude)
            };
            let image_box = BBox::new(0.0, 0.0, w as f64, h as f64);
            let mut out = Vec::new();
            for r in records {
                let hull = affine_apply(&r.to_bbox().to_pixels(w as f64, h as f64), &transform);
                if let Some(clipped) =
                    clip_with_visibility(&hull, &image_box, min_visible, min_box_pixels)
                {
                    out.push(LabelRecord::from_bbox(
                        r.category,
                        &clipped.to_normalized(w as f64, h as f64),
                    ));
                }
            }
            (out, raster::shear(raster, op.magnitude, horizontal, filter))
        }
    }
}

/// In-memory mosaic source: id string for manifests, dims, and
/// normalized boxes.
#[derive(Debug, Clone)]
pub struct SourceMeta {
    pub id: String,
    pub width: u32,
    pub height: u32,
    pub boxes: Vec<(u32, BBox)>,
}

/// Knobs for one mosaic pass.
#[derive(Debug, Clone)]
pub struct PassParams {
    pub count: usize,
    pub canvas: (u32, u32),
    pub master_seed: u64,
    pub recycle: bool,
    pub scored_crops: bool,
    pub min_visible: f64,
    pub min_box_pixels: f64,
    pub center_range: (f64, f64),
}

/// Where a planned tile's pixels come from: a source index, optionally
/// restricted to a leftover region of it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TileOrigin {
    pub source: usize,
    pub region: Option<PixelRect>,
}

/// One planned output of a pass: everything needed to render it and to
/// write its labels, fully determined before any pixel work happens.
#[derive(Debug, Clone, PartialEq)]
pub struct PlannedMosaic {
    pub output_index: usize,
    pub item_seed: u64,
    pub recycled: bool,
    pub recipe: MosaicRecipe,
    pub origins: [TileOrigin; 4],
    /// Remapped boxes in canvas pixels.
    pub boxes: Vec<(u32, BBox)>,
}

/// Stable id string for a tile origin: the source id, plus the region
/// for leftover crops.
pub fn origin_id(sources: &[SourceMeta], origin: &TileOrigin) -> String {
    let base = &sources[origin.source].id;
    match origin.region {
        None => base.clone(),
        Some(r) => format!("{base}[{},{},{},{}]", r.x, r.y, r.x + r.w, r.y + r.h),
    }
}

// Seed-stream layout for a pass: item i draws its sources from
// derive_seed(item_seed, 0) and plans from derive_seed(item_seed, 1);
// recycled chunk j gets item index 2^63 + j so the two generations can
// never collide.
const RECYCLE_INDEX_BASE: u64 = 1 << 63;

fn draw_sources(
    rng: &mut rand_chacha::ChaCha8Rng,
    weights: Option<&[f64]>,
    n: usize,
) -> [usize; 4] {
    let mut out = [0usize; 4];
    match weights {
        None => {
            for slot in &mut out {
                *slot = rng.random_range(0..n);
            }
        }
        Some(w) => {
            let total: f64 = w.iter().sum();
            for slot in &mut out {
                let mut r = rng.random_range(0.0..total);
                let mut chosen = n - 1;
                for (i, wi) in w.iter().enumerate() {
                    if r < *wi {
                        chosen = i;
                        break;
                    }
                    r -= wi;
                }
                *slot = chosen;
            }
        }
    }
    out
}

fn plan_one(
    metas: &[SourceMeta],
    origins: [TileOrigin; 4],
    dims: [(u32, u32); 4],
    boxes: [&[(u32, BBox)]; 4],
    output_index: usize,
    item_seed: u64,
    recycled: bool,
    params: &PassParams,
) -> Result<(PlannedMosaic, Vec<LeftoverCrop>)> {
    let refs = [
        SourceRef { id: origins[0].source, width: dims[0].0, height: dims[0].1 },
        SourceRef { id: origins[1].source, width: dims[1].0, height: dims[1].1 },
        SourceRef { id: origins[2].source, width: dims[2].0, height: dims[2].1 },
        SourceRef { id: origins[3].source, width: dims[3].0, height: dims[3].1 },
    ];
    let recipe = plan_mosaic(&refs, params.canvas, derive_seed(item_seed, 1), params.center_range)?;
    let mut canvas_boxes = Vec::new();
    for tile in 0..4 {
        canvas_boxes.extend(remap_boxes(
            &recipe,
            tile,
            boxes[tile],
            params.min_visible,
            params.min_box_pixels,
        ));
    }
    let leftovers = if params.recycle && !recycled {
        let per_tile: [Vec<(u32, BBox)>; 4] = [
            boxes[0].to_vec(),
            boxes[1].to_vec(),
            boxes[2].to_vec(),
            boxes[3].to_vec(),
        ];
        recycle_leftovers(&recipe, &per_tile, params.min_visible, params.min_box_pixels)
    } else {
        Vec::new()
    };
    let _ = metas;
    Ok((
        PlannedMosaic {
            output_index,
            item_seed,
            recycled,
            recipe,
            origins,
            boxes: canvas_boxes,
        },
        leftovers,
    ))
}

/// Plan a whole pass: `count` first-generation mosaics (sources drawn
/// with replacement from the seeded per-item stream), plus one further
/// generation built from recycled leftovers when enabled. Purely a
/// function of the inputs and `master_seed`; items are planned in
/// parallel and emitted in output order.
pub fn plan_mosaic_pass(metas: &[SourceMeta], params: &PassParams) -> Result<Vec<PlannedMosaic>> {
    if metas.is_empty() {
        return Err(Error::invalid("mosaic pass needs at least one source image"));
    }
    let weights: Option<Vec<f64>> = if params.scored_crops {
        let w: Vec<f64> = metas
            .iter()
            .map(|m| m.boxes.iter().map(|(_, b)| b.area()).sum::<f64>())
            .collect();
        if w.iter().sum::<f64>() > 0.0 {
            Some(w)
        } else {
            None
        }
    } else {
        None
    };

    let first: Result<Vec<(PlannedMosaic, Vec<LeftoverCrop>)>> = (0..params.count)
        .into_par_iter()
        .map(|i| {
            let item_seed = derive_seed(params.master_seed, i as u64);
            let mut rng = rng_for(derive_seed(item_seed, 0));
            let picks = draw_sources(&mut rng, weights.as_deref(), metas.len());
            let origins = picks.map(|source| TileOrigin { source, region: None });
            let dims = picks.map(|s| (metas[s].width, metas[s].height));
            let boxes = picks.map(|s| metas[s].boxes.as_slice());
            plan_one(metas, origins, dims, boxes, i, item_seed, false, params)
        })
        .collect();
    let first = first?;

    let mut planned: Vec<PlannedMosaic> = Vec::with_capacity(first.len());
    let mut recycled_pool: Vec<LeftoverCrop> = Vec::new();
    for (p, leftovers) in first {
        planned.push(p);
        recycled_pool.extend(leftovers);
    }

    if params.recycle && !recycled_pool.is_empty() {
        let chunks: Vec<Vec<&LeftoverCrop>> = recycled_pool
            .chunks(4)
            .map(|c| {
                // Cycle a short final chunk: drawing the same crop more
                // than once mirrors sampling sources with replacement.
                (0..4).map(|i| &c[i % c.len()]).collect()
            })
            .collect();
        let second: Result<Vec<(PlannedMosaic, Vec<LeftoverCrop>)>> = chunks
            .into_par_iter()
            .enumerate()
            .map(|(j, chunk)| {
                let item_seed = derive_seed(params.master_seed, RECYCLE_INDEX_BASE + j as u64);
                let origins = [
                    TileOrigin { source: chunk[0].source, region: Some(chunk[0].region) },
                    TileOrigin { source: chunk[1].source, region: Some(chunk[1].region) },
                    TileOrigin { source: chunk[2].source, region: Some(chunk[2].region) },
                    TileOrigin { source: chunk[3].source, region: Some(chunk[3].region) },
                ];
                let dims = [
                    (chunk[0].region.w, chunk[0].region.h),
                    (chunk[1].region.w, chunk[1].region.h),
                    (chunk[2].region.w, chunk[2].region.h),
                    (chunk[3].region.w, chunk[3].region.h),
                ];
                let boxes = [
                    chunk[0].boxes.as_slice(),
                    chunk[1].boxes.as_slice(),
                    chunk[2].boxes.as_slice(),
                    chunk[3].boxes.as_slice(),
                ];
                plan_one(
                    metas,
                    origins,
                    dims,
                    boxes,
                    params.count + j,
                    item_seed,
                    true,
                    params,
            )
            })
            .collect();
        planned.extend(second?.into_iter().map(|(p, _)| p));
    }
    Ok(planned)
}

/// Render a planned mosaic from the four origin images (full originals;
/// leftover regions are cropped out here).
pub fn render_planned(
    planned: &PlannedMosaic,
    originals: [&RgbImage; 4],
    filter: Resample,
) -> Result<RgbImage> {
    let mut tiles: Vec<RgbImage> = Vec::with_capacity(4);
    for (origin, img) in planned.origins.iter().zip(originals) {
        let tile_img = match origin.region {
            None => (*img).clone(),
            Some(r) => raster::crop(img, r.x, r.y, r.w, r.h)?,
        };
        tiles.push(tile_img);
    }
    render_mosaic(
        &planned.recipe,
        [&tiles[0], &tiles[1], &tiles[2], &tiles[3]],
        filter,
    )
}

/// Canvas-pixel boxes of a planned mosaic as normalized label records.
pub fn planned_records(planned: &PlannedMosaic) -> Vec<LabelRecord> {
    planned
        .boxes
        .iter()
        .map(|(category, b)| {
            LabelRecord::from_bbox(
                *category,
                &b.to_normalized(planned.recipe.canvas_w as f64, planned.recipe.canvas_h as f64),
            )
        })
        .collect()
}

/// One source with pixels attached, for in-memory passes.
#[derive(Debug, Clone)]
pub struct SourceImage {
    pub meta: SourceMeta,
    pub raster: RgbImage,
}

/// A rendered pass output.
#[derive(Debug)]
pub struct MosaicOutput {
    pub planned: PlannedMosaic,
    pub image: RgbImage,
    pub records: Vec<LabelRecord>,
}

/// Plan and render a whole pass in memory.
pub fn run_mosaic_pass(
    sources: &[SourceImage],
    params: &PassParams,
    filter: Resample,
) -> Result<Vec<MosaicOutput>> {
    let metas: Vec<SourceMeta> = sources.iter().map(|s| s.meta.clone()).collect();
    for (s, m) in sources.iter().zip(&metas) {
        if s.raster.dimensions() != (m.width, m.height) {
            return Err(Error::invalid(format!(
                "source {} raster is {}x{} but meta says {}x{}",
                m.id,
                s.raster.width(),
                s.raster.height(),
                m.width,
                m.height
            )));
        }
    }
    let planned = plan_mosaic_pass(&metas, params)?;
    planned
        .into_par_iter()
        .map(|p| {
            let originals = [
                &sources[p.origins[0].source].raster,
                &sources[p.origins[1].source].raster,
                &sources[p.origins[2].source].raster,
                &sources[p.origins[3].source].raster,
            ];
            let image = render_planned(&p, originals, filter)?;
            let records = planned_records(&p);
            Ok(MosaicOutput { planned: p, image, records })
        })
        .collect()
}
