//! Pixel-level helpers over `image::RgbImage`: clamped bilinear/nearest
//! sampling in pixel-center coordinates, exact crops and horizontal flips,
//! and fixed-canvas shear rendering. Box remapping lives in `geometry` and
//! never depends on anything here.

use image::{Rgb, RgbImage};

use crate::config::Resample;
use crate::error::{Error, Result};

/// Sample with bilinear interpolation at continuous pixel-center
/// coordinates: (0, 0) is the center of the top-left pixel. Coordinates
/// are clamped to the image, so edges extend outward.
pub fn sample_bilinear(img: &RgbImage, x: f64, y: f64) -> Rgb<u8> {
    let (w, h) = (img.width() as f64, img.height() as f64);
    let x = x.clamp(0.0, w - 1.0);
    let y = y.clamp(0.0, h - 1.0);
    let x0 = x.floor();
    let y0 = y.floor();
    let fx = x - x0;
    let fy = y - y0;
    let x0 = x0 as u32;
    let y0 = y0 as u32;
    let x1 = (x0 + 1).min(img.width() - 1);
    let y1 = (y0 + 1).min(img.height() - 1);
    let p00 = img.get_pixel(x0, y0);
    let p10 = img.get_pixel(x1, y0);
    let p01 = img.get_pixel(x0, y1);
    let p11 = img.get_pixel(x1, y1);
    let mut out = [0u8; 3];
    for c in 0..3 {
        let top = p00[c] as f64 * (1.0 - fx) + p10[c] as f64 * fx;
        let bot = p01[c] as f64 * (1.0 - fx) + p11[c] as f64 * fx;
        out[c] = (top * (1.0 - fy) + bot * fy).round().clamp(0.0, 255.0) as u8;
    }
    Rgb(out)
}

/// Nearest-neighbor sample at continuous pixel-center coordinates.
pub fn sample_nearest(img: &RgbImage, x: f64, y: f64) -> Rgb<u8> {
    let xi = (x.round() as i64).clamp(0, img.width() as i64 - 1) as u32;
    let yi = (y.round() as i64).clamp(0, img.height() as i64 - 1) as u32;
    *img.get_pixel(xi, yi)
}

pub fn sample(img: &RgbImage, x: f64, y: f64, filter: Resample) -> Rgb<u8> {
    match filter {
        Resample::Bilinear => sample_bilinear(img, x, y),
        Resample::Nearest => sample_nearest(img, x, y),
    }
}

/// Exact pixel crop: `[x, x + w) x [y, y + h)` must lie inside the image.
pub fn crop(img: &RgbImage, x: u32, y: u32, w: u32, h: u32) -> Result<RgbImage> {
    if w == 0 || h == 0 || x + w > img.width() || y + h > img.height() {
        return Err(Error::invalid(format!(
            "crop [{x},{y},{},{}] outside {}x{} image",
            x + w,
            y + h,
            img.width(),
            img.height()
        )));
    }
    let mut out = RgbImage::new(w, h);
    for oy in 0..h {
        for ox in 0..w {
            out.put_pixel(ox, oy, *img.get_pixel(x + ox, y + oy));
        }
    }
    Ok(out)
}

/// Mirror columns; exact, no resampling.
pub fn hflip(img: &RgbImage) -> RgbImage {
    let (w, h) = img.dimensions();
    let mut out = RgbImage::new(w, h);
    for y in 0..h {
        for x in 0..w {
            out.put_pixel(x, y, *img.get_pixel(w - 1 - x, y));
        }
    }
    out
}

/// Shear on a fixed canvas: output pixel centers are pulled back through
/// the inverse map and sampled; source points that fall outside the
/// original image become black. `horizontal` shears x by `m * y`,
/// otherwise y by `m * x`.
pub fn shear(img: &RgbImage, magnitude: f64, horizontal: bool, filter: Resample) -> RgbImage {
    let (w, h) = img.dimensions();
    let mut out = RgbImage::new(w, h);
    for y in 0..h {
        for x in 0..w {
            let cx = x as f64 + 0.5;
            let cy = y as f64 + 0.5;
            let (sx, sy) = if horizontal {
                (cx - magnitude * cy, cy)
            } else {
                (cx, cy - magnitude * cx)
            };
            let px = if sx < 0.0 || sx > w as f64 || sy < 0.0 || sy > h as f64 {
                Rgb([0, 0, 0])
            } else {
                sample(img, sx - 0.5, sy - 0.5, filter)
            };
            out.put_pixel(x, y, px);
        }
    }
    out
}

/// Solid-color image, mostly for fixtures.
pub fn solid(w: u32, h: u32, color: [u8; 3]) -> RgbImage {
    RgbImage::from_pixel(w, h, Rgb(color))
}
