//! Core library for building and scoring detection datasets: box geometry
//! and CIoU, classification loss kernels, seeded mosaic augmentation,
//! label/manifest IO with stratified splitting, and PR/mAP evaluation.

pub mod config;
pub mod dataset;
pub mod error;
pub mod eval;
pub mod geometry;
pub mod loss;
pub mod mosaic;
pub mod raster;
pub mod seed;

pub use error::{Error, Result};
pub use geometry::BBox;
