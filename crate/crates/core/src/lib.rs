//! Salient region detection in still images with dynamic mode decomposition.
//!
//! An image is recast as two kinds of snapshot sequences: rotated chroma
//! channel matrices and cumulative truncated-SVD reconstructions of the
//! lightness plane. Exact DMD splits each sequence into a stationary
//! background (zero modes) and a sparse residual whose magnitude becomes the
//! saliency score. [`pipeline::detect`] runs the whole chain; [`eval`] scores
//! maps against ground-truth masks.

pub mod color_saliency;
pub mod colorspace;
pub mod dmd;
pub mod error;
pub mod eval;
mod linalg;
pub mod luminance;
pub mod pipeline;
pub mod raster;
pub mod resample;

pub use error::{Error, Result};
pub use pipeline::{detect, Detection, DetectorConfig};
pub use raster::{BinaryMask, RgbImage, SaliencyMap};
