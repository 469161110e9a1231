//! In-memory rasters: the 8-bit RGB input, real-valued maps and boolean masks.
//!
//! All rasters are stored row-major, so pixel `(x, y)` lives at `y * width + x`.
//! The same order is used whenever a plane is vectorized into a snapshot column.

use crate::error::{Error, Result};

/// Smallest accepted image side.
pub const MIN_SIDE: usize = 3;

/// An 8-bit RGB raster of `height` rows by `width` columns.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RgbImage {
    width: usize,
    height: usize,
    pixels: Vec<[u8; 3]>,
}

impl RgbImage {
    pub fn new(width: usize, height: usize, pixels: Vec<[u8; 3]>) -> Result<Self> {
        if width < MIN_SIDE || height < MIN_SIDE {
            return Err(Error::InvalidImage(format!(
                "{width}x{height} is smaller than {MIN_SIDE}x{MIN_SIDE}"
            )));
        }
        if pixels.len() != width * height {
            return Err(Error::InvalidImage(format!(
                "expected {} pixels, got {}",
                width * height,
                pixels.len()
            )));
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    /// Builds an image by evaluating `f(x, y)` for every pixel.
    pub fn from_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> [u8; 3],
    ) -> Result<Self> {
        let mut pixels = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                pixels.push(f(x, y));
            }
        }
        Self::new(width, height, pixels)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn len(&self) -> usize {
        self.pixels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pixels.is_empty()
    }

    pub fn pixel(&self, x: usize, y: usize) -> [u8; 3] {
        self.pixels[y * self.width + x]
    }

    pub fn pixels(&self) -> &[[u8; 3]] {
        &self.pixels
    }

    /// True when every pixel has R = G = B.
    pub fn is_achromatic(&self) -> bool {
        self.pixels.iter().all(|&[r, g, b]| r == g && g == b)
    }
}

/// A per-pixel score map with values in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SaliencyMap {
    width: usize,
    height: usize,
    values: Vec<f64>,
}

impl SaliencyMap {
    /// Wraps `values`, rejecting non-finite entries and anything outside `[0, 1]`.
    pub fn new(width: usize, height: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != width * height {
            return Err(Error::ShapeMismatch {
                expected: (height, width),
                actual: (values.len(), 1),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        if values.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::InvalidImage(
                "saliency values must lie in [0, 1]".into(),
            ));
        }
        Ok(Self {
            width,
            height,
            values,
        })
    }

    /// Min-max normalizes arbitrary finite scores into a map; a constant input
    /// yields the all-zero map.
    pub fn from_scores(width: usize, height: usize, scores: &[f64]) -> Result<Self> {
        if scores.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Self::new(width, height, min_max_normalize(scores))
    }

    pub fn zeros(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            values: vec![0.0; width * height],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.values[y * self.width + x]
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// 8-bit export: `round(255 * v)`.
    pub fn to_u8(&self) -> Vec<u8> {
        self.values
            .iter()
            .map(|v| (v * 255.0).round().clamp(0.0, 255.0) as u8)
            .collect()
    }

    /// Inverse of [`SaliencyMap::to_u8`] up to quantization.
    pub fn from_u8(width: usize, height: usize, bytes: &[u8]) -> Result<Self> {
        Self::new(
            width,
            height,
            bytes.iter().map(|&b| f64::from(b) / 255.0).collect(),
        )
    }
}

/// A boolean raster: a segmentation result or a ground-truth mask.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryMask {
    width: usize,
    height: usize,
    values: Vec<bool>,
}

impl BinaryMask {
    pub fn new(width: usize, height: usize, values: Vec<bool>) -> Result<Self> {
        if values.len() != width * height {
            return Err(Error::ShapeMismatch {
                expected: (height, width),
                actual: (values.len(), 1),
            });
        }
        Ok(Self {
            width,
            height,
            values,
        })
    }

    /// Ground-truth convention: 8-bit gray levels at or above 128 are foreground.
    pub fn from_gray(width: usize, height: usize, bytes: &[u8]) -> Result<Self> {
        Self::new(width, height, bytes.iter().map(|&b| b >= 128).collect())
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    pub fn values(&self) -> &[bool] {
        &self.values
    }

    pub fn get(&self, x: usize, y: usize) -> bool {
        self.values[y * self.width + x]
    }

    pub fn count(&self) -> usize {
        self.values.iter().filter(|&&v| v).count()
    }

    /// Black/white export (0 or 255).
    pub fn to_u8(&self) -> Vec<u8> {
        self.values.iter().map(|&v| if v { 255 } else { 0 }).collect()
    }
}

/// Affine rescale to `[0, 1]`; a constant slice maps to all zeros.
pub fn min_max_normalize(values: &[f64]) -> Vec<f64> {
    let (lo, hi) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    if !(hi > lo) {
        return vec![0.0; values.len()];
    }
    let span = hi - lo;
    values
        .iter()
        .map(|&v| ((v - lo) / span).clamp(0.0, 1.0))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_small_and_misshapen_images() {
        assert!(RgbImage::new(2, 5, vec![[0; 3]; 10]).is_err());
        assert!(RgbImage::new(3, 3, vec![[0; 3]; 8]).is_err());
        assert!(RgbImage::new(3, 3, vec![[0; 3]; 9]).is_ok());
    }

    #[test]
    fn normalize_edge_cases() {
        assert_eq!(min_max_normalize(&[0.0, 50.0, 100.0]), vec![0.0, 0.5, 1.0]);
        assert_eq!(min_max_normalize(&[-10.0, 0.0, 30.0]), vec![0.0, 0.25, 1.0]);
        assert_eq!(min_max_normalize(&[4.2; 5]), vec![0.0; 5]);
    }

    #[test]
    fn map_rejects_out_of_range() {
        assert!(SaliencyMap::new(1, 2, vec![0.0, 1.5]).is_err());
        assert!(SaliencyMap::new(1, 2, vec![0.0, f64::NAN]).is_err());
        assert!(SaliencyMap::new(1, 2, vec![0.0, 1.0]).is_ok());
    }

    #[test]
    fn gray_masks_binarize_at_128() {
        let m = BinaryMask::from_gray(4, 1, &[0, 127, 128, 255]).unwrap();
        assert_eq!(m.values(), &[false, false, true, true]);
        assert_eq!(m.to_u8(), vec![0, 0, 255, 255]);
    }

    #[test]
    fn u8_export_rounds() {
        let m = SaliencyMap::new(3, 1, vec![0.0, 0.5, 1.0]).unwrap();
        assert_eq!(m.to_u8(), vec![0, 128, 255]);
    }
}
