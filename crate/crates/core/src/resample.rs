//! Bilinear resampling with pixel-center alignment.

use crate::error::Result;
use crate::raster::{RgbImage, SaliencyMap};

/// Source coordinate and blend weight for each destination index.
fn taps(src: usize, dst: usize) -> Vec<(usize, usize, f64)> {
    let scale = src as f64 / dst as f64;
    (0..dst)
        .map(|i| {
            let pos = ((i as f64 + 0.5) * scale - 0.5).clamp(0.0, (src - 1) as f64);
            let lo = pos.floor() as usize;
            let hi = (lo + 1).min(src - 1);
            (lo, hi, pos - lo as f64)
        })
        .collect()
}

/// Resamples a row-major single-channel buffer.
pub fn bilinear(values: &[f64], width: usize, height: usize, new_width: usize, new_height: usize) -> Vec<f64> {
    if (width, height) == (new_width, new_height) {
        return values.to_vec();
    }
    let xs = taps(width, new_width);
    let ys = taps(height, new_height);
    let mut out = Vec::with_capacity(new_width * new_height);
    for &(y0, y1, fy) in &ys {
        for &(x0, x1, fx) in &xs {
            let top = values[y0 * width + x0] * (1.0 - fx) + values[y0 * width + x1] * fx;
            let bottom = values[y1 * width + x0] * (1.0 - fx) + values[y1 * width + x1] * fx;
            out.push(top * (1.0 - fy) + bottom * fy);
        }
    }
    out
}

/// Output size that brings the longer side down to `max_dimension`, or `None`
/// when the image already fits.
pub fn fit_within(width: usize, height: usize, max_dimension: usize) -> Option<(usize, usize)> {
    let longest = width.max(height);
    if longest <= max_dimension {
        return None;
    }
    let scale = max_dimension as f64 / longest as f64;
    let side = |s: usize| ((s as f64 * scale).round() as usize).clamp(3, max_dimension);
    Some((side(width), side(height)))
}

pub fn resize_rgb(img: &RgbImage, new_width: usize, new_height: usize) -> Result<RgbImage> {
    let (w, h) = (img.width(), img.height());
    let planes: Vec<Vec<f64>> = (0..3)
        .map(|c| {
            let channel: Vec<f64> = img.pixels().iter().map(|p| f64::from(p[c])).collect();
            bilinear(&channel, w, h, new_width, new_height)
        })
        .collect();
    let pixels = (0..new_width * new_height)
        .map(|i| {
            let q = |c: usize| planes[c][i].round().clamp(0.0, 255.0) as u8;
            [q(0), q(1), q(2)]
        })
        .collect();
    RgbImage::new(new_width, new_height, pixels)
}

/// Resizes a map, clamping the interpolated values back into `[0, 1]`.
pub fn resize_map(map: &SaliencyMap, new_width: usize, new_height: usize) -> Result<SaliencyMap> {
    let values = bilinear(map.values(), map.width(), map.height(), new_width, new_height)
        .into_iter()
        .map(|v| v.clamp(0.0, 1.0))
        .collect();
    SaliencyMap::new(new_width, new_height, values)
}
