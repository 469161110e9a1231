//! End-to-end detection: color and luminance branches, fusion, segmentation.

use serde::{Deserialize, Serialize};

use crate::color_saliency::{color_saliency_detailed, ColorSaliencyConfig};
use crate::dmd::{DmdConfig, DmdSummary};
use crate::error::{Error, Result};
use crate::luminance::{luminance_saliency_detailed, LuminanceConfig};
use crate::raster::{min_max_normalize, BinaryMask, RgbImage, SaliencyMap};
use crate::resample::{fit_within, resize_map, resize_rgb};

/// Upper bound on the adaptive segmentation threshold.
pub const THRESHOLD_CAP: f64 = 0.95;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PipelineConfig {
    pub color_weight: f64,
    pub luminance_weight: f64,
    /// Segmentation threshold is `kappa * mean(map)`, capped at 0.95.
    pub kappa: f64,
    /// Longer image side is downscaled to this before decomposition.
    pub max_dimension: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            color_weight: 0.8,
            luminance_weight: 0.2,
            kappa: 2.0,
            max_dimension: 400,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        let (wc, wl) = (self.color_weight, self.luminance_weight);
        if !(wc >= 0.0 && wl >= 0.0 && wc.is_finite() && wl.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "pipeline weights must be nonnegative, got color_weight={wc}, luminance_weight={wl}"
            )));
        }
        if !(wc + wl > 0.0) {
            return Err(Error::InvalidConfig(
                "pipeline.color_weight + pipeline.luminance_weight must be positive".into(),
            ));
        }
        if !(self.kappa > 0.0 && self.kappa.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "pipeline.kappa must be positive, got {}",
                self.kappa
            )));
        }
        if self.max_dimension < 3 {
            return Err(Error::InvalidConfig(format!(
                "pipeline.max_dimension must be at least 3, got {}",
                self.max_dimension
            )));
        }
        Ok(())
    }
}

/// All knobs of a detection run.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DetectorConfig {
    pub dmd: DmdConfig,
    pub color: ColorSaliencyConfig,
    pub luminance: LuminanceConfig,
    pub pipeline: PipelineConfig,
}

impl DetectorConfig {
    pub fn validate(&self) -> Result<()> {
        self.dmd.validate()?;
        self.color.validate()?;
        self.luminance.validate()?;
        self.pipeline.validate()
    }
}

/// `(w_c * color + w_l * lum) / (w_c + w_l)`, min-max normalized.
pub fn fuse_maps(color: &SaliencyMap, lum: &SaliencyMap, cfg: &PipelineConfig) -> Result<SaliencyMap> {
    if color.dims() != lum.dims() {
        return Err(Error::ShapeMismatch {
            expected: color.dims(),
            actual: lum.dims(),
        });
    }
    let (wc, wl) = (cfg.color_weight, cfg.luminance_weight);
    let total = wc + wl;
    let fused: Vec<f64> = color
        .values()
        .iter()
        .zip(lum.values())
        .map(|(c, l)| (wc * c + wl * l) / total)
        .collect();
    SaliencyMap::new(color.width(), color.height(), min_max_normalize(&fused))
}

/// `min(kappa * mean(map), 0.95)`.
pub fn adaptive_threshold(map: &SaliencyMap, kappa: f64) -> f64 {
    (kappa * map.mean()).min(THRESHOLD_CAP)
}

/// Pixels strictly above the adaptive threshold.
pub fn segment(map: &SaliencyMap, cfg: &PipelineConfig) -> BinaryMask {
    let t = adaptive_threshold(map, cfg.kappa);
    let values = map.values().iter().map(|&v| v > t).collect();
    BinaryMask::new(map.width(), map.height(), values).expect("same shape as map")
}

/// Result of [`detect`], at the input resolution.
#[derive(Debug, Clone)]
pub struct Detection {
    pub map: SaliencyMap,
    pub mask: BinaryMask,
    /// C1, C2, then one entry per luminance channel; empty when the
    /// luminance branch fell back to zeros.
    pub color_decompositions: Vec<Option<DmdSummary>>,
    pub luminance_decompositions: Vec<Option<DmdSummary>>,
    /// `(width, height)` the decompositions ran at.
    pub working_size: (usize, usize),
}

pub fn detect(img: &RgbImage, cfg: &DetectorConfig) -> Result<Detection> {
    cfg.validate()?;
    let (w, h) = (img.width(), img.height());
    let resized;
    let work = match fit_within(w, h, cfg.pipeline.max_dimension) {
        Some((nw, nh)) => {
            resized = resize_rgb(img, nw, nh)?;
            &resized
        }
        None => img,
    };

    let color = color_saliency_detailed(work, &cfg.color, &cfg.dmd)?;
    let luminance = match luminance_saliency_detailed(work, &cfg.luminance, &cfg.dmd) {
        Ok(out) => Some(out),
        Err(Error::TooFewSnapshots(_)) => None,
        Err(e) => return Err(e),
    };
    let (lum_map, lum_decomps) = match luminance {
        Some(out) => (out.map, out.decompositions),
        None => (SaliencyMap::zeros(work.width(), work.height()), Vec::new()),
    };

    let fused = fuse_maps(&color.map, &lum_map, &cfg.pipeline)?;
    let map = if (work.width(), work.height()) == (w, h) {
        fused
    } else {
        resize_map(&fused, w, h)?
    };
    let mask = segment(&map, &cfg.pipeline);
    Ok(Detection {
        map,
        mask,
        color_decompositions: color.decompositions,
        luminance_decompositions: lum_decomps,
        working_size: (work.width(), work.height()),
    })
}
