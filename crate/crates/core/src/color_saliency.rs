//! Color-based saliency.
//!
//! Two `n x 3` chroma matrices are built, C1 = (b, V, Cr) and C2 = (a, U, Cb).
//! Each is unrolled into a period-3 snapshot sequence by rotating its columns,
//! so the DMD zero mode holds what the three channels agree on and the sparse
//! residual holds where a pixel stands out in some channels but not others.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::colorspace::{chroma_magnitude, rgb_to_cielab, rgb_to_ycbcr, rgb_to_yuv, ChannelPlane};
use crate::dmd::{residual_scores, separate, DmdConfig, DmdSummary, SnapshotMatrix};
use crate::error::{Error, Result};
use crate::raster::{min_max_normalize, RgbImage, SaliencyMap};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum CombineRule {
    #[default]
    Max,
    Mean,
    C1Only,
    C2Only,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ColorSaliencyConfig {
    /// Number of 3-column rotation blocks; the sequence has `3 * repeats` snapshots.
    pub repeats: usize,
    pub combine_rule: CombineRule,
}

impl Default for ColorSaliencyConfig {
    fn default() -> Self {
        Self {
            repeats: 8,
            combine_rule: CombineRule::Max,
        }
    }
}

impl ColorSaliencyConfig {
    pub fn validate(&self) -> Result<()> {
        if self.repeats < 2 {
            return Err(Error::InvalidConfig(format!(
                "color.repeats must be at least 2, got {}",
                self.repeats
            )));
        }
        Ok(())
    }
}

/// C1 columns are (b, V, Cr), C2 columns are (a, U, Cb); rows follow the
/// row-major pixel order.
#[derive(Debug, Clone, PartialEq)]
pub struct ColorMatrixPair {
    pub c1: DMatrix<f64>,
    pub c2: DMatrix<f64>,
}

fn columns(planes: [&ChannelPlane; 3]) -> Result<DMatrix<f64>> {
    let cols = planes
        .iter()
        .map(|p| chroma_magnitude(p).map(|m| m.to_row_major()))
        .collect::<Result<Vec<_>>>()?;
    let n = cols[0].len();
    Ok(DMatrix::from_fn(n, 3, |i, j| cols[j][i]))
}

pub fn assemble_color_matrices(img: &RgbImage) -> Result<ColorMatrixPair> {
    let (_, u, v) = rgb_to_yuv(img);
    let (_, cb, cr) = rgb_to_ycbcr(img);
    let (_, a, b) = rgb_to_cielab(img);
    Ok(ColorMatrixPair {
        c1: columns([&b, &v, &cr])?,
        c2: columns([&a, &u, &cb])?,
    })
}

/// Snapshot `j` is column `j mod 3` of `c`: each block of three continues
/// the left rotation where the previous block stopped, so the sequence has
/// period 3 and a pure cube-root-of-unity spectrum.
pub fn permute_repeat(c: &DMatrix<f64>, repeats: usize) -> Result<SnapshotMatrix> {
    if repeats < 2 {
        return Err(Error::InvalidConfig(format!(
            "repeats must be at least 2, got {repeats}"
        )));
    }
    if c.ncols() != 3 {
        return Err(Error::ShapeMismatch {
            expected: (c.nrows(), 3),
            actual: c.shape(),
        });
    }
    let mut data = DMatrix::zeros(c.nrows(), 3 * repeats);
    for j in 0..3 * repeats {
        data.set_column(j, &c.column(j % 3));
    }
    SnapshotMatrix::unit(data)
}

/// A branch map together with the decompositions behind it (`None` where the
/// input was all zeros and nothing was decomposed).
#[derive(Debug, Clone)]
pub struct BranchOutput {
    pub map: SaliencyMap,
    pub decompositions: Vec<Option<DmdSummary>>,
}

/// Runs the sequence through DMD and turns the sparse residual into a map.
pub(crate) fn residual_map(
    x: &SnapshotMatrix,
    width: usize,
    height: usize,
    dmd_cfg: &DmdConfig,
) -> Result<(SaliencyMap, Option<DmdSummary>)> {
    let sep = match separate(x, dmd_cfg) {
        Ok(sep) => sep,
        Err(Error::RankZero) => return Ok((SaliencyMap::zeros(width, height), None)),
        Err(e) => return Err(e),
    };
    let scores = residual_scores(&sep.sparse, x.scale());
    let map = SaliencyMap::from_scores(width, height, &scores)?;
    Ok((map, Some(sep.decomposition.summary(&sep.partition))))
}

pub fn color_saliency_detailed(
    img: &RgbImage,
    cfg: &ColorSaliencyConfig,
    dmd_cfg: &DmdConfig,
) -> Result<BranchOutput> {
    cfg.validate()?;
    let (w, h) = (img.width(), img.height());
    let pair = assemble_color_matrices(img)?;
    let (m1, d1) = residual_map(&permute_repeat(&pair.c1, cfg.repeats)?, w, h, dmd_cfg)?;
    let (m2, d2) = residual_map(&permute_repeat(&pair.c2, cfg.repeats)?, w, h, dmd_cfg)?;
    let combined: Vec<f64> = match cfg.combine_rule {
        CombineRule::Max => m1.values().iter().zip(m2.values()).map(|(a, b)| a.max(*b)).collect(),
        CombineRule::Mean => m1.values().iter().zip(m2.values()).map(|(a, b)| 0.5 * (a + b)).collect(),
        CombineRule::C1Only => m1.values().to_vec(),
        CombineRule::C2Only => m2.values().to_vec(),
    };
    Ok(BranchOutput {
        map: SaliencyMap::new(w, h, min_max_normalize(&combined))?,
        decompositions: vec![d1, d2],
    })
}

pub fn color_saliency_map(
    img: &RgbImage,
    cfg: &ColorSaliencyConfig,
    dmd_cfg: &DmdConfig,
) -> Result<SaliencyMap> {
    color_saliency_detailed(img, cfg, dmd_cfg).map(|out| out.map)
}
