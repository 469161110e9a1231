//! Luminance-based saliency from truncated-SVD reconstructions.
//!
//! The lightness plane is rebuilt from cumulative runs of intermediate
//! singular values, `i0..=i0`, `i0..=i0+1`, ..., `i0..=i1`. Each rebuild is one
//! snapshot; the leading components (background) are skipped and the tail
//! beyond `i1` (noise) is never added.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::color_saliency::{residual_map, BranchOutput};
use crate::colorspace::{lightness_plane, luma_plane, Channel, ChannelPlane};
use crate::dmd::{DmdConfig, SnapshotMatrix};
use crate::error::{Error, Result};
use crate::linalg;
use crate::raster::{min_max_normalize, RgbImage, SaliencyMap};

/// Singular values at or below this fraction of the largest do not count
/// toward the numerical rank of a plane.
pub const PLANE_RANK_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LuminanceConfig {
    /// 1-based index of the first singular value kept.
    pub first_index: usize,
    /// 1-based index of the last singular value kept, before rank clipping.
    pub last_index: usize,
    /// Any of `L` (CIELab) and `Y` (BT.601).
    pub channels: Vec<Channel>,
}

impl Default for LuminanceConfig {
    fn default() -> Self {
        Self {
            first_index: 3,
            last_index: 20,
            channels: vec![Channel::L, Channel::Y],
        }
    }
}

impl LuminanceConfig {
    pub fn validate(&self) -> Result<()> {
        if self.first_index < 2 {
            return Err(Error::InvalidConfig(format!(
                "luminance.first_index must be at least 2, got {}",
                self.first_index
            )));
        }
        if self.last_index < self.first_index + 2 {
            return Err(Error::InvalidConfig(format!(
                "luminance.last_index must be at least first_index + 2, got {}..{}",
                self.first_index, self.last_index
            )));
        }
        if self.channels.is_empty() {
            return Err(Error::InvalidConfig("luminance.channels is empty".into()));
        }
        if let Some(c) = self.channels.iter().find(|c| !matches!(c, Channel::L | Channel::Y)) {
            return Err(Error::InvalidConfig(format!(
                "luminance.channels accepts only L and Y, got {c:?}"
            )));
        }
        Ok(())
    }
}

struct PlaneSvd {
    u: DMatrix<f64>,
    s: Vec<f64>,
    v: DMatrix<f64>,
    rank: usize,
}

fn plane_svd(p: &ChannelPlane) -> Result<PlaneSvd> {
    if p.values.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    let (u, s, v) = linalg::thin_svd(&p.values)?;
    let cutoff = s.first().copied().unwrap_or(0.0) * PLANE_RANK_TOLERANCE;
    let rank = s.iter().take_while(|&&x| x > cutoff).count();
    Ok(PlaneSvd { u, s, v, rank })
}

/// Singular values of the plane, nonincreasing.
pub fn plane_singular_values(p: &ChannelPlane) -> Result<Vec<f64>> {
    linalg::singular_values(&p.values)
}

/// Numerical rank of the plane.
pub fn plane_rank(p: &ChannelPlane) -> Result<usize> {
    plane_svd(p).map(|svd| svd.rank)
}

/// Adds `sigma_i u_i v_i^T` to a row-major buffer.
fn add_component(out: &mut [f64], svd: &PlaneSvd, i: usize, width: usize) {
    let sigma = svd.s[i];
    for (y, row) in out.chunks_mut(width).enumerate() {
        let uy = sigma * svd.u[(y, i)];
        for (x, cell) in row.iter_mut().enumerate() {
            *cell += uy * svd.v[(x, i)];
        }
    }
}

/// `sum_{i = i0..=min(i1, rank)} sigma_i u_i v_i^T` with 1-based indices; the
/// zero plane when `i0` exceeds the rank.
pub fn svd_reconstruct_range(p: &ChannelPlane, i0: usize, i1: usize) -> Result<ChannelPlane> {
    if i0 < 1 || i1 < i0 {
        return Err(Error::InvalidConfig(format!(
            "singular value range {i0}..{i1} is empty or not 1-based"
        )));
    }
    let svd = plane_svd(p)?;
    let (h, w) = (p.height(), p.width());
    let mut out = vec![0.0; h * w];
    for i in (i0 - 1)..i1.min(svd.rank) {
        add_component(&mut out, &svd, i, w);
    }
    ChannelPlane::new(p.channel, DMatrix::from_row_slice(h, w, &out))
}

/// Cumulative reconstructions over `i0..=i0+k-1`, one per column, `k = 1..=l`.
pub fn build_luminance_sequence(p: &ChannelPlane, cfg: &LuminanceConfig) -> Result<SnapshotMatrix> {
    if p.height() < 3 || p.width() < 3 {
        return Err(Error::InvalidImage(format!(
            "{}x{} plane is smaller than 3x3",
            p.width(),
            p.height()
        )));
    }
    if cfg.first_index < 1 || cfg.last_index < cfg.first_index {
        return Err(Error::InvalidConfig(format!(
            "singular value range {}..{} is empty or not 1-based",
            cfg.first_index, cfg.last_index
        )));
    }
    let svd = plane_svd(p)?;
    let last = cfg.last_index.min(svd.rank);
    let len = (last + 1).saturating_sub(cfg.first_index);
    if len < 3 {
        return Err(Error::TooFewSnapshots(len));
    }
    let (h, w) = (p.height(), p.width());
    let mut data = DMatrix::zeros(h * w, len);
    let mut acc = vec![0.0; h * w];
    for (k, i) in ((cfg.first_index - 1)..last).enumerate() {
        add_component(&mut acc, &svd, i, w);
        data.column_mut(k).copy_from_slice(&acc);
    }
    SnapshotMatrix::unit(data)
}

fn channel_plane(img: &RgbImage, channel: Channel) -> ChannelPlane {
    match channel {
        Channel::L => lightness_plane(img),
        _ => luma_plane(img),
    }
}

pub fn luminance_saliency_detailed(
    img: &RgbImage,
    cfg: &LuminanceConfig,
    dmd_cfg: &DmdConfig,
) -> Result<BranchOutput> {
    cfg.validate()?;
    let (w, h) = (img.width(), img.height());
    let mut sum = vec![0.0; w * h];
    let mut decompositions = Vec::with_capacity(cfg.channels.len());
    for &channel in &cfg.channels {
        let seq = build_luminance_sequence(&channel_plane(img, channel), cfg)?;
        let (map, summary) = residual_map(&seq, w, h, dmd_cfg)?;
        for (acc, v) in sum.iter_mut().zip(map.values()) {
            *acc += v;
        }
        decompositions.push(summary);
    }
    let count = cfg.channels.len() as f64;
    let mean: Vec<f64> = sum.iter().map(|v| v / count).collect();
    Ok(BranchOutput {
        map: SaliencyMap::new(w, h, min_max_normalize(&mean))?,
        decompositions,
    })
}

/// Mean of the per-channel residual maps, re-normalized. Surfaces
/// [`Error::TooFewSnapshots`] for rank-deficient images.
pub fn luminance_saliency_map(
    img: &RgbImage,
    cfg: &LuminanceConfig,
    dmd_cfg: &DmdConfig,
) -> Result<SaliencyMap> {
    luminance_saliency_detailed(img, cfg, dmd_cfg).map(|out| out.map)
}
