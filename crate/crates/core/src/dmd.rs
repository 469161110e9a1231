//! Exact dynamic mode decomposition and the zero-mode / residual split.
//!
//! Modes whose continuous-time frequency sits near the origin are stationary
//! across the snapshot sequence; their reconstruction is the low-rank
//! background and whatever remains is the sparse foreground.

use nalgebra::{Complex, DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;

pub type C64 = Complex<f64>;

/// Columns are vectorized snapshots spaced `dt` apart.
#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotMatrix {
    data: DMatrix<f64>,
    dt: f64,
}

impl SnapshotMatrix {
    pub fn new(data: DMatrix<f64>, dt: f64) -> Result<Self> {
        if data.ncols() < 2 {
            return Err(Error::DegenerateInput(data.ncols()));
        }
        if data.nrows() == 0 {
            return Err(Error::InvalidConfig("snapshots must have at least one row".into()));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidConfig(format!("dt must be positive, got {dt}")));
        }
        Ok(Self { data, dt })
    }

    /// Unit spacing, the convention for image-derived sequences.
    pub fn unit(data: DMatrix<f64>) -> Result<Self> {
        Self::new(data, 1.0)
    }

    pub fn data(&self) -> &DMatrix<f64> {
        &self.data
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn nrows(&self) -> usize {
        self.data.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.data.ncols()
    }

    /// Largest absolute entry.
    pub fn scale(&self) -> f64 {
        self.data.amax()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DmdConfig {
    /// Singular values below `rank_tolerance * sigma_1` are discarded.
    pub rank_tolerance: f64,
    /// Modes with `|omega| < zero_mode_epsilon` are background.
    pub zero_mode_epsilon: f64,
}

impl Default for DmdConfig {
    fn default() -> Self {
        Self {
            rank_tolerance: 1e-10,
            zero_mode_epsilon: 1e-2,
        }
    }
}

impl DmdConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rank_tolerance > 0.0 && self.rank_tolerance < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "dmd.rank_tolerance must lie in (0, 1), got {}",
                self.rank_tolerance
            )));
        }
        if !(self.zero_mode_epsilon > 0.0 && self.zero_mode_epsilon.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "dmd.zero_mode_epsilon must be positive, got {}",
                self.zero_mode_epsilon
            )));
        }
        Ok(())
    }
}

/// Eigenvalues, frequencies, unit-norm modes and amplitudes of one DMD run,
/// ordered by `|omega|` ascending then `|b|` descending.
#[derive(Debug, Clone, PartialEq)]
pub struct DmdDecomposition {
    pub eigenvalues: Vec<C64>,
    pub frequencies: Vec<C64>,
    /// `n x r`, one mode per column.
    pub modes: DMatrix<C64>,
    pub amplitudes: Vec<C64>,
    pub dt: f64,
}

impl DmdDecomposition {
    pub fn rank(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `sum_{j in modes} b_j phi_j mu_j^k` for zero-based snapshot index `k`.
    pub fn reconstruct_column(&self, modes: &[usize], k: usize) -> DVector<C64> {
        let mut col = DVector::zeros(self.modes.nrows());
        for &j in modes {
            let coeff = self.amplitudes[j] * power(self.eigenvalues[j], k);
            col.axpy(coeff, &self.modes.column(j), C64::new(1.0, 0.0));
        }
        col
    }

    pub fn summary(&self, partition: &ModePartition) -> DmdSummary {
        DmdSummary {
            rank: self.rank(),
            eigenvalues: self.eigenvalues.iter().map(|z| [z.re, z.im]).collect(),
            frequencies: self
                .frequencies
                .iter()
                .map(|z| (z.re.is_finite() && z.im.is_finite()).then_some([z.re, z.im]))
                .collect(),
            amplitude_magnitudes: self.amplitudes.iter().map(|b| b.norm()).collect(),
            zero_modes: partition.zero.clone(),
        }
    }
}

/// JSON-friendly digest of a decomposition. Frequencies of zero eigenvalues
/// are `null`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DmdSummary {
    pub rank: usize,
    pub eigenvalues: Vec<[f64; 2]>,
    pub frequencies: Vec<Option<[f64; 2]>>,
    pub amplitude_magnitudes: Vec<f64>,
    pub zero_modes: Vec<usize>,
}

/// Zero-based mode indices split into background and foreground sets.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ModePartition {
    pub zero: Vec<usize>,
    pub moving: Vec<usize>,
}

fn power(z: C64, k: usize) -> C64 {
    let mut acc = C64::new(1.0, 0.0);
    for _ in 0..k {
        acc *= z;
    }
    acc
}

/// Principal-branch `ln(mu) / dt`; `mu = 0` maps to `-inf`.
fn frequency(mu: C64, dt: f64) -> C64 {
    if mu.norm() == 0.0 {
        C64::new(f64::NEG_INFINITY, 0.0)
    } else {
        mu.ln() / dt
    }
}

/// Exact DMD with projected modes.
pub fn exact_dmd(x: &SnapshotMatrix, cfg: &DmdConfig) -> Result<DmdDecomposition> {
    let data = x.data();
    let m = data.ncols();
    if m < 2 {
        return Err(Error::DegenerateInput(m));
    }
    if data.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    let x1 = data.columns(0, m - 1).into_owned();
    let x2 = data.columns(1, m - 1);

    let (u, s, v) = linalg::thin_svd(&x1)?;
    let sigma1 = s.first().copied().unwrap_or(0.0);
    if !(sigma1 > 0.0) {
        return Err(Error::RankZero);
    }
    let cutoff = cfg.rank_tolerance * sigma1;
    let r = s.iter().take_while(|&&v| v >= cutoff).count();
    let u_r = u.columns(0, r);
    let v_r = v.columns(0, r);

    // Projected operator U_r^T X2 V_r S_r^-1.
    let mut a_tilde = (u_r.transpose() * x2) * v_r;
    for (k, mut col) in a_tilde.column_iter_mut().enumerate() {
        col /= s[k];
    }

    let (eigenvalues, w) = linalg::eigen(&a_tilde)?;
    let u_c = u_r.map(|v| C64::new(v, 0.0));
    let mut modes = &u_c * &w;
    let mut w_scaled = w;
    for j in 0..r {
        let norm = modes.column(j).norm();
        if norm > 0.0 {
            modes.column_mut(j).unscale_mut(norm);
            w_scaled.column_mut(j).unscale_mut(norm);
        }
    }

    // U_r has orthonormal columns, so fitting x_1 in the mode basis reduces to
    // an r x r least-squares problem in the projected coordinates.
    let x1_proj = u_c.adjoint() * data.column(0).map(|v| C64::new(v, 0.0));
    let amplitudes: Vec<C64> = linalg::lstsq(&w_scaled, &x1_proj)?.iter().copied().collect();

    let frequencies: Vec<C64> = eigenvalues.iter().map(|&mu| frequency(mu, x.dt())).collect();

    let mut order: Vec<usize> = (0..r).collect();
    order.sort_by(|&a, &b| {
        frequencies[a]
            .norm()
            .total_cmp(&frequencies[b].norm())
            .then_with(|| amplitudes[b].norm().total_cmp(&amplitudes[a].norm()))
    });
    let eigenvalues = order.iter().map(|&j| eigenvalues[j]).collect();
    let frequencies = order.iter().map(|&j| frequencies[j]).collect();
    let amplitudes = order.iter().map(|&j| amplitudes[j]).collect();
    let modes = DMatrix::from_fn(modes.nrows(), r, |i, k| modes[(i, order[k])]);

    Ok(DmdDecomposition {
        eigenvalues,
        frequencies,
        modes,
        amplitudes,
        dt: x.dt(),
    })
}

/// Splits modes by `|omega| < zero_mode_epsilon`.
pub fn classify_modes(d: &DmdDecomposition, cfg: &DmdConfig) -> ModePartition {
    let mut partition = ModePartition::default();
    for (j, w) in d.frequencies.iter().enumerate() {
        // -inf has an infinite norm and lands among the moving modes.
        if w.norm() < cfg.zero_mode_epsilon {
            partition.zero.push(j);
        } else {
            partition.moving.push(j);
        }
    }
    partition
}

/// Element-wise modulus of the zero-mode reconstruction, one column per snapshot.
pub fn lowrank_reconstruction(
    x: &SnapshotMatrix,
    d: &DmdDecomposition,
    zero_modes: &[usize],
) -> DMatrix<f64> {
    let (n, m) = (x.nrows(), x.ncols());
    let mut low = DMatrix::zeros(n, m);
    if zero_modes.is_empty() {
        return low;
    }
    for k in 0..m {
        let col = d.reconstruct_column(zero_modes, k);
        for i in 0..n {
            low[(i, k)] = col[i].norm();
        }
    }
    low
}

/// `X - L`.
pub fn sparse_component(x: &SnapshotMatrix, low: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if low.shape() != x.data().shape() {
        return Err(Error::ShapeMismatch {
            expected: x.data().shape(),
            actual: low.shape(),
        });
    }
    Ok(x.data() - low)
}

/// Everything one background/foreground split produces.
#[derive(Debug, Clone)]
pub struct Separation {
    pub decomposition: DmdDecomposition,
    pub partition: ModePartition,
    pub lowrank: DMatrix<f64>,
    pub sparse: DMatrix<f64>,
}

pub fn separate(x: &SnapshotMatrix, cfg: &DmdConfig) -> Result<Separation> {
    let decomposition = exact_dmd(x, cfg)?;
    let partition = classify_modes(&decomposition, cfg);
    let lowrank = lowrank_reconstruction(x, &decomposition, &partition.zero);
    let sparse = sparse_component(x, &lowrank)?;
    Ok(Separation {
        decomposition,
        partition,
        lowrank,
        sparse,
    })
}

/// Residual magnitudes at or below this fraction of the data scale are
/// indistinguishable from rounding in the decomposition.
pub const RESIDUAL_NOISE_FLOOR: f64 = 1e-9;

/// Per-row mean of `|S|` over the snapshots. When the spread of these scores
/// is within rounding of the data scale the scores are flattened to zero so
/// that min-max normalization downstream cannot amplify noise.
pub fn residual_scores(sparse: &DMatrix<f64>, data_scale: f64) -> Vec<f64> {
    let m = sparse.ncols() as f64;
    let scores: Vec<f64> = sparse
        .row_iter()
        .map(|row| row.iter().map(|v| v.abs()).sum::<f64>() / m)
        .collect();
    let (lo, hi) = scores
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    if hi - lo <= RESIDUAL_NOISE_FLOOR * data_scale {
        vec![0.0; scores.len()]
    } else {
        scores
    }
}
