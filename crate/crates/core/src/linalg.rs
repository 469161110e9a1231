//! Thin adapters from nalgebra containers to faer's dense factorizations.
//!
//! faer runs sequentially here (no rayon feature), so results do not depend
//! on the number of worker threads.

use faer::Mat;
use nalgebra::{Complex, DMatrix, DVector};

use crate::error::{Error, Result};

type C64 = Complex<f64>;

fn to_faer<T: Copy>(m: &DMatrix<T>) -> Mat<T> {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

/// Indices that sort `s` nonincreasing. faer's divide-and-conquer SVD can
/// leave deflated singular values out of order.
fn descending_order(s: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..s.len()).collect();
    order.sort_by(|&a, &b| s[b].total_cmp(&s[a]));
    order
}

/// Thin SVD `A = U diag(s) V^T` with `s` nonincreasing. Returns `(U, s, V)`.
pub fn thin_svd(a: &DMatrix<f64>) -> Result<(DMatrix<f64>, Vec<f64>, DMatrix<f64>)> {
    let svd = to_faer(a)
        .thin_svd()
        .map_err(|e| Error::Factorization(format!("svd: {e:?}")))?;
    let (u, v) = (svd.U(), svd.V());
    let raw: Vec<f64> = svd.S().column_vector().iter().copied().collect();
    let order = descending_order(&raw);
    let s = order.iter().map(|&k| raw[k]).collect();
    let u = DMatrix::from_fn(u.nrows(), order.len(), |i, j| u[(i, order[j])]);
    let v = DMatrix::from_fn(v.nrows(), order.len(), |i, j| v[(i, order[j])]);
    Ok((u, s, v))
}

/// Singular values only, nonincreasing.
pub fn singular_values(a: &DMatrix<f64>) -> Result<Vec<f64>> {
    let mut s = to_faer(a)
        .singular_values()
        .map_err(|e| Error::Factorization(format!("svd: {e:?}")))?;
    s.sort_by(|a, b| b.total_cmp(a));
    Ok(s)
}

/// Eigenvalues and (unnormalized) eigenvectors of a square real matrix.
pub fn eigen(a: &DMatrix<f64>) -> Result<(Vec<C64>, DMatrix<C64>)> {
    let evd = to_faer(a)
        .eigen()
        .map_err(|e| Error::Factorization(format!("eigen: {e:?}")))?;
    let values = evd.S().column_vector().iter().copied().collect();
    let u = evd.U();
    Ok((values, DMatrix::from_fn(u.nrows(), u.ncols(), |i, j| u[(i, j)])))
}

/// Minimum-norm least-squares solution of `a x = b` via the pseudo-inverse;
/// singular values below `1e-12 * s_max` are treated as zero.
pub fn lstsq(a: &DMatrix<C64>, b: &DVector<C64>) -> Result<DVector<C64>> {
    let svd = to_faer(a)
        .thin_svd()
        .map_err(|e| Error::Factorization(format!("svd: {e:?}")))?;
    let (u, v) = (svd.U(), svd.V());
    let s: Vec<f64> = svd.S().column_vector().iter().map(|z| z.re).collect();
    let smax = s.iter().copied().fold(0.0, f64::max);
    let cutoff = smax * 1e-12;
    let mut x = DVector::<C64>::zeros(a.ncols());
    for (k, &sk) in s.iter().enumerate() {
        if !(sk > cutoff) {
            continue;
        }
        let mut proj = C64::new(0.0, 0.0);
        for i in 0..u.nrows() {
            proj += u[(i, k)].conj() * b[i];
        }
        let coeff = proj / sk;
        for i in 0..v.nrows() {
            x[i] += v[(i, k)] * coeff;
        }
    }
    Ok(x)
}
