use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::model::rank_by_magnitude;

/// Relative tolerance on the pivoted R diagonal for numerical rank.
pub const RANK_TOL: f64 = 1e-10;

/// Best k0-sparse approximation: keeps the k0 largest magnitudes, lowest
/// index first on ties.
pub fn top_k_project(theta: &[f64], k0: usize) -> Vec<f64> {
    let mut out = vec![0.0; theta.len()];
    for &i in rank_by_magnitude(theta).iter().take(k0) {
        out[i] = theta[i];
    }
    out
}

/// `θ_sl + (1/m)·X2ᵀ(Y2 − X2·θ_sl)`.
pub fn debias(theta_sl: &DVector<f64>, x2: &DMatrix<f64>, y2: &DVector<f64>) -> Result<DVector<f64>> {
    if x2.ncols() != theta_sl.len() || x2.nrows() != y2.len() {
        return Err(Error::InvalidConfig("debias: dimension mismatch".into()));
    }
    let m = x2.nrows() as f64;
    let resid = y2 - x2 * theta_sl;
    let out = x2.tr_mul(&resid) / m + theta_sl;
    if out.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("debiased estimator"));
    }
    Ok(out)
}

/// Number of pivoted-QR diagonal entries above `RANK_TOL` times the largest.
pub fn numerical_rank(x: &DMatrix<f64>) -> usize {
    if x.ncols() == 0 || x.nrows() == 0 {
        return 0;
    }
    let r = x.clone().col_piv_qr().r();
    let diag: Vec<f64> = r.diagonal().iter().map(|v| v.abs()).collect();
    let max = diag.iter().copied().fold(0.0, f64::max);
    if max == 0.0 {
        return 0;
    }
    diag.iter().filter(|d| **d > RANK_TOL * max).count()
}

/// Rows form an orthonormal basis of the orthogonal complement of the
/// column span of `x_s`; the result is `(m − rank) × m`.
pub fn orthogonal_complement_projector(x_s: &DMatrix<f64>) -> DMatrix<f64> {
    let m = x_s.nrows();
    let rank = numerical_rank(x_s);
    if rank == 0 {
        return DMatrix::identity(m, m);
    }
    let q_r = x_s.clone().col_piv_qr().q().columns(0, rank).into_owned();
    let mut aug = DMatrix::zeros(m, rank + m);
    aug.columns_mut(0, rank).copy_from(&q_r);
    aug.columns_mut(rank, m).fill_with_identity();
    let q = aug.qr().q();
    q.columns(rank, m - rank).transpose()
}
