use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::projection::RANK_TOL;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SelectionMethod {
    Mcp,
    Iterative,
    Oracle,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupportSet {
    /// Sorted, unique, 0-based.
    pub indices: Vec<usize>,
    pub method: SelectionMethod,
    /// Per-step support sizes (one entry per block for iterative selection).
    pub steps: Vec<usize>,
}

impl SupportSet {
    pub fn new(mut indices: Vec<usize>, method: SelectionMethod) -> Self {
        indices.sort_unstable();
        indices.dedup();
        let steps = vec![indices.len()];
        Self { indices, method, steps }
    }

    pub fn empty(method: SelectionMethod) -> Self {
        Self::new(Vec::new(), method)
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn contains(&self, j: usize) -> bool {
        self.indices.binary_search(&j).is_ok()
    }
}

/// Least squares restricted to the columns in `s`, with the plug-in
/// variance `‖y0 − x0θ‖²/m`. Rank-deficient selections get the
/// minimum-norm solution.
pub fn restricted_least_squares(x0: &DMatrix<f64>, y0: &DVector<f64>, s: &SupportSet) -> Result<(DVector<f64>, f64)> {
    let (m, p) = x0.shape();
    if s.len() >= m {
        return Err(Error::SupportTooLarge { support: s.len(), rows: m });
    }
    if let Some(&j) = s.indices.last() {
        if j >= p {
            return Err(Error::InvalidConfig(format!("support index {j} out of range for p = {p}")));
        }
    }
    let mut theta = DVector::zeros(p);
    if !s.is_empty() {
        let xs = x0.select_columns(&s.indices);
        let coef = solve_min_norm(xs, y0);
        for (k, &j) in s.indices.iter().enumerate() {
            theta[j] = coef[k];
        }
    }
    let rss = (y0 - x0 * &theta).norm_squared();
    Ok((theta, (rss / m as f64).sqrt()))
}

fn solve_min_norm(xs: DMatrix<f64>, y: &DVector<f64>) -> DVector<f64> {
    let k = xs.ncols();
    let qr = xs.clone().qr();
    let r = qr.r();
    let diag: Vec<f64> = r.diagonal().iter().map(|v| v.abs()).collect();
    let max = diag.iter().copied().fold(0.0, f64::max);
    if max > 0.0 && diag.iter().all(|d| *d > RANK_TOL * max) {
        let qty = qr.q().tr_mul(y);
        if let Some(sol) = r.solve_upper_triangular(&qty.rows(0, k).into_owned()) {
            return sol;
        }
    }
    let svd = xs.svd(true, true);
    let eps = RANK_TOL * svd.singular_values.max();
    svd.solve(y, eps).unwrap_or_else(|_| DVector::zeros(k))
}
