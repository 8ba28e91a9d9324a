use nalgebra::{DMatrix, DVector};

use super::sqrt_lasso::{lambda_at_level, sqrt_lasso_with, SqrtLassoFit, SqrtLassoOptions};
use crate::error::{Error, Result};

/// Cut level `c_sl·σ̂·(8/3)·√(log(p/δ)/m)` below which square-root Lasso
/// coefficients are zeroed.
pub fn threshold_level(sigma_hat: f64, c_sl: f64, p: usize, delta: f64, m: usize) -> f64 {
    c_sl * sigma_hat * (8.0 / 3.0) * ((p as f64 / delta).ln() / m as f64).sqrt()
}

/// Square-root Lasso at penalty `2√(Φ̄⁻¹(δ/(2p)))/√m` followed by hard
/// thresholding; `m` is the number of rows of `x` (which may already be
/// projected).
pub fn threshold_sqrt_lasso(
    x: &DMatrix<f64>,
    y: &DVector<f64>,
    delta: f64,
    c_sl: f64,
) -> Result<(DVector<f64>, SqrtLassoFit)> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidConfig(format!("delta must lie in (0, 1), got {delta}")));
    }
    let lambda = lambda_at_level(delta / (2.0 * x.ncols() as f64), x.nrows());
    let fit = sqrt_lasso_with(x, y, lambda, &SqrtLassoOptions::default())?;
    let cut = threshold_level(fit.sigma_hat, c_sl, x.ncols(), delta, x.nrows());
    let theta = fit.theta_hat.map(|v| if v.abs() < cut { 0.0 } else { v });
    Ok((theta, fit))
}
