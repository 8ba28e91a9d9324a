use nalgebra::{DMatrix, DVector};

use super::normalize::{column_normalize, ZERO_COLUMN_NORM};
use super::sqrt_lasso::dot;
use crate::error::{Error, Result};

/// `λ∫₀ᵗ (1 − x/(κλ))₊ dx`.
pub fn mcp_penalty(t: f64, lambda: f64, kappa: f64) -> f64 {
    if t <= kappa * lambda {
        lambda * t - t * t / (2.0 * kappa)
    } else {
        kappa * lambda * lambda / 2.0
    }
}

/// Minimizer of `(θ − z)² + ρ(|θ|; λ, κ)`; requires κ > 1/2.
pub fn firm_threshold(z: f64, lambda: f64, kappa: f64) -> f64 {
    let a = z.abs();
    if a <= lambda / 2.0 {
        0.0
    } else if a <= kappa * lambda {
        z.signum() * (a - lambda / 2.0) / (1.0 - 1.0 / (2.0 * kappa))
    } else {
        z
    }
}

#[derive(Debug, Clone)]
pub struct McpFit {
    /// Coefficients on the original column scale.
    pub theta: DVector<f64>,
    pub stationarity_residual: f64,
    pub sweeps: usize,
}

pub const MCP_MAX_SWEEPS: usize = 2000;

/// Cyclic coordinate descent on `‖Y − Tθ‖² + Σ ρ(|θ_j|; λ, κ)` over the
/// column-normalized design `T`. `init` is on the original scale.
pub fn mcp_fit(
    x: &DMatrix<f64>,
    y: &DVector<f64>,
    lambda: f64,
    kappa: f64,
    init: Option<&DVector<f64>>,
) -> Result<McpFit> {
    if !(lambda > 0.0) || !(kappa > 0.5) {
        return Err(Error::InvalidConfig(format!(
            "MCP needs lambda > 0 and kappa > 1/2, got lambda = {lambda}, kappa = {kappa}"
        )));
    }
    let (m, p) = x.shape();
    let nd = column_normalize(x);
    let live: Vec<usize> = (0..p).filter(|&j| nd.norms[j] >= ZERO_COLUMN_NORM).collect();
    let t = nd.t.as_slice();
    let col = |j: usize| &t[j * m..(j + 1) * m];

    let mut theta = vec![0.0; p];
    if let Some(init) = init {
        for &j in &live {
            theta[j] = init[j] * nd.norms[j];
        }
    }
    let fitted = &nd.t * DVector::from_column_slice(&theta);
    let mut r: Vec<f64> = (y - fitted).iter().copied().collect();
    let tol = 1e-10 * y.norm().max(f64::MIN_POSITIVE);

    let sweep = |idx: &[usize], theta: &mut [f64], r: &mut [f64]| -> f64 {
        let mut max_change: f64 = 0.0;
        for &j in idx {
            let c = col(j);
            let z = dot(c, r) + theta[j];
            let new = firm_threshold(z, lambda, kappa);
            let diff = new - theta[j];
            if diff != 0.0 {
                for (ri, ci) in r.iter_mut().zip(c) {
                    *ri -= diff * ci;
                }
                theta[j] = new;
                max_change = max_change.max(diff.abs());
            }
        }
        max_change
    };

    let mut sweeps = 0;
    loop {
        if sweeps >= MCP_MAX_SWEEPS {
            return Err(Error::DidNotConverge {
                solver: "MCP",
                iterations: sweeps,
                residual: stationarity(&live, &col, &r, &theta, lambda, kappa),
                iterate: back_scale(&theta, &nd.norms),
            });
        }
        sweeps += 1;
        if sweep(&live, &mut theta, &mut r) < tol {
            break;
        }
        let active: Vec<usize> = live.iter().copied().filter(|&j| theta[j] != 0.0).collect();
        for _ in 0..10_000 {
            if sweep(&active, &mut theta, &mut r) < tol {
                break;
            }
        }
    }
    let residual = stationarity(&live, &col, &r, &theta, lambda, kappa);
    Ok(McpFit { theta: DVector::from_vec(back_scale(&theta, &nd.norms)), stationarity_residual: residual, sweeps })
}

/// Max over coordinates of the distance from 0 to the subdifferential.
fn stationarity<'a>(
    live: &[usize],
    col: &impl Fn(usize) -> &'a [f64],
    r: &[f64],
    theta: &[f64],
    lambda: f64,
    kappa: f64,
) -> f64 {
    live.iter()
        .map(|&j| {
            let g = 2.0 * dot(col(j), r);
            if theta[j] == 0.0 {
                (g.abs() - lambda).max(0.0)
            } else {
                let slope = (lambda - theta[j].abs() / kappa).max(0.0);
                (-g + slope * theta[j].signum()).abs()
            }
        })
        .fold(0.0, f64::max)
}

fn back_scale(theta: &[f64], norms: &[f64]) -> Vec<f64> {
    theta.iter().zip(norms).map(|(t, n)| if *n >= ZERO_COLUMN_NORM { t / n } else { 0.0 }).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn penalty_values() {
        assert_eq!(mcp_penalty(0.0, 1.0, 2.0), 0.0);
        assert_eq!(mcp_penalty(1.0, 1.0, 2.0), 0.75);
        assert_eq!(mcp_penalty(5.0, 1.0, 2.0), 1.0);
    }

    #[test]
    fn huge_lambda_gives_zero() {
        let x = DMatrix::from_fn(20, 5, |i, j| (((i * 3 + j * 7) % 9) as f64 - 4.0) / 2.0);
        let y = DVector::from_fn(20, |i, _| (i as f64 * 0.7).cos());
        let lambda = 10.0 * (x.tr_mul(&y)).amax();
        let fit = mcp_fit(&x, &y, lambda, 3.0, None).unwrap();
        assert!(fit.theta.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn orthonormal_design_matches_grid_prox() {
        // columns e_1..e_3 in R^5: each coordinate solves its own 1-d problem
        let mut x = DMatrix::zeros(5, 3);
        for j in 0..3 {
            x[(j, j)] = 1.0;
        }
        let y = DVector::from_vec(vec![0.3, 1.4, 5.0, 0.7, -0.2]);
        let (lambda, kappa) = (1.0, 2.0);
        let fit = mcp_fit(&x, &y, lambda, kappa, None).unwrap();
        for j in 0..3 {
            let z = y[j];
            let mut best = (f64::INFINITY, 0.0);
            let mut t = -8.0;
            while t <= 8.0 {
                let v = (t - z) * (t - z) + mcp_penalty(f64::abs(t), lambda, kappa);
                if v < best.0 {
                    best = (v, t);
                }
                t += 1e-5;
            }
            assert!((fit.theta[j] - best.1).abs() < 2e-5, "coord {j}: {} vs {}", fit.theta[j], best.1);
        }
        assert!(fit.stationarity_residual <= 1e-7);
    }

    #[test]
    fn stationary_on_random_design() {
        let x = DMatrix::from_fn(40, 60, |i, j| (((i * 17 + j * 29 + i * j) % 23) as f64 - 11.0) / 6.0);
        let mut truth = DVector::zeros(60);
        truth[3] = 2.0;
        truth[10] = -1.5;
        let y = &x * &truth + DVector::from_fn(40, |i, _| 0.3 * (i as f64 * 1.3).sin());
        let fit = mcp_fit(&x, &y, 2.0, 3.0, None).unwrap();
        assert!(fit.stationarity_residual <= 1e-7, "{}", fit.stationarity_residual);
    }

    #[test]
    fn rejects_bad_kappa() {
        let x = DMatrix::identity(2, 2);
        assert!(mcp_fit(&x, &DVector::zeros(2), 1.0, 0.5, None).is_err());
    }
}
