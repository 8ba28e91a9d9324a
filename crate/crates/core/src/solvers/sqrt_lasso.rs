use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};

use super::normalize::column_normalize;
use crate::error::{Error, Result};

/// Penalty level for the square-root Lasso on a unit-column design with `m`
/// rows: `2√(Φ̄⁻¹(δ/(4p)))/√m`.
pub fn sqrt_lasso_lambda(p: usize, m: usize, delta: f64) -> f64 {
    lambda_at_level(delta / (4.0 * p as f64), m)
}

/// `2√(Φ̄⁻¹(q))/√m`.
pub fn lambda_at_level(q: f64, m: usize) -> f64 {
    2.0 * upper_normal_quantile(q).sqrt() / (m as f64).sqrt()
}

/// Φ̄⁻¹(q), evaluated through the lower tail so tiny `q` keeps precision.
pub fn upper_normal_quantile(q: f64) -> f64 {
    -Normal::standard().inverse_cdf(q)
}

#[derive(Debug, Clone)]
pub struct SqrtLassoOptions {
    /// Run the classical Lasso with this known noise level instead.
    pub known_sigma: Option<f64>,
    pub max_outer: usize,
    /// Relative objective decrease below which a full pass counts as stalled.
    pub rel_tol: f64,
    pub kkt_tol: f64,
}

impl Default for SqrtLassoOptions {
    fn default() -> Self {
        Self { known_sigma: None, max_outer: 500, rel_tol: 1e-10, kkt_tol: 1e-6 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TracePoint {
    pub iteration: usize,
    pub objective: f64,
    pub sigma_hat: f64,
}

#[derive(Debug, Clone)]
pub struct SqrtLassoFit {
    /// Coefficients on the original column scale.
    pub theta_hat: DVector<f64>,
    /// `‖Y − Xθ̂‖/√m`.
    pub sigma_hat: f64,
    pub lambda: f64,
    pub iterations: usize,
    pub kkt_residual: f64,
    pub objective: f64,
    pub trace: Vec<TracePoint>,
}

pub fn sqrt_lasso(x: &DMatrix<f64>, y: &DVector<f64>, delta: f64) -> Result<SqrtLassoFit> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidConfig(format!("delta must lie in (0,1), got {delta}")));
    }
    let lambda = sqrt_lasso_lambda(x.ncols(), x.nrows(), delta);
    sqrt_lasso_with(x, y, lambda, &SqrtLassoOptions::default())
}

/// Alternating minimization of `‖r‖²/(2s) + s/2 + λ‖θ‖₁` over (θ, s) on the
/// column-normalized design. Minimizing out `s = ‖r‖` recovers the
/// square-root Lasso objective `‖Y − Tθ‖ + λ‖θ‖₁`; holding `s` at `σ√m`
/// gives the classical Lasso.
pub fn sqrt_lasso_with(
    x: &DMatrix<f64>,
    y: &DVector<f64>,
    lambda: f64,
    opts: &SqrtLassoOptions,
) -> Result<SqrtLassoFit> {
    let (m, p) = x.shape();
    if m < 2 {
        return Err(Error::TooFewRows { rows: m, parts: 1 });
    }
    if y.len() != m {
        return Err(Error::InvalidConfig(format!("y has length {}, expected {m}", y.len())));
    }
    if x.iter().chain(y.iter()).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("square-root Lasso input"));
    }
    let nd = column_normalize(x);
    let live: Vec<usize> = (0..p).filter(|&j| nd.norms[j] >= super::normalize::ZERO_COLUMN_NORM).collect();
    let t = nd.t.as_slice();
    let col = |j: usize| &t[j * m..(j + 1) * m];
    let sqrt_m = (m as f64).sqrt();

    let y_norm = y.norm();
    let mut theta = vec![0.0; p];
    let mut r: Vec<f64> = y.iter().copied().collect();
    let fixed_s = opts.known_sigma.map(|s| s * sqrt_m);

    let objective = |r: &[f64], theta: &[f64]| -> f64 {
        let rn = norm(r);
        let l1: f64 = theta.iter().map(|v| v.abs()).sum();
        match fixed_s {
            Some(s) => rn * rn / (2.0 * s) + s / 2.0 + lambda * l1,
            None => rn + lambda * l1,
        }
    };
    let scale = |r: &[f64]| fixed_s.unwrap_or_else(|| norm(r));

    let mut obj = objective(&r, &theta);
    let mut trace = vec![TracePoint { iteration: 0, objective: obj, sigma_hat: norm(&r) / sqrt_m }];
    let mut last_decrease = f64::INFINITY;
    let mut kkt;
    let mut outer = 0;

    loop {
        let s = scale(&r);
        if y_norm == 0.0 || (fixed_s.is_none() && s < 1e-14 * y_norm) {
            kkt = 0.0;
            break;
        }
        kkt = kkt_residual(&live, &col, &r, &theta, lambda, s);
        if kkt <= opts.kkt_tol && last_decrease <= opts.rel_tol * obj {
            break;
        }
        if outer >= opts.max_outer {
            return Err(Error::DidNotConverge {
                solver: "square-root Lasso",
                iterations: outer,
                residual: kkt,
                iterate: rescale(&theta, &nd.norms),
            });
        }
        outer += 1;
        let start = obj;

        cd_pass(&live, &col, &mut theta, &mut r, lambda * s);
        let active: Vec<usize> = live.iter().copied().filter(|&j| theta[j] != 0.0).collect();
        let mut inner_obj = objective(&r, &theta);
        for _ in 0..10_000 {
            let s = scale(&r);
            if s == 0.0 {
                break;
            }
            cd_pass(&active, &col, &mut theta, &mut r, lambda * s);
            let next = objective(&r, &theta);
            let done = inner_obj - next <= opts.rel_tol * next;
            inner_obj = next;
            if done {
                break;
            }
        }
        obj = inner_obj;
        last_decrease = start - obj;
        trace.push(TracePoint { iteration: outer, objective: obj, sigma_hat: norm(&r) / sqrt_m });
    }

    Ok(SqrtLassoFit {
        theta_hat: DVector::from_vec(rescale(&theta, &nd.norms)),
        sigma_hat: norm(&r) / sqrt_m,
        lambda,
        iterations: outer,
        kkt_residual: kkt,
        objective: obj,
        trace,
    })
}

fn cd_pass<'a>(idx: &[usize], col: &impl Fn(usize) -> &'a [f64], theta: &mut [f64], r: &mut [f64], thr: f64) {
    for &j in idx {
        let c = col(j);
        let z = dot(c, r) + theta[j];
        let new = soft_threshold(z, thr);
        let diff = new - theta[j];
        if diff != 0.0 {
            for (ri, ci) in r.iter_mut().zip(c) {
                *ri -= diff * ci;
            }
            theta[j] = new;
        }
    }
}

/// Largest violation of the subgradient condition `T_jᵀr/s ∈ λ·∂|θ_j|`.
fn kkt_residual<'a>(
    live: &[usize],
    col: &impl Fn(usize) -> &'a [f64],
    r: &[f64],
    theta: &[f64],
    lambda: f64,
    s: f64,
) -> f64 {
    live.iter()
        .map(|&j| {
            let g = dot(col(j), r) / s;
            if theta[j] == 0.0 {
                (g.abs() - lambda).max(0.0)
            } else {
                (g - lambda * theta[j].signum()).abs()
            }
        })
        .fold(0.0, f64::max)
}

pub fn soft_threshold(z: f64, t: f64) -> f64 {
    if z > t {
        z - t
    } else if z < -t {
        z + t
    } else {
        0.0
    }
}

fn rescale(theta: &[f64], norms: &[f64]) -> Vec<f64> {
    theta.iter().zip(norms).map(|(t, n)| if *n >= super::normalize::ZERO_COLUMN_NORM { t / n } else { 0.0 }).collect()
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{generate_sample, CovarianceSpec, Scenario, SignalSpec};
    use crate::solvers::normalize::NormalizedDesign;

    fn objective_at(x: &DMatrix<f64>, y: &DVector<f64>, lambda: f64, theta_orig: &[f64]) -> f64 {
        objective_nd(&column_normalize(x), y, lambda, theta_orig)
    }

    /// Objective on the normalized design with coefficients given on the original scale.
    fn objective_nd(nd: &NormalizedDesign, y: &DVector<f64>, lambda: f64, theta_orig: &[f64]) -> f64 {
        let tn: Vec<f64> = theta_orig.iter().zip(&nd.norms).map(|(t, n)| t * n).collect();
        let r = y - &nd.t * DVector::from_column_slice(&tn);
        r.norm() + lambda * tn.iter().map(|v| v.abs()).sum::<f64>()
    }

    #[test]
    fn zero_response() {
        let x = DMatrix::from_fn(6, 3, |i, j| (i + 2 * j) as f64 - 3.0);
        let fit = sqrt_lasso(&x, &DVector::zeros(6), 0.1).unwrap();
        assert!(fit.theta_hat.iter().all(|v| *v == 0.0));
        assert_eq!(fit.sigma_hat, 0.0);
    }

    #[test]
    fn lambda_value() {
        // Φ̄⁻¹(0.05/400) = 3.662260 to six places
        let l = sqrt_lasso_lambda(100, 50, 0.05);
        let q = upper_normal_quantile(0.05 / 400.0);
        assert!((q - 3.662_260).abs() < 1e-6);
        assert!((l - 2.0 * q.sqrt() / 50f64.sqrt()).abs() < 1e-15);
        assert!((l - 0.541_277).abs() < 1e-6);
    }

    #[test]
    fn one_dimensional_grid_oracle() {
        let x = DMatrix::from_column_slice(4, 1, &[0.5, 0.5, 0.5, 0.5]);
        let y = DVector::from_vec(vec![1.3, 0.2, 0.9, -0.1]);
        let lambda = 0.3;
        let fit = sqrt_lasso_with(&x, &y, lambda, &SqrtLassoOptions::default()).unwrap();
        let bound = 2.0 * y.norm();
        let mut best = f64::INFINITY;
        let mut t = -bound;
        while t <= bound {
            best = best.min(objective_at(&x, &y, lambda, &[t]));
            t += 1e-4;
        }
        let got = objective_at(&x, &y, lambda, fit.theta_hat.as_slice());
        assert!((got - best).abs() <= 1e-6, "{got} vs {best}");
        assert!((fit.objective - got).abs() < 1e-12);
    }

    #[test]
    fn small_lattice_oracle() {
        let sc = Scenario {
            n: 20,
            p: 3,
            sigma: 1.0,
            sigma_known: false,
            covariance: CovarianceSpec::identity(2.0),
            signal: SignalSpec::null_spikes(1, 3.0),
        };
        let s = generate_sample(&sc, 11).unwrap();
        let lambda = 0.4;
        let fit = sqrt_lasso_with(&s.x, &s.y, lambda, &SqrtLassoOptions::default()).unwrap();
        let nd = column_normalize(&s.x);
        let got = objective_nd(&nd, &s.y, lambda, fit.theta_hat.as_slice());
        // coarse lattice around the truth, then a fine one around the best point
        let mut center = [3.0, 0.0, 0.0];
        for (half, step) in [(1.0, 0.02), (0.03, 0.0005)] {
            let k = (2.0 * half / step) as i64;
            let mut best = (f64::INFINITY, center);
            for a in 0..=k {
                for b in 0..=k {
                    for c in 0..=k {
                        let th = [
                            center[0] - half + a as f64 * step,
                            center[1] - half + b as f64 * step,
                            center[2] - half + c as f64 * step,
                        ];
                        let v = objective_nd(&nd, &s.y, lambda, &th);
                        if v < best.0 {
                            best = (v, th);
                        }
                    }
                }
            }
            center = best.1;
            if step < 0.001 {
                assert!(got <= best.0 + 1e-6, "{got} vs lattice {}", best.0);
            }
        }
    }

    #[test]
    fn objective_is_monotone_and_kkt_holds() {
        let sc = Scenario {
            n: 80,
            p: 200,
            sigma: 1.0,
            sigma_known: false,
            covariance: CovarianceSpec::identity(2.0),
            signal: SignalSpec::spikes(5, 10, 1.0, 4.0),
        };
        let s = generate_sample(&sc, 3).unwrap();
        let fit = sqrt_lasso(&s.x, &s.y, 0.05).unwrap();
        assert!(fit.kkt_residual <= 1e-6);
        for w in fit.trace.windows(2) {
            assert!(w[1].objective <= w[0].objective * (1.0 + 1e-13));
        }
    }

    #[test]
    fn classical_lasso_threshold() {
        // orthonormal design: the Lasso is a soft threshold at λσ√m
        let x = DMatrix::from_row_slice(4, 2, &[1.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0]);
        let y = DVector::from_vec(vec![3.0, 0.5, 1.0, 1.0]);
        let opts = SqrtLassoOptions { known_sigma: Some(0.5), ..Default::default() };
        let fit = sqrt_lasso_with(&x, &y, 1.0, &opts).unwrap();
        assert!((fit.theta_hat[0] - 2.0).abs() < 1e-12);
        assert_eq!(fit.theta_hat[1], 0.0);
    }

    #[test]
    fn zero_columns_stay_zero() {
        let mut x = DMatrix::from_fn(30, 5, |i, j| (((i * 13 + j * 7) % 11) as f64 - 5.0) / 3.0);
        x.column_mut(2).fill(0.0);
        let y = x.column(0) * 2.0 + x.column(1);
        let fit = sqrt_lasso(&x, &y, 0.1).unwrap();
        assert_eq!(fit.theta_hat[2], 0.0);
    }

    #[test]
    fn scale_equivariance() {
        let sc = Scenario {
            n: 60,
            p: 100,
            sigma: 1.0,
            sigma_known: false,
            covariance: CovarianceSpec::identity(2.0),
            signal: SignalSpec::spikes(3, 5, 1.0, 5.0),
        };
        let s = generate_sample(&sc, 9).unwrap();
        let a = sqrt_lasso(&s.x, &s.y, 0.05).unwrap();
        let b = sqrt_lasso(&s.x, &(&s.y * 4.0), 0.05).unwrap();
        assert!((b.sigma_hat - 4.0 * a.sigma_hat).abs() <= 1e-8 * b.sigma_hat);
        for (u, v) in a.theta_hat.iter().zip(b.theta_hat.iter()) {
            assert!((v - 4.0 * u).abs() <= 1e-6 * (1.0 + v.abs()));
        }
    }
}
