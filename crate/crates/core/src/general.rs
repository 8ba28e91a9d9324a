//! Tests for the general setting: unknown σ, design covariance in U(η),
//! two-way sample split (part 0 tests, part 1 estimates).

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::constants::{DesignConstants, ThresholdMode};
use crate::error::{Error, Result};
use crate::model::{split_sample, RegressionSample};
use crate::report::{combined_mode, TestReport};
use crate::solvers::{
    mcp_fit, orthogonal_complement_projector, restricted_least_squares, sqrt_lasso, threshold_sqrt_lasso,
    top_k_project, SelectionMethod, SupportSet,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneralParams {
    pub k0: usize,
    pub alpha: f64,
    pub delta: f64,
    /// Known bound of the covariance class.
    pub eta: f64,
}

/// `√2·a1 + 11·η²·max(a3, 1)·√(log(4e/δ))`.
pub fn c_star_default(a1: f64, a3: f64, eta: f64, delta: f64) -> f64 {
    std::f64::consts::SQRT_2 * a1 + 11.0 * eta * eta * a3.max(1.0) * (4.0 * std::f64::consts::E / delta).ln().sqrt()
}

/// The count threshold in use: the registry value when present, else the
/// closed-form default.
pub fn c_star(c: &DesignConstants, eta: f64, delta: f64) -> (f64, ThresholdMode) {
    match c.c_star {
        Some(k) => (k.value, k.provenance.into()),
        None => (
            c_star_default(c.c_star_a1.value, c.c_star_a3.value, eta, delta),
            combined_mode([c.c_star_a1.provenance.into(), c.c_star_a3.provenance.into()]),
        ),
    }
}

/// `(‖X0ᵀR‖² − (‖X0‖_F²/m)‖R‖²) / (‖R‖²(m+1))`, or `None` when R = 0.
pub fn z_u(x0: &DMatrix<f64>, resid: &DVector<f64>) -> Option<f64> {
    let r2 = resid.norm_squared();
    if r2 == 0.0 {
        return None;
    }
    let m = x0.nrows() as f64;
    let quad = x0.tr_mul(resid).norm_squared();
    Some((quad - x0.norm_squared() / m * r2) / (r2 * (m + 1.0)))
}

/// `(k0∨1)·log(p/δ)/m + √(p·log(2/α))/m`.
pub fn v_u(k0: usize, p: usize, m: usize, alpha: f64, delta: f64) -> f64 {
    let (p, m) = (p as f64, m as f64);
    k0.max(1) as f64 * (p / delta).ln() / m + (p * (2.0 / alpha).ln()).sqrt() / m
}

/// U-statistic test given the estimate from part 1. Statistic `Z_u/v_u`,
/// rejection iff strictly above `c_u_eta`; zero residuals accept.
pub fn test_u_with(
    x0: &DMatrix<f64>,
    y0: &DVector<f64>,
    theta_est: &DVector<f64>,
    params: GeneralParams,
    c: &DesignConstants,
) -> TestReport {
    let (m, p) = x0.shape();
    let resid = y0 - x0 * theta_est;
    let v = v_u(params.k0, p, m, params.alpha, params.delta);
    let mode = c.c_u_eta.provenance.into();
    match z_u(x0, &resid) {
        Some(z) => {
            let stat = z / v;
            TestReport::scalar("u", stat, c.c_u_eta.value, stat > c.c_u_eta.value, mode)
                .with_side("z_u", z)
                .with_side("v_u", v)
        }
        None => TestReport::scalar("u", f64::NEG_INFINITY, c.c_u_eta.value, false, mode).with_side("degenerate", true),
    }
}

pub fn test_u(sample: &RegressionSample, params: GeneralParams, c: &DesignConstants) -> Result<TestReport> {
    let split = split_sample(sample, 2)?;
    let (x0, y0) = sample.rows(split.parts[0].clone());
    let (x1, y1) = sample.rows(split.parts[1].clone());
    let fit = sqrt_lasso(&x1, &y1, params.delta)?;
    let theta = DVector::from_vec(top_k_project(fit.theta_hat.as_slice(), params.k0));
    Ok(test_u_with(&x0, &y0, &theta, params, c))
}

/// Count test on the restricted least-squares fit. The reported statistic
/// is `|θ̂/σ̂|_(k0+1)/√(log p/m)`; rejection iff at least k0+1 selected
/// coefficients reach `c_*` on that scale.
pub fn test_th(
    x0: &DMatrix<f64>,
    y0: &DVector<f64>,
    s: &SupportSet,
    k0: usize,
    c_star: f64,
    mode: ThresholdMode,
) -> Result<TestReport> {
    let (m, p) = x0.shape();
    let (theta, sigma_hat) = restricted_least_squares(x0, y0, s)?;
    let scale = ((p as f64).ln() / m as f64).sqrt();
    let report = if sigma_hat == 0.0 {
        // exact fit: reject iff more than k0 coefficients are nonzero
        let nonzero = s.indices.iter().filter(|&&j| theta[j] != 0.0).count();
        let reject = nonzero > k0;
        let stat = if reject { f64::INFINITY } else { f64::NEG_INFINITY };
        TestReport::scalar("th", stat, c_star, reject, mode).with_side("degenerate_variance", true)
    } else {
        let normalized: Vec<f64> = s.indices.iter().map(|&j| (theta[j] / sigma_hat).abs() / scale).collect();
        let count = normalized.iter().filter(|v| **v >= c_star).count();
        let stat = crate::model::order_statistic(&normalized, k0 + 1);
        TestReport::scalar("th", stat, c_star, count > k0, mode).with_side("count", count)
    };
    Ok(report.with_side("support_size", s.len()).with_side("sigma_hat", sigma_hat))
}

#[derive(Debug, Clone)]
pub struct McpSelection {
    pub support: SupportSet,
    pub sigma_sl: f64,
    pub lambda: f64,
    pub stationarity_residual: f64,
}

/// Support of an MCP stationary point with `λ = c_mcp·σ̂_SL·√(log p)`,
/// started from the square-root Lasso fit at δ = 1/p.
pub fn select_mcp(x1: &DMatrix<f64>, y1: &DVector<f64>, c: &DesignConstants) -> Result<McpSelection> {
    let p = x1.ncols();
    let fit = sqrt_lasso(x1, y1, 1.0 / p.max(2) as f64)?;
    let lambda = c.c_mcp_eta.value * fit.sigma_hat * (p as f64).ln().max(f64::MIN_POSITIVE).sqrt();
    if lambda == 0.0 {
        // exact fit by the square-root Lasso: keep its support
        let idx = (0..p).filter(|&j| fit.theta_hat[j] != 0.0).collect();
        return Ok(McpSelection {
            support: SupportSet::new(idx, SelectionMethod::Mcp),
            sigma_sl: fit.sigma_hat,
            lambda,
            stationarity_residual: 0.0,
        });
    }
    let mcp = mcp_fit(x1, y1, lambda, c.c_mcp_prime_eta.value, Some(&fit.theta_hat))?;
    let idx = (0..p).filter(|&j| mcp.theta[j] != 0.0).collect();
    Ok(McpSelection {
        support: SupportSet::new(idx, SelectionMethod::Mcp),
        sigma_sl: fit.sigma_hat,
        lambda,
        stationarity_residual: mcp.stationarity_residual,
    })
}

pub const MIN_BLOCK_ROWS: usize = 8;

/// Number of sub-blocks for a part with `m` rows: `⌊log₂(2m)⌋ + 1`.
pub fn iterative_blocks(m: usize) -> usize {
    (usize::BITS - (2 * m).leading_zeros()) as usize
}

/// Iterative thresholded square-root Lasso over sub-blocks of part 1.
/// Each block is projected onto the orthogonal complement of the columns
/// already selected before fitting, and new selections are unioned in.
pub fn select_iterative(x1: &DMatrix<f64>, y1: &DVector<f64>, delta: f64, c: &DesignConstants) -> Result<SupportSet> {
    let (m, p) = x1.shape();
    let blocks = iterative_blocks(m);
    let rows = m / blocks;
    if rows < MIN_BLOCK_ROWS {
        return Err(Error::BlockTooSmall { rows, min: MIN_BLOCK_ROWS });
    }
    let mut selected = vec![false; p];
    let mut indices: Vec<usize> = Vec::new();
    let mut steps = Vec::with_capacity(blocks);
    for t in 0..blocks {
        let xb = x1.rows(t * rows, rows).into_owned();
        let yb = y1.rows(t * rows, rows).into_owned();
        let (mut xp, yp) = if indices.is_empty() {
            (xb, yb)
        } else {
            let pi = orthogonal_complement_projector(&xb.select_columns(&indices));
            (&pi * &xb, &pi * &yb)
        };
        if xp.nrows() < 2 {
            return Err(Error::BlockTooSmall { rows: xp.nrows(), min: 2 });
        }
        for &j in &indices {
            xp.column_mut(j).fill(0.0);
        }
        let (theta, _) = threshold_sqrt_lasso(&xp, &yp, delta, c.c_sl_eta.value)?;
        for j in 0..p {
            if theta[j] != 0.0 && !selected[j] {
                selected[j] = true;
                indices.push(j);
            }
        }
        steps.push(indices.len());
    }
    let mut support = SupportSet::new(indices, SelectionMethod::Iterative);
    support.steps = steps;
    Ok(support)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropertySParams {
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PropertySCheck {
    pub holds: bool,
    pub size: usize,
    pub size_bound: f64,
    pub missed_energy: f64,
    pub missed_bound: f64,
    /// Number of nonzero coefficients with `|θ*_i|/σ ≤ a1·√(log p/m)`.
    pub small_count: usize,
}

/// `|S| ≤ a2·‖θ*‖₀` and `‖θ*_{S̄}‖² ≤ a3²σ²·M·log p/m`.
pub fn property_s_check(
    s: &SupportSet,
    theta_star: &[f64],
    sigma: f64,
    params: PropertySParams,
    m: usize,
    p: usize,
) -> PropertySCheck {
    let log_ratio = (p as f64).ln() / m as f64;
    let cut = params.a1 * log_ratio.sqrt();
    let nonzero = theta_star.iter().filter(|v| **v != 0.0).count();
    let small_count = theta_star.iter().filter(|v| **v != 0.0 && (**v / sigma).abs() <= cut).count();
    let missed_energy: f64 = theta_star.iter().enumerate().filter(|(j, _)| !s.contains(*j)).map(|(_, v)| v * v).sum();
    let size_bound = params.a2 * nonzero as f64;
    let missed_bound = params.a3 * params.a3 * sigma * sigma * small_count as f64 * log_ratio;
    PropertySCheck {
        holds: s.len() as f64 <= size_bound && missed_energy <= missed_bound,
        size: s.len(),
        size_bound,
        missed_energy,
        missed_bound,
        small_count,
    }
}

/// True when the U-statistic joins the aggregation: `p ≤ c·n²/log(2/δ)`.
pub fn u_regime(n: usize, p: usize, delta: f64, c_regime: f64) -> bool {
    p as f64 <= c_regime * (n as f64).powi(2) / (2.0 / delta).ln()
}

/// Shared two-way split pipeline for the general-setting tests.
#[derive(Debug, Clone)]
pub struct GeneralPipeline {
    pub n: usize,
    pub p: usize,
    pub params: GeneralParams,
    x0: DMatrix<f64>,
    y0: DVector<f64>,
    x1: DMatrix<f64>,
    y1: DVector<f64>,
}

impl GeneralPipeline {
    pub fn new(sample: &RegressionSample, params: GeneralParams) -> Result<Self> {
        let split = split_sample(sample, 2)?;
        let (x0, y0) = sample.rows(split.parts[0].clone());
        let (x1, y1) = sample.rows(split.parts[1].clone());
        Ok(Self { n: sample.n(), p: sample.p(), params, x0, y0, x1, y1 })
    }

    pub fn estimation_part(&self) -> (&DMatrix<f64>, &DVector<f64>) {
        (&self.x1, &self.y1)
    }

    pub fn testing_part(&self) -> (&DMatrix<f64>, &DVector<f64>) {
        (&self.x0, &self.y0)
    }

    pub fn report_u(&self, c: &DesignConstants) -> Result<TestReport> {
        let fit = sqrt_lasso(&self.x1, &self.y1, self.params.delta)?;
        let theta = DVector::from_vec(top_k_project(fit.theta_hat.as_slice(), self.params.k0));
        Ok(test_u_with(&self.x0, &self.y0, &theta, self.params, c))
    }

    pub fn select_mcp(&self, c: &DesignConstants) -> Result<McpSelection> {
        select_mcp(&self.x1, &self.y1, c)
    }

    pub fn report_th(&self, s: &SupportSet, c: &DesignConstants) -> Result<TestReport> {
        let (cs, mode) = c_star(c, self.params.eta, self.params.delta);
        test_th(&self.x0, &self.y0, s, self.params.k0, cs, mode)
    }

    pub fn report_th_mcp(&self, c: &DesignConstants) -> Result<TestReport> {
        let sel = self.select_mcp(c)?;
        if sel.support.len() >= self.x0.nrows() {
            return Err(Error::SupportTooLarge { support: sel.support.len(), rows: self.x0.nrows() });
        }
        Ok(self.report_th(&sel.support, c)?.with_side("mcp_lambda", sel.lambda))
    }

    pub fn report_ag(&self, c: &DesignConstants) -> Result<TestReport> {
        let with_u = u_regime(self.n, self.p, self.params.delta, c.c_regime_eta.value);
        let mut subs = Vec::new();
        if with_u {
            subs.push(self.report_u(c)?);
        }
        subs.push(self.report_th_mcp(c)?);
        let reject = subs.iter().any(|r| r.reject);
        let mode = combined_mode(subs.iter().map(|r| r.mode));
        let mut report = TestReport::scalar("general_ag", reject as u8 as f64, 0.5, reject, mode)
            .with_side("regime", if with_u { "u+th" } else { "th" });
        report.sub_reports = subs;
        Ok(report)
    }
}

pub fn test_general_ag(sample: &RegressionSample, params: GeneralParams, c: &DesignConstants) -> Result<TestReport> {
    GeneralPipeline::new(sample, params)?.report_ag(c)
}
