//! Tests for the independent setting: known σ, identity design covariance,
//! three-way sample split.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};

use crate::constants::{DesignConstants, ThresholdMode};
use crate::error::Result;
use crate::kernels::{eta_kernel, kernel_params, varphi, KernelParams};
use crate::model::{check_conditions_np, d2_to_sparse, order_statistic, split_sample, RegressionSample, SplitSample};
use crate::report::{combined_mode, Statistic, TestReport};
use crate::solvers::{
    debias, sqrt_lasso, sqrt_lasso_lambda, sqrt_lasso_with, top_k_project, SqrtLassoFit, SqrtLassoOptions,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IndependentParams {
    pub k0: usize,
    pub sigma: f64,
    pub alpha: f64,
    pub delta: f64,
    /// Use the Lasso with known σ in place of the square-root Lasso.
    pub classical_lasso: bool,
}

impl IndependentParams {
    pub fn new(k0: usize, sigma: f64, alpha: f64, delta: f64) -> Self {
        Self { k0, sigma, alpha, delta, classical_lasso: false }
    }
}

/// Outcome of the pre-thresholding step shared by the Fourier tests.
#[derive(Debug, Clone, PartialEq)]
pub enum Screening {
    /// More than k0 debiased entries exceed the cut.
    EarlyReject { order_stat: f64, level: f64 },
    /// The corrected response on the third part is identically zero.
    Degenerate,
    Ready {
        /// `W_j/‖Ȳ‖` for every coordinate.
        ratios: Vec<f64>,
        /// Coordinates kept by the hard threshold.
        kept: Vec<bool>,
    },
}

/// Shared estimation pipeline: one square-root Lasso fit on the first part
/// and its debiased version on the second.
#[derive(Debug, Clone)]
pub struct IndependentPipeline {
    pub n: usize,
    pub p: usize,
    pub split: SplitSample,
    pub params: IndependentParams,
    pub fit: SqrtLassoFit,
    pub theta_tilde: DVector<f64>,
    x2: DMatrix<f64>,
    y2: DVector<f64>,
    x3: DMatrix<f64>,
    y3: DVector<f64>,
}

impl IndependentPipeline {
    pub fn new(sample: &RegressionSample, params: IndependentParams) -> Result<Self> {
        let split = split_sample(sample, 3)?;
        let (x1, y1) = sample.rows(split.parts[0].clone());
        let (x2, y2) = sample.rows(split.parts[1].clone());
        let (x3, y3) = sample.rows(split.parts[2].clone());
        let fit = if params.classical_lasso {
            let lambda = sqrt_lasso_lambda(x1.ncols(), x1.nrows(), params.delta);
            let opts = SqrtLassoOptions { known_sigma: Some(params.sigma), ..Default::default() };
            sqrt_lasso_with(&x1, &y1, lambda, &opts)?
        } else {
            sqrt_lasso(&x1, &y1, params.delta)?
        };
        let theta_tilde = debias(&fit.theta_hat, &x2, &y2)?;
        Ok(Self { n: sample.n(), p: sample.p(), split, params, fit, theta_tilde, x2, y2, x3, y3 })
    }

    fn m(&self) -> f64 {
        self.split.m as f64
    }

    /// `|θ̃|_(k0+1)`.
    pub fn order_stat(&self) -> f64 {
        order_statistic(self.theta_tilde.as_slice(), self.params.k0 + 1)
    }

    /// `|θ̃|_(k0+1) / (σ√(log(p/α)/n))`; rejection iff at least `c_t`.
    pub fn stat_t(&self) -> f64 {
        let IndependentParams { sigma, alpha, .. } = self.params;
        self.order_stat() / t_scale(sigma, self.p, alpha, self.n)
    }

    /// `(Z_χ, v_χ)`: the normalized residual excess on part two and its
    /// analytic scale.
    pub fn chi_parts(&self) -> (f64, f64) {
        let IndependentParams { k0, sigma, alpha, delta, .. } = self.params;
        let proj = DVector::from_vec(top_k_project(self.fit.theta_hat.as_slice(), k0));
        let resid = &self.y2 - &self.x2 * proj;
        let m = self.m();
        let z = chi_z(resid.norm_squared(), self.split.m, sigma);
        let v = ((1.0 / alpha).ln() / m).sqrt() + k0.max(1) as f64 * (self.p as f64 / delta).ln() / m;
        (z, v)
    }

    /// `Z_χ/v_χ`; rejection iff strictly above `c_chi`.
    pub fn stat_chi(&self) -> f64 {
        let (z, v) = self.chi_parts();
        z / v
    }

    /// Cut used before the Fourier tests: `c_t·σ·√(log(2p/α)/n)`.
    pub fn screening_level(&self, c_t: f64) -> f64 {
        let IndependentParams { sigma, alpha, .. } = self.params;
        c_t * sigma * ((2.0 * self.p as f64 / alpha).ln() / self.n as f64).sqrt()
    }

    pub fn screen(&self, c_t: f64) -> Screening {
        let level = self.screening_level(c_t);
        let order_stat = self.order_stat();
        if order_stat > level {
            return Screening::EarlyReject { order_stat, level };
        }
        let theta_bar = self.theta_tilde.map(|v| if v.abs() > level { v } else { 0.0 });
        let y_bar = &self.y3 - &self.x3 * &theta_bar;
        let norm = y_bar.norm();
        if norm == 0.0 {
            return Screening::Degenerate;
        }
        let w = self.x3.tr_mul(&y_bar);
        Screening::Ready {
            ratios: w.iter().map(|v| v / norm).collect(),
            kept: theta_bar.iter().map(|v| *v != 0.0).collect(),
        }
    }

    pub fn kernel_params(&self) -> KernelParams {
        kernel_params(self.params.k0, self.p)
    }

    /// `s²/5 + s·e^{s²/2}·√(2p·log(2/α))`.
    pub fn v_f(&self, s: f64) -> f64 {
        s * s / 5.0 + s * (s * s / 2.0).exp() * (2.0 * self.p as f64 * (2.0 / self.params.alpha).ln()).sqrt()
    }

    /// `(Z_f − k0)/v_f`, `+∞` on early rejection and `−∞` when degenerate.
    pub fn stat_f(&self, c_t: f64) -> Result<f64> {
        let s = self.kernel_params().s;
        Ok(match self.screen(c_t) {
            Screening::EarlyReject { .. } => f64::INFINITY,
            Screening::Degenerate => f64::NEG_INFINITY,
            Screening::Ready { ratios, kept } => {
                let z = fourier_sum(&ratios, &kept, |x| varphi(s, x))?;
                (z - self.params.k0 as f64) / self.v_f(s)
            }
        })
    }

    /// Per-scale `(V_l − k0 − l)/v_l`; empty when the grid is empty.
    pub fn stat_i(&self, c_t: f64) -> Result<Vec<f64>> {
        let kp = self.kernel_params();
        if kp.grid.is_empty() {
            return Ok(Vec::new());
        }
        Ok(match self.screen(c_t) {
            Screening::EarlyReject { .. } => vec![f64::INFINITY; kp.grid.len()],
            Screening::Degenerate => vec![f64::NEG_INFINITY; kp.grid.len()],
            Screening::Ready { ratios, kept } => {
                intermediate_stats(&ratios, &kept, self.params.k0, self.p, self.params.alpha, &kp)?
            }
        })
    }

    /// `d₂²(θ̂_SL, B₀[k0])/σ²`.
    pub fn guard_stat(&self) -> f64 {
        guard_stat(self.fit.theta_hat.as_slice(), self.params.k0, self.params.sigma)
    }

    pub fn report_t(&self, c: &DesignConstants) -> TestReport {
        let stat = self.stat_t();
        TestReport::scalar("t", stat, c.c_t.value, stat >= c.c_t.value, c.c_t.provenance.into())
            .with_side("theta_tilde_order_stat", self.order_stat())
    }

    pub fn report_chi(&self, c: &DesignConstants) -> TestReport {
        let (z, v) = self.chi_parts();
        let stat = z / v;
        TestReport::scalar("chi", stat, c.c_chi.value, stat > c.c_chi.value, c.c_chi.provenance.into())
            .with_side("z_chi", z)
            .with_side("v_chi", v)
    }

    pub fn report_f(&self, c: &DesignConstants) -> Result<TestReport> {
        let stat = self.stat_f(c.c_t.value)?;
        let mode = combined_mode([c.c_f.provenance.into(), c.c_t.provenance.into()]);
        Ok(TestReport::scalar("f", stat, c.c_f.value, stat >= c.c_f.value, mode)
            .with_side("early_reject", stat == f64::INFINITY)
            .with_side("degenerate", stat == f64::NEG_INFINITY)
            .with_side("s", self.kernel_params().s))
    }

    pub fn report_i(&self, c: &DesignConstants) -> Result<TestReport> {
        let stats = self.stat_i(c.c_t.value)?;
        let thresholds: Vec<f64> = (0..stats.len()).map(|i| c.c_i_at(i).value).collect();
        let reject = stats.iter().zip(&thresholds).any(|(s, t)| s >= t);
        let mut modes: Vec<ThresholdMode> = (0..stats.len()).map(|i| c.c_i_at(i).provenance.into()).collect();
        modes.push(c.c_t.provenance.into());
        Ok(TestReport {
            statistic: Statistic::PerScale(stats.clone()),
            threshold: Statistic::PerScale(thresholds),
            ..TestReport::scalar("i", 0.0, 0.0, reject, combined_mode(modes))
        }
        .with_side("trivial", stats.is_empty()))
    }

    pub fn report_guard(&self) -> TestReport {
        let stat = self.guard_stat();
        TestReport::scalar("guard", stat, 0.5, stat >= 0.5, ThresholdMode::Analytic)
    }

    pub fn report_ag(&self, c: &DesignConstants) -> Result<TestReport> {
        let subs =
            vec![self.report_t(c), self.report_chi(c), self.report_f(c)?, self.report_i(c)?, self.report_guard()];
        let reject = subs.iter().any(|r| r.reject);
        let mode = combined_mode(subs.iter().map(|r| r.mode));
        let cond = check_conditions_np(self.n, self.p, self.params.k0, self.params.alpha, c);
        let mut report = TestReport::scalar("ag", reject as u8 as f64, 0.5, reject, mode)
            .with_side("support_size", self.fit.theta_hat.iter().filter(|v| **v != 0.0).count())
            .with_side("theta_tilde_order_stat", self.order_stat())
            .with_side("discarded_rows", self.split.discarded)
            .with_side("condition_a", cond.condition_a);
        report.sub_reports = subs;
        Ok(report)
    }
}

/// `σ·√(log(p/α)/n)`.
pub fn t_scale(sigma: f64, p: usize, alpha: f64, n: usize) -> f64 {
    sigma * ((p as f64 / alpha).ln() / n as f64).sqrt()
}

/// `‖R‖²/(mσ²) − 1`.
pub fn chi_z(resid_sq: f64, m: usize, sigma: f64) -> f64 {
    resid_sq / (m as f64 * sigma * sigma) - 1.0
}

/// `d₂²(θ, B₀[k0])/σ²`; the dense guard fires at 1/2.
pub fn guard_stat(theta: &[f64], k0: usize, sigma: f64) -> f64 {
    let d = d2_to_sparse(theta, k0);
    d * d / (sigma * sigma)
}

/// `Σ_{j not kept} (1 − K(x_j)) + #kept`.
pub fn fourier_sum(ratios: &[f64], kept: &[bool], kernel: impl Fn(f64) -> Result<f64>) -> Result<f64> {
    let mut z = 0.0;
    for (x, k) in ratios.iter().zip(kept) {
        z += if *k { 1.0 } else { 1.0 - kernel(*x)? };
    }
    Ok(z)
}

/// `(√e/2)·w² + √(2·l·√p·log(π²[1 + log₂(l/l0)]²/(6α)))`.
pub fn intermediate_scale(l: u64, l0: u64, w: f64, p: usize, alpha: f64) -> f64 {
    let l = l as f64;
    let level = (l / l0 as f64).log2();
    let log_arg = PI * PI * (1.0 + level).powi(2) / (6.0 * alpha);
    0.5 * 0.5f64.exp() * w * w + (2.0 * l * (p as f64).sqrt() * log_arg.ln()).sqrt()
}

/// Per-scale normalized intermediate statistics for given kernel inputs.
pub fn intermediate_stats(
    ratios: &[f64],
    kept: &[bool],
    k0: usize,
    p: usize,
    alpha: f64,
    kp: &KernelParams,
) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(kp.grid.len());
    for g in &kp.grid {
        let v = fourier_sum(ratios, kept, |x| eta_kernel(g.r, g.w, x))?;
        out.push((v - k0 as f64 - g.l as f64) / intermediate_scale(g.l, kp.l0, g.w, p, alpha));
    }
    Ok(out)
}

pub fn test_t(sample: &RegressionSample, params: IndependentParams, c: &DesignConstants) -> Result<TestReport> {
    Ok(IndependentPipeline::new(sample, params)?.report_t(c))
}

pub fn test_chi(sample: &RegressionSample, params: IndependentParams, c: &DesignConstants) -> Result<TestReport> {
    Ok(IndependentPipeline::new(sample, params)?.report_chi(c))
}

pub fn test_f(sample: &RegressionSample, params: IndependentParams, c: &DesignConstants) -> Result<TestReport> {
    IndependentPipeline::new(sample, params)?.report_f(c)
}

pub fn test_i(sample: &RegressionSample, params: IndependentParams, c: &DesignConstants) -> Result<TestReport> {
    IndependentPipeline::new(sample, params)?.report_i(c)
}

pub fn test_ag(sample: &RegressionSample, params: IndependentParams, c: &DesignConstants) -> Result<TestReport> {
    IndependentPipeline::new(sample, params)?.report_ag(c)
}
