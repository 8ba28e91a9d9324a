use std::io::Write;

use serde::{Deserialize, Serialize};

use super::decision::{TestKind, TestSpec};
use super::rates::{rate_reference, RateQuery};
use super::risk::estimate_risk;
use crate::constants::DesignConstants;
use crate::error::Result;
use crate::model::{CovarianceSpec, Scenario, SignalSpec};
use crate::rng::substream_seed;

fn default_trials() -> usize {
    100
}
fn default_sigma() -> f64 {
    1.0
}
fn default_level() -> f64 {
    0.05
}
fn default_spike_scale() -> f64 {
    10.0
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepConfig {
    pub n: Vec<usize>,
    pub p: Vec<usize>,
    pub k0: Vec<usize>,
    pub delta: Vec<usize>,
    pub rho: Vec<f64>,
    pub tests: Vec<TestKind>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_sigma")]
    pub sigma: f64,
    #[serde(default = "default_level")]
    pub alpha: f64,
    /// Confidence parameter δ of the estimators.
    #[serde(default = "default_level")]
    pub confidence: f64,
    /// Spike magnitude in units of `σ·sqrt(ln p / n)`.
    #[serde(default = "default_spike_scale")]
    pub spike_scale: f64,
    #[serde(default = "default_covariance")]
    pub covariance: CovarianceSpec,
}

fn default_covariance() -> CovarianceSpec {
    CovarianceSpec::identity(2.0)
}

pub const SWEEP_HEADER: [&str; 14] = [
    "n",
    "p",
    "k0",
    "delta",
    "rho",
    "test",
    "type1",
    "type2",
    "risk",
    "half_width",
    "rate_ref",
    "regime",
    "seed",
    "error",
];

#[derive(Debug, Serialize)]
struct Row {
    n: usize,
    p: usize,
    k0: usize,
    delta: usize,
    rho: f64,
    test: String,
    type1: Option<f64>,
    type2: Option<f64>,
    risk: Option<f64>,
    half_width: Option<f64>,
    rate_ref: Option<f64>,
    regime: String,
    seed: u64,
    error: String,
}

/// Runs every cell of the grid and writes one CSV row per cell. Cell
/// failures are recorded in the `error` column and the sweep continues.
pub fn sweep<W: Write>(config: &SweepConfig, constants: &DesignConstants, out: W) -> Result<usize> {
    let mut w = csv::Writer::from_writer(out);
    let mut cell = 0u64;
    let mut rows = 0;
    for &n in &config.n {
        for &p in &config.p {
            for &k0 in &config.k0 {
                for &delta in &config.delta {
                    for &rho in &config.rho {
                        for &test in &config.tests {
                            let seed = substream_seed(config.seed, cell);
                            cell += 1;
                            let mut row = Row {
                                n,
                                p,
                                k0,
                                delta,
                                rho,
                                test: test.to_string(),
                                type1: None,
                                type2: None,
                                risk: None,
                                half_width: None,
                                rate_ref: None,
                                regime: String::new(),
                                seed,
                                error: String::new(),
                            };
                            match run_cell(config, constants, test, (n, p, k0, delta, rho), seed) {
                                Ok((risk, rate, regime)) => {
                                    row.type1 = Some(risk.type1);
                                    row.type2 = Some(risk.type2);
                                    row.risk = Some(risk.risk);
                                    row.half_width = Some(risk.half_width);
                                    row.rate_ref = Some(rate);
                                    row.regime = regime;
                                }
                                Err(e) => row.error = e.to_string(),
                            }
                            w.serialize(&row)?;
                            rows += 1;
                        }
                    }
                }
            }
        }
    }
    if rows == 0 {
        w.write_record(SWEEP_HEADER)?;
    }
    w.flush()?;
    Ok(rows)
}

fn run_cell(
    config: &SweepConfig,
    constants: &DesignConstants,
    test: TestKind,
    (n, p, k0, delta, rho): (usize, usize, usize, usize, f64),
    seed: u64,
) -> Result<(super::risk::RiskEstimate, f64, String)> {
    let spike = config.spike_scale * ((p as f64).ln() / n as f64).sqrt();
    let base = Scenario {
        n,
        p,
        sigma: config.sigma,
        sigma_known: test.setting() == super::decision::Setting::Independent,
        covariance: config.covariance.clone(),
        signal: SignalSpec::null_spikes(k0, spike),
    };
    let alt = base.with_signal(SignalSpec::spikes(k0, delta, rho, spike));
    let spec = TestSpec::new(test, config.alpha, config.confidence, config.covariance.eta, constants.clone());
    let risk = estimate_risk(&spec, &[base], &[alt], config.trials, seed)?;
    let rate = rate_reference(&RateQuery { setting: test.setting().into(), n, p, k0, delta })?;
    Ok((risk, rate.rate, rate.regime))
}
