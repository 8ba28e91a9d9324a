use std::fmt;
use std::str::FromStr;

use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::constants::DesignConstants;
use crate::error::{Error, Result};
use crate::general::{select_iterative, GeneralParams, GeneralPipeline};
use crate::independent::{IndependentParams, IndependentPipeline};
use crate::model::{RegressionSample, Scenario};
use crate::report::TestReport;

/// Anything that maps one sample to an accept/reject decision. The RNG is
/// a per-trial stream independent of the one that drew the sample, for
/// randomized decisions and mocks.
pub trait Decision {
    fn name(&self) -> String;
    fn reject(&self, scenario: &Scenario, sample: &RegressionSample, rng: &mut ChaCha8Rng) -> Result<bool>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestKind {
    T,
    Chi,
    F,
    I,
    Ag,
    U,
    ThMcp,
    ThIterative,
    GeneralAg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Setting {
    Independent,
    General,
}

impl TestKind {
    pub const ALL: [TestKind; 9] = [
        TestKind::T,
        TestKind::Chi,
        TestKind::F,
        TestKind::I,
        TestKind::Ag,
        TestKind::U,
        TestKind::ThMcp,
        TestKind::ThIterative,
        TestKind::GeneralAg,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TestKind::T => "t",
            TestKind::Chi => "chi",
            TestKind::F => "f",
            TestKind::I => "i",
            TestKind::Ag => "ag",
            TestKind::U => "u",
            TestKind::ThMcp => "th_mcp",
            TestKind::ThIterative => "th_iterative",
            TestKind::GeneralAg => "general_ag",
        }
    }

    pub fn setting(self) -> Setting {
        match self {
            TestKind::T | TestKind::Chi | TestKind::F | TestKind::I | TestKind::Ag => Setting::Independent,
            _ => Setting::General,
        }
    }
}

impl fmt::Display for TestKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TestKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        TestKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown test `{s}`")))
    }
}

/// A named test with its level parameters and constants. Sparsity k0 and,
/// in the independent setting, σ are read from the scenario.
#[derive(Debug, Clone)]
pub struct TestSpec {
    pub kind: TestKind,
    pub alpha: f64,
    pub delta: f64,
    pub eta: f64,
    pub constants: DesignConstants,
    pub classical_lasso: bool,
}

impl TestSpec {
    pub fn new(kind: TestKind, alpha: f64, delta: f64, eta: f64, constants: DesignConstants) -> Self {
        Self { kind, alpha, delta, eta, constants, classical_lasso: false }
    }

    pub fn with_kind(&self, kind: TestKind) -> Self {
        Self { kind, ..self.clone() }
    }

    fn independent_params(&self, scenario: &Scenario) -> IndependentParams {
        self.independent_params_for(scenario.signal.k0, scenario.sigma)
    }

    fn independent_params_for(&self, k0: usize, sigma: f64) -> IndependentParams {
        IndependentParams { k0, sigma, alpha: self.alpha, delta: self.delta, classical_lasso: self.classical_lasso }
    }

    fn general_params(&self, scenario: &Scenario) -> GeneralParams {
        self.general_params_for(scenario.signal.k0)
    }

    fn general_params_for(&self, k0: usize) -> GeneralParams {
        GeneralParams { k0, alpha: self.alpha, delta: self.delta, eta: self.eta }
    }

    pub fn run(&self, scenario: &Scenario, sample: &RegressionSample) -> Result<TestReport> {
        self.run_sample(sample, scenario.signal.k0, scenario.sigma)
    }

    /// Runs the test on a stored sample; `sigma` is only read by the
    /// independent-setting tests.
    pub fn run_sample(&self, sample: &RegressionSample, k0: usize, sigma: f64) -> Result<TestReport> {
        let c = &self.constants;
        match self.kind.setting() {
            Setting::Independent => {
                let pl = IndependentPipeline::new(sample, self.independent_params_for(k0, sigma))?;
                match self.kind {
                    TestKind::T => Ok(pl.report_t(c)),
                    TestKind::Chi => Ok(pl.report_chi(c)),
                    TestKind::F => pl.report_f(c),
                    TestKind::I => pl.report_i(c),
                    _ => pl.report_ag(c),
                }
            }
            Setting::General => {
                let pl = GeneralPipeline::new(sample, self.general_params_for(k0))?;
                match self.kind {
                    TestKind::U => pl.report_u(c),
                    TestKind::ThMcp => pl.report_th_mcp(c),
                    TestKind::ThIterative => {
                        let (x1, y1) = pl.estimation_part();
                        let s = select_iterative(x1, y1, self.delta, c)?;
                        pl.report_th(&s, c)
                    }
                    _ => pl.report_ag(c),
                }
            }
        }
    }

    /// Normalized statistics for several kinds from one shared pipeline
    /// (one vector per kind; the intermediate test yields one entry per
    /// scale). Rejection compares each entry with the matching constant.
    pub fn statistics(
        &self,
        kinds: &[TestKind],
        scenario: &Scenario,
        sample: &RegressionSample,
    ) -> Result<Vec<Vec<f64>>> {
        let c = &self.constants;
        let mut ind = None;
        let mut gen = None;
        let mut out = Vec::with_capacity(kinds.len());
        for &kind in kinds {
            let v = match kind.setting() {
                Setting::Independent => {
                    if ind.is_none() {
                        ind = Some(IndependentPipeline::new(sample, self.independent_params(scenario))?);
                    }
                    let pl = ind.as_ref().expect("pipeline just built");
                    match kind {
                        TestKind::T => vec![pl.stat_t()],
                        TestKind::Chi => vec![pl.stat_chi()],
                        TestKind::F => vec![pl.stat_f(c.c_t.value)?],
                        TestKind::I => pl.stat_i(c.c_t.value)?,
                        _ => return Err(no_statistic(kind)),
                    }
                }
                Setting::General => {
                    if gen.is_none() {
                        gen = Some(GeneralPipeline::new(sample, self.general_params(scenario))?);
                    }
                    let pl = gen.as_ref().expect("pipeline just built");
                    let report = match kind {
                        TestKind::U => pl.report_u(c)?,
                        TestKind::ThMcp => pl.report_th_mcp(c)?,
                        TestKind::ThIterative => {
                            let (x1, y1) = pl.estimation_part();
                            pl.report_th(&select_iterative(x1, y1, self.delta, c)?, c)?
                        }
                        _ => return Err(no_statistic(kind)),
                    };
                    vec![report.scalar_statistic().expect("scalar test")]
                }
            };
            out.push(v);
        }
        Ok(out)
    }
}

fn no_statistic(kind: TestKind) -> Error {
    Error::InvalidConfig(format!("test `{kind}` has no single calibratable statistic"))
}

impl Decision for TestSpec {
    fn name(&self) -> String {
        self.kind.to_string()
    }

    fn reject(&self, scenario: &Scenario, sample: &RegressionSample, _rng: &mut ChaCha8Rng) -> Result<bool> {
        Ok(self.run(scenario, sample)?.reject)
    }
}
