//! Registry of the tuning constants that the test procedures leave free.
//!
//! Every entry carries its provenance: either the built-in default or a value
//! produced by Monte Carlo calibration (see [`crate::harness::calibrate_threshold`]).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    AnalyticDefault,
    Calibrated,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Constant {
    pub value: f64,
    pub provenance: Provenance,
}

impl Constant {
    pub const fn analytic(value: f64) -> Self {
        Self { value, provenance: Provenance::AnalyticDefault }
    }

    pub const fn calibrated(value: f64) -> Self {
        Self { value, provenance: Provenance::Calibrated }
    }
}

/// How a test's rejection threshold was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ThresholdMode {
    Analytic,
    Calibrated,
}

impl From<Provenance> for ThresholdMode {
    fn from(p: Provenance) -> Self {
        match p {
            Provenance::AnalyticDefault => ThresholdMode::Analytic,
            Provenance::Calibrated => ThresholdMode::Calibrated,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DesignConstants {
    /// Multiplier of σ√(log(p/α)/n) in the order-statistic test, also used
    /// for the pre-thresholding of the Fourier tests.
    pub c_t: Constant,
    /// Multiplier of the residual-norm threshold.
    pub c_chi: Constant,
    /// Multiplier of the Fourier-statistic excess over k0.
    pub c_f: Constant,
    /// Per-scale multipliers of the intermediate-regime excess, indexed by
    /// position in the dyadic grid. Missing positions use 1.
    pub c_i: Vec<Constant>,
    /// Multiplier of the U-statistic threshold.
    pub c_u_eta: Constant,
    /// Multiplier of the thresholded square-root Lasso cut.
    pub c_sl_eta: Constant,
    /// MCP penalty level multiplier of σ̂√(log p).
    pub c_mcp_eta: Constant,
    /// MCP concavity parameter κ (must exceed 1/2 on a unit-norm design).
    pub c_mcp_prime_eta: Constant,
    /// Property-S parameter a1 used by the default c_*.
    pub c_star_a1: Constant,
    /// Property-S parameter a3 used by the default c_*.
    pub c_star_a3: Constant,
    /// Restricted least-squares count threshold c_*. When absent the
    /// closed-form default is used.
    pub c_star: Option<Constant>,
    /// Property-S scale of the iterative selector.
    pub c_ith_eta: Constant,
    /// Regime constant of the general aggregation: the U-statistic is used
    /// iff p ≤ c·n²/log(2/δ).
    pub c_regime_eta: Constant,
    pub condition_a_c: Constant,
    pub condition_b_c: Constant,
}

impl Default for DesignConstants {
    fn default() -> Self {
        Self {
            c_t: Constant::analytic(3.0),
            c_chi: Constant::analytic(1.0),
            c_f: Constant::analytic(1.0),
            c_i: Vec::new(),
            c_u_eta: Constant::analytic(1.0),
            c_sl_eta: Constant::analytic(0.5),
            c_mcp_eta: Constant::analytic(3.0),
            c_mcp_prime_eta: Constant::analytic(3.0),
            c_star_a1: Constant::analytic(1.0),
            c_star_a3: Constant::analytic(1.0),
            c_star: None,
            c_ith_eta: Constant::analytic(1.0),
            c_regime_eta: Constant::analytic(1.0),
            condition_a_c: Constant::analytic(1.0),
            condition_b_c: Constant::analytic(1.0),
        }
    }
}

const QUANTILE_NAMES: [&str; 6] = ["c_t", "c_chi", "c_f", "c_i", "c_u_eta", "c_star"];

impl DesignConstants {
    pub fn validate(&self) -> Result<()> {
        let mut named: Vec<(&str, Constant)> = vec![
            ("c_t", self.c_t),
            ("c_chi", self.c_chi),
            ("c_f", self.c_f),
            ("c_u_eta", self.c_u_eta),
            ("c_sl_eta", self.c_sl_eta),
            ("c_mcp_eta", self.c_mcp_eta),
            ("c_mcp_prime_eta", self.c_mcp_prime_eta),
            ("c_star_a1", self.c_star_a1),
            ("c_star_a3", self.c_star_a3),
            ("c_ith_eta", self.c_ith_eta),
            ("c_regime_eta", self.c_regime_eta),
            ("condition_a_c", self.condition_a_c),
            ("condition_b_c", self.condition_b_c),
        ];
        if let Some(c) = self.c_star {
            named.push(("c_star", c));
        }
        named.extend(self.c_i.iter().map(|c| ("c_i", *c)));
        for (name, c) in named {
            // A calibrated rejection cutoff is an empirical quantile of a
            // centred statistic and may be zero or negative; +inf means
            // "never reject".
            let quantile = c.provenance == Provenance::Calibrated && QUANTILE_NAMES.contains(&name);
            if c.value.is_nan() || (!quantile && c.value <= 0.0) {
                return Err(Error::InvalidConfig(format!(
                    "constant {name} must be strictly positive, got {}",
                    c.value
                )));
            }
        }
        if self.c_mcp_prime_eta.value <= 0.5 {
            return Err(Error::InvalidConfig("MCP concavity c_mcp_prime_eta must exceed 1/2".into()));
        }
        Ok(())
    }

    pub fn c_i_at(&self, index: usize) -> Constant {
        self.c_i.get(index).copied().unwrap_or(Constant::analytic(1.0))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let c: Self = serde_json::from_str(text)?;
        c.validate()?;
        Ok(c)
    }

    pub fn has_calibrated(&self) -> bool {
        let mut all = vec![
            self.c_t,
            self.c_chi,
            self.c_f,
            self.c_u_eta,
            self.c_sl_eta,
            self.c_mcp_eta,
            self.c_mcp_prime_eta,
            self.c_star_a1,
            self.c_star_a3,
            self.c_ith_eta,
            self.c_regime_eta,
            self.condition_a_c,
            self.condition_b_c,
        ];
        all.extend(self.c_star);
        all.extend(self.c_i.iter().copied());
        all.iter().any(|c| c.provenance == Provenance::Calibrated)
    }
}
