use serde::Serialize;

use super::decision::Decision;
use crate::error::{Error, Result};
use crate::model::{SampleGenerator, Scenario};
use crate::rng::{decision_rng, substream_seed};

/// Wald 95% half-width for a proportion.
pub fn wald_half_width(rate: f64, trials: usize) -> f64 {
    if trials == 0 {
        return f64::NAN;
    }
    1.96 * (rate * (1.0 - rate) / trials as f64).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RejectionRate {
    pub rate: f64,
    /// Trials that produced a decision.
    pub trials: usize,
    /// Trials dropped because a solver did not converge.
    pub excluded: usize,
}

/// Empirical rejection rate of `test` on one scenario. Trial `t` draws its
/// sample from `substream_seed(seed, t)`, so different scenarios and probes
/// share random numbers.
pub fn rejection_rate(test: &dyn Decision, scenario: &Scenario, trials: usize, seed: u64) -> Result<RejectionRate> {
    let gen = SampleGenerator::new(scenario)?;
    let mut rejects = 0usize;
    let mut used = 0usize;
    let mut excluded = 0usize;
    for t in 0..trials {
        let sample_seed = substream_seed(seed, t as u64);
        let sample = gen.sample(sample_seed);
        let mut rng = decision_rng(sample_seed);
        match test.reject(scenario, &sample, &mut rng) {
            Ok(r) => {
                used += 1;
                rejects += r as usize;
            }
            Err(Error::DidNotConverge { .. }) => excluded += 1,
            Err(e) => return Err(e),
        }
    }
    let rate = if used > 0 { rejects as f64 / used as f64 } else { f64::NAN };
    Ok(RejectionRate { rate, trials: used, excluded })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RiskEstimate {
    /// Largest rejection rate over the null scenarios.
    pub type1: f64,
    /// Largest acceptance rate over the alternative scenarios.
    pub type2: f64,
    pub risk: f64,
    pub trials: usize,
    pub half_width_type1: f64,
    pub half_width_type2: f64,
    /// Half-width for the risk: the two component half-widths added in
    /// quadrature.
    pub half_width: f64,
    pub excluded: usize,
    pub seed: u64,
}

pub fn estimate_risk(
    test: &dyn Decision,
    nulls: &[Scenario],
    alts: &[Scenario],
    trials: usize,
    seed: u64,
) -> Result<RiskEstimate> {
    let null_rates = worst_rate(test, nulls, trials, seed, false)?;
    let alt_rates = worst_rate(test, alts, trials, seed, true)?;
    Ok(combine(null_rates, alt_rates, trials, seed))
}

pub(crate) fn combine(null: RejectionRate, alt_accept: RejectionRate, trials: usize, seed: u64) -> RiskEstimate {
    let h1 = wald_half_width(null.rate, null.trials);
    let h2 = wald_half_width(alt_accept.rate, alt_accept.trials);
    RiskEstimate {
        type1: null.rate,
        type2: alt_accept.rate,
        risk: null.rate + alt_accept.rate,
        trials,
        half_width_type1: h1,
        half_width_type2: h2,
        half_width: (h1 * h1 + h2 * h2).sqrt(),
        excluded: null.excluded + alt_accept.excluded,
        seed,
    }
}

/// Worst rejection rate (or acceptance rate when `accept`) over a panel;
/// the excluded count is summed over the panel.
pub(crate) fn worst_rate(
    test: &dyn Decision,
    panel: &[Scenario],
    trials: usize,
    seed: u64,
    accept: bool,
) -> Result<RejectionRate> {
    if panel.is_empty() {
        return Err(Error::InvalidConfig("scenario panel is empty".into()));
    }
    if trials == 0 {
        return Err(Error::InvalidConfig("trials must be positive".into()));
    }
    let mut worst: Option<RejectionRate> = None;
    let mut excluded = 0;
    for sc in panel {
        let mut r = rejection_rate(test, sc, trials, seed)?;
        excluded += r.excluded;
        if accept {
            r.rate = 1.0 - r.rate;
        }
        if worst.is_none_or(|w| r.rate > w.rate || w.rate.is_nan()) {
            worst = Some(r);
        }
    }
    let mut w = worst.expect("panel is nonempty");
    w.excluded = excluded;
    Ok(w)
}
