use serde::Serialize;

use super::decision::Decision;
use super::risk::{combine, worst_rate, RiskEstimate};
use crate::error::{Error, Result};
use crate::model::Scenario;

pub const BISECTION_STEPS: usize = 12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchResult {
    /// Midpoint of the final bracket.
    pub rho_hat: f64,
    pub lo: f64,
    pub hi: f64,
    /// Every probed (ρ, risk estimate), bracket ends first.
    pub probes: Vec<(f64, RiskEstimate)>,
}

/// Bisects on ρ for the point where the estimated risk crosses `gamma`.
/// The type-I part is estimated once on `nulls`; alternatives are
/// `template` with its distance set to each probed ρ. All probes reuse the
/// same trial seeds.
pub fn separation_search(
    test: &dyn Decision,
    nulls: &[Scenario],
    template: &Scenario,
    gamma: f64,
    bounds: (f64, f64),
    trials: usize,
    seed: u64,
) -> Result<SearchResult> {
    let (mut lo, mut hi) = bounds;
    if !(lo < hi) {
        return Err(Error::InvalidConfig(format!("empty search interval [{lo}, {hi}]")));
    }
    let null = worst_rate(test, nulls, trials, seed, false)?;
    let risk_at = |rho: f64| -> Result<RiskEstimate> {
        let alt = template.with_signal(template.signal.with_rho(rho));
        let a = worst_rate(test, std::slice::from_ref(&alt), trials, seed, true)?;
        Ok(combine(null, a, trials, seed))
    };
    let r_lo = risk_at(lo)?;
    let r_hi = risk_at(hi)?;
    if !(r_lo.risk >= gamma && gamma >= r_hi.risk) {
        return Err(Error::NotBracketed { risk_lo: r_lo.risk, risk_hi: r_hi.risk, gamma });
    }
    let mut probes = vec![(lo, r_lo), (hi, r_hi)];
    for _ in 0..BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        let r = risk_at(mid)?;
        if r.risk > gamma {
            lo = mid;
        } else {
            hi = mid;
        }
        probes.push((mid, r));
    }
    Ok(SearchResult { rho_hat: 0.5 * (lo + hi), lo, hi, probes })
}
