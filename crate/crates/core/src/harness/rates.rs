use serde::{Deserialize, Serialize};

use super::decision::Setting;
use crate::error::{Error, Result};

/// Default exponent margin separating the small and large k0 regimes.
pub const VARSIGMA: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RateSetting {
    Independent,
    General,
}

impl From<Setting> for RateSetting {
    fn from(s: Setting) -> Self {
        match s {
            Setting::Independent => RateSetting::Independent,
            Setting::General => RateSetting::General,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateQuery {
    pub setting: RateSetting,
    pub n: usize,
    pub p: usize,
    pub k0: usize,
    pub delta: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateReference {
    /// Squared separation distance in σ² units, up to constants.
    pub rate: f64,
    pub regime: String,
    /// Competing formulas when the regime is ambiguous or only bounded.
    pub candidates: Vec<f64>,
}

/// Reference order of the squared minimax separation distance.
pub fn rate_reference(q: &RateQuery) -> Result<RateReference> {
    rate_reference_with(q, VARSIGMA)
}

pub fn rate_reference_with(q: &RateQuery, varsigma: f64) -> Result<RateReference> {
    if q.p == 0 || q.n == 0 || q.k0 >= q.p || q.delta < 1 || q.delta > q.p - q.k0 {
        return Err(Error::InvalidConfig(format!(
            "rate query needs 1 ≤ delta ≤ p − k0, got delta = {}, p = {}, k0 = {}",
            q.delta, q.p, q.k0
        )));
    }
    let (n, p, k0) = (q.n as f64, q.p as f64, q.k0 as f64);
    let lp = p.ln();
    let sparse = q.delta as f64 * lp / n;
    let small_cut = p.powf(0.5 - varsigma);
    let large_cut = p.powf(0.5 + varsigma);
    let (small_dense, large_dense, large_lower) = match q.setting {
        RateSetting::Independent => (1.0 / n.sqrt() + k0 * lp / n, k0 / (n * lp), None),
        RateSetting::General => (p.sqrt() / n, k0 * lp / n, Some(k0 / (n * lp))),
    };
    let pick = |dense: f64, name: &str| {
        if sparse <= dense {
            ("sparse-Δ".to_string(), sparse)
        } else {
            (name.to_string(), dense)
        }
    };
    let out = if k0 <= small_cut {
        let (regime, rate) = pick(small_dense, "dense small-k0");
        RateReference { rate, regime, candidates: vec![rate] }
    } else if k0 > large_cut {
        let (regime, rate) = pick(large_dense, "dense large-k0");
        let mut candidates = vec![rate];
        if let Some(lower) = large_lower {
            candidates = vec![sparse.min(lower), rate];
        }
        RateReference { rate, regime, candidates }
    } else {
        let a = sparse.min(small_dense);
        let b = sparse.min(large_dense);
        RateReference { rate: a.max(b), regime: "gap".into(), candidates: vec![a, b] }
    };
    Ok(out)
}
