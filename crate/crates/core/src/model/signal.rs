use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum SignalPattern {
    /// `k0` entries of magnitude `spike_scale·σ` followed by `delta` entries
    /// of magnitude `ρσ/√delta`.
    Spikes {
        spike_scale: f64,
    },
    /// `k0 + delta` entries, all of magnitude `ρσ/√delta`.
    FlatSmall,
    /// Tail magnitudes following `1 + log(k0 / min(q, k0))` for rank
    /// `k0 + q`, normalized to distance `ρσ`.
    Decaying {
        spike_scale: f64,
    },
    Explicit(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSignal", into = "RawSignal")]
pub struct SignalSpec {
    pub k0: usize,
    pub delta: usize,
    /// Distance to the null set in units of σ.
    pub rho: f64,
    pub pattern: SignalPattern,
}

impl SignalSpec {
    pub fn null_spikes(k0: usize, spike_scale: f64) -> Self {
        Self { k0, delta: 0, rho: 0.0, pattern: SignalPattern::Spikes { spike_scale } }
    }

    pub fn spikes(k0: usize, delta: usize, rho: f64, spike_scale: f64) -> Self {
        Self { k0, delta, rho, pattern: SignalPattern::Spikes { spike_scale } }
    }

    pub fn with_rho(&self, rho: f64) -> Self {
        Self { rho, ..self.clone() }
    }
}

#[derive(Serialize, Deserialize)]
struct RawSignal {
    k0: usize,
    delta: usize,
    rho: f64,
    pattern: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    spike_scale: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    values: Option<Vec<f64>>,
}

impl TryFrom<RawSignal> for SignalSpec {
    type Error = Error;

    fn try_from(raw: RawSignal) -> Result<Self> {
        let pattern = match raw.pattern.as_str() {
            "spikes" => SignalPattern::Spikes { spike_scale: raw.spike_scale.unwrap_or(10.0) },
            "flat_small" => SignalPattern::FlatSmall,
            "decaying" => SignalPattern::Decaying { spike_scale: raw.spike_scale.unwrap_or(0.0) },
            "explicit" => SignalPattern::Explicit(
                raw.values.ok_or_else(|| Error::InvalidConfig("signal pattern explicit needs `values`".into()))?,
            ),
            other => return Err(Error::InvalidConfig(format!("unknown signal pattern `{other}`"))),
        };
        if !(raw.rho >= 0.0) {
            return Err(Error::InvalidConfig(format!("rho must be nonnegative, got {}", raw.rho)));
        }
        Ok(Self { k0: raw.k0, delta: raw.delta, rho: raw.rho, pattern })
    }
}

impl From<SignalSpec> for RawSignal {
    fn from(s: SignalSpec) -> Self {
        let (pattern, spike_scale, values) = match s.pattern {
            SignalPattern::Spikes { spike_scale } => ("spikes", Some(spike_scale), None),
            SignalPattern::FlatSmall => ("flat_small", None, None),
            SignalPattern::Decaying { spike_scale } => ("decaying", Some(spike_scale), None),
            SignalPattern::Explicit(v) => ("explicit", None, Some(v)),
        };
        RawSignal { k0: s.k0, delta: s.delta, rho: s.rho, pattern: pattern.into(), spike_scale, values }
    }
}

/// Builds θ* from a `SignalSpec`. For the built-in patterns the
/// result satisfies `d2_to_sparse(θ*, k0) = ρσ`.
pub fn make_theta(signal: &SignalSpec, p: usize, sigma: f64) -> Result<Vec<f64>> {
    let SignalSpec { k0, delta, rho, .. } = *signal;
    if let SignalPattern::Explicit(v) = &signal.pattern {
        if v.len() != p {
            return Err(Error::InvalidConfig(format!("explicit signal has length {}, expected {p}", v.len())));
        }
        return Ok(v.clone());
    }
    if k0 + delta > p {
        return Err(Error::InvalidConfig(format!("k0 + delta = {} exceeds p = {p}", k0 + delta)));
    }
    if delta == 0 && rho > 0.0 {
        return Err(Error::PatternInfeasible("delta = 0 cannot carry a positive distance".into()));
    }
    let mut theta = vec![0.0; p];
    let tail_total = rho * sigma;
    match signal.pattern {
        SignalPattern::Spikes { spike_scale } => {
            let tail = if delta > 0 { tail_total / (delta as f64).sqrt() } else { 0.0 };
            check_head(k0, spike_scale * sigma, tail)?;
            for (i, t) in theta.iter_mut().take(k0).enumerate() {
                *t = if i % 2 == 0 { spike_scale * sigma } else { -spike_scale * sigma };
            }
            theta[k0..k0 + delta].iter_mut().for_each(|t| *t = tail);
        }
        SignalPattern::FlatSmall => {
            let level = if delta > 0 { tail_total / (delta as f64).sqrt() } else { 0.0 };
            theta[..k0 + delta].iter_mut().for_each(|t| *t = level);
        }
        SignalPattern::Decaying { spike_scale } => {
            let k = k0.max(1) as f64;
            let profile: Vec<f64> = (1..=delta).map(|q| 1.0 + (k / (q as f64).min(k)).ln()).collect();
            let norm = profile.iter().map(|v| v * v).sum::<f64>().sqrt();
            let scale = if norm > 0.0 { tail_total / norm } else { 0.0 };
            let tail_max = profile.first().map_or(0.0, |v| v * scale);
            let head = (spike_scale * sigma).max(tail_max);
            theta[..k0].iter_mut().for_each(|t| *t = head);
            for (t, v) in theta[k0..k0 + delta].iter_mut().zip(&profile) {
                *t = v * scale;
            }
        }
        SignalPattern::Explicit(_) => unreachable!(),
    }
    Ok(theta)
}

fn check_head(k0: usize, head: f64, tail: f64) -> Result<()> {
    if k0 > 0 && (head < tail || head <= 0.0 && tail > 0.0) {
        return Err(Error::PatternInfeasible(format!(
            "head magnitude {head} is below tail magnitude {tail}; the k0 largest entries would fall in the tail"
        )));
    }
    Ok(())
}

/// Indices sorted by decreasing magnitude, lowest index first on ties.
pub(crate) fn rank_by_magnitude(theta: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..theta.len()).collect();
    idx.sort_by(|&a, &b| theta[b].abs().total_cmp(&theta[a].abs()).then(a.cmp(&b)));
    idx
}

/// ℓ2 distance from θ to the set of k0-sparse vectors: the norm of θ with
/// its k0 largest-magnitude entries removed.
pub fn d2_to_sparse(theta: &[f64], k0: usize) -> f64 {
    if k0 >= theta.len() {
        return 0.0;
    }
    rank_by_magnitude(theta)[k0..].iter().map(|&i| theta[i] * theta[i]).sum::<f64>().sqrt()
}

/// Absolute value of the j-th largest entry (1-based); 0 when j > len.
pub fn order_statistic(values: &[f64], j: usize) -> f64 {
    if j == 0 || j > values.len() {
        return 0.0;
    }
    let mut mags: Vec<f64> = values.iter().map(|v| v.abs()).collect();
    let (_, kth, _) = mags.select_nth_unstable_by(j - 1, |a, b| b.total_cmp(a));
    *kth
}
