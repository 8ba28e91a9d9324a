use super::decision::{TestKind, TestSpec};
use crate::constants::{Constant, DesignConstants};
use crate::error::{Error, Result};
use crate::model::{SampleGenerator, Scenario};
use crate::rng::substream_seed;

/// Empirical (1−α)-quantile: the order statistic of rank
/// `max(⌈(1−α)N⌉, 1)` in increasing order.
pub fn empirical_quantile(values: &[f64], alpha: f64) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let rank = (((1.0 - alpha) * v.len() as f64).ceil() as usize).max(1);
    v[rank.min(v.len()) - 1]
}

#[derive(Debug, Clone, PartialEq)]
pub struct Calibration {
    pub kind: TestKind,
    /// Calibrated cutoff(s): one entry, or one per scale for `i`.
    pub values: Vec<f64>,
    pub trials_used: usize,
    pub excluded: usize,
}

/// Null statistics for several kinds at once; `out[k][s]` holds the samples
/// of kind `k` under scenario `s`, each a list of per-trial vectors.
fn null_statistics(
    spec: &TestSpec,
    kinds: &[TestKind],
    nulls: &[Scenario],
    trials: usize,
    seed: u64,
) -> Result<(Vec<Vec<Vec<Vec<f64>>>>, usize, usize)> {
    let mut out = vec![vec![Vec::with_capacity(trials); nulls.len()]; kinds.len()];
    let mut used = 0;
    let mut excluded = 0;
    for (si, sc) in nulls.iter().enumerate() {
        let gen = SampleGenerator::new(sc)?;
        for t in 0..trials {
            let sample = gen.sample(substream_seed(seed, t as u64));
            match spec.statistics(kinds, sc, &sample) {
                Ok(stats) => {
                    used += 1;
                    for (k, v) in stats.into_iter().enumerate() {
                        out[k][si].push(v);
                    }
                }
                Err(Error::DidNotConverge { .. }) => excluded += 1,
                Err(e) => return Err(e),
            }
        }
    }
    Ok((out, used, excluded))
}

/// Calibrates the cutoffs of several tests from one pass over the null
/// panel: per scenario the (1−α)-quantile of each statistic, then the
/// maximum over scenarios (entrywise per scale).
pub fn calibrate_threshold(
    spec: &TestSpec,
    kinds: &[TestKind],
    nulls: &[Scenario],
    alpha: f64,
    trials: usize,
    seed: u64,
) -> Result<Vec<Calibration>> {
    if trials < 100 {
        return Err(Error::InvalidConfig(format!("calibration needs at least 100 trials, got {trials}")));
    }
    if nulls.is_empty() {
        return Err(Error::InvalidConfig("null panel is empty".into()));
    }
    let (stats, used, excluded) = null_statistics(spec, kinds, nulls, trials, seed)?;
    let mut out = Vec::with_capacity(kinds.len());
    for (k, &kind) in kinds.iter().enumerate() {
        let width = stats[k].iter().flatten().map(Vec::len).max().unwrap_or(0);
        let mut values = vec![f64::NEG_INFINITY; width];
        for per_scenario in &stats[k] {
            for (j, v) in values.iter_mut().enumerate() {
                let column: Vec<f64> = per_scenario.iter().map(|s| s[j]).collect();
                *v = v.max(empirical_quantile(&column, alpha));
            }
        }
        out.push(Calibration { kind, values, trials_used: used, excluded });
    }
    Ok(out)
}

/// Stores calibrated cutoffs into a copy of the registry.
pub fn apply_calibration(base: &DesignConstants, cals: &[Calibration]) -> Result<DesignConstants> {
    let mut c = base.clone();
    for cal in cals {
        let single = || -> Result<Constant> {
            cal.values
                .first()
                .map(|v| Constant::calibrated(*v))
                .ok_or_else(|| Error::InvalidConfig(format!("no calibrated value for `{}`", cal.kind)))
        };
        match cal.kind {
            TestKind::T => c.c_t = single()?,
            TestKind::Chi => c.c_chi = single()?,
            TestKind::F => c.c_f = single()?,
            TestKind::I => c.c_i = cal.values.iter().map(|v| Constant::calibrated(*v)).collect(),
            TestKind::U => c.c_u_eta = single()?,
            TestKind::ThMcp | TestKind::ThIterative => c.c_star = Some(single()?),
            TestKind::Ag | TestKind::GeneralAg => {
                return Err(Error::InvalidConfig(format!("`{}` has no single cutoff", cal.kind)))
            }
        }
    }
    c.validate()?;
    Ok(c)
}

/// Two-stage calibration of the independent-setting tests: the order
/// statistic cutoff first, then the residual and Fourier tests, whose
/// screening step uses the calibrated order-statistic cutoff.
pub fn calibrate_independent(
    spec: &TestSpec,
    nulls: &[Scenario],
    alpha: f64,
    trials: usize,
    seed: u64,
) -> Result<DesignConstants> {
    let stage1 = calibrate_threshold(spec, &[TestKind::T], nulls, alpha, trials, seed)?;
    let constants = apply_calibration(&spec.constants, &stage1)?;
    let spec2 = TestSpec { constants, ..spec.clone() };
    let stage2 = calibrate_threshold(&spec2, &[TestKind::Chi, TestKind::F, TestKind::I], nulls, alpha, trials, seed)?;
    apply_calibration(&spec2.constants, &stage2)
}

/// Calibration of the U-statistic and MCP count test.
pub fn calibrate_general(
    spec: &TestSpec,
    nulls: &[Scenario],
    alpha: f64,
    trials: usize,
    seed: u64,
) -> Result<DesignConstants> {
    let cals = calibrate_threshold(spec, &[TestKind::U, TestKind::ThMcp], nulls, alpha, trials, seed)?;
    apply_calibration(&spec.constants, &cals)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantile_edges() {
        let v = [3.0, 1.0, 2.0, 5.0, 4.0];
        assert_eq!(empirical_quantile(&v, 1.0), 1.0);
        assert_eq!(empirical_quantile(&v, 0.0), 5.0);
        assert_eq!(empirical_quantile(&v, 0.2), 4.0);
        assert_eq!(empirical_quantile(&v, 0.5), 3.0);
        // 100 values: 95% quantile is the 95th smallest
        let w: Vec<f64> = (1..=100).map(f64::from).collect();
        assert_eq!(empirical_quantile(&w, 0.05), 95.0);
    }
}
