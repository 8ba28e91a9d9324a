//! Harness checks against mock decisions with known error rates.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ChiSquared, Continuous, ContinuousCDF};

use sparsity_core::harness::{
    calibrate_threshold, empirical_quantile, estimate_risk, rate_reference, separation_search, sweep, wald_half_width,
    Decision, RateQuery, RateSetting, SweepConfig, TestKind, TestSpec, BISECTION_STEPS, SWEEP_HEADER,
};
use sparsity_core::independent::chi_z;
use sparsity_core::model::{
    d2_to_sparse, CovarianceSpec, RegressionSample, SampleGenerator, Scenario, SignalPattern, SignalSpec,
};
use sparsity_core::rng::{decision_rng, substream_seed};
use sparsity_core::{DesignConstants, Result};

struct Always(bool);

impl Decision for Always {
    fn name(&self) -> String {
        format!("always {}", self.0)
    }
    fn reject(&self, _: &Scenario, _: &RegressionSample, _: &mut ChaCha8Rng) -> Result<bool> {
        Ok(self.0)
    }
}

struct Coin(f64);

impl Decision for Coin {
    fn name(&self) -> String {
        "coin".into()
    }
    fn reject(&self, _: &Scenario, _: &RegressionSample, rng: &mut ChaCha8Rng) -> Result<bool> {
        Ok(rng.random::<f64>() < self.0)
    }
}

/// Rejects with probability min(1, d/ρ0), d the distance of θ* to the null
/// set in σ units.
struct Ramp(f64);

impl Decision for Ramp {
    fn name(&self) -> String {
        "ramp".into()
    }
    fn reject(&self, sc: &Scenario, s: &RegressionSample, rng: &mut ChaCha8Rng) -> Result<bool> {
        let d = d2_to_sparse(s.theta_star.as_slice(), sc.signal.k0) / sc.sigma;
        Ok(rng.random::<f64>() < (d / self.0).min(1.0))
    }
}

fn tiny(signal: SignalSpec) -> Scenario {
    Scenario { n: 6, p: 10, sigma: 1.0, sigma_known: true, covariance: CovarianceSpec::identity(2.0), signal }
}

fn flat(rho: f64) -> SignalSpec {
    SignalSpec { k0: 1, delta: 4, rho, pattern: SignalPattern::FlatSmall }
}

#[test]
fn risk_of_constant_decisions() {
    let (null, alt) = (tiny(flat(0.0)), tiny(flat(1.0)));
    let r = estimate_risk(&Always(true), &[null.clone()], &[alt.clone()], 50, 1).unwrap();
    assert_eq!((r.type1, r.type2, r.risk, r.half_width), (1.0, 0.0, 1.0, 0.0));
    let r = estimate_risk(&Always(false), &[null], &[alt], 50, 1).unwrap();
    assert_eq!((r.type1, r.type2, r.risk), (0.0, 1.0, 1.0));
}

#[test]
fn coin_rate_and_half_width() {
    let (null, alt) = (tiny(flat(0.0)), tiny(flat(1.0)));
    let r = estimate_risk(&Coin(0.3), &[null], &[alt], 4000, 2).unwrap();
    let se = (0.3f64 * 0.7 / 4000.0).sqrt();
    assert!((r.type1 - 0.3).abs() <= 3.0 * se, "{}", r.type1);
    assert!((r.type2 - 0.7).abs() <= 3.0 * se, "{}", r.type2);
    assert_eq!(r.half_width_type1, wald_half_width(r.type1, 4000));
    assert!((r.half_width_type1 - 1.96 * (r.type1 * (1.0 - r.type1) / 4000.0).sqrt()).abs() < 1e-15);
    for v in [r.type1, r.type2, r.half_width_type1, r.half_width_type2] {
        assert!((0.0..=1.0).contains(&v));
    }
}

#[test]
fn search_finds_the_ramp_crossing() {
    let (rho0, gamma, trials, seed) = (1.0, 0.5, 400, 3);
    let bounds = (0.0, 2.0);
    let null = tiny(flat(0.0));
    let template = tiny(flat(1.0));
    let res = separation_search(&Ramp(rho0), &[null.clone()], &template, gamma, bounds, trials, seed).unwrap();
    let cell = (bounds.1 - bounds.0) / (1u64 << BISECTION_STEPS) as f64;
    assert!(bounds.0 <= res.lo && res.hi <= bounds.1);
    assert!((res.hi - res.lo - cell).abs() < 1e-12);

    // exact crossing of the empirical curve under the shared decision draws
    let mut u: Vec<f64> = (0..trials as u64).map(|t| decision_rng(substream_seed(seed, t)).random::<f64>()).collect();
    u.sort_by(f64::total_cmp);
    let need = ((1.0 - gamma) * trials as f64).ceil() as usize;
    let crossing = rho0 * u[need - 1];
    assert!(res.lo <= crossing && crossing <= res.hi, "{crossing} not in [{}, {}]", res.lo, res.hi);

    // population crossing and a re-estimate with ten times the trials
    let se = rho0 * (gamma * (1.0 - gamma) / trials as f64).sqrt();
    assert!((res.rho_hat - rho0 * (1.0 - gamma)).abs() <= 3.0 * se + cell);
    let big = separation_search(&Ramp(rho0), &[null.clone()], &template, gamma, bounds, 10 * trials, seed).unwrap();
    assert!((res.rho_hat - big.rho_hat).abs() <= 3.0 * se + cell);

    let strict = separation_search(&Ramp(rho0), &[null], &template, 0.2, bounds, trials, seed).unwrap();
    assert!(strict.rho_hat >= res.rho_hat);
}

#[test]
fn search_rejects_unbracketed_interval() {
    let err = separation_search(&Always(false), &[tiny(flat(0.0))], &tiny(flat(1.0)), 0.5, (0.1, 1.0), 20, 4);
    assert!(err.is_err());
}

#[test]
fn quantile_matches_chi_square_law() {
    // with θ̃ = θ*, the residual statistic is χ²_m/m − 1
    let (m, trials, alpha) = (100, 4000, 0.05);
    let sc = Scenario {
        n: m,
        p: 5,
        sigma: 1.0,
        sigma_known: true,
        covariance: CovarianceSpec::identity(2.0),
        signal: SignalSpec { k0: 2, delta: 0, rho: 0.0, pattern: SignalPattern::Spikes { spike_scale: 3.0 } },
    };
    let gen = SampleGenerator::new(&sc).unwrap();
    let z: Vec<f64> = (0..trials as u64)
        .map(|t| {
            let s = gen.sample(substream_seed(5, t));
            chi_z((&s.y - &s.x * &s.theta_star).norm_squared(), m, 1.0)
        })
        .collect();
    let law = ChiSquared::new(m as f64).unwrap();
    let q = law.inverse_cdf(1.0 - alpha);
    let se = (alpha * (1.0 - alpha) / trials as f64).sqrt() / law.pdf(q) / m as f64;
    let got = empirical_quantile(&z, alpha);
    assert!((got - (q / m as f64 - 1.0)).abs() <= 3.0 * se, "{got} vs {}", q / m as f64 - 1.0);
}

#[test]
fn calibration_is_reproducible() {
    let sc = tiny(flat(0.0));
    let sc = Scenario { n: 60, p: 40, ..sc };
    let spec = TestSpec::new(TestKind::Chi, 0.05, 0.05, 2.0, DesignConstants::default());
    let a = calibrate_threshold(&spec, &[TestKind::T, TestKind::Chi], &[sc.clone()], 0.05, 100, 6).unwrap();
    let b = calibrate_threshold(&spec, &[TestKind::T, TestKind::Chi], &[sc], 0.05, 100, 6).unwrap();
    assert_eq!(a, b);
    assert_eq!(a[0].trials_used + a[0].excluded, 100);
}

#[test]
fn sweep_grid_rows_and_bytes() {
    let config = SweepConfig {
        n: vec![60, 90],
        p: vec![80, 120],
        k0: vec![2],
        delta: vec![4],
        rho: vec![1.0],
        tests: vec![TestKind::Chi],
        trials: 5,
        seed: 7,
        sigma: 1.0,
        alpha: 0.05,
        confidence: 0.05,
        spike_scale: 10.0,
        covariance: CovarianceSpec::identity(2.0),
    };
    let c = DesignConstants::default();
    let (mut a, mut b) = (Vec::new(), Vec::new());
    assert_eq!(sweep(&config, &c, &mut a).unwrap(), 4);
    sweep(&config, &c, &mut b).unwrap();
    assert_eq!(a, b);
    let text = String::from_utf8(a).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 5);
    assert_eq!(lines[0], SWEEP_HEADER.join(","));
    assert_eq!(lines[0], "n,p,k0,delta,rho,test,type1,type2,risk,half_width,rate_ref,regime,seed,error");
}

#[test]
fn rate_reference_nondecreasing_in_delta() {
    for setting in [RateSetting::Independent, RateSetting::General] {
        for &(n, p) in &[(200, 1000), (1000, 4000), (5000, 500)] {
            for &k0 in &[0, 3, 30, 300] {
                let mut prev: Option<(f64, String)> = None;
                for delta in 1..200 {
                    let r = rate_reference(&RateQuery { setting, n, p, k0, delta }).unwrap();
                    assert!(r.rate >= 0.0);
                    if let Some((rate, regime)) = &prev {
                        if *regime == r.regime {
                            assert!(r.rate >= rate - 1e-12, "{setting:?} n={n} p={p} k0={k0} delta={delta}");
                        }
                    }
                    prev = Some((r.rate, r.regime));
                }
            }
        }
    }
}
