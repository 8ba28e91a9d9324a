//! Monte Carlo checks of the known-variance tests.

use sparsity_core::harness::{
    apply_calibration, calibrate_independent, calibrate_threshold, rejection_rate, TestKind, TestSpec,
};
use sparsity_core::model::{CovarianceSpec, SampleGenerator, Scenario, SignalPattern, SignalSpec};
use sparsity_core::rng::substream_seed;
use sparsity_core::{Constant, DesignConstants, ThresholdMode};

fn scenario(n: usize, p: usize, signal: SignalSpec) -> Scenario {
    Scenario { n, p, sigma: 1.0, sigma_known: true, covariance: CovarianceSpec::identity(2.0), signal }
}

fn zero(k0: usize) -> SignalSpec {
    SignalSpec { k0, delta: 0, rho: 0.0, pattern: SignalPattern::FlatSmall }
}

fn flat(k0: usize, delta: usize, rho: f64) -> SignalSpec {
    SignalSpec { k0, delta, rho, pattern: SignalPattern::FlatSmall }
}

fn spike(n: usize, p: usize) -> f64 {
    10.0 * ((p as f64).ln() / n as f64).sqrt()
}

fn preset_panel(n: usize, p: usize, k0: usize) -> Vec<Scenario> {
    vec![scenario(n, p, zero(k0)), scenario(n, p, SignalSpec::null_spikes(k0, spike(n, p)))]
}

fn spec(kind: TestKind, alpha: f64, delta: f64, c: DesignConstants) -> TestSpec {
    TestSpec::new(kind, alpha, delta, 2.0, c)
}

fn rate(s: &TestSpec, sc: &Scenario, trials: usize, seed: u64) -> f64 {
    rejection_rate(s, sc, trials, seed).unwrap().rate
}

#[test]
fn t_level_and_power_on_k0_plus_one_spikes() {
    let (n, p, k0) = (300, 1000, 5);
    let base = spec(TestKind::T, 0.05, 0.05, DesignConstants::default());
    let null = scenario(n, p, zero(k0));
    let cal = calibrate_threshold(&base, &[TestKind::T], std::slice::from_ref(&null), 0.05, 2000, 11).unwrap();
    let s = TestSpec { constants: apply_calibration(&base.constants, &cal).unwrap(), ..base };
    let level = rate(&s, &null, 2000, 13);
    assert!(level <= 0.08, "level {level}");
    let a = spike(n, p);
    let power = rate(&s, &scenario(n, p, SignalSpec::spikes(k0, 1, a, a)), 500, 12);
    assert!(power >= 0.95, "power {power}");
}

#[test]
fn chi_calibrated_level() {
    let (n, p) = (300, 1000);
    let null = scenario(n, p, zero(0));
    let base = spec(TestKind::Chi, 0.05, 0.05, DesignConstants::default());
    let cal = calibrate_threshold(&base, &[TestKind::Chi], std::slice::from_ref(&null), 0.05, 2000, 21).unwrap();
    let s = TestSpec { constants: apply_calibration(&base.constants, &cal).unwrap(), ..base };
    let level = rate(&s, &null, 2000, 22);
    assert!(level <= 0.08, "level {level}");
}

// Analytic thresholds: a flipped kernel convention puts Z_f near p and
// rejects almost always.
#[test]
fn f_null_level_with_analytic_threshold() {
    let null = scenario(300, 2500, zero(0));
    let s = spec(TestKind::F, 0.05, 0.05, DesignConstants::default());
    let level = rate(&s, &null, 2000, 31);
    assert!(level <= 0.08, "level {level}");
}

#[test]
fn f_power_on_flat_alternative() {
    let (n, p, k0) = (300, 1000, 10);
    let base = spec(TestKind::F, 0.05, 0.05, DesignConstants::default());
    let c = calibrate_independent(&base, &preset_panel(n, p, k0), 0.05, 2000, 41).unwrap();
    let s = TestSpec { constants: c, ..base };
    let unit = 1.0 / (n as f64 * (p as f64).ln()).sqrt();
    // 2·k0 entries of magnitude C/sqrt(n log p)
    let alt = |c: f64| scenario(n, p, flat(k0, k0, c * unit * (k0 as f64).sqrt()));
    let c = (0..30)
        .map(|j| 2f64.powf(j as f64 / 2.0))
        .find(|&c| rate(&s, &alt(c), 100, 42) >= 0.9)
        .expect("no C reached pilot power");
    let power = rate(&s, &alt(c), 300, 43);
    assert!(power >= 0.8, "C {c}: power {power}");
}

#[test]
fn aggregate_level_at_small_alpha_delta() {
    let (n, p, k0) = (300, 1000, 5);
    let base = spec(TestKind::Ag, 0.04, 0.04, DesignConstants::default());
    let c = calibrate_independent(&base, &preset_panel(n, p, k0), 0.04, 2000, 51).unwrap();
    let s = TestSpec { constants: c, ..base };
    let level = rate(&s, &scenario(n, p, zero(k0)), 1000, 52);
    assert!(level <= 0.25, "level {level}");
}

#[test]
fn power_roughly_monotone_in_distance() {
    let (n, p, k0, trials) = (300, 1000, 5, 200);
    for kind in [TestKind::T, TestKind::Chi] {
        let s = spec(kind, 0.05, 0.05, DesignConstants::default());
        let powers: Vec<f64> =
            [0.5, 1.0, 2.0, 4.0].iter().map(|&r| rate(&s, &scenario(n, p, flat(k0, 20, r)), trials, 61)).collect();
        for w in powers.windows(2) {
            let se = (w[0] * (1.0 - w[0]) / trials as f64).sqrt();
            assert!(w[1] >= w[0] - 2.0 * se, "{kind}: {powers:?}");
        }
    }
}

#[test]
fn analytic_and_calibrated_modes_agree_on_injected_values() {
    let (n, p, k0) = (150, 300, 3);
    let base = spec(TestKind::T, 0.05, 0.05, DesignConstants::default());
    let calibrated = calibrate_independent(&base, &preset_panel(n, p, k0), 0.05, 100, 71).unwrap();
    let as_analytic = |k: Constant| Constant::analytic(k.value);
    let analytic = DesignConstants {
        c_t: as_analytic(calibrated.c_t),
        c_chi: as_analytic(calibrated.c_chi),
        c_f: as_analytic(calibrated.c_f),
        c_i: calibrated.c_i.iter().copied().map(as_analytic).collect(),
        ..calibrated.clone()
    };
    let gen = SampleGenerator::new(&scenario(n, p, flat(k0, 8, 1.0))).unwrap();
    for t in 0..20 {
        let sample = gen.sample(substream_seed(72, t));
        for kind in [TestKind::T, TestKind::Chi, TestKind::F, TestKind::I, TestKind::Ag] {
            let a = spec(kind, 0.05, 0.05, analytic.clone()).run_sample(&sample, k0, 1.0).unwrap();
            let c = spec(kind, 0.05, 0.05, calibrated.clone()).run_sample(&sample, k0, 1.0).unwrap();
            assert_eq!(a.reject, c.reject, "{kind}");
            assert_eq!(a.statistic, c.statistic, "{kind}");
            if kind == TestKind::T || kind == TestKind::Chi {
                assert_eq!(a.mode, ThresholdMode::Analytic);
                assert_eq!(c.mode, ThresholdMode::Calibrated);
            }
        }
    }
}
