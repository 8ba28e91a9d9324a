use std::ops::Range;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::covariance::{covariance_matrix, CovarianceSpec};
use super::signal::{make_theta, SignalSpec};
use crate::error::{Error, Result};
use crate::rng::sample_rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub n: usize,
    pub p: usize,
    pub sigma: f64,
    #[serde(default)]
    pub sigma_known: bool,
    pub covariance: CovarianceSpec,
    pub signal: SignalSpec,
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        if self.n < 3 {
            return Err(Error::InvalidConfig(format!("n must be at least 3, got {}", self.n)));
        }
        if self.p == 0 {
            return Err(Error::InvalidConfig("p must be positive".into()));
        }
        if !(self.sigma > 0.0) || !self.sigma.is_finite() {
            return Err(Error::InvalidConfig(format!("sigma must be positive, got {}", self.sigma)));
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let s: Self = serde_json::from_str(text)?;
        s.validate()?;
        Ok(s)
    }

    pub fn with_signal(&self, signal: SignalSpec) -> Self {
        Self { signal, ..self.clone() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegressionSample {
    pub x: DMatrix<f64>,
    pub y: DVector<f64>,
    pub theta_star: DVector<f64>,
    pub seed: u64,
}

impl RegressionSample {
    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn p(&self) -> usize {
        self.x.ncols()
    }

    pub fn rows(&self, range: Range<usize>) -> (DMatrix<f64>, DVector<f64>) {
        let len = range.len();
        (self.x.rows(range.start, len).into_owned(), self.y.rows(range.start, len).into_owned())
    }
}

/// Precomputes θ* and the Cholesky factor of Σ so that repeated draws from
/// one scenario only pay for the random numbers and one matrix product.
#[derive(Debug, Clone)]
pub struct SampleGenerator {
    scenario: Scenario,
    theta: DVector<f64>,
    chol_t: Option<DMatrix<f64>>,
}

impl SampleGenerator {
    pub fn new(scenario: &Scenario) -> Result<Self> {
        scenario.validate()?;
        let theta = DVector::from_vec(make_theta(&scenario.signal, scenario.p, scenario.sigma)?);
        let chol_t = if scenario.covariance.is_identity() {
            None
        } else {
            let sigma = covariance_matrix(&scenario.covariance, scenario.p)?;
            let chol = sigma.cholesky().ok_or(Error::NonFinite("covariance Cholesky factor"))?;
            Some(chol.l().transpose())
        };
        Ok(Self { scenario: scenario.clone(), theta, chol_t })
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn theta_star(&self) -> &DVector<f64> {
        &self.theta
    }

    pub fn sample(&self, seed: u64) -> RegressionSample {
        let (n, p) = (self.scenario.n, self.scenario.p);
        let mut rng = sample_rng(seed);
        // Fill row by row so the stream layout does not depend on storage order.
        let mut z = DMatrix::zeros(n, p);
        for i in 0..n {
            for j in 0..p {
                z[(i, j)] = rng.sample::<f64, _>(StandardNormal);
            }
        }
        let x = match &self.chol_t {
            None => z,
            Some(lt) => z * lt,
        };
        let noise = DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
        let y = &x * &self.theta + noise * self.scenario.sigma;
        RegressionSample { x, y, theta_star: self.theta.clone(), seed }
    }
}

pub fn generate_sample(scenario: &Scenario, seed: u64) -> Result<RegressionSample> {
    Ok(SampleGenerator::new(scenario)?.sample(seed))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SplitSample {
    pub parts: Vec<Range<usize>>,
    pub m: usize,
    pub discarded: usize,
}

pub fn split_rows(n: usize, parts: usize) -> Result<SplitSample> {
    if parts == 0 || n < parts {
        return Err(Error::TooFewRows { rows: n, parts });
    }
    let m = n / parts;
    Ok(SplitSample { parts: (0..parts).map(|i| i * m..(i + 1) * m).collect(), m, discarded: n - m * parts })
}

pub fn split_sample(sample: &RegressionSample, parts: usize) -> Result<SplitSample> {
    split_rows(sample.n(), parts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::covariance::CovarianceKind;

    fn scenario(n: usize, p: usize, signal: SignalSpec) -> Scenario {
        Scenario { n, p, sigma: 1.0, sigma_known: false, covariance: CovarianceSpec::identity(2.0), signal }
    }

    #[test]
    fn splits() {
        let s = split_rows(9, 3).unwrap();
        assert_eq!(s.parts, vec![0..3, 3..6, 6..9]);
        assert_eq!(s.discarded, 0);
        let s = split_rows(10, 3).unwrap();
        assert_eq!((s.m, s.discarded), (3, 1));
        assert_eq!(s.parts[2], 6..9);
        let s = split_rows(8, 2).unwrap();
        assert_eq!(s.parts, vec![0..4, 4..8]);
        assert_eq!(s.m, 4);
        assert!(matches!(split_rows(2, 3), Err(Error::TooFewRows { rows: 2, parts: 3 })));
    }

    #[test]
    fn deterministic_bytes() {
        let mut sc = scenario(30, 12, SignalSpec::null_spikes(2, 3.0));
        sc.covariance = CovarianceSpec { kind: CovarianceKind::Ar1(0.4), eta: 3.0 };
        let a = generate_sample(&sc, 77).unwrap();
        let b = generate_sample(&sc, 77).unwrap();
        let bytes =
            |s: &RegressionSample| s.x.iter().chain(s.y.iter()).flat_map(|v| v.to_le_bytes()).collect::<Vec<u8>>();
        assert_eq!(bytes(&a), bytes(&b));
        assert_ne!(bytes(&a), bytes(&generate_sample(&sc, 78).unwrap()));
    }

    #[test]
    fn response_variance_under_null() {
        // Var(Y_i) = 1; over 2000 draws the sample variance has sd ≈ √(2/1999).
        let sc = scenario(3, 4, SignalSpec::null_spikes(0, 1.0));
        let gen = SampleGenerator::new(&sc).unwrap();
        let draws: Vec<DVector<f64>> = (0..2000).map(|t| gen.sample(t).y).collect();
        for i in 0..3 {
            let vals: Vec<f64> = draws.iter().map(|y| y[i]).collect();
            let mean = vals.iter().sum::<f64>() / 2000.0;
            let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / 1999.0;
            assert!((0.9..=1.1).contains(&var), "coordinate {i}: {var}");
        }
    }

    #[test]
    fn column_norms_concentrate() {
        let sc = scenario(50, 20, SignalSpec::null_spikes(0, 1.0));
        let gen = SampleGenerator::new(&sc).unwrap();
        for t in 0..20 {
            let s = gen.sample(t);
            let mean = s.x.column_iter().map(|c| c.norm_squared() / 50.0).sum::<f64>() / 20.0;
            assert!((0.8..=1.2).contains(&mean), "trial {t}: {mean}");
        }
    }

    #[test]
    fn correlated_rows_have_target_covariance() {
        let mut sc = scenario(4000, 3, SignalSpec::null_spikes(0, 1.0));
        sc.covariance = CovarianceSpec { kind: CovarianceKind::Ar1(0.5), eta: 3.0 };
        let s = generate_sample(&sc, 5).unwrap();
        let emp = s.x.transpose() * &s.x / 4000.0;
        let target = [[1.0, 0.5, 0.25], [0.5, 1.0, 0.5], [0.25, 0.5, 1.0]];
        for i in 0..3 {
            for j in 0..3 {
                // entrywise sd ≤ √(2/4000) ≈ 0.022
                assert!((emp[(i, j)] - target[i][j]).abs() < 0.1);
            }
        }
    }

    #[test]
    fn scenario_json() {
        let text = r#"{"n":90,"p":40,"sigma":1.5,"sigma_known":false,
            "covariance":{"kind":"identity","eta":2.0},
            "signal":{"k0":3,"delta":4,"rho":0.5,"pattern":"spikes","spike_scale":8.0}}"#;
        let sc = Scenario::from_json(text).unwrap();
        assert_eq!(sc.signal, SignalSpec::spikes(3, 4, 0.5, 8.0));
        let back = Scenario::from_json(&serde_json::to_string(&sc).unwrap()).unwrap();
        assert_eq!(back, sc);
        assert!(Scenario::from_json(&text.replace("\"n\":90", "\"n\":2")).is_err());
    }
}
