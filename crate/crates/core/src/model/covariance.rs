use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const SPECTRUM_TOL: f64 = 1e-9;
const SYMMETRY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub enum CovarianceKind {
    Identity,
    /// Toeplitz `a^|i-j|`.
    Ar1(f64),
    /// Unit diagonal, constant off-diagonal `r`.
    Equicorrelation(f64),
    Explicit(DMatrix<f64>),
}

/// A covariance family member together with the class bound η: the realized
/// matrix must have its spectrum inside `[1/η, η]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawCovariance", into = "RawCovariance")]
pub struct CovarianceSpec {
    pub kind: CovarianceKind,
    pub eta: f64,
}

impl CovarianceSpec {
    pub fn identity(eta: f64) -> Self {
        Self { kind: CovarianceKind::Identity, eta }
    }

    pub fn is_identity(&self) -> bool {
        matches!(self.kind, CovarianceKind::Identity)
    }
}

#[derive(Serialize, Deserialize)]
struct RawCovariance {
    kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    param: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    matrix: Option<Vec<Vec<f64>>>,
    eta: f64,
}

impl TryFrom<RawCovariance> for CovarianceSpec {
    type Error = Error;

    fn try_from(raw: RawCovariance) -> Result<Self> {
        let need_param =
            |name: &str| raw.param.ok_or_else(|| Error::InvalidConfig(format!("covariance kind {name} needs `param`")));
        let kind = match raw.kind.as_str() {
            "identity" => CovarianceKind::Identity,
            "ar1" => CovarianceKind::Ar1(need_param("ar1")?),
            "equicorrelation" => CovarianceKind::Equicorrelation(need_param("equicorrelation")?),
            "explicit" => {
                let rows = raw
                    .matrix
                    .as_ref()
                    .ok_or_else(|| Error::InvalidConfig("covariance kind explicit needs `matrix`".into()))?;
                let p = rows.len();
                if p == 0 || rows.iter().any(|r| r.len() != p) {
                    return Err(Error::InvalidConfig("explicit covariance must be square".into()));
                }
                CovarianceKind::Explicit(DMatrix::from_fn(p, p, |i, j| rows[i][j]))
            }
            other => return Err(Error::InvalidConfig(format!("unknown covariance kind `{other}`"))),
        };
        if !(raw.eta > 1.0) {
            return Err(Error::InvalidConfig(format!("eta must exceed 1, got {}", raw.eta)));
        }
        Ok(Self { kind, eta: raw.eta })
    }
}

impl From<CovarianceSpec> for RawCovariance {
    fn from(spec: CovarianceSpec) -> Self {
        let (kind, param, matrix) = match spec.kind {
            CovarianceKind::Identity => ("identity", None, None),
            CovarianceKind::Ar1(a) => ("ar1", Some(a), None),
            CovarianceKind::Equicorrelation(r) => ("equicorrelation", Some(r), None),
            CovarianceKind::Explicit(m) => {
                let rows = (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect();
                ("explicit", None, Some(rows))
            }
        };
        RawCovariance { kind: kind.into(), param, matrix, eta: spec.eta }
    }
}

/// Realizes the `p × p` covariance matrix and checks it lies in the class
/// `U(η)`.
pub fn covariance_matrix(spec: &CovarianceSpec, p: usize) -> Result<DMatrix<f64>> {
    if p == 0 {
        return Err(Error::InvalidConfig("p must be positive".into()));
    }
    let sigma = match &spec.kind {
        CovarianceKind::Identity => return Ok(DMatrix::identity(p, p)),
        CovarianceKind::Ar1(a) => DMatrix::from_fn(p, p, |i, j| a.powi(i.abs_diff(j) as i32)),
        CovarianceKind::Equicorrelation(r) => DMatrix::from_fn(p, p, |i, j| if i == j { 1.0 } else { *r }),
        CovarianceKind::Explicit(m) => {
            if m.nrows() != p || m.ncols() != p {
                return Err(Error::InvalidConfig(format!(
                    "explicit covariance is {}x{}, expected {p}x{p}",
                    m.nrows(),
                    m.ncols()
                )));
            }
            let asym = (m - m.transpose()).amax();
            if asym > SYMMETRY_TOL {
                return Err(Error::NotSymmetric(asym));
            }
            m.clone()
        }
    };
    if sigma.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("covariance matrix"));
    }
    let (min, max) = spectrum_bounds(&sigma);
    let eta = spec.eta;
    if min < 1.0 / eta - SPECTRUM_TOL || max > eta + SPECTRUM_TOL {
        return Err(Error::SpectrumOutOfClass { min, max, eta });
    }
    Ok(sigma)
}

/// Smallest and largest eigenvalue of a symmetric matrix.
pub fn spectrum_bounds(sigma: &DMatrix<f64>) -> (f64, f64) {
    let eig = SymmetricEigen::new(sigma.clone());
    let min = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    let max = eig.eigenvalues.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (min, max)
}
