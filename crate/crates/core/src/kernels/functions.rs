use std::f64::consts::{PI, SQRT_2};

use statrs::function::erf::erf;

use super::quadrature::{integrate, ABS_TOL};
use crate::error::Result;

const SERIES_CUTOFF: f64 = 1e-4;

/// `∫₋₁¹ (1−|ξ|) cos(ξsx) e^{ξ²s²/2} dξ`.
pub fn varphi(s: f64, x: f64) -> Result<f64> {
    let sx = s * x.abs();
    let half_s2 = 0.5 * s * s;
    let half = integrate(|xi| (1.0 - xi) * (xi * sx).cos() * (xi * xi * half_s2).exp(), 0.0, 1.0, ABS_TOL / 2.0)?;
    Ok(2.0 * half)
}

/// `1 − 2(1 − cos u)/u²`, the population value of `1 − varphi(s, Z)` at
/// `u = s·E[Z]`.
pub fn g_pop(u: f64) -> f64 {
    if u.abs() < SERIES_CUTOFF {
        let u2 = u * u;
        u2 / 12.0 - u2 * u2 / 360.0
    } else {
        // 1 − cos u = 2 sin²(u/2) avoids cancellation for small u
        let h = 0.5 * u;
        let sinc = h.sin() / h;
        1.0 - sinc * sinc
    }
}

fn normal_density(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * PI).sqrt()
}

/// `(r/(1−2Φ̄(r)))·∫₋₁¹ φ(rξ) e^{ξ²w²/2} cos(ξwx) dξ`.
pub fn eta_kernel(r: f64, w: f64, x: f64) -> Result<f64> {
    let wx = w * x.abs();
    let half_w2 = 0.5 * w * w;
    let half =
        integrate(|xi| normal_density(r * xi) * (xi * xi * half_w2).exp() * (xi * wx).cos(), 0.0, 1.0, ABS_TOL / 2.0)?;
    Ok(2.0 * r * half / erf(r / SQRT_2))
}

/// Population transform of `eta_kernel`: the truncated-normal mean of
/// `cos(ξxw/r)` over `ξ ∈ [−r, r]`. Numerator and normalizer use the same
/// rule, so the value at `x = 0` is exactly 1.
pub fn psi_pop(r: f64, w: f64, x: f64) -> Result<f64> {
    let freq = x.abs() * w / r;
    let mass = integrate(normal_density, 0.0, r, ABS_TOL / 4.0)?;
    if freq == 0.0 {
        return Ok(1.0);
    }
    let num = integrate(|xi| normal_density(xi) * (xi * freq).cos(), 0.0, r, ABS_TOL / 4.0)?;
    Ok(num / mass)
}
