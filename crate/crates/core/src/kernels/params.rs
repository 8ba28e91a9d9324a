use std::f64::consts::E;

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridPoint {
    pub l: u64,
    pub r: f64,
    pub w: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KernelParams {
    pub s: f64,
    pub l0: u64,
    /// Empty unless k0 ≥ 2¹¹√p, in which case the intermediate test is
    /// nontrivial.
    pub grid: Vec<GridPoint>,
}

pub const GRID_ACTIVATION: f64 = 2048.0;

impl KernelParams {
    pub fn new(k0: usize, p: usize) -> Self {
        let k = k0 as f64;
        let sqrt_p = (p as f64).sqrt();
        let log_term = (E * k / sqrt_p).ln().max(0.0);
        let s = log_term.sqrt().max(1.0);
        let l0 = (k.powf(0.8) * (p as f64).powf(0.1)).ceil() as u64;
        let mut grid = Vec::new();
        if k0 > 0 && k >= GRID_ACTIVATION * sqrt_p && l0 > 0 {
            let ratio = k / l0 as f64;
            if ratio >= 1.0 {
                let l_max = 2f64.powi(ratio.log2().floor() as i32) * l0 as f64 / 4.0;
                let mut l = l0;
                while (l as f64) <= l_max {
                    let lf = l as f64;
                    if lf > sqrt_p && lf < k {
                        grid.push(GridPoint { l, r: (2.0 * (k / lf).ln()).sqrt(), w: (lf / sqrt_p).ln().sqrt() });
                    }
                    l *= 2;
                }
            }
        }
        Self { s, l0, grid }
    }
}

pub fn kernel_params(k0: usize, p: usize) -> KernelParams {
    KernelParams::new(k0, p)
}
