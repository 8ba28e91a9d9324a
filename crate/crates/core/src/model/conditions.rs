use serde::Serialize;

use super::sample::Scenario;
use crate::constants::DesignConstants;

/// Advisory check of the sample-size conditions; margins are
/// `c·n − LHS`, so a negative margin means the condition fails.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConditionReport {
    pub condition_a: bool,
    pub condition_b: bool,
    pub margin_a: f64,
    pub margin_b: f64,
}

pub fn check_conditions(scenario: &Scenario, k0: usize, alpha: f64, constants: &DesignConstants) -> ConditionReport {
    check_conditions_np(scenario.n, scenario.p, k0, alpha, constants)
}

pub fn check_conditions_np(n: usize, p: usize, k0: usize, alpha: f64, constants: &DesignConstants) -> ConditionReport {
    let n = n as f64;
    let p = p as f64;
    let k = k0.max(1) as f64;
    let lpa = (p / alpha).ln();
    let la = (1.0 / alpha).ln();
    let lhs_a = k * lpa + lpa * lpa;
    let lhs_b = k * (1.0 + lpa) + la.powi(3) + p.ln() * la;
    let margin_a = constants.condition_a_c.value * n - lhs_a;
    let margin_b = constants.condition_b_c.value * n - lhs_b;
    ConditionReport { condition_a: margin_a >= 0.0, condition_b: margin_b >= 0.0, margin_a, margin_b }
}
