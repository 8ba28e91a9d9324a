//! Monte Carlo harness: risk estimation, calibration, separation search,
//! reference rates and parameter sweeps.

mod calibrate;
mod decision;
mod rates;
mod risk;
mod search;
mod sweep;

pub use calibrate::{
    apply_calibration, calibrate_general, calibrate_independent, calibrate_threshold, empirical_quantile, Calibration,
};
pub use decision::{Decision, Setting, TestKind, TestSpec};
pub use rates::{rate_reference, rate_reference_with, RateQuery, RateReference, RateSetting, VARSIGMA};
pub use risk::{estimate_risk, rejection_rate, wald_half_width, RejectionRate, RiskEstimate};
pub use search::{separation_search, SearchResult, BISECTION_STEPS};
pub use sweep::{sweep, SweepConfig, SWEEP_HEADER};
