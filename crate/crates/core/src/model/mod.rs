//! Generative model: covariance families, signals, samples and splits.

mod conditions;
mod covariance;
mod dataset;
mod sample;
mod signal;

pub use conditions::{check_conditions, check_conditions_np, ConditionReport};
pub use covariance::{covariance_matrix, spectrum_bounds, CovarianceKind, CovarianceSpec};
pub use dataset::{read_dataset, write_dataset};
pub use sample::{generate_sample, split_rows, split_sample, RegressionSample, SampleGenerator, Scenario, SplitSample};
pub(crate) use signal::rank_by_magnitude;
pub use signal::{d2_to_sparse, make_theta, order_statistic, SignalPattern, SignalSpec};
