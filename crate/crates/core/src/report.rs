use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::Value;

use crate::constants::ThresholdMode;

/// A scalar statistic or one value per scale of the dyadic grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Statistic {
    Scalar(f64),
    PerScale(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TestReport {
    pub name: String,
    pub statistic: Statistic,
    pub threshold: Statistic,
    pub reject: bool,
    pub mode: ThresholdMode,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub sub_reports: Vec<TestReport>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub side_channels: BTreeMap<String, Value>,
}

impl TestReport {
    pub fn scalar(name: &str, statistic: f64, threshold: f64, reject: bool, mode: ThresholdMode) -> Self {
        Self {
            name: name.to_string(),
            statistic: Statistic::Scalar(statistic),
            threshold: Statistic::Scalar(threshold),
            reject,
            mode,
            sub_reports: Vec::new(),
            side_channels: BTreeMap::new(),
        }
    }

    pub fn with_side(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.side_channels.insert(key.to_string(), value.into());
        self
    }

    pub fn sub(&self, name: &str) -> Option<&TestReport> {
        self.sub_reports.iter().find(|r| r.name == name)
    }

    /// Scalar statistic, if this report has one.
    pub fn scalar_statistic(&self) -> Option<f64> {
        match self.statistic {
            Statistic::Scalar(v) => Some(v),
            Statistic::PerScale(_) => None,
        }
    }
}

pub(crate) fn combined_mode(modes: impl IntoIterator<Item = ThresholdMode>) -> ThresholdMode {
    if modes.into_iter().any(|m| m == ThresholdMode::Calibrated) {
        ThresholdMode::Calibrated
    } else {
        ThresholdMode::Analytic
    }
}
