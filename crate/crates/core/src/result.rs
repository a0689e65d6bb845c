//! Outcome record shared by every algorithm.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::problem::{partition_equivalent, Partition};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhaseBudgets {
    pub sri: u64,
    pub gap_est: u64,
    pub adc: u64,
}

impl PhaseBudgets {
    pub fn total(&self) -> u64 {
        self.sri + self.gap_est + self.adc
    }
}

/// What one algorithm run produced.
///
/// `success` is filled by [`RunResult::score`] against the ground truth; the
/// algorithms themselves never see it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub algorithm: String,
    pub success: Option<bool>,
    pub budget: u64,
    pub phase_budgets: PhaseBudgets,
    pub l: Option<u32>,
    pub p: Option<u32>,
    pub delta_hat_sq: Option<f64>,
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub variant: Option<String>,
    #[serde(rename = "T", skip_serializing_if = "Option::is_none")]
    pub pulls_per_arm: Option<u64>,
    pub partition: Option<Partition>,
    pub failure: Option<String>,
    /// Free-form metadata (schedules, Monte Carlo parameters...).
    #[serde(default, skip_serializing_if = "serde_json::Map::is_empty")]
    pub metadata: serde_json::Map<String, serde_json::Value>,
}

impl RunResult {
    pub fn new(algorithm: impl Into<String>) -> Self {
        RunResult {
            algorithm: algorithm.into(),
            success: None,
            budget: 0,
            phase_budgets: PhaseBudgets::default(),
            l: None,
            p: None,
            delta_hat_sq: None,
            seed: None,
            variant: None,
            pulls_per_arm: None,
            partition: None,
            failure: None,
            metadata: serde_json::Map::new(),
        }
    }

    /// Sets and returns `success`: a partition equivalent to `truth`.
    pub fn score(&mut self, truth: &Partition) -> Result<bool> {
        let ok = match &self.partition {
            Some(p) => partition_equivalent(p, truth)?,
            None => false,
        };
        self.success = Some(ok);
        Ok(ok)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}
