//! Active distance-based classification.

use serde::{Deserialize, Serialize};

use crate::env::Bandit;
use crate::error::{invalid, Error, Result};
use crate::problem::{Constants, Partition};
use crate::sri::RepresentativeSet;
use crate::stats::cross_distance_sq;

/// Pulls per half for each classified arm (`i`) and each representative
/// (`j`); `log_term` is `ln(6NK/delta)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdcSchedule {
    pub i: u64,
    pub j: u64,
    pub log_term: f64,
}

impl AdcSchedule {
    pub fn compute(
        delta: f64,
        gap: f64,
        sigma: f64,
        num_arms: usize,
        num_groups: usize,
        dim: usize,
        constants: &Constants,
    ) -> Result<Self> {
        if !(delta > 0.0 && delta < 1.0) {
            return invalid(format!("delta must lie in (0,1), got {delta}"));
        }
        if !(gap > 0.0 && gap.is_finite()) {
            return invalid(format!("gap must be positive, got {gap}"));
        }
        let (n, k, d) = (num_arms as f64, num_groups as f64, dim as f64);
        let snr = sigma * sigma / (gap * gap);
        let log_term = (6.0 * n * k / delta).ln();
        let base = constants.c4 * snr * log_term;
        let size = |ratio: f64| {
            let high_dim = constants.c5 * snr * (d * ratio * log_term).sqrt();
            (base.max(high_dim).ceil() as u64).max(1)
        };
        Ok(AdcSchedule {
            i: size(k / n),
            j: size(n / k),
            log_term,
        })
    }

    /// Pulls consumed by a classification pass: `2(N-K)I + 2KJ`.
    pub fn budget(&self, num_arms: usize, num_groups: usize) -> u64 {
        2 * (num_arms - num_groups) as u64 * self.i + 2 * num_groups as u64 * self.j
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArmDecision {
    pub arm: usize,
    pub group: usize,
    /// Gap between the two smallest statistics (`None` when `K = 1`).
    pub margin: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdcOutcome {
    pub partition: Partition,
    pub schedule: AdcSchedule,
    pub decisions: Vec<ArmDecision>,
    pub budget: u64,
}

/// Index of the smallest value (lowest index on ties) and the margin to the
/// runner-up.
pub(crate) fn argmin_with_margin(values: &[f64]) -> (usize, Option<f64>) {
    let mut best = 0;
    for (j, v) in values.iter().enumerate() {
        if *v < values[best] {
            best = j;
        }
    }
    let runner_up = values
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != best)
        .map(|(_, v)| *v)
        .fold(None, |acc: Option<f64>, v| Some(acc.map_or(v, |a| a.min(v))));
    (best, runner_up.map(|r| r - values[best]))
}

/// Classifies every arm given one representative per group.
///
/// Fails when `reps` does not hold exactly `K` arms. Arm `reps.arms[j]`
/// anchors group `j`; the returned partition is canonical.
pub fn run_adc<B: Bandit + ?Sized>(
    bandit: &mut B,
    delta: f64,
    gap: f64,
    reps: &RepresentativeSet,
    constants: &Constants,
) -> Result<AdcOutcome> {
    let (n, k) = (bandit.num_arms(), bandit.num_groups());
    if reps.len() != k {
        return Err(Error::Failure(format!(
            "Null: {} representatives for {k} groups",
            reps.len()
        )));
    }
    let schedule = AdcSchedule::compute(delta, gap, bandit.sigma(), n, k, bandit.dim(), constants)?;
    let start = bandit.budget();

    let mut centers = Vec::with_capacity(k);
    for &b in &reps.arms {
        centers.push(bandit.dual_empirical_mean(b, schedule.j)?);
    }
    let mut labels = vec![usize::MAX; n];
    for (j, &b) in reps.arms.iter().enumerate() {
        labels[b] = j;
    }
    let mut decisions = Vec::with_capacity(n - k);
    let mut stats = vec![0.0; k];
    for (arm, label) in labels.iter_mut().enumerate() {
        if *label != usize::MAX {
            continue;
        }
        let mean = bandit.dual_empirical_mean(arm, schedule.i)?;
        for (s, c) in stats.iter_mut().zip(&centers) {
            *s = cross_distance_sq(&mean, c)?;
        }
        let (group, margin) = argmin_with_margin(&stats);
        *label = group;
        decisions.push(ArmDecision { arm, group, margin });
    }
    let budget = bandit.budget() - start;
    debug_assert_eq!(budget, schedule.budget(n, k));
    Ok(AdcOutcome {
        partition: Partition::new(labels, k)?,
        schedule,
        decisions,
        budget,
    })
}
