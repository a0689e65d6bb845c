//! Sequential representative identification.
//!
//! Candidates are drawn uniformly at random and pushed through a ladder of
//! tests with roughly doubling sample sizes. A candidate that is never found
//! to be close to an existing representative becomes one. The routine stops
//! once `K` representatives are found or the budget cap is exceeded.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::env::Bandit;
use crate::error::{invalid, Result};
use crate::problem::Constants;
use crate::stats::{cross_distance_sq, MeanPair};

/// Sample sizes and caps of one SRI call.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SriSchedule {
    /// Maximal number of candidates.
    pub max_candidates: u64,
    /// Index of the last test of the ladder.
    pub r: u32,
    /// Index of the first test of the ladder.
    pub s0: u32,
    /// `n_s` for `s = 1..=r` (entry `s - 1`).
    pub sample_sizes: Vec<u64>,
    pub n_max: u64,
    pub t_max: u64,
}

fn ceil_u64(x: f64) -> u64 {
    x.ceil().max(0.0) as u64
}

impl SriSchedule {
    pub fn compute(
        delta: f64,
        gap: f64,
        theta: f64,
        sigma: f64,
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
        if !(theta > 0.0 && theta <= 1.0) {
            return invalid(format!("theta must lie in (0,1], got {theta}"));
        }
        if !(sigma >= 0.0 && sigma.is_finite()) {
            return invalid("sigma must be nonnegative");
        }
        let k = num_groups as f64;
        let d = dim as f64;
        let snr = sigma * sigma / (gap * gap);

        let max_candidates = ceil_u64(8.0 / theta * (8.0 * k / delta).ln());
        let r = ((4.0 * max_candidates as f64 / delta).ln().log2().ceil()).max(1.0) as u32;
        let n_s = |s: u32| {
            let e = 2f64.powi(s as i32);
            let low_dim = constants.c1 * snr * (e + (12.0 * k).ln());
            let high_dim = constants.c2 * snr * (d * (e + 6f64.ln())).sqrt();
            ceil_u64(low_dim.max(high_dim)).max(1)
        };
        let sample_sizes: Vec<u64> = (1..=r).map(n_s).collect();
        let s0 = (1..=r).find(|&s| sample_sizes[s as usize - 1] >= 2).unwrap_or(r);
        let n_r = sample_sizes[r as usize - 1];
        let n_max = n_r.max(ceil_u64(constants.c3 * snr * d.sqrt() * (2.0 * k).ln()));

        // T_max = 2K(n_max + sum n_s) + 2U n_{s0} + sum_{s>s0} U n_s 2^(5-s),
        // kept exact by working over the common denominator 2^r.
        let u = max_candidates as u128;
        let tail: u128 = (s0 + 1..=r).map(|s| sample_sizes[s as usize - 1] as u128).sum();
        let whole = 2 * num_groups as u128 * (n_max as u128 + tail)
            + 2 * u * sample_sizes[s0 as usize - 1] as u128;
        let scaled: u128 = (s0 + 1..=r)
            .map(|s| u * sample_sizes[s as usize - 1] as u128 * (1u128 << (5 + r - s)))
            .sum();
        let t_max = whole + (scaled >> r);

        Ok(SriSchedule {
            max_candidates,
            r,
            s0,
            sample_sizes,
            n_max,
            t_max: u64::try_from(t_max).unwrap_or(u64::MAX),
        })
    }

    /// `n_s`, for `1 <= s <= r`.
    pub fn n(&self, s: u32) -> u64 {
        self.sample_sizes[s as usize - 1]
    }

    /// Pulls of the most expensive epoch: every test then acceptance.
    pub fn max_epoch_cost(&self) -> u64 {
        2 * (self.s0..=self.r).map(|s| self.n(s)).sum::<u64>() + 2 * self.n_max
    }
}

/// Representatives found so far, with their mean estimates.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RepresentativeSet {
    pub arms: Vec<usize>,
    pub means: Vec<MeanPair>,
}

impl RepresentativeSet {
    pub fn len(&self) -> usize {
        self.arms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.arms.is_empty()
    }

    /// Adds `arm`, or refreshes its estimate if it is already present.
    pub fn insert(&mut self, arm: usize, mean: MeanPair) {
        match self.arms.iter().position(|&a| a == arm) {
            Some(i) => self.means[i] = mean,
            None => {
                self.arms.push(arm);
                self.means.push(mean);
            }
        }
    }
}

/// True when the candidate looks represented: its smallest estimated squared
/// distance to a representative is at most `gap^2 / 2`.
pub fn represented_test(candidate: &MeanPair, reps: &RepresentativeSet, gap: f64) -> Result<bool> {
    if reps.is_empty() {
        return invalid("represented test needs at least one representative");
    }
    let mut best = f64::INFINITY;
    for mean in &reps.means {
        best = best.min(cross_distance_sq(candidate, mean)?);
    }
    Ok(best <= gap * gap / 2.0)
}

/// How a candidate's epoch ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    /// Rejected by the test with this index.
    Rejected(u32),
    Accepted,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateRecord {
    pub arm: usize,
    pub verdict: Verdict,
    pub pulls: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SriOutcome {
    pub representatives: RepresentativeSet,
    pub schedule: SriSchedule,
    pub initial_arm: usize,
    pub candidates: Vec<CandidateRecord>,
    /// Pulls spent by this call.
    pub budget: u64,
}

impl SriOutcome {
    pub fn is_complete(&self, num_groups: usize) -> bool {
        self.representatives.len() == num_groups
    }
}

/// Runs SRI on `bandit` with confidence `delta`, gap level `gap` and
/// balancedness level `theta`.
///
/// The budget cap is checked between epochs, so the call may overshoot
/// `t_max` by at most one epoch.
pub fn run_sri<B: Bandit + ?Sized, R: Rng + ?Sized>(
    bandit: &mut B,
    rng: &mut R,
    delta: f64,
    gap: f64,
    theta: f64,
    constants: &Constants,
) -> Result<SriOutcome> {
    let schedule = SriSchedule::compute(
        delta,
        gap,
        theta,
        bandit.sigma(),
        bandit.num_groups(),
        bandit.dim(),
        constants,
    )?;
    let n_arms = bandit.num_arms();
    let k = bandit.num_groups();
    let start = bandit.budget();

    let initial_arm = rng.random_range(0..n_arms);
    let mut reps = RepresentativeSet::default();
    reps.insert(initial_arm, bandit.dual_empirical_mean(initial_arm, schedule.n_max)?);
    let mut candidates = Vec::new();

    for _ in 0..schedule.max_candidates {
        if reps.len() == k {
            break;
        }
        let arm = rng.random_range(0..n_arms);
        let epoch_start = bandit.budget();
        let mut verdict = Verdict::Accepted;
        for s in schedule.s0..=schedule.r {
            let candidate = bandit.dual_empirical_mean(arm, schedule.n(s))?;
            if represented_test(&candidate, &reps, gap)? {
                verdict = Verdict::Rejected(s);
                break;
            }
        }
        if verdict == Verdict::Accepted {
            reps.insert(arm, bandit.dual_empirical_mean(arm, schedule.n_max)?);
        }
        candidates.push(CandidateRecord {
            arm,
            verdict,
            pulls: bandit.budget() - epoch_start,
        });
        if reps.len() == k || bandit.budget() - start > schedule.t_max {
            break;
        }
    }

    Ok(SriOutcome {
        representatives: reps,
        schedule,
        initial_arm,
        candidates,
        budget: bandit.budget() - start,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::Environment;
    use crate::problem::InstanceSpec;
    use crate::rng::{keyed_rng, Domain};

    #[test]
    fn schedule_candidate_count_and_ladder_length() {
        let c = Constants::default();
        let s = SriSchedule::compute(0.1, 1.0, 0.2, 1.0, 5, 10, &c).unwrap();
        // ceil(40 ln 400) = ceil(239.66)
        assert_eq!(s.max_candidates, 240);
        // ceil(log2(ln 9600)) = ceil(3.197)
        assert_eq!(s.r, 4);
        assert_eq!(s.sample_sizes.len(), 4);
        assert!(s.sample_sizes.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn schedule_rejects_bad_input() {
        let c = Constants::default();
        assert!(SriSchedule::compute(0.1, 0.0, 0.2, 1.0, 5, 10, &c).is_err());
        assert!(SriSchedule::compute(0.1, 1.0, 0.0, 1.0, 5, 10, &c).is_err());
        assert!(SriSchedule::compute(1.0, 1.0, 0.2, 1.0, 5, 10, &c).is_err());
    }

    #[test]
    fn noiseless_schedule_is_degenerate_but_valid() {
        let s = SriSchedule::compute(0.1, 1.0, 0.2, 0.0, 5, 10, &Constants::default()).unwrap();
        assert!(s.sample_sizes.iter().all(|&n| n == 1));
        assert_eq!(s.s0, s.r);
        assert_eq!(s.n_max, 1);
    }

    #[test]
    fn represented_test_noiseless() {
        let rep = MeanPair { mu: vec![0.0, 0.0], mu_prime: vec![0.0, 0.0], n: 1 };
        let reps = RepresentativeSet { arms: vec![0], means: vec![rep.clone()] };
        assert!(represented_test(&rep, &reps, 1.0).unwrap());
        let far = MeanPair { mu: vec![1.0, 0.0], mu_prime: vec![1.0, 0.0], n: 1 };
        assert!(!represented_test(&far, &reps, 1.0).unwrap());
        assert!(represented_test(&far, &RepresentativeSet::default(), 1.0).is_err());
    }

    #[test]
    fn noiseless_run_finds_one_arm_per_group() {
        let spec = InstanceSpec::balanced_equidistant(20, 4, 5, 0.0).unwrap();
        let truth = spec.labels.clone();
        let mut env = Environment::new(spec, 3).unwrap();
        let mut rng = keyed_rng(3, Domain::Algorithm, &[]);
        let out = run_sri(&mut env, &mut rng, 0.1, 1.0, 0.25, &Constants::default()).unwrap();
        let mut groups: Vec<usize> = out.representatives.arms.iter().map(|&a| truth[a]).collect();
        groups.sort();
        assert_eq!(groups, vec![0, 1, 2, 3]);
        assert_eq!(out.budget, env.budget());
        let per_epoch: u64 = out.candidates.iter().map(|c| c.pulls).sum();
        assert_eq!(out.budget, per_epoch + 2 * out.schedule.n_max);
    }
}
