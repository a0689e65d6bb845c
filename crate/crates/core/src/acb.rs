//! Top-level clustering algorithms.
//!
//! [`run_acb`] needs a gap level and a balancedness level; [`run_acb_star`]
//! scans a grid of both, from coarse to fine, until SRI returns a full set of
//! representatives, estimates the gap from them and classifies.

use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::adc::run_adc;
use crate::env::Bandit;
use crate::error::{invalid, Error, Result};
use crate::problem::Constants;
use crate::result::RunResult;
use crate::sri::{run_sri, RepresentativeSet};
use crate::stats::cross_distance_sq;

/// Clustering with known gap `gap` and balancedness `theta`.
pub fn run_acb<B: Bandit + ?Sized, R: Rng + ?Sized>(
    bandit: &mut B,
    rng: &mut R,
    delta: f64,
    gap: f64,
    theta: f64,
    constants: &Constants,
) -> Result<RunResult> {
    if !(delta > 0.0 && delta < 1.0) {
        return invalid(format!("delta must lie in (0,1), got {delta}"));
    }
    let start = bandit.budget();
    let mut result = RunResult::new("acb");
    let sri = run_sri(bandit, rng, delta / 2.0, gap, theta, constants)?;
    result.phase_budgets.sri = sri.budget;
    result
        .metadata
        .insert("sri_schedule".into(), serde_json::to_value(&sri.schedule)?);
    result
        .metadata
        .insert("sri_candidates".into(), json!(sri.candidates.len()));
    match run_adc(bandit, delta / 2.0, gap, &sri.representatives, constants) {
        Ok(adc) => {
            result.phase_budgets.adc = adc.budget;
            result
                .metadata
                .insert("adc_schedule".into(), serde_json::to_value(adc.schedule)?);
            result.partition = Some(adc.partition);
        }
        Err(Error::Failure(msg)) => result.failure = Some(msg),
        Err(e) => return Err(e),
    }
    result.budget = bandit.budget() - start;
    Ok(result)
}

/// Sample sizes of grid point `(l, p)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StarSchedule {
    pub l: u32,
    pub p: u32,
    /// Confidence of the SRI call at level `l`.
    pub delta_l: f64,
    /// Gap level `Delta_p`.
    pub gap_p: f64,
    /// Balancedness level, before clamping at `1/N`.
    pub theta_pl: f64,
    /// Pulls per half for the gap estimate.
    pub n_prime_p: u64,
    /// Coarsest squared gap level.
    pub gap0_sq: f64,
}

/// Coarsest squared gap level `sigma^2 (ln K + sqrt(d) + ln ln(6N/delta))`.
pub fn coarsest_gap_sq(delta: f64, sigma: f64, num_arms: usize, num_groups: usize, dim: usize) -> f64 {
    let loglog = (6.0 * num_arms as f64 / delta).ln().ln();
    sigma * sigma * ((num_groups as f64).ln() + (dim as f64).sqrt() + loglog)
}

impl StarSchedule {
    #[allow(clippy::too_many_arguments)]
    pub fn compute(
        l: u32,
        p: u32,
        delta: f64,
        sigma: f64,
        num_arms: usize,
        num_groups: usize,
        dim: usize,
        constants: &Constants,
    ) -> Result<Self> {
        if p > l {
            return invalid(format!("grid index p={p} exceeds l={l}"));
        }
        if !(delta > 0.0 && delta < 1.0) {
            return invalid(format!("delta must lie in (0,1), got {delta}"));
        }
        let k = num_groups as f64;
        let gap0_sq = coarsest_gap_sq(delta, sigma, num_arms, num_groups, dim);
        let gap_p_sq = gap0_sq / 2f64.powi(p as i32);
        let log_term = (3.0 * k * k / delta).ln();
        let n_prime = constants.c6 * sigma * sigma / gap_p_sq
            * (log_term + (dim as f64 * log_term).sqrt());
        Ok(StarSchedule {
            l,
            p,
            delta_l: delta / (6.0 * f64::from(l + 1).powi(3)),
            gap_p: gap_p_sq.sqrt(),
            theta_pl: 1.0 / (k * 2f64.powi((l - p) as i32)),
            n_prime_p: (n_prime.ceil() as u64).max(1),
            gap0_sq,
        })
    }
}

/// Smallest estimated squared distance between two representatives, from
/// fresh dual means of `n_prime` pulls per half (`2 K n_prime` pulls).
pub fn estimate_min_gap<B: Bandit + ?Sized>(
    bandit: &mut B,
    reps: &RepresentativeSet,
    n_prime: u64,
) -> Result<f64> {
    if reps.len() < 2 {
        return invalid("gap estimation needs at least two representatives");
    }
    let means = reps
        .arms
        .iter()
        .map(|&a| bandit.dual_empirical_mean(a, n_prime))
        .collect::<Result<Vec<_>>>()?;
    let mut best = f64::INFINITY;
    for i in 0..means.len() {
        for j in i + 1..means.len() {
            best = best.min(cross_distance_sq(&means[i], &means[j])?);
        }
    }
    Ok(best)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct StarOptions {
    /// Largest outer index scanned; see [`default_level_cap`].
    pub l_cap: Option<u32>,
    /// Smallest gap worth searching for, used by the default level cap.
    /// Defaults to `sigma / 100`.
    pub gap_floor: Option<f64>,
}

/// `ceil(log2(N * max(Delta_0^2 / floor^2, 1)))`.
pub fn default_level_cap(gap0_sq: f64, gap_floor: f64, num_arms: usize) -> u32 {
    let ratio = (gap0_sq / (gap_floor * gap_floor)).max(1.0);
    (num_arms as f64 * ratio).log2().ceil().max(0.0) as u32
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
struct ScanStep {
    l: u32,
    p: u32,
    found: usize,
    budget: u64,
}

/// Fully adaptive clustering: only `delta` is supplied.
pub fn run_acb_star<B: Bandit + ?Sized, R: Rng + ?Sized>(
    bandit: &mut B,
    rng: &mut R,
    delta: f64,
    constants: &Constants,
    options: StarOptions,
) -> Result<RunResult> {
    if !(delta > 0.0 && delta < 1.0) {
        return invalid(format!("delta must lie in (0,1), got {delta}"));
    }
    let sigma = bandit.sigma();
    if sigma <= 0.0 {
        return invalid("the adaptive scan needs sigma > 0 to set its coarsest gap level");
    }
    let (n, k, d) = (bandit.num_arms(), bandit.num_groups(), bandit.dim());
    let gap0_sq = coarsest_gap_sq(delta, sigma, n, k, d);
    let gap_floor = options.gap_floor.unwrap_or(sigma / 100.0);
    if gap_floor.is_nan() || gap_floor <= 0.0 {
        return invalid("gap floor must be positive");
    }
    let l_cap = options
        .l_cap
        .unwrap_or_else(|| default_level_cap(gap0_sq, gap_floor, n));

    let start = bandit.budget();
    let mut result = RunResult::new("acb_star");
    let mut scan = Vec::new();
    for l in 0..=l_cap {
        for p in 0..=l {
            let sched = StarSchedule::compute(l, p, delta, sigma, n, k, d, constants)?;
            let theta = sched.theta_pl.max(1.0 / n as f64);
            let sri = run_sri(bandit, rng, sched.delta_l, sched.gap_p, theta, constants)?;
            result.phase_budgets.sri += sri.budget;
            scan.push(ScanStep {
                l,
                p,
                found: sri.representatives.len(),
                budget: sri.budget,
            });
            if !sri.is_complete(k) {
                continue;
            }
            result.l = Some(l);
            result.p = Some(p);
            if k >= 2 {
                let before = bandit.budget();
                let gap_sq = estimate_min_gap(bandit, &sri.representatives, sched.n_prime_p)?;
                result.phase_budgets.gap_est = bandit.budget() - before;
                result.delta_hat_sq = Some(gap_sq);
                if gap_sq <= 0.0 {
                    result.failure = Some(format!("nonpositive gap estimate {gap_sq}"));
                } else {
                    let gap = (gap_sq / 2.0).sqrt();
                    match run_adc(bandit, delta / 3.0, gap, &sri.representatives, constants) {
                        Ok(adc) => {
                            result.phase_budgets.adc = adc.budget;
                            result.partition = Some(adc.partition);
                        }
                        Err(Error::Failure(msg)) => result.failure = Some(msg),
                        Err(e) => return Err(e),
                    }
                }
            } else {
                // A single group: every arm is in it.
                result.partition = Some(crate::problem::Partition::new(vec![0; n], 1)?);
            }
            result.metadata.insert("scan".into(), serde_json::to_value(&scan)?);
            result.budget = bandit.budget() - start;
            return Ok(result);
        }
    }
    result.failure = Some(format!("no scale found up to l = {l_cap}"));
    result.metadata.insert("scan".into(), serde_json::to_value(&scan)?);
    result.budget = bandit.budget() - start;
    Ok(result)
}
