//! Variant of the known-gap algorithm calibrated for isotropic Gaussian noise.
//!
//! Tests and the classifier use plain (single) empirical means; the bias of
//! the squared norm is removed using the known noise level, and sample sizes
//! come from exact chi-square and normal quantiles plus a Monte Carlo
//! quantile of the inner product of two Gaussian vectors.

use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::adc::argmin_with_margin;
use crate::env::Bandit;
use crate::error::{invalid, Result};
use crate::par::Execution;
use crate::problem::{squared_distance, Partition};
use crate::result::RunResult;
use crate::stats::{chi2_quantile, normal_quantile, QuantileCache, DEFAULT_MC_SAMPLES};

/// Monte Carlo parameters of the inner-product quantile.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct McParams {
    pub samples: usize,
    pub seed: u64,
}

impl Default for McParams {
    fn default() -> Self {
        McParams {
            samples: DEFAULT_MC_SAMPLES,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GvSchedule {
    pub n_max: u64,
    pub n0: u64,
    pub r: u32,
    /// `n_s` for `s = 0..=r`.
    pub sample_sizes: Vec<u64>,
    pub i: u64,
    pub j: u64,
    /// Inner-product quantile.
    pub alpha: f64,
    /// Normal quantile.
    pub beta: f64,
    /// `(1/theta) ln(1/delta)`.
    pub u_prime: f64,
    pub gap: f64,
    pub sigma: f64,
    pub dim: usize,
    pub mc: Option<McParams>,
}

/// Tail level `1 - delta / (4K(N-K))` of both classification quantiles.
/// When `N = K` nothing is classified and `N - K` is taken as 1.
pub fn classification_level(delta: f64, num_arms: usize, num_groups: usize) -> f64 {
    let others = num_arms.saturating_sub(num_groups).max(1);
    1.0 - delta / (4.0 * num_groups as f64 * others as f64)
}

impl GvSchedule {
    /// Builds the schedule from a precomputed inner-product quantile `alpha`.
    #[allow(clippy::too_many_arguments)]
    pub fn with_alpha(
        delta: f64,
        gap: f64,
        theta: f64,
        sigma: f64,
        num_arms: usize,
        num_groups: usize,
        dim: usize,
        alpha: f64,
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
        let (n, k) = (num_arms as f64, num_groups as f64);
        let snr = sigma * sigma / (gap * gap);
        let ceil = |x: f64| (x.ceil().max(1.0)) as u64;

        let x = chi2_quantile(dim as u32, 1.0 - delta / k)?;
        let n_max = ceil(4.0 * snr * (x - dim as f64));
        let u_prime = (1.0 / theta) * (1.0 / delta).ln();
        let n0 = ceil(k / u_prime * n_max as f64).min(n_max);
        let mut sample_sizes = vec![n0];
        while *sample_sizes.last().unwrap() < n_max {
            let s = sample_sizes.len() as i32;
            sample_sizes.push(ceil(2f64.powi(s) * n0 as f64));
        }
        let r = (sample_sizes.len() - 1) as u32;

        let beta = normal_quantile(classification_level(delta, num_arms, num_groups))?;
        let i = ceil(snr * (16.0 * beta).max(4.0 * (2.0 * k / n).sqrt() * alpha));
        let j = ceil(snr * (16.0 * beta).max(4.0 * (2.0 * n / k).sqrt() * alpha));
        Ok(GvSchedule {
            n_max,
            n0,
            r,
            sample_sizes,
            i,
            j,
            alpha,
            beta,
            u_prime,
            gap,
            sigma,
            dim,
            mc: None,
        })
    }

    /// Builds the schedule, estimating `alpha` by Monte Carlo through `cache`.
    #[allow(clippy::too_many_arguments)]
    pub fn calibrate(
        delta: f64,
        gap: f64,
        theta: f64,
        sigma: f64,
        num_arms: usize,
        num_groups: usize,
        dim: usize,
        mc: McParams,
        cache: &mut QuantileCache,
        exec: Execution,
    ) -> Result<Self> {
        let level = classification_level(delta, num_arms, num_groups);
        let alpha = cache.get_or_compute(dim, level, mc.samples, mc.seed, exec)?;
        let mut s = Self::with_alpha(delta, gap, theta, sigma, num_arms, num_groups, dim, alpha)?;
        s.mc = Some(mc);
        Ok(s)
    }

    /// Cap on the number of candidates, `ceil(100 U')`.
    pub fn candidate_cap(&self) -> u64 {
        (100.0 * self.u_prime).ceil().max(1.0) as u64
    }
}

/// Bias-corrected squared distance `|candidate - rep|^2 - d sigma^2 (1/n_c + 1/n_r)`,
/// unbiased for the squared distance of the true means under Gaussian noise.
pub fn gv_test_statistic(
    candidate_mean: &[f64],
    candidate_n: u64,
    rep_mean: &[f64],
    rep_n: u64,
    sigma: f64,
    dim: usize,
) -> Result<f64> {
    if candidate_mean.len() != rep_mean.len() {
        return invalid("means have different dimensions");
    }
    if candidate_n == 0 || rep_n == 0 {
        return invalid("sample counts must be positive");
    }
    let shift = dim as f64 * sigma * sigma * (1.0 / candidate_n as f64 + 1.0 / rep_n as f64);
    Ok(squared_distance(candidate_mean, rep_mean) - shift)
}

/// True when the bias-corrected statistic is at most `gap^2 / 2`.
#[allow(clippy::too_many_arguments)]
pub fn gv_represented_test(
    candidate_mean: &[f64],
    candidate_n: u64,
    rep_mean: &[f64],
    rep_n: u64,
    gap: f64,
    sigma: f64,
    dim: usize,
) -> Result<bool> {
    Ok(gv_test_statistic(candidate_mean, candidate_n, rep_mean, rep_n, sigma, dim)? <= gap * gap / 2.0)
}

/// Nearest representative mean (lowest index on ties).
pub fn gv_classify(arm_mean: &[f64], rep_means: &[Vec<f64>]) -> Result<usize> {
    if rep_means.is_empty() {
        return invalid("classification needs at least one representative");
    }
    let d: Vec<f64> = rep_means.iter().map(|m| squared_distance(arm_mean, m)).collect();
    Ok(argmin_with_margin(&d).0)
}

/// Runs the Gaussian-calibrated algorithm with a fixed schedule.
pub fn run_gv_acb<B: Bandit + ?Sized, R: Rng + ?Sized>(
    bandit: &mut B,
    rng: &mut R,
    schedule: &GvSchedule,
) -> Result<RunResult> {
    let (n, k) = (bandit.num_arms(), bandit.num_groups());
    if bandit.dim() != schedule.dim {
        return invalid("schedule dimension does not match the environment");
    }
    let start = bandit.budget();
    let mut result = RunResult::new("gv_acb");
    result.variant = Some("gaussian".into());
    result.metadata.insert(
        "gv_schedule".into(),
        serde_json::to_value(schedule)?,
    );

    let first = rng.random_range(0..n);
    let mut rep_arms = vec![first];
    let mut rep_means = vec![bandit.empirical_mean(first, schedule.n_max)?];
    let mut candidates = 0u64;
    let cap = schedule.candidate_cap();
    while rep_arms.len() < k && candidates < cap {
        candidates += 1;
        let arm = rng.random_range(0..n);
        let mut rejected = false;
        for &n_s in &schedule.sample_sizes {
            let mean = bandit.empirical_mean(arm, n_s)?;
            let mut hit = false;
            for rep in &rep_means {
                if gv_represented_test(
                    &mean,
                    n_s,
                    rep,
                    schedule.n_max,
                    schedule.gap,
                    schedule.sigma,
                    schedule.dim,
                )? {
                    hit = true;
                    break;
                }
            }
            if hit {
                rejected = true;
                break;
            }
        }
        if !rejected {
            let mean = bandit.empirical_mean(arm, schedule.n_max)?;
            match rep_arms.iter().position(|&a| a == arm) {
                Some(i) => rep_means[i] = mean,
                None => {
                    rep_arms.push(arm);
                    rep_means.push(mean);
                }
            }
        }
    }
    result.phase_budgets.sri = bandit.budget() - start;
    result.metadata.insert("sri_candidates".into(), json!(candidates));
    if rep_arms.len() < k {
        result.failure = Some(format!("candidate cap {cap} reached with {} representatives", rep_arms.len()));
        result.budget = bandit.budget() - start;
        return Ok(result);
    }

    let adc_start = bandit.budget();
    let centers = rep_arms
        .iter()
        .map(|&b| bandit.empirical_mean(b, schedule.j))
        .collect::<Result<Vec<_>>>()?;
    let mut labels = vec![usize::MAX; n];
    for (j, &b) in rep_arms.iter().enumerate() {
        labels[b] = j;
    }
    for (arm, label) in labels.iter_mut().enumerate() {
        if *label == usize::MAX {
            let mean = bandit.empirical_mean(arm, schedule.i)?;
            *label = gv_classify(&mean, &centers)?;
        }
    }
    result.phase_budgets.adc = bandit.budget() - adc_start;
    result.partition = Some(Partition::new(labels, k)?);
    result.budget = bandit.budget() - start;
    Ok(result)
}
