//! Uniform-sampling baseline: pull every arm `T` times, then cluster the
//! empirical means with kmeans++ seeding and Lloyd iterations.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::env::{Bandit, Environment};
use crate::error::{invalid, Error, Result};
use crate::par::{map_range, Execution};
use crate::problem::{partition_equivalent, squared_distance, InstanceSpec, Partition};
use crate::result::RunResult;
use crate::rng::{derive_seed, keyed_rng, Domain};

/// D^2 seeding: the first center is uniform, each next one is drawn with
/// probability proportional to the squared distance to the closest chosen
/// center.
pub fn kmeans_pp_init<R: Rng + ?Sized>(
    points: &[Vec<f64>],
    k: usize,
    rng: &mut R,
) -> Result<Vec<Vec<f64>>> {
    if k == 0 || points.len() < k {
        return invalid(format!("kmeans++ needs 1 <= K <= N (N={}, K={k})", points.len()));
    }
    let mut centers = vec![points[rng.random_range(0..points.len())].clone()];
    let mut closest: Vec<f64> = points
        .iter()
        .map(|p| squared_distance(p, &centers[0]))
        .collect();
    while centers.len() < k {
        let total: f64 = closest.iter().sum();
        let idx = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut chosen = None;
            for (i, w) in closest.iter().enumerate() {
                if *w > 0.0 {
                    chosen = Some(i);
                    if target < *w {
                        break;
                    }
                    target -= w;
                }
            }
            chosen.expect("positive total mass")
        } else {
            // Every point coincides with a center.
            rng.random_range(0..points.len())
        };
        let c = points[idx].clone();
        for (d, p) in closest.iter_mut().zip(points) {
            *d = d.min(squared_distance(p, &c));
        }
        centers.push(c);
    }
    Ok(centers)
}

/// Within-cluster sum of squares of `labels` around `centers`.
pub fn objective(points: &[Vec<f64>], centers: &[Vec<f64>], labels: &[usize]) -> f64 {
    points
        .iter()
        .zip(labels)
        .map(|(p, &l)| squared_distance(p, &centers[l]))
        .sum()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LloydResult {
    pub partition: Partition,
    pub centers: Vec<Vec<f64>>,
    pub iterations: usize,
    /// Objective after each assignment step.
    pub objectives: Vec<f64>,
}

fn nearest(p: &[f64], centers: &[Vec<f64>]) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (j, c) in centers.iter().enumerate() {
        let d = squared_distance(p, c);
        if d < best_d {
            best = j;
            best_d = d;
        }
    }
    best
}

/// Moves, for every empty cluster, the point farthest from its own center
/// (taken from a cluster with at least two points) into it.
fn repair_empty(points: &[Vec<f64>], centers: &mut [Vec<f64>], labels: &mut [usize]) -> bool {
    let k = centers.len();
    let mut sizes = vec![0usize; k];
    labels.iter().for_each(|&l| sizes[l] += 1);
    let mut repaired = false;
    for empty in 0..k {
        if sizes[empty] > 0 {
            continue;
        }
        let far = (0..points.len())
            .filter(|&i| sizes[labels[i]] >= 2)
            .max_by(|&a, &b| {
                let da = squared_distance(&points[a], &centers[labels[a]]);
                let db = squared_distance(&points[b], &centers[labels[b]]);
                da.total_cmp(&db).then(b.cmp(&a))
            });
        if let Some(i) = far {
            sizes[labels[i]] -= 1;
            sizes[empty] = 1;
            labels[i] = empty;
            centers[empty] = points[i].clone();
            repaired = true;
        }
    }
    repaired
}

/// Lloyd iterations from `init`, stopping when no center moves by more than
/// `tol` or after `max_iters` rounds. Ties go to the lowest center index; an
/// empty cluster is reseeded at the farthest point.
pub fn lloyd(
    points: &[Vec<f64>],
    init: &[Vec<f64>],
    max_iters: usize,
    tol: f64,
) -> Result<LloydResult> {
    let k = init.len();
    if k == 0 || points.len() < k {
        return invalid("Lloyd needs 1 <= K <= N");
    }
    let dim = init[0].len();
    if points.iter().chain(init).any(|p| p.len() != dim) {
        return invalid("points and centers must share one dimension");
    }
    let mut centers = init.to_vec();
    let mut labels: Vec<usize> = points.iter().map(|p| nearest(p, &centers)).collect();
    repair_empty(points, &mut centers, &mut labels);
    let mut objectives = vec![objective(points, &centers, &labels)];
    let mut iterations = 0;
    while iterations < max_iters {
        iterations += 1;
        let mut sums = vec![vec![0.0; dim]; k];
        let mut counts = vec![0usize; k];
        for (p, &l) in points.iter().zip(&labels) {
            counts[l] += 1;
            sums[l].iter_mut().zip(p).for_each(|(s, x)| *s += x);
        }
        let mut moved = 0.0f64;
        for j in 0..k {
            if counts[j] == 0 {
                continue;
            }
            let new: Vec<f64> = sums[j].iter().map(|s| s / counts[j] as f64).collect();
            moved = moved.max(squared_distance(&new, &centers[j]).sqrt());
            centers[j] = new;
        }
        labels = points.iter().map(|p| nearest(p, &centers)).collect();
        let repaired = repair_empty(points, &mut centers, &mut labels);
        objectives.push(objective(points, &centers, &labels));
        if moved <= tol && !repaired {
            break;
        }
    }
    Ok(LloydResult {
        partition: Partition::new(labels, k)?,
        centers,
        iterations,
        objectives,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniformRun {
    pub pulls_per_arm: u64,
    pub means: Vec<Vec<f64>>,
    pub partition: Partition,
    pub budget: u64,
}

pub const LLOYD_MAX_ITERS: usize = 100;
pub const LLOYD_TOL: f64 = 1e-10;

/// Samples every arm `t` times and clusters the empirical means.
pub fn run_uniform<B: Bandit + ?Sized, R: Rng + ?Sized>(
    bandit: &mut B,
    t: u64,
    rng: &mut R,
) -> Result<UniformRun> {
    if t == 0 {
        return invalid("uniform sampling needs T >= 1");
    }
    let start = bandit.budget();
    let means = (0..bandit.num_arms())
        .map(|a| bandit.empirical_mean(a, t))
        .collect::<Result<Vec<_>>>()?;
    let init = kmeans_pp_init(&means, bandit.num_groups(), rng)?;
    let fit = lloyd(&means, &init, LLOYD_MAX_ITERS, LLOYD_TOL)?;
    Ok(UniformRun {
        pulls_per_arm: t,
        means,
        partition: fit.partition,
        budget: bandit.budget() - start,
    })
}

impl UniformRun {
    pub fn into_result(self) -> RunResult {
        let mut r = RunResult::new("uniform");
        r.budget = self.budget;
        r.pulls_per_arm = Some(self.pulls_per_arm);
        r.partition = Some(self.partition);
        r
    }
}

/// Error rate of the uniform baseline at `t` pulls per arm over `runs`
/// replicates whose seeds are fixed by `(seed, t, replicate)`.
pub fn uniform_error_rate(
    spec: &InstanceSpec,
    t: u64,
    runs: usize,
    seed: u64,
    exec: Execution,
) -> Result<f64> {
    let truth = spec.partition();
    let outcomes = map_range(exec, runs, |i| -> Result<bool> {
        let env_seed = derive_seed(seed, Domain::Replicate, &[t, i as u64]);
        let mut env = Environment::new(spec.clone(), env_seed)?;
        let mut rng = keyed_rng(env_seed, Domain::Clustering, &[]);
        let run = run_uniform(&mut env, t, &mut rng)?;
        partition_equivalent(&run.partition, &truth)
    });
    let mut failures = 0usize;
    for o in outcomes {
        if !o? {
            failures += 1;
        }
    }
    Ok(failures as f64 / runs as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinUniformReport {
    pub pulls_per_arm: u64,
    pub budget: u64,
    pub target_error: f64,
    pub runs: usize,
    pub seed: u64,
    /// Every `(T, error rate)` evaluated, in order.
    pub probes: Vec<(u64, f64)>,
}

/// Smallest `T` whose empirical error over `runs` replicates is at most
/// `target_error`, found by doubling then bisection. Returns `N T` in the
/// report.
pub fn min_uniform_budget(
    spec: &InstanceSpec,
    target_error: f64,
    runs: usize,
    seed: u64,
    t_cap: u64,
    exec: Execution,
) -> Result<MinUniformReport> {
    if !(target_error > 0.0 && target_error < 1.0) {
        return invalid("target error must lie in (0,1)");
    }
    if runs < 20 {
        return invalid("at least 20 runs per probe are required");
    }
    let mut probes = Vec::new();
    let mut eval = |t: u64| -> Result<bool> {
        let e = uniform_error_rate(spec, t, runs, seed, exec)?;
        probes.push((t, e));
        Ok(e <= target_error)
    };
    let mut hi = 1u64;
    let mut lo = 0u64; // 0 means "no failing T seen yet"
    loop {
        if eval(hi)? {
            break;
        }
        lo = hi;
        if hi >= t_cap {
            return Err(Error::Failure(format!(
                "no T <= {t_cap} reaches error {target_error}"
            )));
        }
        hi = (hi * 2).min(t_cap);
    }
    // Invariant: error(lo) > target >= error(hi).
    while lo > 0 && hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if eval(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(MinUniformReport {
        pulls_per_arm: hi,
        budget: hi * spec.num_arms as u64,
        target_error,
        runs,
        seed,
        probes,
    })
}
