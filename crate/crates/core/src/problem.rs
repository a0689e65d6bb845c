//! Problem description shared by every algorithm: the hidden-partition
//! instance, partitions compared up to relabelling, budget accounting and the
//! numerical constants used by the theoretical schedules.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Noise family added to the group center on every pull.
///
/// Every family must be `sigma`-sub-Gaussian coordinatewise for the instance
/// it belongs to; [`InstanceSpec::validate`] checks this.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Noise {
    /// `N(0, sigma^2 I_d)`.
    IsotropicGaussian,
    /// `N(0, diag(variances))`, each variance at most `sigma^2`.
    DiagonalGaussian { variances: Vec<f64> },
    /// Independent coordinates uniform on `[-half_width, half_width]`.
    /// Such a variable is `half_width`-sub-Gaussian.
    BoundedUniform { half_width: f64 },
}

/// Ground-truth environment: `N` arms, `K` groups with centers in `R^d`.
///
/// Group labels are 0-based in memory; the JSON document uses labels in
/// `1..=K`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SpecDocument", into = "SpecDocument")]
pub struct InstanceSpec {
    pub num_arms: usize,
    pub num_groups: usize,
    pub dim: usize,
    pub sigma: f64,
    pub centers: Vec<Vec<f64>>,
    pub labels: Vec<usize>,
    pub noise: Noise,
}

#[derive(Serialize, Deserialize)]
struct SpecDocument {
    #[serde(rename = "N")]
    n: usize,
    #[serde(rename = "K")]
    k: usize,
    d: usize,
    sigma: f64,
    centers: Vec<Vec<f64>>,
    labels: Vec<usize>,
    noise: Noise,
}

impl TryFrom<SpecDocument> for InstanceSpec {
    type Error = crate::Error;

    fn try_from(doc: SpecDocument) -> Result<Self> {
        if doc.labels.contains(&0) {
            return invalid("labels in the JSON document are 1-based");
        }
        let spec = InstanceSpec {
            num_arms: doc.n,
            num_groups: doc.k,
            dim: doc.d,
            sigma: doc.sigma,
            centers: doc.centers,
            labels: doc.labels.into_iter().map(|l| l - 1).collect(),
            noise: doc.noise,
        };
        spec.validate()?;
        Ok(spec)
    }
}

impl From<InstanceSpec> for SpecDocument {
    fn from(spec: InstanceSpec) -> Self {
        SpecDocument {
            n: spec.num_arms,
            k: spec.num_groups,
            d: spec.dim,
            sigma: spec.sigma,
            centers: spec.centers,
            labels: spec.labels.into_iter().map(|l| l + 1).collect(),
            noise: spec.noise,
        }
    }
}

impl InstanceSpec {
    pub fn new(
        centers: Vec<Vec<f64>>,
        labels: Vec<usize>,
        sigma: f64,
        noise: Noise,
    ) -> Result<Self> {
        let spec = InstanceSpec {
            num_arms: labels.len(),
            num_groups: centers.len(),
            dim: centers.first().map_or(0, Vec::len),
            sigma,
            centers,
            labels,
            noise,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Balanced instance with equidistant centers `e_k / sqrt(2)`, so that the
    /// minimal gap is exactly 1. Group sizes are `floor(N/K)` or one more;
    /// arm `a` belongs to group `a mod K`.
    pub fn balanced_equidistant(n: usize, k: usize, d: usize, sigma: f64) -> Result<Self> {
        if k > d {
            return invalid(format!("equidistant layout needs d >= K (d={d}, K={k})"));
        }
        let centers = (0..k)
            .map(|g| {
                let mut c = vec![0.0; d];
                c[g] = std::f64::consts::FRAC_1_SQRT_2;
                c
            })
            .collect();
        let labels = (0..n).map(|a| a % k.max(1)).collect();
        Self::new(centers, labels, sigma, Noise::IsotropicGaussian)
    }

    pub fn validate(&self) -> Result<()> {
        let (n, k, d) = (self.num_arms, self.num_groups, self.dim);
        if n == 0 || k == 0 || d == 0 {
            return invalid("N, K and d must be positive");
        }
        if k > n {
            return invalid(format!("K={k} exceeds N={n}"));
        }
        if !(self.sigma.is_finite() && self.sigma >= 0.0) {
            return invalid("sigma must be finite and nonnegative");
        }
        if self.centers.len() != k {
            return invalid(format!("expected {k} centers, got {}", self.centers.len()));
        }
        if let Some(c) = self.centers.iter().find(|c| c.len() != d) {
            return invalid(format!("center of length {} in dimension {d}", c.len()));
        }
        if self.centers.iter().flatten().any(|x| !x.is_finite()) {
            return invalid("centers must be finite");
        }
        if self.labels.len() != n {
            return invalid(format!("expected {n} labels, got {}", self.labels.len()));
        }
        let mut seen = vec![false; k];
        for &l in &self.labels {
            if l >= k {
                return invalid(format!("label {} out of range 1..={k}", l + 1));
            }
            seen[l] = true;
        }
        if let Some(g) = seen.iter().position(|s| !s) {
            return invalid(format!("group {} is empty", g + 1));
        }
        for i in 0..k {
            for j in i + 1..k {
                if squared_distance(&self.centers[i], &self.centers[j]) == 0.0 {
                    return invalid(format!("centers {} and {} coincide", i + 1, j + 1));
                }
            }
        }
        let s2 = self.sigma * self.sigma;
        match &self.noise {
            Noise::IsotropicGaussian => {}
            Noise::DiagonalGaussian { variances } => {
                if variances.len() != d {
                    return invalid("diagonal variances must have length d");
                }
                if variances.iter().any(|&v| !(v.is_finite() && v >= 0.0 && v <= s2)) {
                    return invalid("diagonal variances must lie in [0, sigma^2]");
                }
            }
            Noise::BoundedUniform { half_width } => {
                if !(half_width.is_finite() && *half_width >= 0.0 && *half_width <= self.sigma) {
                    return invalid("uniform half width must lie in [0, sigma]");
                }
            }
        }
        Ok(())
    }

    /// The hidden partition.
    pub fn partition(&self) -> Partition {
        Partition::new(self.labels.clone(), self.num_groups)
            .expect("validated spec has a valid partition")
    }

    /// Mean of arm `arm`.
    pub fn arm_mean(&self, arm: usize) -> &[f64] {
        &self.centers[self.labels[arm]]
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

pub(crate) fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// An assignment of arms to `K` groups, stored in first-occurrence order so
/// that two equivalent partitions have identical label vectors.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition {
    labels: Vec<usize>,
    num_groups: usize,
}

impl Partition {
    /// Builds a partition from 0-based labels; all `num_groups` labels must
    /// be used.
    pub fn new(labels: Vec<usize>, num_groups: usize) -> Result<Self> {
        let mut used = vec![false; num_groups];
        for &l in &labels {
            if l >= num_groups {
                return invalid(format!("label {l} out of range for K={num_groups}"));
            }
            used[l] = true;
        }
        if used.iter().any(|u| !u) {
            return invalid(format!("partition does not use all {num_groups} labels"));
        }
        Ok(Partition {
            labels: canonical_labels(&labels),
            num_groups,
        })
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn num_groups(&self) -> usize {
        self.num_groups
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn group_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.num_groups];
        for &l in &self.labels {
            sizes[l] += 1;
        }
        sizes
    }
}

fn canonical_labels(labels: &[usize]) -> Vec<usize> {
    let mut map = std::collections::HashMap::new();
    labels
        .iter()
        .map(|l| {
            let next = map.len();
            *map.entry(*l).or_insert(next)
        })
        .collect()
}

/// True iff some relabelling maps one label sequence onto the other.
///
/// Works on raw label slices of any alphabet: the pairing `a[i] -> b[i]` must
/// be a well-defined injective map.
pub fn labels_equivalent(a: &[usize], b: &[usize]) -> Result<bool> {
    use std::collections::HashMap;
    if a.len() != b.len() {
        return invalid(format!("label lengths differ ({} vs {})", a.len(), b.len()));
    }
    let mut forward = HashMap::new();
    let mut backward = HashMap::new();
    for (&x, &y) in a.iter().zip(b) {
        if *forward.entry(x).or_insert(y) != y || *backward.entry(y).or_insert(x) != x {
            return Ok(false);
        }
    }
    Ok(true)
}

pub fn partition_equivalent(a: &Partition, b: &Partition) -> Result<bool> {
    labels_equivalent(&a.labels, &b.labels)
}

/// Minimal Euclidean distance between two distinct group centers.
pub fn min_gap(spec: &InstanceSpec) -> Result<f64> {
    if spec.num_groups < 2 {
        return invalid("minimal gap needs at least two groups");
    }
    let mut best = f64::INFINITY;
    for i in 0..spec.num_groups {
        for j in i + 1..spec.num_groups {
            best = best.min(squared_distance(&spec.centers[i], &spec.centers[j]));
        }
    }
    Ok(best.sqrt())
}

/// Proportion of arms in the smallest group.
pub fn balancedness(p: &Partition) -> f64 {
    let smallest = p.group_sizes().into_iter().min().unwrap_or(0);
    smallest as f64 / p.len() as f64
}

/// Per-arm pull counters; `total` is always their sum.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BudgetLedger {
    pulls: Vec<u64>,
    total: u64,
}

impl BudgetLedger {
    pub fn new(num_arms: usize) -> Self {
        BudgetLedger {
            pulls: vec![0; num_arms],
            total: 0,
        }
    }

    pub fn record(&mut self, arm: usize, count: u64) {
        self.pulls[arm] += count;
        self.total += count;
    }

    pub fn pulls(&self) -> &[u64] {
        &self.pulls
    }

    pub fn pulls_of(&self, arm: usize) -> u64 {
        self.pulls[arm]
    }

    pub fn total(&self) -> u64 {
        self.total
    }
}

/// Numerical constants of the sub-Gaussian schedules.
///
/// `c_hw` is the Hanson-Wright constant; every other constant is a function
/// of it, recomputed by [`Constants::with_c_hw`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Constants {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub c4: f64,
    pub c5: f64,
    pub c6: f64,
    pub c_hw: f64,
}

impl Constants {
    pub fn with_c_hw(c_hw: f64) -> Result<Self> {
        if !(c_hw.is_finite() && c_hw > 0.0) {
            return invalid("c_hw must be positive and finite");
        }
        let sqrt2 = std::f64::consts::SQRT_2;
        Ok(Constants {
            c1: (32.0f64 * 32.0).max(8.0 * c_hw),
            c2: (16.0 * (c_hw / 2.0).sqrt()).max(32.0 * sqrt2),
            c3: 32.0 * sqrt2,
            c4: 64.0f64.max(4.0 * sqrt2 * c_hw),
            c5: 8.0 * c_hw.sqrt(),
            c6: 2048.0f64.max(64.0 * c_hw).max(92.0 * c_hw.sqrt()),
            c_hw,
        })
    }
}

impl Default for Constants {
    fn default() -> Self {
        Constants::with_c_hw(1.0).expect("default c_hw is valid")
    }
}
