//! Simulated bandit environments.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{invalid, Result};
use crate::problem::{BudgetLedger, InstanceSpec, Noise};
use crate::rng::{keyed_rng, Domain};
use crate::stats::MeanPair;

/// What a learner may do with an environment: pull arms and read the public
/// problem sizes. Ground truth is deliberately absent.
pub trait Bandit {
    fn num_arms(&self) -> usize;
    fn num_groups(&self) -> usize;
    fn dim(&self) -> usize;
    /// Known sub-Gaussian scale of the noise.
    fn sigma(&self) -> f64;

    /// One observation of `arm`.
    fn pull(&mut self, arm: usize) -> Result<Vec<f64>>;

    /// Average of `n` fresh observations of `arm`.
    fn empirical_mean(&mut self, arm: usize, n: u64) -> Result<Vec<f64>> {
        if n == 0 {
            return invalid("empirical mean needs n >= 1");
        }
        let mut acc = self.pull(arm)?;
        for _ in 1..n {
            for (a, x) in acc.iter_mut().zip(self.pull(arm)?) {
                *a += x;
            }
        }
        let inv = 1.0 / n as f64;
        acc.iter_mut().for_each(|a| *a *= inv);
        Ok(acc)
    }

    /// Two independent empirical means of `n` pulls each (`2n` pulls).
    fn dual_empirical_mean(&mut self, arm: usize, n: u64) -> Result<MeanPair> {
        let mu = self.empirical_mean(arm, n)?;
        let mu_prime = self.empirical_mean(arm, n)?;
        Ok(MeanPair { mu, mu_prime, n })
    }

    fn ledger(&self) -> &BudgetLedger;

    fn budget(&self) -> u64 {
        self.ledger().total()
    }
}

/// How [`Environment::empirical_mean`] produces its output.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sampling {
    /// Draw every observation and average them.
    PerPull,
    /// For Gaussian noise, draw the average directly from `N(mu, Sigma/n)`,
    /// which has exactly the law of the mean of `n` pulls. Other noise
    /// families fall back to [`Sampling::PerPull`].
    Aggregated,
}

/// A seeded simulation of an [`InstanceSpec`].
///
/// The observation of the `i`-th pull of arm `a` is a function of
/// `(seed, a, i)` only, so it does not depend on how pulls of different arms
/// interleave.
#[derive(Debug, Clone)]
pub struct Environment {
    spec: InstanceSpec,
    seed: u64,
    ledger: BudgetLedger,
    sampling: Sampling,
    noise_sd: Vec<f64>,
}

impl Environment {
    pub fn new(spec: InstanceSpec, seed: u64) -> Result<Self> {
        spec.validate()?;
        let noise_sd = match &spec.noise {
            Noise::IsotropicGaussian => vec![spec.sigma; spec.dim],
            Noise::DiagonalGaussian { variances } => variances.iter().map(|v| v.sqrt()).collect(),
            Noise::BoundedUniform { half_width } => vec![*half_width; spec.dim],
        };
        Ok(Environment {
            ledger: BudgetLedger::new(spec.num_arms),
            spec,
            seed,
            sampling: Sampling::Aggregated,
            noise_sd,
        })
    }

    pub fn with_sampling(mut self, sampling: Sampling) -> Self {
        self.sampling = sampling;
        self
    }

    pub fn spec(&self) -> &InstanceSpec {
        &self.spec
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    fn check_arm(&self, arm: usize) -> Result<()> {
        if arm >= self.spec.num_arms {
            return invalid(format!(
                "arm {arm} out of range (N={})",
                self.spec.num_arms
            ));
        }
        Ok(())
    }

    fn observe(&self, arm: usize, index: u64) -> Vec<f64> {
        let mut rng = keyed_rng(self.seed, Domain::Pull, &[arm as u64, index]);
        let mean = self.spec.arm_mean(arm);
        match self.spec.noise {
            Noise::IsotropicGaussian | Noise::DiagonalGaussian { .. } => mean
                .iter()
                .zip(&self.noise_sd)
                .map(|(m, sd)| m + sd * rng.sample::<f64, _>(StandardNormal))
                .collect(),
            Noise::BoundedUniform { half_width } => mean
                .iter()
                .map(|m| m + half_width * rng.random_range(-1.0..=1.0))
                .collect(),
        }
    }

    fn is_gaussian(&self) -> bool {
        matches!(
            self.spec.noise,
            Noise::IsotropicGaussian | Noise::DiagonalGaussian { .. }
        )
    }
}

impl Bandit for Environment {
    fn num_arms(&self) -> usize {
        self.spec.num_arms
    }

    fn num_groups(&self) -> usize {
        self.spec.num_groups
    }

    fn dim(&self) -> usize {
        self.spec.dim
    }

    fn sigma(&self) -> f64 {
        self.spec.sigma
    }

    fn pull(&mut self, arm: usize) -> Result<Vec<f64>> {
        self.check_arm(arm)?;
        let x = self.observe(arm, self.ledger.pulls_of(arm));
        self.ledger.record(arm, 1);
        Ok(x)
    }

    fn empirical_mean(&mut self, arm: usize, n: u64) -> Result<Vec<f64>> {
        self.check_arm(arm)?;
        if n == 0 {
            return invalid("empirical mean needs n >= 1");
        }
        if self.sampling == Sampling::PerPull || !self.is_gaussian() {
            let first = self.ledger.pulls_of(arm);
            let mut acc = vec![0.0; self.spec.dim];
            for i in 0..n {
                for (a, x) in acc.iter_mut().zip(self.observe(arm, first + i)) {
                    *a += x;
                }
            }
            self.ledger.record(arm, n);
            let inv = 1.0 / n as f64;
            acc.iter_mut().for_each(|a| *a *= inv);
            return Ok(acc);
        }
        let first = self.ledger.pulls_of(arm);
        let mut rng = keyed_rng(self.seed, Domain::BlockMean, &[arm as u64, first, n]);
        let scale = 1.0 / (n as f64).sqrt();
        let mean = self
            .spec
            .arm_mean(arm)
            .iter()
            .zip(&self.noise_sd)
            .map(|(m, sd)| m + sd * scale * rng.sample::<f64, _>(StandardNormal))
            .collect();
        self.ledger.record(arm, n);
        Ok(mean)
    }

    fn ledger(&self) -> &BudgetLedger {
        &self.ledger
    }
}
