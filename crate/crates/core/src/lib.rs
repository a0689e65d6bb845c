//! Active clustering with bandit feedback.
//!
//! Arms of a d-dimensional sub-Gaussian bandit are hidden in K groups. The
//! algorithms here sample arms sequentially and return the partition, exactly
//! and with probability at least `1 - delta`:
//!
//! * [`sri`]: sequential representative identification (one arm per group),
//! * [`adc`]: active distance-based classification of the remaining arms,
//! * [`acb`]: the known-gap algorithm and the fully adaptive multiscale search,
//! * [`gaussian`]: a variant calibrated with exact Gaussian quantiles,
//! * [`baseline`]: uniform sampling followed by kmeans++/Lloyd.
//!
//! [`theory`] evaluates the closed-form budget bounds and [`harness`] runs
//! seeded replicate sweeps.

pub mod acb;
pub mod adc;
pub mod baseline;
pub mod env;
pub mod error;
pub mod gaussian;
pub mod harness;
pub mod par;
pub mod problem;
pub mod result;
pub mod rng;
pub mod sri;
pub mod stats;
pub mod theory;

pub use env::{Bandit, Environment, Sampling};
pub use error::{Error, Result};
pub use problem::{
    balancedness, min_gap, partition_equivalent, BudgetLedger, Constants, InstanceSpec, Noise,
    Partition,
};
pub use result::{PhaseBudgets, RunResult};
