//! Closed-form lower and upper budget bounds.
//!
//! The upper bounds hold up to unspecified numerical constants; the `c*`
//! knobs below are user inputs and the results are shape curves, not
//! certified numbers.

use serde::{Deserialize, Serialize};

use crate::acb::coarsest_gap_sq;
use crate::error::{invalid, Result};
use crate::stats::kl_bernoulli;

/// Problem parameters shared by every bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundParams {
    pub num_arms: usize,
    pub num_groups: usize,
    pub dim: usize,
    pub delta: f64,
    pub gap: f64,
    pub theta: f64,
    pub sigma: f64,
}

/// Two lower-bound terms: `(sigma^2/gap^2) N kl(1-delta, delta/N)` and
/// `(sigma^2/gap^2) sqrt((dKN/72) kl(1/3 - 2 delta, 4 delta/N))`.
///
/// The second term needs `delta < 1/6`; it is returned as an error otherwise
/// while the first term is still available.
pub fn lower_bound_terms(
    delta: f64,
    gap: f64,
    sigma: f64,
    num_arms: usize,
    num_groups: usize,
    dim: usize,
) -> Result<(f64, Result<f64>)> {
    if gap.is_nan() || gap <= 0.0 {
        return invalid("gap must be positive");
    }
    let n = num_arms as f64;
    let snr = sigma * sigma / (gap * gap);
    let term1 = snr * n * kl_bernoulli(1.0 - delta, delta / n)?;
    let term2 = if delta < 1.0 / 6.0 {
        kl_bernoulli(1.0 / 3.0 - 2.0 * delta, 4.0 * delta / n)
            .map(|kl| snr * (dim as f64 * num_groups as f64 * n / 72.0 * kl).sqrt())
    } else {
        invalid(format!("second lower-bound term needs delta < 1/6, got {delta}"))
    };
    Ok((term1, term2))
}

/// `c N + c (sigma^2/gap^2)[N ln(N/delta) + sqrt(dKN ln(N/delta))]`.
pub fn minimax_lower_bound(params: &BoundParams, c: f64) -> f64 {
    let n = params.num_arms as f64;
    let log = (n / params.delta).ln();
    let snr = params.sigma * params.sigma / (params.gap * params.gap);
    let kd = params.dim as f64 * params.num_groups as f64;
    c * n + c * snr * (n * log + (kd * n * log).sqrt())
}

/// The two upper-bound quantities `(A, B)`.
pub fn upper_bound_terms(
    delta: f64,
    gap: f64,
    theta: f64,
    sigma: f64,
    num_arms: usize,
    num_groups: usize,
    dim: usize,
) -> Result<(f64, f64)> {
    if !(delta > 0.0 && gap > 0.0 && theta > 0.0 && sigma >= 0.0) {
        return invalid("bound parameters must be positive");
    }
    let (n, k, d) = (num_arms as f64, num_groups as f64, dim as f64);
    let log_n = (n / delta).ln();
    if log_n <= 1.0 {
        return invalid(format!("ln(N/delta) = {log_n} must exceed 1"));
    }
    let snr = sigma * sigma / (gap * gap);
    let a = snr * (n * log_n + (d * n * k * log_n).sqrt() + d.sqrt() * k.ln() / theta);
    let log_k = (k / delta).ln();
    let b = log_k / theta + snr * log_k / theta * (d.sqrt() + log_n.ln());
    Ok((a, b))
}

/// `ceil(log2((1/(theta K)) max(Delta_0^2/gap^2, 1)))`, floored at 0.
pub fn level_bound(params: &BoundParams) -> f64 {
    let gap0_sq = coarsest_gap_sq(
        params.delta,
        params.sigma,
        params.num_arms,
        params.num_groups,
        params.dim,
    );
    let ratio = (gap0_sq / (params.gap * params.gap)).max(1.0);
    (ratio / (params.theta * params.num_groups as f64))
        .log2()
        .ceil()
        .max(0.0)
}

/// Constants of the upper-bound shapes (Theorem-style `c`, `c'`, `c''`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShapeConstants {
    pub c: f64,
    pub c_prime: f64,
    pub c_second: f64,
}

impl Default for ShapeConstants {
    fn default() -> Self {
        ShapeConstants {
            c: 1.0,
            c_prime: 1.0,
            c_second: 1.0,
        }
    }
}

/// `c N + c' (A + B)`: the almost-sure budget shape of the known-gap
/// algorithm.
pub fn acb_bound(num_arms: usize, a: f64, b: f64, k: &ShapeConstants) -> f64 {
    k.c * num_arms as f64 + k.c_prime * (a + b)
}

/// `c N + c'' L log^2(L) (A + B)` with `L` the level bound clamped at 2 so
/// the logarithm stays positive.
pub fn acb_star_bound(num_arms: usize, a: f64, b: f64, level: f64, k: &ShapeConstants) -> f64 {
    let l = level.max(2.0);
    k.c * num_arms as f64 + k.c_second * l * l.ln().powi(2) * (a + b)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub params: BoundParams,
    pub lb_term1: f64,
    pub lb_term2: Option<f64>,
    pub thm1_rhs: f64,
    pub a: f64,
    pub b: f64,
    pub l_star: f64,
    pub acb_bound: f64,
    pub acb_star_bound: f64,
}

pub fn bound_report(params: &BoundParams, shape: &ShapeConstants) -> Result<BoundReport> {
    let p = params;
    let (lb1, lb2) = lower_bound_terms(p.delta, p.gap, p.sigma, p.num_arms, p.num_groups, p.dim)?;
    let (a, b) = upper_bound_terms(p.delta, p.gap, p.theta, p.sigma, p.num_arms, p.num_groups, p.dim)?;
    let l_star = level_bound(p);
    Ok(BoundReport {
        params: *p,
        lb_term1: lb1,
        lb_term2: lb2.ok(),
        thm1_rhs: minimax_lower_bound(p, shape.c),
        a,
        b,
        l_star,
        acb_bound: acb_bound(p.num_arms, a, b, shape),
        acb_star_bound: acb_star_bound(p.num_arms, a, b, l_star, shape),
    })
}
