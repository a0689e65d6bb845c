//! Estimators and the special functions the algorithms need.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rand::Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::par::{map_range, Execution};
use crate::rng::{keyed_rng, Domain};

/// Two independent empirical means of the same arm, `n` pulls each.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanPair {
    pub mu: Vec<f64>,
    pub mu_prime: Vec<f64>,
    pub n: u64,
}

impl MeanPair {
    pub fn dim(&self) -> usize {
        self.mu.len()
    }
}

/// Unbiased estimate `<mu_a - mu_b, mu'_a - mu'_b>` of `|mu_a - mu_b|^2`.
/// Can be negative.
pub fn cross_distance_sq(a: &MeanPair, b: &MeanPair) -> Result<f64> {
    let d = a.dim();
    if b.dim() != d || a.mu_prime.len() != d || b.mu_prime.len() != d {
        return invalid("mean pairs have different dimensions");
    }
    Ok((0..d)
        .map(|i| (a.mu[i] - b.mu[i]) * (a.mu_prime[i] - b.mu_prime[i]))
        .sum())
}

/// Relative entropy between Bernoulli(x) and Bernoulli(y).
pub fn kl_bernoulli(x: f64, y: f64) -> Result<f64> {
    let open = |v: f64| v > 0.0 && v < 1.0;
    if !open(x) || !open(y) {
        return invalid(format!("kl arguments must lie in (0,1), got ({x}, {y})"));
    }
    Ok(x * (x / y).ln() + (1.0 - x) * ((1.0 - x) / (1.0 - y)).ln())
}

const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// `ln Gamma(x)` for `x > 0` (Lanczos, g = 7).
pub fn ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let t = x + 7.5;
    let series = LANCZOS[1..]
        .iter()
        .enumerate()
        .fold(LANCZOS[0], |acc, (i, c)| acc + c / (x + i as f64 + 1.0));
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + series.ln()
}

const GAMMA_EPS: f64 = 1e-16;
const GAMMA_MAX_ITER: usize = 100_000;

/// Regularized incomplete gamma functions `(P(a,x), Q(a,x))`.
fn incomplete_gamma(a: f64, x: f64) -> (f64, f64) {
    if x <= 0.0 {
        return (0.0, 1.0);
    }
    let log_prefactor = a * x.ln() - x - ln_gamma(a);
    if x < a + 1.0 {
        // Power series for P.
        let mut term = 1.0 / a;
        let mut sum = term;
        let mut ap = a;
        for _ in 0..GAMMA_MAX_ITER {
            ap += 1.0;
            term *= x / ap;
            sum += term;
            if term.abs() < sum.abs() * GAMMA_EPS {
                break;
            }
        }
        let p = (sum.ln() + log_prefactor).exp();
        (p, 1.0 - p)
    } else {
        // Modified Lentz continued fraction for Q.
        let tiny = 1e-300;
        let mut b = x + 1.0 - a;
        let mut c = 1.0 / tiny;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..GAMMA_MAX_ITER {
            let an = -(i as f64) * (i as f64 - a);
            b += 2.0;
            d = an * d + b;
            if d.abs() < tiny {
                d = tiny;
            }
            c = b + an / c;
            if c.abs() < tiny {
                c = tiny;
            }
            d = 1.0 / d;
            let delta = d * c;
            h *= delta;
            if (delta - 1.0).abs() < GAMMA_EPS {
                break;
            }
        }
        let q = (h.ln() + log_prefactor).exp();
        (1.0 - q, q)
    }
}

/// `P(chi2_dof <= x)`.
pub fn chi2_cdf(dof: u32, x: f64) -> f64 {
    incomplete_gamma(dof as f64 / 2.0, x / 2.0).0
}

/// `P(chi2_dof > x)`, accurate in the upper tail.
pub fn chi2_sf(dof: u32, x: f64) -> f64 {
    incomplete_gamma(dof as f64 / 2.0, x / 2.0).1
}

fn check_prob(p: f64) -> Result<()> {
    if !(p > 0.0 && p < 1.0) {
        return invalid(format!("probability must lie in (0,1), got {p}"));
    }
    Ok(())
}

/// Quantile of the chi-square distribution, by bisection on the CDF.
pub fn chi2_quantile(dof: u32, p: f64) -> Result<f64> {
    check_prob(p)?;
    if dof == 0 {
        return invalid("chi-square needs at least one degree of freedom");
    }
    // Compare in the tail where the probability is representable precisely.
    let below = |x: f64| {
        if p <= 0.5 {
            chi2_cdf(dof, x) < p
        } else {
            chi2_sf(dof, x) > 1.0 - p
        }
    };
    let mut lo = 0.0;
    let mut hi = dof as f64 + 10.0;
    while below(hi) {
        lo = hi;
        hi *= 2.0;
    }
    let tol = 1e-12 * f64::max(1.0, dof as f64);
    for _ in 0..400 {
        if hi - lo <= tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if below(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    // erfc(z) = Q(1/2, z^2) for z >= 0.
    let z = x / std::f64::consts::SQRT_2;
    let (p, q) = incomplete_gamma(0.5, z * z);
    if x >= 0.0 {
        1.0 - 0.5 * q
    } else {
        0.5 * q.min(1.0 - p).max(0.0)
    }
}

/// Standard normal survival function `1 - Phi(x)`.
pub fn normal_sf(x: f64) -> f64 {
    normal_cdf(-x)
}

/// Standard normal density.
pub fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Inverse standard normal CDF: Acklam's rational approximation followed by
/// one Halley refinement step.
pub fn normal_quantile(p: f64) -> Result<f64> {
    check_prob(p)?;
    const A: [f64; 6] = [
        -3.969_683_028_665_376e1,
        2.209_460_984_245_205e2,
        -2.759_285_104_469_687e2,
        1.383_577_518_672_69e2,
        -3.066_479_806_614_716e1,
        2.506_628_277_459_239,
    ];
    const B: [f64; 5] = [
        -5.447_609_879_822_406e1,
        1.615_858_368_580_409e2,
        -1.556_989_798_598_866e2,
        6.680_131_188_771_972e1,
        -1.328_068_155_288_572e1,
    ];
    const C: [f64; 6] = [
        -7.784_894_002_430_293e-3,
        -3.223_964_580_411_365e-1,
        -2.400_758_277_161_838,
        -2.549_732_539_343_734,
        4.374_664_141_464_968,
        2.938_163_982_698_783,
    ];
    const D: [f64; 4] = [
        7.784_695_709_041_462e-3,
        3.224_671_290_700_398e-1,
        2.445_134_137_142_996,
        3.754_408_661_907_416,
    ];
    const P_LOW: f64 = 0.024_25;

    let tail = |q: f64| {
        let q = (-2.0 * q.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    };
    let x = if p < P_LOW {
        tail(p)
    } else if p > 1.0 - P_LOW {
        -tail(1.0 - p)
    } else {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    };
    // Residual taken in the tail that keeps relative precision.
    let e = if x > 0.0 {
        (1.0 - p) - normal_sf(x)
    } else {
        normal_cdf(x) - p
    };
    let u = e / normal_pdf(x);
    Ok(x - u / (1.0 + 0.5 * x * u))
}

/// Default number of Monte Carlo draws for [`mc_quantile_dot_product`].
pub const DEFAULT_MC_SAMPLES: usize = 1_000_000;
const MC_CHUNK: usize = 1 << 14;

/// Empirical `p`-quantile of `<g, g'>` with `g, g'` independent
/// `N(0, I_d)`.
///
/// Conditionally on `g`, `<g, g'>` is `N(0, |g|^2)`, so each draw is
/// `sqrt(chi2_d) * Z`. Draws come in fixed-size chunks keyed by
/// `(seed, d, chunk)`, so the result does not depend on `exec`.
pub fn mc_quantile_dot_product(
    d: usize,
    p: f64,
    samples: usize,
    seed: u64,
    exec: Execution,
) -> Result<f64> {
    check_prob(p)?;
    if d == 0 || samples == 0 {
        return invalid("dimension and sample count must be positive");
    }
    let chi = ChiSquared::new(d as f64).map_err(|e| Error::InvalidInput(e.to_string()))?;
    let chunks = samples.div_ceil(MC_CHUNK);
    let mut draws: Vec<f64> = map_range(exec, chunks, |c| {
        let mut rng = keyed_rng(seed, Domain::MonteCarlo, &[d as u64, c as u64]);
        let len = MC_CHUNK.min(samples - c * MC_CHUNK);
        (0..len)
            .map(|_| chi.sample(&mut rng).sqrt() * rng.sample::<f64, _>(StandardNormal))
            .collect::<Vec<_>>()
    })
    .into_iter()
    .flatten()
    .collect();
    let k = ((p * samples as f64).ceil() as usize).clamp(1, samples) - 1;
    let (_, q, _) = draws.select_nth_unstable_by(k, f64::total_cmp);
    Ok(*q)
}

/// On-disk memo of Monte Carlo quantiles, a JSON map from
/// `"d:p:samples:seed"` to the quantile.
#[derive(Debug, Default)]
pub struct QuantileCache {
    path: Option<PathBuf>,
    entries: BTreeMap<String, f64>,
    dirty: bool,
}

/// Environment variable overriding [`QuantileCache::default_path`].
pub const CACHE_ENV: &str = "ACB_QUANTILE_CACHE";

impl QuantileCache {
    pub fn in_memory() -> Self {
        Self::default()
    }

    pub fn default_path() -> PathBuf {
        std::env::var_os(CACHE_ENV)
            .map(PathBuf::from)
            .unwrap_or_else(|| PathBuf::from("acb-quantile-cache.json"))
    }

    /// Opens the cache at `path`; a missing file is an empty cache.
    pub fn open(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref().to_path_buf();
        let entries = match std::fs::read_to_string(&path) {
            Ok(text) => serde_json::from_str(&text)?,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => BTreeMap::new(),
            Err(e) => return Err(Error::io(&path, e)),
        };
        Ok(QuantileCache {
            path: Some(path),
            entries,
            dirty: false,
        })
    }

    pub fn key(d: usize, p: f64, samples: usize, seed: u64) -> String {
        format!("{d}:{p}:{samples}:{seed}")
    }

    pub fn get(&self, d: usize, p: f64, samples: usize, seed: u64) -> Option<f64> {
        self.entries.get(&Self::key(d, p, samples, seed)).copied()
    }

    pub fn get_or_compute(
        &mut self,
        d: usize,
        p: f64,
        samples: usize,
        seed: u64,
        exec: Execution,
    ) -> Result<f64> {
        if let Some(q) = self.get(d, p, samples, seed) {
            return Ok(q);
        }
        let q = mc_quantile_dot_product(d, p, samples, seed, exec)?;
        self.entries.insert(Self::key(d, p, samples, seed), q);
        self.dirty = true;
        Ok(q)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Writes the cache back if it is file-backed and changed.
    pub fn save(&mut self) -> Result<()> {
        if let (Some(path), true) = (&self.path, self.dirty) {
            let text = serde_json::to_string_pretty(&self.entries)?;
            std::fs::write(path, text).map_err(|e| Error::io(path, e))?;
            self.dirty = false;
        }
        Ok(())
    }
}
