//! Experiment orchestration: configs, seeded replicate sweeps, aggregation
//! and CSV/JSON/SVG export.

use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::acb::{run_acb, run_acb_star, StarOptions};
use crate::baseline::{min_uniform_budget, run_uniform, MinUniformReport};
use crate::env::Environment;
use crate::error::{invalid, Error, Result};
use crate::gaussian::{run_gv_acb, GvSchedule, McParams};
use crate::par::{map_range, Execution};
use crate::problem::{balancedness, min_gap, Constants, InstanceSpec, Noise};
use crate::result::RunResult;
use crate::rng::{keyed_rng, Domain};
use crate::stats::{normal_quantile, QuantileCache};
use crate::theory::{bound_report, BoundParams, ShapeConstants};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Layout {
    /// `mu(k) = e_k / sqrt(2)`; requires `d >= K`, minimal gap 1.
    EquidistantCanonical,
    /// Independent uniform directions scaled to `radius`.
    RandomSphere { radius: f64, seed: u64 },
    Explicit { centers: Vec<Vec<f64>> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Balance {
    /// Sizes `floor(N/K)` or one more, arm `a` in group `a mod K`.
    Balanced,
    Sizes { sizes: Vec<usize> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceTemplate {
    #[serde(rename = "N")]
    pub num_arms: usize,
    #[serde(rename = "K")]
    pub num_groups: usize,
    pub d: usize,
    pub sigma: f64,
    #[serde(default = "default_layout")]
    pub layout: Layout,
    #[serde(default = "default_balance")]
    pub balance: Balance,
    #[serde(default)]
    pub noise: Option<Noise>,
}

fn default_layout() -> Layout {
    Layout::EquidistantCanonical
}

fn default_balance() -> Balance {
    Balance::Balanced
}

impl InstanceTemplate {
    pub fn build(&self) -> Result<InstanceSpec> {
        let (n, k, d) = (self.num_arms, self.num_groups, self.d);
        let centers = match &self.layout {
            Layout::EquidistantCanonical => {
                if k > d {
                    return invalid(format!("equidistant layout needs d >= K (d={d}, K={k})"));
                }
                (0..k)
                    .map(|g| {
                        let mut c = vec![0.0; d];
                        c[g] = std::f64::consts::FRAC_1_SQRT_2;
                        c
                    })
                    .collect()
            }
            Layout::RandomSphere { radius, seed } => {
                let mut rng = keyed_rng(*seed, Domain::Algorithm, &[0x5e7]);
                (0..k)
                    .map(|_| {
                        let v: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
                        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                        v.into_iter().map(|x| radius * x / norm).collect()
                    })
                    .collect()
            }
            Layout::Explicit { centers } => centers.clone(),
        };
        let labels = match &self.balance {
            Balance::Balanced => (0..n).map(|a| a % k.max(1)).collect(),
            Balance::Sizes { sizes } => {
                if sizes.len() != k || sizes.iter().sum::<usize>() != n {
                    return invalid("group sizes must have length K and sum to N");
                }
                sizes
                    .iter()
                    .enumerate()
                    .flat_map(|(g, &s)| std::iter::repeat_n(g, s))
                    .collect()
            }
        };
        let noise = self.noise.clone().unwrap_or(Noise::IsotropicGaussian);
        let spec = InstanceSpec {
            num_arms: n,
            num_groups: k,
            dim: d,
            sigma: self.sigma,
            centers,
            labels,
            noise,
        };
        spec.validate()?;
        Ok(spec)
    }
}

/// Algorithm and its parameters. Omitted gap / balancedness levels default
/// to the instance's true values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum AlgorithmConfig {
    Acb {
        delta: f64,
        #[serde(default, rename = "Delta")]
        gap: Option<f64>,
        #[serde(default)]
        theta: Option<f64>,
    },
    AcbStar {
        delta: f64,
        #[serde(default)]
        l_cap: Option<u32>,
        #[serde(default)]
        gap_floor: Option<f64>,
    },
    GvAcb {
        delta: f64,
        #[serde(default, rename = "Delta")]
        gap: Option<f64>,
        #[serde(default)]
        theta: Option<f64>,
        #[serde(default)]
        mc_samples: Option<usize>,
        #[serde(default)]
        mc_seed: Option<u64>,
    },
    Uniform {
        #[serde(rename = "T")]
        pulls_per_arm: u64,
    },
    MinUniformBudget {
        target_error: f64,
        runs: usize,
        #[serde(default = "default_t_cap")]
        t_cap: u64,
    },
}

fn default_t_cap() -> u64 {
    1 << 20
}

impl AlgorithmConfig {
    pub fn name(&self) -> &'static str {
        match self {
            AlgorithmConfig::Acb { .. } => "acb",
            AlgorithmConfig::AcbStar { .. } => "acb_star",
            AlgorithmConfig::GvAcb { .. } => "gv_acb",
            AlgorithmConfig::Uniform { .. } => "uniform",
            AlgorithmConfig::MinUniformBudget { .. } => "min_uniform_budget",
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ConstantsOverride {
    #[serde(default)]
    pub c_hw: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub instance: InstanceTemplate,
    pub algorithm: AlgorithmConfig,
    #[serde(default)]
    pub constants: ConstantsOverride,
    #[serde(default = "default_replicates")]
    pub replicates: usize,
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default)]
    pub output: Option<String>,
    /// Fill the `wall_ms` column; off by default so CSVs are reproducible.
    #[serde(default)]
    pub record_timing: bool,
}

fn default_replicates() -> usize {
    1
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text)?;
        if cfg.replicates == 0 {
            return invalid("replicates must be at least 1");
        }
        Ok(cfg)
    }

    pub fn constants(&self) -> Result<Constants> {
        Constants::with_c_hw(self.constants.c_hw.unwrap_or(1.0))
    }
}

/// Wilson score interval for `successes` out of `trials` at normal quantile
/// `z`.
pub fn wilson_interval(successes: usize, trials: usize, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    let lo = if successes == 0 { 0.0 } else { (center - half).max(0.0) };
    let hi = if successes == trials { 1.0 } else { (center + half).min(1.0) };
    (lo, hi)
}

/// Two-sided 95% normal quantile.
pub fn z95() -> f64 {
    normal_quantile(0.975).expect("valid level")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub replicates: usize,
    pub successes: usize,
    pub success_rate: f64,
    pub success_ci95: (f64, f64),
    pub failure_rate: f64,
    pub failure_ci95: (f64, f64),
    pub budget_mean: f64,
    pub budget_std: f64,
    pub budget_sri_mean: f64,
    pub budget_gap_est_mean: f64,
    pub budget_adc_mean: f64,
}

impl Aggregate {
    pub fn from_rows(rows: &[RunResult]) -> Self {
        let n = rows.len();
        let successes = rows.iter().filter(|r| r.success == Some(true)).count();
        let mean = |f: &dyn Fn(&RunResult) -> f64| {
            if n == 0 {
                0.0
            } else {
                rows.iter().map(f).sum::<f64>() / n as f64
            }
        };
        let budget_mean = mean(&|r| r.budget as f64);
        let budget_std = if n > 1 {
            (rows
                .iter()
                .map(|r| (r.budget as f64 - budget_mean).powi(2))
                .sum::<f64>()
                / (n - 1) as f64)
                .sqrt()
        } else {
            0.0
        };
        let z = z95();
        let (lo, hi) = wilson_interval(successes, n, z);
        Aggregate {
            replicates: n,
            successes,
            success_rate: if n == 0 { 0.0 } else { successes as f64 / n as f64 },
            success_ci95: (lo, hi),
            failure_rate: if n == 0 { 0.0 } else { (n - successes) as f64 / n as f64 },
            failure_ci95: (1.0 - hi, 1.0 - lo),
            budget_mean,
            budget_std,
            budget_sri_mean: mean(&|r| r.phase_budgets.sri as f64),
            budget_gap_est_mean: mean(&|r| r.phase_budgets.gap_est as f64),
            budget_adc_mean: mean(&|r| r.phase_budgets.adc as f64),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicateRow {
    pub replicate_id: usize,
    pub wall_ms: u64,
    pub result: RunResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub config: ExperimentConfig,
    pub rows: Vec<ReplicateRow>,
    pub aggregate: Aggregate,
    /// Parameters recorded for reproducibility (levels used, MC settings).
    pub metadata: serde_json::Map<String, serde_json::Value>,
}

/// Runs every replicate of `config` (seed `base_seed + i`) and aggregates.
/// Algorithm failures become unsuccessful rows.
pub fn run_sweep(
    config: &ExperimentConfig,
    exec: Execution,
    cache: &mut QuantileCache,
) -> Result<SweepResult> {
    let spec = config.instance.build()?;
    let truth = spec.partition();
    let constants = config.constants()?;
    let true_gap = if spec.num_groups >= 2 { min_gap(&spec)? } else { 1.0 };
    let true_theta = balancedness(&truth);
    let mut metadata = serde_json::Map::new();

    let gv_schedule = match &config.algorithm {
        AlgorithmConfig::GvAcb { delta, gap, theta, mc_samples, mc_seed } => {
            let mc = McParams {
                samples: mc_samples.unwrap_or(McParams::default().samples),
                seed: mc_seed.unwrap_or(0),
            };
            let s = GvSchedule::calibrate(
                *delta,
                gap.unwrap_or(true_gap),
                theta.unwrap_or(true_theta),
                spec.sigma,
                spec.num_arms,
                spec.num_groups,
                spec.dim,
                mc,
                cache,
                exec,
            )?;
            metadata.insert("gv_schedule".into(), serde_json::to_value(&s)?);
            Some(s)
        }
        AlgorithmConfig::MinUniformBudget { .. } => {
            return invalid("min_uniform_budget is not a replicate algorithm; use min-uniform");
        }
        _ => None,
    };
    metadata.insert("true_gap".into(), true_gap.into());
    metadata.insert("true_theta".into(), true_theta.into());

    let rows = map_range(exec, config.replicates, |i| -> Result<ReplicateRow> {
        let seed = config.base_seed.wrapping_add(i as u64);
        let started = Instant::now();
        let mut env = Environment::new(spec.clone(), seed)?;
        let mut rng = keyed_rng(seed, Domain::Algorithm, &[]);
        let mut result = match &config.algorithm {
            AlgorithmConfig::Acb { delta, gap, theta } => run_acb(
                &mut env,
                &mut rng,
                *delta,
                gap.unwrap_or(true_gap),
                theta.unwrap_or(true_theta),
                &constants,
            )?,
            AlgorithmConfig::AcbStar { delta, l_cap, gap_floor } => run_acb_star(
                &mut env,
                &mut rng,
                *delta,
                &constants,
                StarOptions { l_cap: *l_cap, gap_floor: *gap_floor },
            )?,
            AlgorithmConfig::GvAcb { .. } => {
                let s = gv_schedule.as_ref().expect("calibrated above");
                run_gv_acb(&mut env, &mut rng, s)?
            }
            AlgorithmConfig::Uniform { pulls_per_arm } => {
                let mut crng = keyed_rng(seed, Domain::Clustering, &[]);
                run_uniform(&mut env, *pulls_per_arm, &mut crng)?.into_result()
            }
            AlgorithmConfig::MinUniformBudget { .. } => unreachable!("rejected above"),
        };
        result.seed = Some(seed);
        result.score(&truth)?;
        // Schedules are recorded once at sweep level.
        result.metadata.remove("gv_schedule");
        let wall_ms = if config.record_timing {
            started.elapsed().as_millis() as u64
        } else {
            0
        };
        Ok(ReplicateRow { replicate_id: i, wall_ms, result })
    });
    let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;
    let results: Vec<RunResult> = rows.iter().map(|r| r.result.clone()).collect();
    Ok(SweepResult {
        config: config.clone(),
        aggregate: Aggregate::from_rows(&results),
        rows,
        metadata,
    })
}

pub const CSV_HEADER: [&str; 11] = [
    "replicate_id",
    "seed",
    "algorithm",
    "success",
    "budget",
    "budget_sri",
    "budget_gap_est",
    "budget_adc",
    "l",
    "p",
    "wall_ms",
];

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Per-replicate CSV with the fixed [`CSV_HEADER`] columns.
pub fn sweep_csv(result: &SweepResult) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER)?;
    for row in &result.rows {
        let r = &row.result;
        w.write_record([
            row.replicate_id.to_string(),
            opt(r.seed),
            r.algorithm.clone(),
            if r.success == Some(true) { "1".into() } else { "0".into() },
            r.budget.to_string(),
            r.phase_budgets.sri.to_string(),
            r.phase_budgets.gap_est.to_string(),
            r.phase_budgets.adc.to_string(),
            opt(r.l),
            opt(r.p),
            row.wall_ms.to_string(),
        ])?;
    }
    let bytes = w.into_inner().map_err(|e| Error::InvalidInput(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
    }
    std::fs::write(path, contents).map_err(|e| Error::io(path, e))
}

/// Writes `runs.csv` and `summary.json` into `dir`.
pub fn write_sweep(result: &SweepResult, dir: &Path) -> Result<()> {
    write_file(&dir.join("runs.csv"), &sweep_csv(result)?)?;
    let summary = serde_json::json!({
        "config": result.config,
        "aggregate": result.aggregate,
        "metadata": result.metadata,
    });
    write_file(&dir.join("summary.json"), &serde_json::to_string_pretty(&summary)?)
}

pub fn write_min_uniform(report: &MinUniformReport, dir: &Path) -> Result<()> {
    let mut value = serde_json::to_value(report)?;
    value["algorithm"] = "uniform".into();
    value["T"] = report.pulls_per_arm.into();
    write_file(&dir.join("min_uniform.json"), &serde_json::to_string_pretty(&value)?)
}

/// Runs the uniform-budget search described by a `min_uniform_budget`
/// config.
pub fn run_min_uniform(config: &ExperimentConfig, exec: Execution) -> Result<MinUniformReport> {
    match &config.algorithm {
        AlgorithmConfig::MinUniformBudget { target_error, runs, t_cap } => {
            let spec = config.instance.build()?;
            min_uniform_budget(&spec, *target_error, *runs, config.base_seed, *t_cap, exec)
        }
        other => invalid(format!("expected min_uniform_budget, got {}", other.name())),
    }
}

/// Parameter grid of a `sweep`: each listed instance field takes every
/// value, other fields come from the base config.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SweepGrid {
    #[serde(default, rename = "N")]
    pub num_arms: Vec<usize>,
    #[serde(default, rename = "K")]
    pub num_groups: Vec<usize>,
    #[serde(default)]
    pub d: Vec<usize>,
    #[serde(default)]
    pub sigma: Vec<f64>,
}

impl SweepGrid {
    /// Cartesian product, as `(label, config)` pairs.
    pub fn expand(&self, base: &ExperimentConfig) -> Vec<(String, ExperimentConfig)> {
        let mut out = vec![(String::new(), base.clone())];
        fn axis<T: Clone + std::fmt::Display>(
            out: Vec<(String, ExperimentConfig)>,
            name: &str,
            values: &[T],
            set: impl Fn(&mut ExperimentConfig, T),
        ) -> Vec<(String, ExperimentConfig)> {
            if values.is_empty() {
                return out;
            }
            out.into_iter()
                .flat_map(|(label, cfg)| {
                    let set = &set;
                    values.iter().map(move |v| {
                        let mut c = cfg.clone();
                        set(&mut c, v.clone());
                        let sep = if label.is_empty() { "" } else { "_" };
                        (format!("{label}{sep}{name}{v}"), c)
                    }).collect::<Vec<_>>()
                })
                .collect()
        }
        out = axis(out, "N", &self.num_arms, |c, v| c.instance.num_arms = v);
        out = axis(out, "K", &self.num_groups, |c, v| c.instance.num_groups = v);
        out = axis(out, "d", &self.d, |c, v| c.instance.d = v);
        out = axis(out, "sigma", &self.sigma, |c, v| c.instance.sigma = v);
        out
    }
}

/// Grid of bound parameters; the report covers the Cartesian product.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundGrid {
    #[serde(rename = "N")]
    pub num_arms: Vec<usize>,
    #[serde(rename = "K")]
    pub num_groups: Vec<usize>,
    pub d: Vec<usize>,
    pub delta: Vec<f64>,
    #[serde(rename = "Delta")]
    pub gap: Vec<f64>,
    /// Omitted: `1/K` for each `K`.
    #[serde(default)]
    pub theta: Vec<f64>,
    pub sigma: Vec<f64>,
    #[serde(default)]
    pub shape: Option<ShapeConstants>,
}

impl BoundGrid {
    pub fn tuples(&self) -> Vec<BoundParams> {
        let mut out = Vec::new();
        for &n in &self.num_arms {
            for &k in &self.num_groups {
                let thetas = if self.theta.is_empty() {
                    vec![1.0 / k as f64]
                } else {
                    self.theta.clone()
                };
                for &d in &self.d {
                    for &delta in &self.delta {
                        for &gap in &self.gap {
                            for &theta in &thetas {
                                for &sigma in &self.sigma {
                                    out.push(BoundParams {
                                        num_arms: n,
                                        num_groups: k,
                                        dim: d,
                                        delta,
                                        gap,
                                        theta,
                                        sigma,
                                    });
                                }
                            }
                        }
                    }
                }
            }
        }
        out
    }
}

pub const BOUNDS_HEADER: [&str; 15] = [
    "N", "K", "d", "delta", "Delta", "theta", "sigma", "lb1", "lb2", "A", "B", "L_star",
    "thm1_rhs", "acb_bound", "acb_star_bound",
];

/// One CSV row per valid tuple; invalid tuples are skipped and described in
/// the returned warnings.
pub fn emit_bounds(tuples: &[BoundParams], shape: &ShapeConstants) -> Result<(String, Vec<String>)> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(BOUNDS_HEADER)?;
    let mut warnings = Vec::new();
    for t in tuples {
        match bound_report(t, shape) {
            Ok(r) => w.write_record([
                t.num_arms.to_string(),
                t.num_groups.to_string(),
                t.dim.to_string(),
                t.delta.to_string(),
                t.gap.to_string(),
                t.theta.to_string(),
                t.sigma.to_string(),
                r.lb_term1.to_string(),
                opt(r.lb_term2),
                r.a.to_string(),
                r.b.to_string(),
                r.l_star.to_string(),
                r.thm1_rhs.to_string(),
                r.acb_bound.to_string(),
                r.acb_star_bound.to_string(),
            ])?,
            Err(e) => warnings.push(format!("skipped {t:?}: {e}")),
        }
    }
    let bytes = w.into_inner().map_err(|e| Error::InvalidInput(e.to_string()))?;
    Ok((String::from_utf8(bytes).expect("csv output is utf-8"), warnings))
}

/// One plotted series: points `(x, y, error bar half-height)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64, f64)>,
}

/// Static SVG line chart with optional error bars.
pub fn line_chart_svg(title: &str, x_label: &str, y_label: &str, series: &[Series]) -> String {
    const W: f64 = 640.0;
    const H: f64 = 420.0;
    const M: f64 = 60.0;
    const COLORS: [&str; 6] = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b"];
    let pts = series.iter().flat_map(|s| s.points.iter());
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, 0.0f64, f64::NEG_INFINITY);
    for &(x, y, e) in pts {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y - e);
        y1 = y1.max(y + e);
    }
    if !x0.is_finite() {
        (x0, x1, y1) = (0.0, 1.0, 1.0);
    }
    if x1 <= x0 {
        x1 = x0 + 1.0;
    }
    if y1 <= y0 {
        y1 = y0 + 1.0;
    }
    let sx = |x: f64| M + (x - x0) / (x1 - x0) * (W - 2.0 * M);
    let sy = |y: f64| H - M - (y - y0) / (y1 - y0) * (H - 2.0 * M);
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" font-family="sans-serif" font-size="12">"#);
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{title}</text>"#, W / 2.0);
    let _ = writeln!(s, r#"<line x1="{M}" y1="{}" x2="{}" y2="{}" stroke="black"/>"#, H - M, W - M, H - M);
    let _ = writeln!(s, r#"<line x1="{M}" y1="{M}" x2="{M}" y2="{}" stroke="black"/>"#, H - M);
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{x_label}</text>"#, W / 2.0, H - 15.0);
    let _ = writeln!(s, r#"<text x="15" y="{}" transform="rotate(-90 15 {})" text-anchor="middle">{y_label}</text>"#, H / 2.0, H / 2.0);
    for i in 0..=4 {
        let y = y0 + (y1 - y0) * i as f64 / 4.0;
        let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">{y:.0}</text>"#, M - 5.0, sy(y) + 4.0);
        let x = x0 + (x1 - x0) * i as f64 / 4.0;
        let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{x:.3}</text>"#, sx(x), H - M + 16.0);
    }
    for (i, ser) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let path: Vec<String> = ser.points.iter().map(|&(x, y, _)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
        let _ = writeln!(s, r#"<polyline fill="none" stroke="{color}" stroke-width="2" points="{}"/>"#, path.join(" "));
        for &(x, y, e) in &ser.points {
            let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{color}"/>"#, sx(x), sy(y));
            if e > 0.0 {
                let _ = writeln!(s, r#"<line x1="{0:.2}" y1="{1:.2}" x2="{0:.2}" y2="{2:.2}" stroke="{color}"/>"#, sx(x), sy(y - e), sy(y + e));
            }
        }
        let _ = writeln!(s, r#"<text x="{}" y="{}" fill="{color}">{}</text>"#, W - M - 120.0, M + 16.0 * i as f64, ser.name);
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wilson_edges() {
        let z = z95();
        assert_eq!(wilson_interval(0, 10, z).0, 0.0);
        assert_eq!(wilson_interval(10, 10, z).1, 1.0);
        let (lo, hi) = wilson_interval(5, 10, z);
        assert!(lo < 0.5 && hi > 0.5 && (lo + hi - 1.0).abs() < 1e-12);
    }

    #[test]
    fn config_parses_with_defaults() {
        let cfg = ExperimentConfig::from_json(
            r#"{"instance":{"N":20,"K":4,"d":5,"sigma":1.0},
                "algorithm":{"name":"acb","delta":0.2},
                "replicates":3}"#,
        )
        .unwrap();
        assert_eq!(cfg.instance.layout, Layout::EquidistantCanonical);
        assert_eq!(cfg.algorithm.name(), "acb");
        assert!(ExperimentConfig::from_json(
            r#"{"instance":{"N":20,"K":4,"d":5,"sigma":1.0},"algorithm":{"name":"acb","delta":0.2},"replicates":0}"#
        )
        .is_err());
    }

    #[test]
    fn template_layouts() {
        let t = InstanceTemplate {
            num_arms: 7,
            num_groups: 2,
            d: 3,
            sigma: 1.0,
            layout: Layout::RandomSphere { radius: 2.0, seed: 1 },
            balance: Balance::Sizes { sizes: vec![5, 2] },
            noise: None,
        };
        let spec = t.build().unwrap();
        assert_eq!(spec.labels, vec![0, 0, 0, 0, 0, 1, 1]);
        for c in &spec.centers {
            assert!((c.iter().map(|x| x * x).sum::<f64>().sqrt() - 2.0).abs() < 1e-12);
        }
        let bad = InstanceTemplate { balance: Balance::Sizes { sizes: vec![5, 1] }, ..t };
        assert!(bad.build().is_err());
    }

    #[test]
    fn grid_expansion() {
        let base = ExperimentConfig::from_json(
            r#"{"instance":{"N":20,"K":4,"d":50,"sigma":1.0},"algorithm":{"name":"uniform","T":3}}"#,
        )
        .unwrap();
        let grid = SweepGrid { num_groups: vec![2, 3], sigma: vec![0.5, 1.0], ..Default::default() };
        let cfgs = grid.expand(&base);
        assert_eq!(cfgs.len(), 4);
        assert_eq!(cfgs[3].0, "K3_sigma1");
        assert_eq!(cfgs[3].1.instance.num_groups, 3);
    }

    #[test]
    fn empty_bounds_grid_is_header_only() {
        let (csv, warnings) = emit_bounds(&[], &ShapeConstants::default()).unwrap();
        assert_eq!(csv.trim_end(), BOUNDS_HEADER.join(","));
        assert!(warnings.is_empty());
    }

    #[test]
    fn svg_renders() {
        let svg = line_chart_svg("t", "K", "budget", &[Series { name: "acb".into(), points: vec![(1.0, 2.0, 0.5), (2.0, 3.0, 0.0)] }]);
        assert!(svg.starts_with("<svg") && svg.contains("polyline"));
    }
}
