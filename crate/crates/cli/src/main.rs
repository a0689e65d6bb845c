use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use log::{info, warn};
use serde_json::{json, Value};

use acb_core::gaussian::{classification_level, McParams};
use acb_core::harness::{
    emit_bounds, line_chart_svg, run_min_uniform, run_sweep, write_min_uniform, write_sweep,
    AlgorithmConfig, BoundGrid, ExperimentConfig, Series, SweepGrid,
};
use acb_core::par::Execution;
use acb_core::stats::QuantileCache;

#[derive(Parser)]
#[command(name = "acb", version, about = "Active clustering bandit simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// JSON config file.
    #[arg(long)]
    config: PathBuf,
    /// Overrides the config's base seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; 1 runs serially, 0 uses all cores.
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    /// Output directory; defaults to the config's `output` or `out`.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Run the replicates of one experiment config.
    Run(Common),
    /// Run an experiment over a parameter grid: `{"base": config, "grid": {...}}`.
    Sweep(Common),
    /// Emit bound curves for a parameter grid.
    Bounds(Common),
    /// Search the smallest uniform budget reaching a target error.
    MinUniform(Common),
    /// Precompute inner-product quantiles into the cache.
    CalibrateQuantiles(Common),
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn load_experiment(path: &Path) -> Result<ExperimentConfig> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    ExperimentConfig::from_json(&text).with_context(|| format!("parsing {}", path.display()))
}

fn out_dir(common: &Common, config_out: Option<&str>) -> PathBuf {
    common
        .out
        .clone()
        .or_else(|| config_out.map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"))
}

fn open_cache() -> Result<QuantileCache> {
    let path = QuantileCache::default_path();
    QuantileCache::open(&path).with_context(|| format!("opening quantile cache {}", path.display()))
}

fn write(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn cmd_run(common: &Common) -> Result<()> {
    let mut cfg = load_experiment(&common.config)?;
    if let Some(seed) = common.seed {
        cfg.base_seed = seed;
    }
    let exec = Execution::from_jobs(common.jobs);
    let dir = out_dir(common, cfg.output.as_deref());
    if matches!(cfg.algorithm, AlgorithmConfig::MinUniformBudget { .. }) {
        let report = run_min_uniform(&cfg, exec)?;
        write_min_uniform(&report, &dir)?;
        println!("{}", json!({"T": report.pulls_per_arm, "budget": report.budget}));
        return Ok(());
    }
    let mut cache = open_cache()?;
    let result = run_sweep(&cfg, exec, &mut cache)?;
    cache.save()?;
    write_sweep(&result, &dir)?;
    info!("wrote {}", dir.display());
    println!("{}", serde_json::to_string_pretty(&result.aggregate)?);
    Ok(())
}

#[derive(serde::Deserialize)]
struct SweepFile {
    base: Value,
    grid: SweepGrid,
    #[serde(default = "yes")]
    svg: bool,
}

fn yes() -> bool {
    true
}

fn cmd_sweep(common: &Common) -> Result<()> {
    let file: SweepFile = read_json(&common.config)?;
    let mut base = ExperimentConfig::from_json(&file.base.to_string()).context("parsing base config")?;
    if let Some(seed) = common.seed {
        base.base_seed = seed;
    }
    let exec = Execution::from_jobs(common.jobs);
    let dir = out_dir(common, base.output.as_deref());
    let mut cache = open_cache()?;
    let mut table = String::from("label,N,K,d,sigma,replicates,success_rate,budget_mean,budget_std\n");
    let mut points = Vec::new();
    for (i, (label, cfg)) in file.grid.expand(&base).into_iter().enumerate() {
        let label = if label.is_empty() { "base".to_string() } else { label };
        info!("grid point {label}");
        let result = run_sweep(&cfg, exec, &mut cache)?;
        cache.save()?;
        write_sweep(&result, &dir.join(&label))?;
        let a = &result.aggregate;
        let inst = &cfg.instance;
        table.push_str(&format!(
            "{label},{},{},{},{},{},{},{},{}\n",
            inst.num_arms, inst.num_groups, inst.d, inst.sigma, a.replicates, a.success_rate,
            a.budget_mean, a.budget_std
        ));
        points.push((i as f64, a.budget_mean, 2.0 * a.budget_std));
    }
    write(&dir.join("grid.csv"), &table)?;
    if file.svg {
        let series = [Series { name: base.algorithm.name().into(), points }];
        let svg = line_chart_svg("Mean budget (bars: 2 std)", "grid point", "budget", &series);
        write(&dir.join("budget.svg"), &svg)?;
    }
    print!("{table}");
    Ok(())
}

fn cmd_bounds(common: &Common) -> Result<()> {
    let grid: BoundGrid = read_json(&common.config)?;
    let shape = grid.shape.unwrap_or_default();
    let (csv, warnings) = emit_bounds(&grid.tuples(), &shape)?;
    for w in &warnings {
        warn!("{w}");
    }
    let path = out_dir(common, None).join("bounds.csv");
    write(&path, &csv)?;
    print!("{csv}");
    Ok(())
}

fn cmd_min_uniform(common: &Common) -> Result<()> {
    let mut cfg = load_experiment(&common.config)?;
    if let Some(seed) = common.seed {
        cfg.base_seed = seed;
    }
    let report = run_min_uniform(&cfg, Execution::from_jobs(common.jobs))?;
    write_min_uniform(&report, &out_dir(common, cfg.output.as_deref()))?;
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(())
}

/// Quantile requests: either an explicit level `p`, or the classification
/// level of `(N, K, delta)`.
#[derive(serde::Deserialize)]
struct QuantilePoint {
    d: usize,
    #[serde(default)]
    p: Option<f64>,
    #[serde(default, rename = "N")]
    num_arms: Option<usize>,
    #[serde(default, rename = "K")]
    num_groups: Option<usize>,
    #[serde(default)]
    delta: Option<f64>,
}

#[derive(serde::Deserialize)]
struct CalibrationFile {
    points: Vec<QuantilePoint>,
    #[serde(default)]
    samples: Option<usize>,
}

fn cmd_calibrate(common: &Common) -> Result<()> {
    let file: CalibrationFile = read_json(&common.config)?;
    let mc = McParams {
        samples: file.samples.unwrap_or(McParams::default().samples),
        seed: common.seed.unwrap_or(0),
    };
    let exec = Execution::from_jobs(common.jobs);
    let mut cache = open_cache()?;
    let mut rows = Vec::new();
    for pt in &file.points {
        let p = match (pt.p, pt.num_arms, pt.num_groups, pt.delta) {
            (Some(p), ..) => p,
            (None, Some(n), Some(k), Some(delta)) => classification_level(delta, n, k),
            _ => bail!("each point needs `p` or all of `N`, `K`, `delta`"),
        };
        let q = cache.get_or_compute(pt.d, p, mc.samples, mc.seed, exec)?;
        rows.push(json!({"d": pt.d, "p": p, "samples": mc.samples, "seed": mc.seed, "quantile": q}));
    }
    cache.save()?;
    let out = serde_json::to_string_pretty(&rows)?;
    if let Some(dir) = &common.out {
        write(&dir.join("quantiles.json"), &out)?;
    }
    println!("{out}");
    Ok(())
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match &cli.command {
        Command::Run(c) => cmd_run(c),
        Command::Sweep(c) => cmd_sweep(c),
        Command::Bounds(c) => cmd_bounds(c),
        Command::MinUniform(c) => cmd_min_uniform(c),
        Command::CalibrateQuantiles(c) => cmd_calibrate(c),
    }
}
