use std::fs;
use std::path::Path;
use std::process::Command;

fn acb(dir: &Path, args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_acb"))
        .args(args)
        .current_dir(dir)
        .env("ACB_QUANTILE_CACHE", dir.join("cache.json"))
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn run_writes_csv_and_summary_and_is_reproducible() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "acb.json",
        r#"{"instance":{"N":30,"K":3,"d":10,"sigma":1.0},"algorithm":{"name":"acb","delta":0.2},"replicates":4}"#,
    );
    for (out, jobs) in [("a", "1"), ("b", "0")] {
        let o = acb(tmp.path(), &["run", "--config", &cfg, "--seed", "7", "--jobs", jobs, "--out", out]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let a = fs::read(tmp.path().join("a/runs.csv")).unwrap();
    assert_eq!(a, fs::read(tmp.path().join("b/runs.csv")).unwrap());
    let text = String::from_utf8(a).unwrap();
    assert!(text.starts_with("replicate_id,seed,algorithm,success,budget,budget_sri,budget_gap_est,budget_adc,l,p,wall_ms\n"));
    assert!(text.lines().nth(1).unwrap().starts_with("0,7,acb,"));
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("a/summary.json")).unwrap()).unwrap();
    assert_eq!(summary["aggregate"]["replicates"], 4);
}

#[test]
fn gaussian_run_fills_the_quantile_cache() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "gv.json",
        r#"{"instance":{"N":20,"K":2,"d":30,"sigma":1.0},"algorithm":{"name":"gv_acb","delta":0.1,"mc_samples":10000},"replicates":2}"#,
    );
    let o = acb(tmp.path(), &["run", "--config", &cfg, "--out", "gv"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let cache: serde_json::Value = serde_json::from_str(&fs::read_to_string(tmp.path().join("cache.json")).unwrap()).unwrap();
    assert_eq!(cache.as_object().unwrap().len(), 1);
}

#[test]
fn sweep_emits_grid_table_and_svg() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "sweep.json",
        r#"{"base":{"instance":{"N":24,"K":2,"d":8,"sigma":1.0},"algorithm":{"name":"acb","delta":0.2},"replicates":2},
            "grid":{"K":[2,3]}}"#,
    );
    let o = acb(tmp.path(), &["sweep", "--config", &cfg, "--out", "s"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let grid = fs::read_to_string(tmp.path().join("s/grid.csv")).unwrap();
    assert_eq!(grid.lines().count(), 3);
    assert!(tmp.path().join("s/K3/runs.csv").exists());
    assert!(fs::read_to_string(tmp.path().join("s/budget.svg")).unwrap().starts_with("<svg"));
}

#[test]
fn bounds_skips_invalid_tuples() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "bounds.json",
        r#"{"N":[200],"K":[10,15,20,25],"d":[1000],"delta":[0.1],"Delta":[1.0,0.0],"sigma":[1.0]}"#,
    );
    let o = acb(tmp.path(), &["bounds", "--config", &cfg, "--out", "b"]);
    assert!(o.status.success());
    let csv = fs::read_to_string(tmp.path().join("b/bounds.csv")).unwrap();
    assert!(csv.starts_with("N,K,d,delta,Delta,theta,sigma,lb1,lb2,A,B,L_star"));
    assert_eq!(csv.lines().count(), 5);
    assert!(String::from_utf8_lossy(&o.stderr).contains("skipped"));
}

#[test]
fn min_uniform_and_calibration() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "mu.json",
        r#"{"instance":{"N":20,"K":2,"d":4,"sigma":0.3},"algorithm":{"name":"min_uniform_budget","target_error":0.1,"runs":20}}"#,
    );
    let o = acb(tmp.path(), &["min-uniform", "--config", &cfg, "--out", "m"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("m/min_uniform.json")).unwrap()).unwrap();
    assert_eq!(report["budget"].as_u64().unwrap(), 20 * report["T"].as_u64().unwrap());

    let cal = write(tmp.path(), "cal.json", r#"{"points":[{"d":1,"p":0.975},{"d":50,"N":100,"K":5,"delta":0.1}],"samples":20000}"#);
    let o = acb(tmp.path(), &["calibrate-quantiles", "--config", &cal]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let q = rows[0]["quantile"].as_f64().unwrap();
    assert!((q - 2.18).abs() < 0.1, "{q}");
}

#[test]
fn missing_config_reports_path() {
    let tmp = tempfile::tempdir().unwrap();
    let o = acb(tmp.path(), &["run", "--config", "nope.json"]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("nope.json"));
}
