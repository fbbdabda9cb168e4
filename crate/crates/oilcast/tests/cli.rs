use std::path::Path;
use std::process::{Command, Output};

use oilcast::io::{load_csv, ColumnSpec};
use oilcast::report::Report;

const SMALL: &str = r#"
name = "cli"
[[data.series]]
id = "spot"
synthetic = { length = 300, seed = 5, model = { kind = "ar1", c = 0.0, phi = 0.9, sigma = 0.5, level = 50.0, stationary = true } }
[pipeline]
lags = 3
[trainer]
max_iterations = 10
[experiment]
n_trials = 2
lags = [1, 2]
"#;

fn oilcast(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_oilcast"))
        .args(args)
        .current_dir(dir)
        .env_remove("OILCAST_OUTPUT_DIR")
        .output()
        .expect("binary runs")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn missing_csv_exits_1_and_names_the_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = "[[data.series]]\nid = \"spot\"\ncsv = { path = \"nowhere/spot.csv\" }\n";
    std::fs::write(dir.path().join("c.toml"), cfg).unwrap();
    let out = oilcast(&["benchmark", "--config", "c.toml", "-o", "out"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("nowhere/spot.csv"), "{}", stderr(&out));
}

#[test]
fn bad_config_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("c.toml"), format!("{SMALL}\n[network]\nhidden = 0\n")).unwrap();
    let out = oilcast(&["sweep", "--config", "c.toml"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("network.hidden"));

    std::fs::write(dir.path().join("d.toml"), format!("{SMALL}\nunknown_key = 1\n")).unwrap();
    assert_eq!(oilcast(&["sweep", "--config", "d.toml"], dir.path()).status.code(), Some(2));
    let out = oilcast(&["sweep", "--config", "c.toml", "--set", "network.hidden"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn usage_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(oilcast(&["forecast"], dir.path()).status.code(), Some(2));
    assert_eq!(oilcast(&["sweep"], dir.path()).status.code(), Some(2));
    assert_eq!(oilcast(&["--help"], dir.path()).status.code(), Some(0));
}

#[test]
fn synth_then_ingest_round_trips_prices() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("c.toml"), SMALL).unwrap();
    let out = oilcast(&["synth", "--config", "c.toml", "-o", "data"], dir.path());
    assert!(out.status.success(), "{}", stderr(&out));
    let (written, _) = load_csv(&dir.path().join("data/spot.csv"), "spot", &ColumnSpec::default()).unwrap();
    assert_eq!(written.len(), 300);

    let from_csv = "[[data.series]]\nid = \"spot\"\ncsv = { path = \"data/spot.csv\" }\n";
    std::fs::write(dir.path().join("csv.toml"), from_csv).unwrap();
    let out = oilcast(&["ingest", "--config", "csv.toml", "-o", "ingested"], dir.path());
    assert!(out.status.success(), "{}", stderr(&out));
    let panel = std::fs::read_to_string(dir.path().join("ingested/panel.csv")).unwrap();
    assert_eq!(panel.lines().count(), 301);
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("ingested/ingest.json")).unwrap()).unwrap();
    assert_eq!(summary["train_rows"], 270);
    assert_eq!(summary["loads"][0][1]["rows_dropped"], 0);
}

#[test]
fn sweep_writes_reports_manifest_and_plots() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("c.toml"), SMALL).unwrap();
    let out = oilcast(
        &["sweep", "--config", "c.toml", "-o", "out", "--format", "json,csv,markdown", "--seed", "4", "-j", "1"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let root = dir.path().join("out");
    for f in ["report.json", "report.md", "tables/sweep.csv", "plots/sweep_hit_by_lag.csv", "config.json"] {
        assert!(root.join(f).exists(), "{f} missing");
    }
    let report = Report::from_json(&std::fs::read_to_string(root.join("report.json")).unwrap()).unwrap();
    assert_eq!(report.seeds, vec![4, 5]);
    assert_eq!(report.table("sweep").unwrap().rows.len(), 2);
    let csv = std::fs::read_to_string(root.join("tables/sweep.csv")).unwrap();
    assert_eq!(Report::from_csv(&[csv]).unwrap(), report);

    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(root.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["verb"], "sweep");
    assert_eq!(manifest["config_hash"], report.config_hash);
    assert!(manifest["files"].as_array().unwrap().iter().any(|f| f["path"] == "report.json"));
}

#[test]
fn output_dir_comes_from_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("c.toml"), SMALL).unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_oilcast"))
        .args(["benchmark", "--config", "c.toml"])
        .current_dir(dir.path())
        .env("OILCAST_OUTPUT_DIR", "from-env")
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(dir.path().join("from-env/networks/benchmark_best.json").exists());
}

#[test]
fn bundled_benchmark_config_runs() {
    let dir = tempfile::tempdir().unwrap();
    let config = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/synthetic-benchmark.toml");
    let config = config.to_str().unwrap();
    let out = oilcast(
        &["benchmark", "--config", config, "--set", "trainer.max_iterations=5", "-o", "out"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", stderr(&out));
    for f in ["manifest.json", "report.json", "report.md", "tables/benchmark.csv", "networks/benchmark_best.json"] {
        assert!(dir.path().join("out").join(f).exists(), "{f} missing");
    }
}

#[test]
fn bundled_configs_parse() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    for entry in std::fs::read_dir(root).unwrap() {
        let path = entry.unwrap().path();
        oilcast::config::ExperimentConfig::load(&path, &[]).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    }
}
