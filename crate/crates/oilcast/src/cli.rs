//! Command-line verbs and output layout.

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::{ExperimentConfig, Format};
use crate::error::{Error, Result};
use crate::experiments::Runner;
use crate::io::{write_csv, write_file, write_panel_csv, LoadReport};
use crate::pipeline::{load_panel, load_series};
use crate::study::{self, StudyOutput};

#[derive(Debug, Parser)]
#[command(name = "oilcast", version, about = "Direction-of-change forecasting for crude oil prices")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Load, align and split the configured series; write the panel.
    Ingest(Common),
    /// Hit rate and RMSE for every configured lag.
    Sweep(Common),
    /// Train the configured benchmark and persist the best network.
    Benchmark(Common),
    /// Lag sweeps with a futures contract as the only input.
    FuturesSolo(Common),
    /// Benchmark with futures lags appended.
    FuturesAdd(Common),
    /// Direct forecasts for each configured horizon.
    Multistep(Common),
    /// Run every study and write one combined report.
    Report(Common),
    /// Write each configured series as CSV.
    Synth(Common),
}

impl Command {
    fn parts(&self) -> (&'static str, &Common) {
        match self {
            Command::Ingest(c) => ("ingest", c),
            Command::Sweep(c) => ("sweep", c),
            Command::Benchmark(c) => ("benchmark", c),
            Command::FuturesSolo(c) => ("futures-solo", c),
            Command::FuturesAdd(c) => ("futures-add", c),
            Command::Multistep(c) => ("multistep", c),
            Command::Report(c) => ("report", c),
            Command::Synth(c) => ("synth", c),
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Experiment config (TOML).
    #[arg(long, short)]
    pub config: PathBuf,
    /// Base seed; trials use seed, seed + 1, ...
    #[arg(long)]
    pub seed: Option<u64>,
    /// Override a config value, e.g. `--set trainer.max_iterations=200`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    /// Output directory (default: `output.dir` from the config, else `oilcast-out`).
    #[arg(long, short, env = "OILCAST_OUTPUT_DIR")]
    pub output_dir: Option<PathBuf>,
    /// Worker threads for training; 0 uses every core.
    #[arg(long, short, default_value_t = 0)]
    pub jobs: usize,
    /// Report formats; replaces `output.formats`.
    #[arg(long, value_enum, value_delimiter = ',')]
    pub format: Vec<FormatArg>,
    /// Restrict futures studies to one contract.
    #[arg(long)]
    pub contract: Option<String>,
}

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
pub enum FormatArg {
    Json,
    Csv,
    Markdown,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Json => Format::Json,
            FormatArg::Csv => Format::Csv,
            FormatArg::Markdown => Format::Markdown,
        }
    }
}

/// Resolves the config with every command-line override applied.
pub fn resolve_config(common: &Common) -> Result<ExperimentConfig> {
    let mut overrides = common.overrides.clone();
    if let Some(seed) = common.seed {
        overrides.push(format!("trainer.seed={seed}"));
    }
    if let Some(c) = &common.contract {
        overrides.push(format!("experiment.contracts=[\"{c}\"]"));
        overrides.push(format!("experiment.augment=[\"{c}\"]"));
    }
    let mut cfg = ExperimentConfig::load(&common.config, &overrides)?;
    if !common.format.is_empty() {
        cfg.output.formats = common.format.iter().map(|&f| f.into()).collect();
    }
    Ok(cfg)
}

#[derive(Debug, Serialize)]
struct FileEntry {
    path: String,
    sha256: String,
}

#[derive(Debug, Serialize)]
struct Manifest {
    verb: String,
    config_hash: String,
    seeds: Vec<u64>,
    files: Vec<FileEntry>,
    timings_ms: Vec<(String, u128)>,
}

/// Collects written files for the manifest.
struct Output {
    dir: PathBuf,
    files: Vec<FileEntry>,
}

impl Output {
    fn write(&mut self, rel: &str, bytes: &[u8]) -> Result<()> {
        write_file(&self.dir.join(rel), bytes)?;
        self.record(rel, bytes);
        Ok(())
    }

    fn record(&mut self, rel: &str, bytes: &[u8]) {
        self.files.push(FileEntry { path: rel.to_string(), sha256: hex::encode(Sha256::digest(bytes)) });
    }
}

fn json<T: Serialize>(value: &T, context: &str) -> Result<String> {
    serde_json::to_string_pretty(value).map_err(|source| Error::Json { context: context.into(), source })
}

fn write_study(out: &mut Output, cfg: &ExperimentConfig, study: &StudyOutput) -> Result<()> {
    for format in &cfg.output.formats {
        match format {
            Format::Json => out.write("report.json", study.report.to_json().as_bytes())?,
            Format::Csv => {
                for (i, t) in study.report.tables.iter().enumerate() {
                    out.write(&format!("tables/{}.csv", t.name), study.report.table_csv(i).as_bytes())?;
                }
            }
            Format::Markdown => out.write("report.md", study.report.to_markdown().as_bytes())?,
        }
    }
    for (name, net) in &study.networks {
        out.write(&format!("networks/{name}.json"), net.to_json().as_bytes())?;
    }
    if cfg.output.plot_data {
        for (name, csv) in &study.plots {
            out.write(&format!("plots/{name}"), csv.as_bytes())?;
        }
    }
    Ok(())
}

#[derive(Debug, Serialize)]
struct IngestSummary<'a> {
    rows: usize,
    train_rows: Option<usize>,
    first_date: Option<String>,
    date_split: Option<String>,
    last_date: Option<String>,
    series: Vec<&'a str>,
    loads: &'a [(String, LoadReport)],
}

fn ingest(out: &mut Output, cfg: &ExperimentConfig) -> Result<()> {
    let (_, loads) = load_series(cfg)?;
    let panel = load_panel(cfg)?;
    let path = out.dir.join("panel.csv");
    write_panel_csv(&panel, &path)?;
    let bytes = std::fs::read(&path).map_err(|e| Error::io(&path, e))?;
    out.record("panel.csv", &bytes);
    let dates = panel.dates();
    let summary = IngestSummary {
        rows: dates.len(),
        train_rows: panel.split_index(),
        first_date: dates.first().map(ToString::to_string),
        date_split: panel.split_index().and_then(|i| dates.get(i)).map(ToString::to_string),
        last_date: dates.last().map(ToString::to_string),
        series: panel.columns().map(|(id, _)| id.as_str()).collect(),
        loads: &loads,
    };
    out.write("ingest.json", json(&summary, "ingest summary")?.as_bytes())
}

fn synth(out: &mut Output, cfg: &ExperimentConfig) -> Result<()> {
    let (series, _) = load_series(cfg)?;
    for s in &series {
        let rel = format!("{}.csv", s.id().as_str());
        let path = out.dir.join(&rel);
        write_csv(s, &path, &Default::default())?;
        let bytes = std::fs::read(&path).map_err(|e| Error::io(&path, e))?;
        out.record(&rel, &bytes);
    }
    Ok(())
}

/// Runs one verb; returns the output directory.
pub fn run(cli: &Cli) -> Result<PathBuf> {
    let (verb, common) = cli.command.parts();
    let started = Instant::now();
    let cfg = resolve_config(common)?;
    let dir = common
        .output_dir
        .clone()
        .or_else(|| cfg.output.dir.clone())
        .unwrap_or_else(|| PathBuf::from("oilcast-out"));
    let mut out = Output { dir, files: Vec::new() };
    let mut timings = Vec::new();
    out.write("config.json", json(&cfg, "config")?.as_bytes())?;

    match &cli.command {
        Command::Ingest(_) => ingest(&mut out, &cfg)?,
        Command::Synth(_) => synth(&mut out, &cfg)?,
        _ => {
            let t = Instant::now();
            let panel = load_panel(&cfg)?;
            timings.push(("load".to_string(), t.elapsed().as_millis()));
            let runner = Runner::new(cfg.clone(), panel, common.jobs)?;
            let t = Instant::now();
            let study = match &cli.command {
                Command::Sweep(_) => study::run_sweep(&runner)?,
                Command::Benchmark(_) => study::run_benchmark(&runner)?,
                Command::FuturesSolo(_) => study::run_futures_solo(&runner, &cfg.contracts())?,
                Command::FuturesAdd(_) => study::run_futures_add(&runner)?,
                Command::Multistep(_) => study::run_multistep(&runner)?,
                Command::Report(_) => study::run_full(&runner)?,
                Command::Ingest(_) | Command::Synth(_) => unreachable!(),
            };
            timings.push(("train".to_string(), t.elapsed().as_millis()));
            write_study(&mut out, &cfg, &study)?;
        }
    }

    timings.push(("total".to_string(), started.elapsed().as_millis()));
    let manifest = Manifest {
        verb: verb.to_string(),
        config_hash: cfg.hash(),
        seeds: cfg.seeds(),
        files: std::mem::take(&mut out.files),
        timings_ms: timings,
    };
    let text = json(&manifest, "manifest")?;
    write_file(&out.dir.join("manifest.json"), text.as_bytes())?;
    Ok(out.dir)
}

/// Prints a one-line summary of where results went.
pub fn describe(dir: &Path) -> String {
    format!("results written to {}", dir.display())
}
