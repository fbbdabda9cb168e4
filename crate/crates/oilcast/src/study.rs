//! Turns experiment results into report tables, network files and plot data
//! for each command.

use oilcast_core::metrics::MetricSummary;
use oilcast_core::trainer::MultiTrialReport;

use crate::config::{Pipeline, Preset, TransformKind};
use crate::error::Result;
use crate::experiments::{AugmentedResult, BenchmarkResult, MultistepResult, Runner, SweepTable};
use crate::netio::NetworkFile;
use crate::reference::{self, SummaryRef, SweepRef};
use crate::report::{Cell, Report, Table};

/// Everything a command writes besides the manifest.
#[derive(Debug, Clone)]
pub struct StudyOutput {
    pub report: Report,
    /// `(file stem, network)` of persisted best networks.
    pub networks: Vec<(String, NetworkFile)>,
    /// `(file name, CSV text)` for external plotting.
    pub plots: Vec<(String, String)>,
}

impl StudyOutput {
    fn new(runner: &Runner, title: &str) -> Self {
        let cfg = runner.config();
        let title = if cfg.name.is_empty() { title.to_string() } else { format!("{} ({title})", cfg.name) };
        Self {
            report: Report { title, config_hash: cfg.hash(), seeds: cfg.seeds(), tables: Vec::new() },
            networks: Vec::new(),
            plots: Vec::new(),
        }
    }
}

fn pct(x: f64) -> f64 {
    100.0 * x
}

fn is_plain_momentum(p: &Pipeline) -> bool {
    p.n == 1 && p.inputs == [TransformKind::Momentum] && p.target_kind == TransformKind::Momentum
}

/// Published sweep for the same pipeline and input series, if there is one.
fn sweep_reference(p: &Pipeline, feature_series: &str) -> Option<&'static [SweepRef]> {
    if !is_plain_momentum(p) {
        return None;
    }
    match (p.ma_window, feature_series == p.target) {
        (1, true) => Some(reference::UNSMOOTHED_SWEEP),
        (3, true) => Some(reference::SMOOTHED_SWEEP),
        (3, false) => reference::futures_sweep(feature_series),
        _ => None,
    }
}

const SWEEP_COLUMNS: &[&str] = &[
    "lag", "in_hit", "out_hit", "in_hit_std", "out_hit_std", "in_rmse", "out_rmse", "out_ic", "stable", "best", "error",
];
const SWEEP_REF_COLUMNS: &[&str] = &["ref_in_hit", "ref_out_hit", "ref_in_rmse", "ref_out_rmse"];

pub fn sweep_table(name: &str, title: &str, sweep: &SweepTable, refs: Option<&[SweepRef]>) -> Table {
    let mut columns = SWEEP_COLUMNS.to_vec();
    if refs.is_some() {
        columns.extend(SWEEP_REF_COLUMNS);
    }
    let mut t = Table::new(name, title, &columns);
    let best = sweep.best_stable_lag();
    for row in &sweep.rows {
        let mut cells: Vec<Cell> = vec![row.lag.into()];
        match &row.outcome {
            Ok(rep) => {
                let out = rep.out_of_sample.as_ref();
                cells.extend([
                    pct(rep.in_sample.hit_rate.mean).into(),
                    out.map(|o| pct(o.hit_rate.mean)).into(),
                    pct(rep.in_sample.hit_rate.std).into(),
                    out.map(|o| pct(o.hit_rate.std)).into(),
                    rep.in_sample.rmse.mean.into(),
                    out.map(|o| o.rmse.mean).into(),
                    out.and_then(|o| o.ic).map(|s| s.mean).into(),
                    rep.stable.into(),
                    (best == Some(row.lag)).into(),
                    Cell::Missing,
                ]);
            }
            Err(e) => {
                cells.extend(std::iter::repeat_n(Cell::Missing, 7));
                cells.extend([false.into(), false.into(), e.clone().into()]);
            }
        }
        if let Some(refs) = refs {
            match reference::sweep_row(refs, row.lag) {
                Some(r) => cells.extend([r.in_hit.into(), r.out_hit.into(), r.in_rmse.into(), r.out_rmse.into()]),
                None => cells.extend(std::iter::repeat_n(Cell::Missing, 4)),
            }
        }
        t.push(cells);
    }
    t.notes.push(match best {
        Some(lag) => format!("best stable lag: {lag}"),
        None => "no stable lag".into(),
    });
    if refs.is_some() {
        t.notes.push("ref_* columns: published results on the original WTI data, for context only".into());
    }
    t
}

fn hit_by_lag_csv(sweep: &SweepTable) -> String {
    let mut out = String::from("lag,in_hit,out_hit,in_hit_std,out_hit_std,stable\n");
    for row in &sweep.rows {
        if let Ok(rep) = &row.outcome {
            let out_s = rep.out_of_sample.as_ref();
            let f = |v: Option<f64>| v.map_or(String::new(), |x| format!("{x:?}"));
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                row.lag,
                f(Some(pct(rep.in_sample.hit_rate.mean))),
                f(out_s.map(|o| pct(o.hit_rate.mean))),
                f(Some(pct(rep.in_sample.hit_rate.std))),
                f(out_s.map(|o| pct(o.hit_rate.std))),
                rep.stable
            ));
        }
    }
    out
}

fn loss_csv(report: &MultiTrialReport) -> String {
    let mut out = String::from("trial,seed,iteration,sse,stop_reason\n");
    for t in &report.trials {
        for (i, sse) in t.report.loss_curve.iter().enumerate() {
            out.push_str(&format!("{},{},{},{:?},{:?}\n", t.index, t.seed, i, sse, t.report.stop_reason));
        }
    }
    out
}

const SUMMARY_COLUMNS: &[&str] =
    &["model", "sample", "n", "hit", "hit_std", "rmse", "mse", "mae", "r", "ic", "stable", "best_seed"];

fn summary_rows(t: &mut Table, model: &str, result: &BenchmarkResult, extra: impl Fn(usize) -> Vec<Cell>) {
    let rep = &result.report;
    let samples: [(&str, Option<&MetricSummary>); 2] =
        [("in-sample", Some(&rep.in_sample)), ("out-of-sample", rep.out_of_sample.as_ref())];
    for (k, (label, s)) in samples.into_iter().enumerate() {
        let Some(s) = s else { continue };
        let mut cells: Vec<Cell> = vec![
            model.into(),
            label.into(),
            s.n.into(),
            pct(s.hit_rate.mean).into(),
            pct(s.hit_rate.std).into(),
            s.rmse.mean.into(),
            s.mse.mean.into(),
            s.mae.mean.into(),
            s.r.map(|r| r.mean).into(),
            s.ic.map(|r| r.mean).into(),
            rep.stable.into(),
            (result.best().seed as usize).into(),
        ];
        cells.extend(extra(k));
        t.push(cells);
    }
}

fn summary_ref_cells(r: Option<SummaryRef>, k: usize) -> Vec<Cell> {
    match r {
        Some(r) => vec![r.hit[k].into(), r.rmse[k].into(), r.mse[k].into(), r.mae[k].into()],
        None => vec![Cell::Missing; 4],
    }
}

fn benchmark_reference(p: &Pipeline) -> Option<SummaryRef> {
    if p.n != 1 {
        return None;
    }
    let candidate = p.ma_window == 1
        && p.inputs == [TransformKind::Momentum, TransformKind::Force]
        && p.target_kind == TransformKind::Force
        && p.lags == 7;
    if candidate {
        return Some(reference::CANDIDATE_BENCHMARK);
    }
    if is_plain_momentum(p) && p.ma_window == 3 {
        let row = reference::sweep_row(reference::SMOOTHED_SWEEP, p.lags)?;
        return Some(SummaryRef {
            hit: [row.in_hit, row.out_hit],
            rmse: [row.in_rmse, row.out_rmse],
            mse: [f64::NAN; 2],
            mae: [f64::NAN; 2],
        });
    }
    None
}

fn nan_to_missing(cells: Vec<Cell>) -> Vec<Cell> {
    cells.into_iter().map(|c| if matches!(c, Cell::Num(f) if f.is_nan()) { Cell::Missing } else { c }).collect()
}

pub fn summary_table(name: &str, title: &str, model: &str, result: &BenchmarkResult, refs: Option<SummaryRef>) -> Table {
    let mut columns = SUMMARY_COLUMNS.to_vec();
    if refs.is_some() {
        columns.extend(["ref_hit", "ref_rmse", "ref_mse", "ref_mae"]);
    }
    let mut t = Table::new(name, title, &columns);
    summary_rows(&mut t, model, result, |k| {
        if refs.is_some() {
            nan_to_missing(summary_ref_cells(refs, k))
        } else {
            Vec::new()
        }
    });
    t
}

fn network_file(result: &BenchmarkResult) -> NetworkFile {
    NetworkFile::new(result.best_network(), result.best().seed, result.target_scale, result.inputs.clone())
}

fn push_benchmark(out: &mut StudyOutput, name: &str, title: &str, model: &str, p: &Pipeline, result: &BenchmarkResult) {
    out.report.tables.push(summary_table(name, title, model, result, benchmark_reference(p)));
    out.networks.push((format!("{name}_best"), network_file(result)));
    out.plots.push((format!("{name}_loss.csv"), loss_csv(&result.report)));
}

fn push_sweep(out: &mut StudyOutput, name: &str, title: &str, sweep: &SweepTable, refs: Option<&[SweepRef]>) {
    out.report.tables.push(sweep_table(name, title, sweep, refs));
    out.plots.push((format!("{name}_hit_by_lag.csv"), hit_by_lag_csv(sweep)));
    let best = sweep.best_stable_lag();
    if let Some(row) = sweep.rows.iter().find(|r| Some(r.lag) == best) {
        if let Ok(rep) = &row.outcome {
            out.plots.push((format!("{name}_best_lag_loss.csv"), loss_csv(rep)));
        }
    }
}

pub fn augmented_table(name: &str, benchmark: &BenchmarkResult, aug: &AugmentedResult, refs: Option<SummaryRef>) -> Table {
    let mut columns = SUMMARY_COLUMNS.to_vec();
    columns.extend(["delta_hit", "delta_rmse"]);
    if refs.is_some() {
        columns.extend(["ref_hit", "ref_rmse", "ref_mse", "ref_mae"]);
    }
    let title = format!("Benchmark with {} added", aug.contracts.join(", "));
    let mut t = Table::new(name, &title, &columns);
    let pad = |n: usize| vec![Cell::Missing; n];
    let ref_width = if refs.is_some() { 4 } else { 0 };
    summary_rows(&mut t, "benchmark", benchmark, |_| pad(2 + ref_width));
    let label = if aug.contracts.is_empty() { "benchmark".to_string() } else { format!("benchmark+{}", aug.contracts.join("+")) };
    summary_rows(&mut t, &label, &aug.result, |k| {
        let d = &aug.delta;
        let mut cells: Vec<Cell> = if k == 0 {
            vec![pct(d.in_hit_rate).into(), d.in_rmse.into()]
        } else {
            vec![d.out_hit_rate.map(pct).into(), d.out_rmse.into()]
        };
        if refs.is_some() {
            cells.extend(nan_to_missing(summary_ref_cells(refs, k)));
        }
        cells
    });
    t.notes.push("delta_* = augmented minus benchmark (hit rate in percentage points)".into());
    t
}

fn horizon_columns(prefix: &str, horizons: &[usize]) -> Vec<String> {
    horizons.iter().map(|h| format!("{prefix}t+{h}")).collect()
}

fn multistep_ref(horizons: &[usize], refs: Option<[[f64; 3]; 2]>, k: usize) -> Vec<Cell> {
    horizons
        .iter()
        .map(|&h| match refs {
            Some(r) if (1..=3).contains(&h) => r[k][h - 1].into(),
            _ => Cell::Missing,
        })
        .collect()
}

fn hit_cells(ms: &MultistepResult, out_of_sample: bool) -> Vec<Cell> {
    ms.rows
        .iter()
        .map(|row| {
            let s = if out_of_sample { row.report.out_of_sample.as_ref() } else { Some(&row.report.in_sample) };
            s.map(|s| pct(s.hit_rate.mean)).into()
        })
        .collect()
}

fn with_refs(p: &Pipeline) -> bool {
    is_plain_momentum(p) && p.ma_window == 3 && p.lags == 13
}

pub fn multistep_table(name: &str, ms: &MultistepResult, horizons: &[usize], with_ref: bool) -> Table {
    let mut columns = vec!["sample".to_string()];
    columns.extend(horizon_columns("", horizons));
    columns.extend(horizon_columns("std_", horizons));
    if with_ref {
        columns.extend(horizon_columns("ref_", horizons));
    }
    let cols: Vec<&str> = columns.iter().map(String::as_str).collect();
    let mut t = Table::new(name, "Hit rate (%) by forecast horizon", &cols);
    for (k, label) in ["in-sample", "out-of-sample"].into_iter().enumerate() {
        let mut cells: Vec<Cell> = vec![label.into()];
        cells.extend(hit_cells(ms, k == 1));
        cells.extend(ms.rows.iter().map(|row| {
            let s = if k == 1 { row.report.out_of_sample.as_ref() } else { Some(&row.report.in_sample) };
            Cell::from(s.map(|s| pct(s.hit_rate.std)))
        }));
        if with_ref {
            cells.extend(multistep_ref(horizons, Some(reference::MULTISTEP), k));
        }
        t.push(cells);
    }
    t
}

pub fn multistep_futures_table(name: &str, results: &[MultistepResult], horizons: &[usize], out_of_sample: bool, with_ref: bool) -> Table {
    let mut columns = vec!["contract".to_string()];
    columns.extend(horizon_columns("", horizons));
    if with_ref {
        columns.extend(horizon_columns("ref_", horizons));
    }
    let cols: Vec<&str> = columns.iter().map(String::as_str).collect();
    let which = if out_of_sample { "out-of-sample" } else { "in-sample" };
    let title = format!("Hit rate (%) by horizon, {which}, with futures lags added");
    let mut t = Table::new(name, &title, &cols);
    for ms in results {
        let contract = ms.contract.clone().unwrap_or_default();
        let mut cells: Vec<Cell> = vec![contract.as_str().into()];
        cells.extend(hit_cells(ms, out_of_sample));
        if with_ref {
            cells.extend(multistep_ref(horizons, reference::multistep_futures(&contract), usize::from(out_of_sample)));
        }
        t.push(cells);
    }
    t
}

pub fn run_sweep(runner: &Runner) -> Result<StudyOutput> {
    let mut out = StudyOutput::new(runner, "lag sweep");
    let p = runner.pipeline();
    let lags = &runner.config().experiment.lags;
    let sweep = runner.lag_sweep(&p, &p.target, lags);
    push_sweep(&mut out, "sweep", "Hit rate (%) and RMSE by lag", &sweep, sweep_reference(&p, &p.target));
    Ok(out)
}

pub fn run_benchmark(runner: &Runner) -> Result<StudyOutput> {
    let mut out = StudyOutput::new(runner, "benchmark");
    let p = runner.pipeline();
    let result = runner.benchmark(&p)?;
    push_benchmark(&mut out, "benchmark", "Benchmark performance", "benchmark", &p, &result);
    Ok(out)
}

fn push_futures_sweeps(out: &mut StudyOutput, runner: &Runner, p: &Pipeline, contracts: &[String]) -> Result<()> {
    for c in contracts {
        let sweep = runner.futures_solo(p, c, &runner.config().experiment.lags)?;
        let title = format!("Hit rate (%) and RMSE by lag, {c} as input");
        push_sweep(out, &format!("futures_sweep_{c}"), &title, &sweep, sweep_reference(p, c));
    }
    Ok(())
}

pub fn run_futures_solo(runner: &Runner, contracts: &[String]) -> Result<StudyOutput> {
    let mut out = StudyOutput::new(runner, "futures contracts as inputs");
    push_futures_sweeps(&mut out, runner, &runner.pipeline(), contracts)?;
    Ok(out)
}

fn push_augmented(out: &mut StudyOutput, runner: &Runner, p: &Pipeline, benchmark: &BenchmarkResult) -> Result<()> {
    let contracts = runner.config().augment();
    let aug = runner.futures_augmented(p, benchmark, &contracts)?;
    let refs = (with_refs(p) && contracts == ["fut1"] && runner.config().experiment.augment_lags == 1)
        .then_some(reference::BENCHMARK_PLUS_FUT1);
    out.report.tables.push(augmented_table("benchmark_plus_futures", benchmark, &aug, refs));
    out.networks.push(("benchmark_plus_futures_best".into(), network_file(&aug.result)));
    out.plots.push(("benchmark_plus_futures_loss.csv".into(), loss_csv(&aug.result.report)));
    Ok(())
}

pub fn run_futures_add(runner: &Runner) -> Result<StudyOutput> {
    let mut out = StudyOutput::new(runner, "futures added to the benchmark");
    let p = runner.pipeline();
    let benchmark = runner.benchmark(&p)?;
    push_augmented(&mut out, runner, &p, &benchmark)?;
    Ok(out)
}

fn push_multistep(out: &mut StudyOutput, runner: &Runner, p: &Pipeline, contracts: &[String]) -> Result<()> {
    let horizons = &runner.config().experiment.horizons;
    let spot = runner.multistep(p, horizons, None)?;
    let refs = with_refs(p);
    out.report.tables.push(multistep_table("multistep", &spot, horizons, refs));
    for row in &spot.rows {
        out.plots.push((format!("multistep_h{}_loss.csv", row.horizon), loss_csv(&row.report)));
    }
    if contracts.is_empty() {
        return Ok(());
    }
    let with_futures = contracts
        .iter()
        .map(|c| runner.multistep(p, horizons, Some(c)))
        .collect::<Result<Vec<_>>>()?;
    let refs = refs && runner.config().experiment.augment_lags == 1;
    out.report.tables.push(multistep_futures_table("multistep_futures_in", &with_futures, horizons, false, refs));
    out.report.tables.push(multistep_futures_table("multistep_futures_out", &with_futures, horizons, true, refs));
    Ok(())
}

pub fn run_multistep(runner: &Runner) -> Result<StudyOutput> {
    let mut out = StudyOutput::new(runner, "multi-step forecasts");
    push_multistep(&mut out, runner, &runner.pipeline(), &runner.config().contracts())?;
    Ok(out)
}

/// Every study in sequence: unsmoothed sweep, momentum/force candidate,
/// smoothed sweep, futures sweeps, futures added to the benchmark and
/// multi-step forecasts with and without futures.
pub fn run_full(runner: &Runner) -> Result<StudyOutput> {
    let mut out = StudyOutput::new(runner, "full study");
    let cfg = runner.config();
    let contracts = cfg.contracts();

    let unsmoothed = runner.pipeline_with(Preset::MaMomentum, Some(1));
    let sweep = runner.lag_sweep(&unsmoothed, &unsmoothed.target, &cfg.experiment.unsmoothed_lags);
    let title = "Hit rate (%) and RMSE by lag, relative change without smoothing";
    push_sweep(&mut out, "unsmoothed_sweep", title, &sweep, sweep_reference(&unsmoothed, &unsmoothed.target));

    let mut candidate = runner.pipeline_with(Preset::MomentumForce, None);
    candidate.lags = cfg.experiment.candidate_lags;
    let result = runner.benchmark(&candidate)?;
    let title = "Momentum and force candidate benchmark";
    push_benchmark(&mut out, "candidate_benchmark", title, "momentum+force", &candidate, &result);

    let smoothed = runner.pipeline_with(Preset::MaMomentum, None);
    let sweep = runner.lag_sweep(&smoothed, &smoothed.target, &cfg.experiment.lags);
    let title = "Hit rate (%) and RMSE by lag, moving average then relative change";
    push_sweep(&mut out, "smoothed_sweep", title, &sweep, sweep_reference(&smoothed, &smoothed.target));

    push_futures_sweeps(&mut out, runner, &smoothed, &contracts)?;

    let benchmark = runner.benchmark(&smoothed)?;
    push_benchmark(&mut out, "benchmark", "Smoothed benchmark", "benchmark", &smoothed, &benchmark);
    if !cfg.augment().is_empty() {
        push_augmented(&mut out, runner, &smoothed, &benchmark)?;
    }
    push_multistep(&mut out, runner, &smoothed, &contracts)?;
    Ok(out)
}
