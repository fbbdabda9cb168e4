//! The studies: lag sweeps, benchmark selection, futures contracts on their
//! own and added to the benchmark, and direct multi-step forecasts.

use oilcast_core::metrics::MetricSummary;
use oilcast_core::network::{Layout, Network};
use oilcast_core::series::AlignedPanel;
use oilcast_core::supervised::SupervisedSet;
use oilcast_core::trainer::{run_trial, summarize, MultiTrialReport, TrialResult};
use oilcast_core::transform::{ScaleParams, Step};
use rayon::prelude::*;

use crate::config::{ExperimentConfig, Pipeline, Preset};
use crate::error::{Error, Result};
use crate::pipeline::{augment, design, Block};

/// Runs trials for one loaded panel and configuration.
pub struct Runner {
    cfg: ExperimentConfig,
    panel: AlignedPanel,
    pool: rayon::ThreadPool,
}

/// One swept lag count; failures are kept per row.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub lag: usize,
    pub outcome: std::result::Result<MultiTrialReport, String>,
}

#[derive(Debug, Clone)]
pub struct SweepTable {
    /// Series whose lags are the inputs.
    pub feature_series: String,
    pub rows: Vec<SweepRow>,
}

fn out_or_in(report: &MultiTrialReport) -> &MetricSummary {
    report.out_of_sample.as_ref().unwrap_or(&report.in_sample)
}

impl SweepTable {
    /// Stable row with the highest mean out-of-sample hit rate; the smaller
    /// lag wins ties.
    pub fn best_stable_lag(&self) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for row in &self.rows {
            if let Ok(rep) = &row.outcome {
                let hit = out_or_in(rep).hit_rate.mean;
                if rep.stable && best.is_none_or(|(_, b)| hit > b) {
                    best = Some((row.lag, hit));
                }
            }
        }
        best.map(|(lag, _)| lag)
    }
}

/// Averaged result of one fixed design plus the best-performing network.
#[derive(Debug, Clone)]
pub struct BenchmarkResult {
    pub lags: usize,
    /// Description of every input column.
    pub inputs: Vec<String>,
    pub target_scale: Option<ScaleParams>,
    pub report: MultiTrialReport,
}

impl BenchmarkResult {
    pub fn best(&self) -> &TrialResult {
        self.report.best_trial()
    }
}

/// Differences of the augmented model against the benchmark (augmented minus
/// benchmark) of mean hit rate and RMSE.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Delta {
    pub in_hit_rate: f64,
    pub out_hit_rate: Option<f64>,
    pub in_rmse: f64,
    pub out_rmse: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct AugmentedResult {
    pub contracts: Vec<String>,
    pub result: BenchmarkResult,
    pub delta: Delta,
}

#[derive(Debug, Clone)]
pub struct HorizonRow {
    pub horizon: usize,
    pub report: MultiTrialReport,
}

#[derive(Debug, Clone)]
pub struct MultistepResult {
    pub contract: Option<String>,
    pub rows: Vec<HorizonRow>,
}

impl Runner {
    /// `jobs` caps concurrent trials; 0 uses every available core.
    pub fn new(cfg: ExperimentConfig, panel: AlignedPanel, jobs: usize) -> Result<Self> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
        Ok(Self { cfg, panel, pool })
    }

    pub fn config(&self) -> &ExperimentConfig {
        &self.cfg
    }

    pub fn panel(&self) -> &AlignedPanel {
        &self.panel
    }

    /// The configured pipeline.
    pub fn pipeline(&self) -> Pipeline {
        self.cfg.pipeline.resolve()
    }

    /// The configured pipeline with another preset's defaults.
    pub fn pipeline_with(&self, preset: Preset, ma_window: Option<usize>) -> Pipeline {
        let mut p = self.cfg.pipeline.clone();
        if p.preset != preset {
            p = crate::config::PipelineConfig { preset, target: p.target, n: p.n, ..Default::default() };
        }
        if ma_window.is_some() {
            p.ma_window = ma_window;
        }
        p.resolve()
    }

    /// Trains `n_trials` networks on a single-horizon set.
    pub fn trials(&self, set: &SupervisedSet) -> Result<MultiTrialReport> {
        let net = self.cfg.network;
        let layout = Layout::new(set.n_inputs(), net.hidden, set.n_outputs(), net.activation)?;
        let n = self.cfg.experiment.n_trials;
        let opts = self.cfg.trainer;
        let trials = self.pool.install(|| {
            (0..n)
                .into_par_iter()
                .map(|i| run_trial(layout, set, &opts, i))
                .collect::<std::result::Result<Vec<_>, _>>()
        })?;
        Ok(summarize(trials, self.cfg.experiment.stability_threshold)?)
    }

    fn spot_design(&self, pipeline: &Pipeline, feature_series: &str, lags: usize, horizons: &[usize]) -> Result<SupervisedSet> {
        design(
            &self.panel,
            &pipeline.blocks(feature_series, lags),
            &pipeline.target,
            &pipeline.target_recipe(),
            horizons,
        )
    }

    /// Trains every lag count in `lags` with inputs from `feature_series`;
    /// rows stay in the order given.
    pub fn lag_sweep(&self, pipeline: &Pipeline, feature_series: &str, lags: &[usize]) -> SweepTable {
        let rows = self.pool.install(|| {
            lags.par_iter()
                .map(|&lag| {
                    let outcome = self
                        .spot_design(pipeline, feature_series, lag, &[1])
                        .and_then(|set| self.trials(&set))
                        .map_err(|e| e.to_string());
                    SweepRow { lag, outcome }
                })
                .collect()
        });
        SweepTable { feature_series: feature_series.to_string(), rows }
    }

    /// Lag sweep with a futures contract as the only input; the target stays
    /// the transformed spot series.
    pub fn futures_solo(&self, pipeline: &Pipeline, contract: &str, lags: &[usize]) -> Result<SweepTable> {
        if self.panel.column(contract).is_none() {
            return Err(oilcast_core::Error::UnknownSeries(contract.to_string()).into());
        }
        Ok(self.lag_sweep(pipeline, contract, lags))
    }

    fn benchmark_set(&self, pipeline: &Pipeline, horizons: &[usize]) -> Result<SupervisedSet> {
        self.spot_design(pipeline, &pipeline.target.clone(), pipeline.lags, horizons)
    }

    /// Trains the benchmark design of `pipeline`.
    pub fn benchmark(&self, pipeline: &Pipeline) -> Result<BenchmarkResult> {
        let set = self.benchmark_set(pipeline, &[1])?;
        let blocks = pipeline.blocks(&pipeline.target, pipeline.lags);
        self.fixed_result(pipeline, &set, &blocks)
    }

    fn fixed_result(&self, pipeline: &Pipeline, set: &SupervisedSet, blocks: &[Block]) -> Result<BenchmarkResult> {
        Ok(BenchmarkResult {
            lags: pipeline.lags,
            inputs: describe_columns(set, blocks),
            target_scale: set.target_scale().copied(),
            report: self.trials(set)?,
        })
    }

    fn contract_blocks(&self, pipeline: &Pipeline, contracts: &[String]) -> Result<Vec<Block>> {
        let lags = self.cfg.experiment.augment_lags;
        let mut blocks = Vec::new();
        for c in contracts {
            if self.panel.column(c).is_none() {
                return Err(oilcast_core::Error::UnknownSeries(c.clone()).into());
            }
            blocks.extend(pipeline.blocks(c, lags));
        }
        Ok(blocks)
    }

    /// Benchmark design plus `augment_lags` lags of each contract, compared
    /// against `benchmark`.
    pub fn futures_augmented(
        &self,
        pipeline: &Pipeline,
        benchmark: &BenchmarkResult,
        contracts: &[String],
    ) -> Result<AugmentedResult> {
        let base = self.benchmark_set(pipeline, &[1])?;
        let extra = self.contract_blocks(pipeline, contracts)?;
        let set = augment(&self.panel, &base, &extra)?;
        let mut blocks = pipeline.blocks(&pipeline.target, pipeline.lags);
        blocks.extend(extra);
        let result = self.fixed_result(pipeline, &set, &blocks)?;
        let (b, a) = (&benchmark.report, &result.report);
        let out = |r: &MultiTrialReport| r.out_of_sample.as_ref().map(|s| (s.hit_rate.mean, s.rmse.mean));
        let delta = Delta {
            in_hit_rate: a.in_sample.hit_rate.mean - b.in_sample.hit_rate.mean,
            in_rmse: a.in_sample.rmse.mean - b.in_sample.rmse.mean,
            out_hit_rate: out(a).zip(out(b)).map(|(x, y)| x.0 - y.0),
            out_rmse: out(a).zip(out(b)).map(|(x, y)| x.1 - y.1),
        };
        Ok(AugmentedResult { contracts: contracts.to_vec(), result, delta })
    }

    /// One network per horizon on a shared row axis, optionally with lags of
    /// `contract` appended.
    pub fn multistep(&self, pipeline: &Pipeline, horizons: &[usize], contract: Option<&str>) -> Result<MultistepResult> {
        let mut set = self.benchmark_set(pipeline, horizons)?;
        if let Some(c) = contract {
            set = augment(&self.panel, &set, &self.contract_blocks(pipeline, &[c.to_string()])?)?;
        }
        let rows = horizons
            .iter()
            .enumerate()
            .map(|(k, &horizon)| Ok(HorizonRow { horizon, report: self.trials(&set.select_horizon(k)?)? }))
            .collect::<Result<Vec<_>>>()?;
        Ok(MultistepResult { contract: contract.map(str::to_string), rows })
    }
}

/// Short name of a recipe, e.g. `ma3+momentum1`.
pub fn describe_recipe(recipe: &[Step]) -> String {
    let parts: Vec<String> = recipe
        .iter()
        .map(|s| match *s {
            Step::MovingAverage { window } => format!("ma{window}"),
            Step::Momentum { n } => format!("momentum{n}"),
            Step::Force { n } => format!("force{n}"),
        })
        .collect();
    if parts.is_empty() {
        "level".into()
    } else {
        parts.join("+")
    }
}

fn describe_columns(set: &SupervisedSet, blocks: &[Block]) -> Vec<String> {
    set.columns()
        .iter()
        .map(|c| {
            let b = &blocks[c.feature];
            format!("{} {} lag {}", b.series, describe_recipe(&b.recipe), c.lag)
        })
        .collect()
}

impl BenchmarkResult {
    pub fn best_network(&self) -> &Network {
        &self.best().report.final_net
    }
}
