//! Declarative experiment configuration (TOML) with dotted-path overrides.

use std::path::{Path, PathBuf};

use oilcast_core::network::Activation;
use oilcast_core::series::SyntheticKind;
use oilcast_core::trainer::{TrainOptions, DEFAULT_STABILITY_THRESHOLD};
use oilcast_core::transform::Step;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::io::ColumnSpec;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub name: String,
    pub data: DataConfig,
    #[serde(default)]
    pub pipeline: PipelineConfig,
    #[serde(default)]
    pub network: NetworkConfig,
    #[serde(default)]
    pub trainer: TrainOptions,
    #[serde(default)]
    pub experiment: StudyConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataConfig {
    #[serde(default = "default_train_fraction")]
    pub train_fraction: f64,
    pub series: Vec<SeriesSource>,
}

fn default_train_fraction() -> f64 {
    0.9
}

/// One named series; exactly one of `csv`, `synthetic` or `derived` is set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeriesSource {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv: Option<CsvSource>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub synthetic: Option<SyntheticSource>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub derived: Option<DerivedSource>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CsvSource {
    /// Relative paths resolve against the config file's directory.
    pub path: PathBuf,
    #[serde(default = "default_date_column")]
    pub date_column: String,
    #[serde(default = "default_price_column")]
    pub price_column: String,
}

fn default_date_column() -> String {
    ColumnSpec::default().date
}

fn default_price_column() -> String {
    ColumnSpec::default().price
}

impl CsvSource {
    pub fn columns(&self) -> ColumnSpec {
        ColumnSpec { date: self.date_column.clone(), price: self.price_column.clone() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticSource {
    pub length: usize,
    pub seed: u64,
    pub model: SyntheticKind,
}

/// A contract-like series built from an earlier series:
/// `from[t + lead] * (1 + premium) + noise * N(0, 1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DerivedSource {
    pub from: String,
    #[serde(default)]
    pub premium: f64,
    #[serde(default)]
    pub noise: f64,
    #[serde(default)]
    pub lead: usize,
    #[serde(default)]
    pub seed: u64,
}

/// The two preprocessing pipelines studied for the benchmark.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    /// Moving average of the prices, then first order relative change.
    #[default]
    MaMomentum,
    /// First and second order relative change as inputs, second order as target.
    MomentumForce,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TransformKind {
    Momentum,
    Force,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    #[serde(default)]
    pub preset: Preset,
    /// Defaults to 3 for `ma-momentum` and 1 (no smoothing) for `momentum-force`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ma_window: Option<usize>,
    /// Step of the relative changes.
    #[serde(default = "one")]
    pub n: usize,
    /// Transforms entering the design, each with the swept lag count.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inputs: Option<Vec<TransformKind>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_transform: Option<TransformKind>,
    #[serde(default = "default_target")]
    pub target: String,
    /// Benchmark lag count; defaults to 13 (`ma-momentum`) or 7 (`momentum-force`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lags: Option<usize>,
}

fn one() -> usize {
    1
}

fn default_target() -> String {
    "spot".into()
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            preset: Preset::default(),
            ma_window: None,
            n: 1,
            inputs: None,
            target_transform: None,
            target: default_target(),
            lags: None,
        }
    }
}

/// A [`PipelineConfig`] with every preset default filled in.
#[derive(Debug, Clone, PartialEq)]
pub struct Pipeline {
    pub ma_window: usize,
    pub n: usize,
    pub inputs: Vec<TransformKind>,
    pub target_kind: TransformKind,
    pub target: String,
    pub lags: usize,
}

impl PipelineConfig {
    pub fn resolve(&self) -> Pipeline {
        let (window, inputs, target_kind, lags) = match self.preset {
            Preset::MaMomentum => (3, vec![TransformKind::Momentum], TransformKind::Momentum, 13),
            Preset::MomentumForce => (1, vec![TransformKind::Momentum, TransformKind::Force], TransformKind::Force, 7),
        };
        Pipeline {
            ma_window: self.ma_window.unwrap_or(window),
            n: self.n,
            inputs: self.inputs.clone().unwrap_or(inputs),
            target_kind: self.target_transform.unwrap_or(target_kind),
            target: self.target.clone(),
            lags: self.lags.unwrap_or(lags),
        }
    }
}

impl Pipeline {
    /// Smoothing (if any) followed by the relative change `kind`.
    pub fn recipe(&self, kind: TransformKind) -> Vec<Step> {
        let mut steps = Vec::with_capacity(2);
        if self.ma_window > 1 {
            steps.push(Step::MovingAverage { window: self.ma_window });
        }
        steps.push(match kind {
            TransformKind::Momentum => Step::Momentum { n: self.n },
            TransformKind::Force => Step::Force { n: self.n },
        });
        steps
    }

    pub fn target_recipe(&self) -> Vec<Step> {
        self.recipe(self.target_kind)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkConfig {
    pub hidden: usize,
    #[serde(default)]
    pub activation: Activation,
}

impl Default for NetworkConfig {
    fn default() -> Self {
        Self { hidden: 8, activation: Activation::Tanh }
    }
}

/// Lag grids, contracts, horizons and trial settings for the studies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StudyConfig {
    /// Lag counts for the smoothed spot sweep and the futures sweeps.
    pub lags: Vec<usize>,
    /// Lag counts for the sweep without smoothing.
    pub unsmoothed_lags: Vec<usize>,
    /// Lag count of the momentum/force candidate benchmark.
    pub candidate_lags: usize,
    /// Contracts swept on their own and added in multi-step runs; defaults to
    /// every series other than the target.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub contracts: Option<Vec<String>>,
    /// Contracts appended to the benchmark; defaults to the first contract.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub augment: Option<Vec<String>>,
    /// Lags of each appended contract.
    pub augment_lags: usize,
    pub horizons: Vec<usize>,
    pub n_trials: usize,
    /// Largest out-of-sample hit-rate standard deviation (as a fraction) for a
    /// result to count as stable.
    pub stability_threshold: f64,
}

impl Default for StudyConfig {
    fn default() -> Self {
        Self {
            lags: (1..=20).collect(),
            unsmoothed_lags: vec![1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 12, 14, 16, 18, 20],
            candidate_lags: 7,
            contracts: None,
            augment: None,
            augment_lags: 1,
            horizons: vec![1, 2, 3],
            n_trials: 5,
            stability_threshold: DEFAULT_STABILITY_THRESHOLD,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
    Markdown,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
    pub formats: Vec<Format>,
    /// Also write loss curves and hit-rate-by-lag series as CSV.
    pub plot_data: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: None, formats: vec![Format::Json, Format::Csv], plot_data: true }
    }
}

impl ExperimentConfig {
    /// Parses TOML text, applies `key=value` overrides and validates.
    pub fn from_toml(text: &str, overrides: &[String]) -> Result<Self> {
        let mut value: toml::Value = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        for o in overrides {
            apply_override(&mut value, o)?;
        }
        let cfg: ExperimentConfig = value.try_into().map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads `path` and resolves relative CSV paths against its directory.
    pub fn load(path: &Path, overrides: &[String]) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::from_toml(&text, overrides)?;
        let base = path.parent().unwrap_or(Path::new(""));
        for s in &mut cfg.data.series {
            if let Some(csv) = &mut s.csv {
                if csv.path.is_relative() {
                    csv.path = base.join(&csv.path);
                }
            }
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        let f = self.data.train_fraction;
        if !(f > 0.0 && f < 1.0) {
            return fail(format!("data.train_fraction must lie in (0, 1), got {f}"));
        }
        if self.data.series.is_empty() {
            return fail("data.series is empty".into());
        }
        let mut seen: Vec<&str> = Vec::new();
        for s in &self.data.series {
            if seen.contains(&s.id.as_str()) {
                return fail(format!("series `{}` is defined twice", s.id));
            }
            let sources = [s.csv.is_some(), s.synthetic.is_some(), s.derived.is_some()];
            if sources.iter().filter(|&&b| b).count() != 1 {
                return fail(format!("series `{}` needs exactly one of csv, synthetic, derived", s.id));
            }
            if let Some(d) = &s.derived {
                if !seen.contains(&d.from.as_str()) {
                    return fail(format!("series `{}` derives from `{}`, which is not defined before it", s.id, d.from));
                }
            }
            seen.push(&s.id);
        }
        let known = |id: &str| seen.contains(&id);
        let p = self.pipeline.resolve();
        if !known(&p.target) {
            return fail(format!("pipeline.target `{}` is not a defined series", p.target));
        }
        if p.ma_window == 0 || p.n == 0 || p.lags == 0 || p.inputs.is_empty() {
            return fail("pipeline ma_window, n, lags and inputs must be non-zero".into());
        }
        for id in self.contracts().iter().chain(&self.augment()) {
            if !known(id) {
                return fail(format!("contract `{id}` is not a defined series"));
            }
        }
        let s = &self.experiment;
        if s.lags.is_empty() || s.lags.contains(&0) || s.unsmoothed_lags.contains(&0) {
            return fail("experiment lag lists must be non-empty and positive".into());
        }
        if s.candidate_lags == 0 || s.augment_lags == 0 {
            return fail("experiment.candidate_lags and augment_lags must be positive".into());
        }
        if s.horizons.is_empty() || s.horizons[0] == 0 || s.horizons.windows(2).any(|w| w[1] <= w[0]) {
            return fail("experiment.horizons must be positive and strictly increasing".into());
        }
        if s.n_trials == 0 {
            return fail("experiment.n_trials must be at least 1".into());
        }
        if s.stability_threshold.is_nan() || s.stability_threshold < 0.0 {
            return fail("experiment.stability_threshold must be non-negative".into());
        }
        if self.network.hidden == 0 {
            return fail("network.hidden must be at least 1".into());
        }
        self.trainer.validate().map_err(|e| Error::Config(format!("trainer: {e}")))
    }

    /// Contracts for the solo sweeps and multi-step augmentation.
    pub fn contracts(&self) -> Vec<String> {
        match &self.experiment.contracts {
            Some(c) => c.clone(),
            None => {
                let target = &self.pipeline.target;
                self.data.series.iter().map(|s| s.id.clone()).filter(|id| id != target).collect()
            }
        }
    }

    /// Contracts appended to the benchmark.
    pub fn augment(&self) -> Vec<String> {
        match &self.experiment.augment {
            Some(a) => a.clone(),
            None => self.contracts().into_iter().take(1).collect(),
        }
    }

    /// SHA-256 of the canonical JSON form of the resolved config.
    pub fn hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(&json))
    }

    /// Seeds of the trials: `trainer.seed`, `trainer.seed + 1`, ...
    pub fn seeds(&self) -> Vec<u64> {
        (0..self.experiment.n_trials as u64).map(|i| self.trainer.seed.wrapping_add(i)).collect()
    }
}

fn parse_scalar(raw: &str) -> toml::Value {
    match toml::from_str::<toml::Table>(&format!("v = {raw}")) {
        Ok(mut t) => t.remove("v").expect("key present"),
        Err(_) => toml::Value::String(raw.to_string()),
    }
}

/// Applies one `dotted.path=value` override. Numeric segments index arrays;
/// missing table keys are created.
pub fn apply_override(root: &mut toml::Value, assignment: &str) -> Result<()> {
    let (path, raw) = assignment
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("override `{assignment}` is not key=value")))?;
    let keys: Vec<&str> = path.trim().split('.').collect();
    if keys.iter().any(|k| k.is_empty()) {
        return Err(Error::Config(format!("override `{assignment}` has an empty key")));
    }
    let bad = |why: &str| Error::Config(format!("override `{path}`: {why}"));
    let mut node = root;
    for (i, key) in keys.iter().enumerate() {
        let last = i + 1 == keys.len();
        node = match node {
            toml::Value::Table(t) => {
                if last {
                    t.insert(key.to_string(), parse_scalar(raw.trim()));
                    return Ok(());
                }
                t.entry(key.to_string()).or_insert_with(|| toml::Value::Table(toml::Table::new()))
            }
            toml::Value::Array(a) => {
                let idx: usize = key.parse().map_err(|_| bad("array index expected"))?;
                let len = a.len();
                let slot = a.get_mut(idx).ok_or_else(|| bad(&format!("index {idx} out of range (len {len})")))?;
                if last {
                    *slot = parse_scalar(raw.trim());
                    return Ok(());
                }
                slot
            }
            _ => return Err(bad(&format!("`{key}` is not inside a table or array"))),
        };
    }
    unreachable!("loop returns on the last key")
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
        [[data.series]]
        id = "spot"
        synthetic = { length = 500, seed = 1, model = { kind = "random-walk", start = 50.0, sigma = 1.0 } }

        [[data.series]]
        id = "fut1"
        derived = { from = "spot", premium = 0.01 }
    "#;

    #[test]
    fn defaults_follow_the_benchmark() {
        let cfg = ExperimentConfig::from_toml(MINIMAL, &[]).unwrap();
        let p = cfg.pipeline.resolve();
        assert_eq!((p.ma_window, p.lags, p.n), (3, 13, 1));
        assert_eq!(cfg.network.hidden, 8);
        assert_eq!(cfg.trainer, TrainOptions::default());
        assert_eq!(cfg.experiment.n_trials, 5);
        assert_eq!(cfg.data.train_fraction, 0.9);
        assert_eq!(cfg.contracts(), vec!["fut1".to_string()]);
        assert_eq!(cfg.augment(), vec!["fut1".to_string()]);
        assert_eq!(p.target_recipe(), vec![Step::MovingAverage { window: 3 }, Step::Momentum { n: 1 }]);
    }

    #[test]
    fn candidate_preset_uses_force_target() {
        let cfg = ExperimentConfig::from_toml(MINIMAL, &["pipeline.preset=\"momentum-force\"".into()]).unwrap();
        let p = cfg.pipeline.resolve();
        assert_eq!(p.lags, 7);
        assert_eq!(p.inputs, vec![TransformKind::Momentum, TransformKind::Force]);
        assert_eq!(p.target_recipe(), vec![Step::Force { n: 1 }]);
    }

    #[test]
    fn overrides_reach_nested_and_array_fields() {
        let cfg = ExperimentConfig::from_toml(
            MINIMAL,
            &[
                "trainer.max_iterations=200".into(),
                "data.series.0.synthetic.seed=9".into(),
                "experiment.lags=[1, 2]".into(),
                "name=plain words".into(),
            ],
        )
        .unwrap();
        assert_eq!(cfg.trainer.max_iterations, 200);
        assert_eq!(cfg.data.series[0].synthetic.as_ref().unwrap().seed, 9);
        assert_eq!(cfg.experiment.lags, vec![1, 2]);
        assert_eq!(cfg.name, "plain words");
    }

    #[test]
    fn rejects_bad_configs() {
        let cases = [
            vec!["bogus=1".to_string()],
            vec!["trainer.mu_factor=1.0".into()],
            vec!["data.train_fraction=1.0".into()],
            vec!["experiment.horizons=[2, 1]".into()],
            vec!["pipeline.target=\"nope\"".into()],
            vec!["data.series.5.id=\"x\"".into()],
            vec!["noequals".into()],
        ];
        for overrides in cases {
            let err = ExperimentConfig::from_toml(MINIMAL, &overrides).unwrap_err();
            assert!(matches!(err, Error::Config(_)), "{overrides:?}");
            assert_eq!(err.exit_code(), 2);
        }
    }

    #[test]
    fn hash_tracks_content() {
        let a = ExperimentConfig::from_toml(MINIMAL, &[]).unwrap();
        let b = ExperimentConfig::from_toml(MINIMAL, &["trainer.seed=1".into()]).unwrap();
        assert_eq!(a.hash(), ExperimentConfig::from_toml(MINIMAL, &[]).unwrap().hash());
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 64);
        assert_eq!(b.seeds(), vec![1, 2, 3, 4, 5]);
    }
}
