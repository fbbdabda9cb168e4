//! From configured sources to scaled supervised sets.

use oilcast_core::series::{align, derive_contract, gen_synthetic, split_chrono, AlignedPanel, PriceSeries};
use oilcast_core::supervised::{append_features, build_design, FeatureSpec, SupervisedSet};
use oilcast_core::transform::{apply_recipe, minmax_fit, ScaleParams, Step, TransformedSeries};
use oilcast_core::Error as CoreError;

use crate::config::{ExperimentConfig, Pipeline};
use crate::error::Result;
use crate::io::{load_csv, LoadReport};

/// Series in config order with the load report of each CSV-backed one.
pub type Loaded = (Vec<PriceSeries>, Vec<(String, LoadReport)>);

/// Every configured series, before alignment, with CSV load reports.
pub fn load_series(cfg: &ExperimentConfig) -> Result<Loaded> {
    let mut series: Vec<PriceSeries> = Vec::with_capacity(cfg.data.series.len());
    let mut reports = Vec::new();
    for src in &cfg.data.series {
        let s = if let Some(csv) = &src.csv {
            let (s, report) = load_csv(&csv.path, src.id.as_str(), &csv.columns())?;
            reports.push((src.id.clone(), report));
            s
        } else if let Some(syn) = &src.synthetic {
            gen_synthetic(&syn.model, syn.length, syn.seed)?.with_id(src.id.as_str())
        } else {
            let d = src.derived.as_ref().expect("validated source");
            let base = series
                .iter()
                .find(|s| s.id().as_str() == d.from)
                .ok_or_else(|| CoreError::UnknownSeries(d.from.clone()))?;
            derive_contract(base, src.id.as_str(), d.premium, d.noise, d.lead, d.seed)?
        };
        series.push(s);
    }
    Ok((series, reports))
}

/// Loads, aligns on common dates and splits chronologically.
pub fn load_panel(cfg: &ExperimentConfig) -> Result<AlignedPanel> {
    let (series, _) = load_series(cfg)?;
    Ok(split_chrono(&align(&series)?, cfg.data.train_fraction)?)
}

/// Lags of one transformed series.
#[derive(Debug, Clone, PartialEq)]
pub struct Block {
    pub series: String,
    pub recipe: Vec<Step>,
    pub lags: usize,
}

impl Pipeline {
    /// One block per configured input transform of `series`.
    pub fn blocks(&self, series: &str, lags: usize) -> Vec<Block> {
        self.inputs
            .iter()
            .map(|&kind| Block { series: series.to_string(), recipe: self.recipe(kind), lags })
            .collect()
    }
}

pub fn transformed(panel: &AlignedPanel, series: &str, recipe: &[Step]) -> Result<TransformedSeries> {
    let values = panel.column(series).ok_or_else(|| CoreError::UnknownSeries(series.to_string()))?;
    Ok(apply_recipe(values, recipe)?)
}

/// Min-max parameters fitted on the values dated before `date_split`.
///
/// A series that is constant over that range gets a unit half-width around
/// its value, so it maps to zero instead of failing the whole design.
pub fn fit_scale(series: &TransformedSeries, date_split: usize) -> Result<ScaleParams> {
    let range = series.indices_within(0..date_split);
    match minmax_fit(series.values(), range) {
        Err(CoreError::ConstantRange { min, .. }) => Ok(ScaleParams::new(min - 1.0, min + 1.0)?),
        other => Ok(other?),
    }
}

fn scaled_blocks(panel: &AlignedPanel, blocks: &[Block], date_split: usize) -> Result<Vec<TransformedSeries>> {
    blocks
        .iter()
        .map(|b| {
            let t = transformed(panel, &b.series, &b.recipe)?;
            let p = fit_scale(&t, date_split)?;
            Ok(t.map_values(|v| p.scale(v)))
        })
        .collect()
}

fn date_split(panel: &AlignedPanel) -> Result<usize> {
    Ok(panel.split_index().ok_or(CoreError::NotSplit)?)
}

/// Scaled lagged inputs from `blocks`, raw targets of `target` transformed
/// by `target_recipe`, and the target scale recorded for training.
pub fn design(
    panel: &AlignedPanel,
    blocks: &[Block],
    target: &str,
    target_recipe: &[Step],
    horizons: &[usize],
) -> Result<SupervisedSet> {
    let split = date_split(panel)?;
    let inputs = scaled_blocks(panel, blocks, split)?;
    let target = transformed(panel, target, target_recipe)?;
    let target_scale = fit_scale(&target, split)?;
    let specs: Vec<FeatureSpec<'_>> = inputs.iter().zip(blocks).map(|(s, b)| FeatureSpec::new(s, b.lags)).collect();
    let set = build_design(&specs, &target, horizons, panel.dates(), split)?;
    Ok(set.with_target_scale(Some(target_scale)))
}

/// Appends scaled `blocks` to an existing design.
pub fn augment(panel: &AlignedPanel, set: &SupervisedSet, blocks: &[Block]) -> Result<SupervisedSet> {
    let inputs = scaled_blocks(panel, blocks, set.date_split())?;
    let specs: Vec<FeatureSpec<'_>> = inputs.iter().zip(blocks).map(|(s, b)| FeatureSpec::new(s, b.lags)).collect();
    Ok(append_features(set, &specs)?)
}
