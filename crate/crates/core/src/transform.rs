//! Preprocessing transforms: trailing moving average, relative change of
//! first ("momentum") and second ("force") order, and linear scaling onto
//! `[-1, 1]`.
//!
//! Every transform of a source series drops some leading points. A
//! [`TransformedSeries`] remembers how many (`origin_offset`) so that value `i`
//! always corresponds to source index `i + origin_offset`.

use alloc::vec::Vec;
use core::ops::Range;

use crate::error::{Error, Result};

/// Denominators smaller than this in magnitude are rejected.
pub const DENOMINATOR_GUARD: f64 = 1e-9;

/// One preprocessing step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "step", rename_all = "kebab-case"))]
pub enum Step {
    MovingAverage { window: usize },
    Momentum { n: usize },
    Force { n: usize },
}

impl Step {
    /// Number of leading points the step consumes.
    pub fn offset(&self) -> usize {
        match *self {
            Step::MovingAverage { window } => window.saturating_sub(1),
            Step::Momentum { n } => n,
            Step::Force { n } => 2 * n,
        }
    }

    fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        match *self {
            Step::MovingAverage { window } => trailing_mean(x, window),
            Step::Momentum { n } => relative_change(x, n, 1),
            Step::Force { n } => relative_change(x, n, 2),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransformedSeries {
    values: Vec<f64>,
    origin_offset: usize,
    source_len: usize,
    recipe: Vec<Step>,
}

impl TransformedSeries {
    /// Wraps a source series with no steps applied.
    pub fn identity(values: Vec<f64>) -> Self {
        let source_len = values.len();
        Self { values, origin_offset: 0, source_len, recipe: Vec::new() }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Source index of `values()[0]`.
    pub fn origin_offset(&self) -> usize {
        self.origin_offset
    }

    /// Length of the series the recipe was applied to.
    pub fn source_len(&self) -> usize {
        self.source_len
    }

    pub fn recipe(&self) -> &[Step] {
        &self.recipe
    }

    /// Value at source index `t`, if the transform defines one there.
    pub fn at_source(&self, t: usize) -> Option<f64> {
        t.checked_sub(self.origin_offset).and_then(|i| self.values.get(i).copied())
    }

    /// Range of value indices whose source index lies in `source`.
    pub fn indices_within(&self, source: Range<usize>) -> Range<usize> {
        let start = source.start.saturating_sub(self.origin_offset).min(self.len());
        let end = source.end.saturating_sub(self.origin_offset).min(self.len());
        start..end.max(start)
    }

    /// Applies one more step on top of this series.
    pub fn then(mut self, step: Step) -> Result<Self> {
        self.values = step.apply(&self.values).map_err(|e| match e {
            Error::ZeroDenominator { index } => Error::ZeroDenominator { index: index + self.origin_offset },
            other => other,
        })?;
        self.origin_offset += step.offset();
        self.recipe.push(step);
        Ok(self)
    }

    /// Same offsets and recipe, new values (used for scaled copies).
    pub fn map_values(&self, f: impl Fn(f64) -> f64) -> Self {
        Self { values: self.values.iter().map(|&v| f(v)).collect(), ..self.clone() }
    }
}

/// Applies `recipe` in order to the source series `x`.
pub fn apply_recipe(x: &[f64], recipe: &[Step]) -> Result<TransformedSeries> {
    recipe
        .iter()
        .try_fold(TransformedSeries::identity(x.to_vec()), |acc, step| acc.then(*step))
}

/// Trailing simple moving average: `out_t = mean(x_{t-window+1} ..= x_t)`.
pub fn moving_average(x: &[f64], window: usize) -> Result<TransformedSeries> {
    apply_recipe(x, &[Step::MovingAverage { window }])
}

/// First order relative change `(x_t - x_{t-n}) / x_{t-n}`.
pub fn momentum(x: &[f64], n: usize) -> Result<TransformedSeries> {
    apply_recipe(x, &[Step::Momentum { n }])
}

/// Second order relative change `(x_t - 2 x_{t-n} + x_{t-2n}) / x_{t-n}`.
pub fn force(x: &[f64], n: usize) -> Result<TransformedSeries> {
    apply_recipe(x, &[Step::Force { n }])
}

fn trailing_mean(x: &[f64], window: usize) -> Result<Vec<f64>> {
    if window == 0 {
        return Err(Error::InvalidParameter("moving-average window must be at least 1"));
    }
    if x.len() < window {
        return Err(Error::TooShort { len: x.len(), needed: window });
    }
    // per-window sums, no running accumulator
    Ok(x.windows(window).map(|w| w.iter().sum::<f64>() / window as f64).collect())
}

fn relative_change(x: &[f64], n: usize, order: usize) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::InvalidParameter("relative-change horizon must be at least 1"));
    }
    let span = order * n;
    if x.len() <= span {
        return Err(Error::TooShort { len: x.len(), needed: span + 1 });
    }
    (span..x.len())
        .map(|t| {
            let base = x[t - n];
            if libm::fabs(base) < DENOMINATOR_GUARD {
                return Err(Error::ZeroDenominator { index: t - n });
            }
            Ok(match order {
                1 => (x[t] - base) / base,
                _ => (x[t] - 2.0 * base + x[t - 2 * n]) / base,
            })
        })
        .collect()
}

/// Extremes of the fit range of a linear `[-1, 1]` scaling.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ScaleParams {
    min_val: f64,
    max_val: f64,
}

impl ScaleParams {
    pub fn new(min_val: f64, max_val: f64) -> Result<Self> {
        if !(min_val.is_finite() && max_val.is_finite() && max_val > min_val) {
            return Err(Error::ConstantRange { min: min_val, max: max_val });
        }
        Ok(Self { min_val, max_val })
    }

    pub fn min_val(&self) -> f64 {
        self.min_val
    }

    pub fn max_val(&self) -> f64 {
        self.max_val
    }

    /// `2 (x - min) / (max - min) - 1`
    pub fn scale(&self, x: f64) -> f64 {
        2.0 * (x - self.min_val) / (self.max_val - self.min_val) - 1.0
    }

    pub fn unscale(&self, y: f64) -> f64 {
        (y + 1.0) * (self.max_val - self.min_val) / 2.0 + self.min_val
    }
}

/// Fits min/max over `x[fit_range]` only.
pub fn minmax_fit(x: &[f64], fit_range: Range<usize>) -> Result<ScaleParams> {
    let slice = x.get(fit_range).ok_or(Error::InvalidParameter("fit range out of bounds"))?;
    if slice.is_empty() {
        return Err(Error::Empty("min-max fit range"));
    }
    let (min, max) = slice
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    ScaleParams::new(min, max)
}

pub fn minmax_apply(x: &[f64], p: &ScaleParams) -> Vec<f64> {
    x.iter().map(|&v| p.scale(v)).collect()
}

pub fn minmax_invert(y: &[f64], p: &ScaleParams) -> Vec<f64> {
    y.iter().map(|&v| p.unscale(v)).collect()
}
