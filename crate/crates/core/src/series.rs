//! Dated daily price series, their alignment onto a common date axis, and the
//! chronological train/test split.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::ops::Range;

use chrono::{Datelike, NaiveDate, Weekday};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

/// Identifier of a price series (`spot`, `fut1` .. `fut4`, or any tag).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(transparent))]
pub struct SeriesId(String);

impl SeriesId {
    pub const SPOT: &'static str = "spot";

    pub fn new(id: impl Into<String>) -> Self {
        Self(id.into())
    }

    /// Id of the futures contract `months` months to maturity, e.g. `fut1`.
    pub fn futures(months: u8) -> Self {
        Self(alloc::format!("fut{months}"))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for SeriesId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for SeriesId {
    fn from(s: &str) -> Self {
        Self(s.into())
    }
}

impl From<String> for SeriesId {
    fn from(s: String) -> Self {
        Self(s)
    }
}

/// One daily closing-price sequence.
///
/// Dates are strictly increasing and every value is a finite, positive price.
#[derive(Debug, Clone, PartialEq)]
pub struct PriceSeries {
    id: SeriesId,
    dates: Vec<NaiveDate>,
    values: Vec<f64>,
}

impl PriceSeries {
    pub fn new(id: impl Into<SeriesId>, dates: Vec<NaiveDate>, values: Vec<f64>) -> Result<Self> {
        if dates.len() != values.len() {
            return Err(Error::LengthMismatch { expected: dates.len(), found: values.len() });
        }
        if dates.is_empty() {
            return Err(Error::Empty("price series"));
        }
        for (i, w) in dates.windows(2).enumerate() {
            if w[1] <= w[0] {
                return Err(Error::UnorderedDates { index: i + 1, date: w[1] });
            }
        }
        for (index, &value) in values.iter().enumerate() {
            if !value.is_finite() {
                return Err(Error::NonFinite { index });
            }
            if value <= 0.0 {
                return Err(Error::NonPositivePrice { index, value });
            }
        }
        Ok(Self { id: id.into(), dates, values })
    }

    pub fn id(&self) -> &SeriesId {
        &self.id
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
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

    pub fn with_id(mut self, id: impl Into<SeriesId>) -> Self {
        self.id = id.into();
        self
    }
}

/// Several series joined on their common dates.
#[derive(Debug, Clone, PartialEq)]
pub struct AlignedPanel {
    dates: Vec<NaiveDate>,
    columns: Vec<(SeriesId, Vec<f64>)>,
    split_index: Option<usize>,
}

impl AlignedPanel {
    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn len(&self) -> usize {
        self.dates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dates.is_empty()
    }

    /// Series ids in column order.
    pub fn ids(&self) -> impl Iterator<Item = &SeriesId> {
        self.columns.iter().map(|(id, _)| id)
    }

    pub fn column(&self, id: &str) -> Option<&[f64]> {
        self.columns
            .iter()
            .find(|(c, _)| c.as_str() == id)
            .map(|(_, v)| v.as_slice())
    }

    pub fn columns(&self) -> impl Iterator<Item = (&SeriesId, &[f64])> {
        self.columns.iter().map(|(id, v)| (id, v.as_slice()))
    }

    /// First out-of-sample row, once [`split_chrono`] has been applied.
    pub fn split_index(&self) -> Option<usize> {
        self.split_index
    }

    pub fn train_rows(&self) -> Result<Range<usize>> {
        self.split_index.map(|s| 0..s).ok_or(Error::NotSplit)
    }

    pub fn test_rows(&self) -> Result<Range<usize>> {
        self.split_index.map(|s| s..self.len()).ok_or(Error::NotSplit)
    }

    /// The column `id` as a standalone series.
    pub fn series(&self, id: &str) -> Result<PriceSeries> {
        let values = self.column(id).ok_or_else(|| Error::UnknownSeries(id.into()))?;
        PriceSeries::new(id, self.dates.clone(), values.to_vec())
    }

    /// Every column as a standalone series, in column order.
    pub fn to_series(&self) -> Result<Vec<PriceSeries>> {
        self.columns
            .iter()
            .map(|(id, v)| PriceSeries::new(id.clone(), self.dates.clone(), v.clone()))
            .collect()
    }
}

/// Joins `series` on the intersection of their dates.
///
/// A date missing from any one series drops the whole row.
pub fn align(series: &[PriceSeries]) -> Result<AlignedPanel> {
    let (first, rest) = series.split_first().ok_or(Error::Empty("series list"))?;
    for (i, s) in series.iter().enumerate() {
        if series[..i].iter().any(|o| o.id == s.id) {
            return Err(Error::DuplicateSeries(s.id.0.clone()));
        }
    }

    let mut dates = first.dates.clone();
    for s in rest {
        dates.retain(|d| s.dates.binary_search(d).is_ok());
    }
    if dates.is_empty() {
        return Err(Error::EmptyIntersection);
    }

    let columns = series
        .iter()
        .map(|s| {
            let values = dates
                .iter()
                .map(|d| s.values[s.dates.binary_search(d).expect("date in intersection")])
                .collect();
            (s.id.clone(), values)
        })
        .collect();

    Ok(AlignedPanel { dates, columns, split_index: None })
}

/// Marks the first `floor(train_fraction * len)` rows as training rows.
pub fn split_chrono(panel: &AlignedPanel, train_fraction: f64) -> Result<AlignedPanel> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::InvalidFraction(train_fraction));
    }
    let len = panel.len();
    // the epsilon absorbs representation error such as 0.29 * 100 = 28.999..
    let split = libm::floor(train_fraction * len as f64 + 1e-9) as usize;
    if split == 0 || split >= len {
        return Err(Error::InvalidSplit { split, len });
    }
    Ok(AlignedPanel { split_index: Some(split), ..panel.clone() })
}

/// Data-generating process for [`gen_synthetic`].
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(
    feature = "serde",
    serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)
)]
pub enum SyntheticKind {
    /// `level + amplitude * sin(2 pi t / period) + noise * N(0, 1)`.
    SineNoise { level: f64, amplitude: f64, period: f64, noise: f64 },
    /// `x_t = c + phi * x_{t-1} + sigma * N(0, 1)`, reported as `level + x_t`.
    ///
    /// With `stationary` set, `|phi| >= 1` is rejected and `x_0` is drawn from
    /// the stationary distribution; otherwise `x_0 = 0`.
    Ar1 { c: f64, phi: f64, sigma: f64, level: f64, stationary: bool },
    /// `x_t = x_{t-1} + sigma * N(0, 1)` starting at `start`.
    RandomWalk { start: f64, sigma: f64 },
}

/// First date of every synthetic series.
pub fn synthetic_start() -> NaiveDate {
    NaiveDate::from_ymd_opt(2000, 1, 3).expect("valid date")
}

/// `len` consecutive weekdays starting at `start` (or the next weekday).
pub fn weekdays_from(start: NaiveDate, len: usize) -> Vec<NaiveDate> {
    let mut out = Vec::with_capacity(len);
    let mut d = start;
    while out.len() < len {
        if !matches!(d.weekday(), Weekday::Sat | Weekday::Sun) {
            out.push(d);
        }
        d = d.succ_opt().expect("date in range");
    }
    out
}

/// Generates a deterministic synthetic price series tagged `synthetic`.
///
/// If the raw path dips to zero or below, the whole path is shifted up so that
/// its minimum equals 1.
pub fn gen_synthetic(kind: &SyntheticKind, length: usize, seed: u64) -> Result<PriceSeries> {
    if length < 2 {
        return Err(Error::TooShort { len: length, needed: 2 });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut normal = move || -> f64 { StandardNormal.sample(&mut rng) };

    let mut values: Vec<f64> = match *kind {
        SyntheticKind::SineNoise { level, amplitude, period, noise } => {
            if period.is_nan() || period <= 0.0 {
                return Err(Error::InvalidParameter("sine period must be positive"));
            }
            (0..length)
                .map(|t| {
                    let phase = 2.0 * core::f64::consts::PI * t as f64 / period;
                    let eps = if noise == 0.0 { 0.0 } else { noise * normal() };
                    level + amplitude * libm::sin(phase) + eps
                })
                .collect()
        }
        SyntheticKind::Ar1 { c, phi, sigma, level, stationary } => {
            if stationary && libm::fabs(phi) >= 1.0 {
                return Err(Error::NonStationary(phi));
            }
            let mut x = if stationary {
                c / (1.0 - phi) + sigma / libm::sqrt(1.0 - phi * phi) * normal()
            } else {
                0.0
            };
            let mut out = Vec::with_capacity(length);
            for _ in 0..length {
                out.push(level + x);
                x = c + phi * x + sigma * normal();
            }
            out
        }
        SyntheticKind::RandomWalk { start, sigma } => {
            let mut x = start;
            let mut out = Vec::with_capacity(length);
            for _ in 0..length {
                out.push(x);
                x += sigma * normal();
            }
            out
        }
    };

    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter("synthetic path is not finite"));
    }
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    if min <= 0.0 {
        let shift = 1.0 - min;
        values.iter_mut().for_each(|v| *v += shift);
    }

    PriceSeries::new("synthetic", weekdays_from(synthetic_start(), length), values)
}

/// Builds a contract-like series from `base`: each value is
/// `base[t + lead] * (1 + premium) + noise * N(0, 1)`, holding the last base
/// value once `t + lead` runs past the end.
pub fn derive_contract(
    base: &PriceSeries,
    id: impl Into<SeriesId>,
    premium: f64,
    noise: f64,
    lead: usize,
    seed: u64,
) -> Result<PriceSeries> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = base.len();
    let values = (0..n)
        .map(|t| {
            let src = base.values[(t + lead).min(n - 1)];
            let eps: f64 = StandardNormal.sample(&mut rng);
            src * (1.0 + premium) + noise * eps
        })
        .collect();
    PriceSeries::new(id, base.dates.clone(), values)
}
