//! Lagged design matrices with horizon-shifted targets.
//!
//! Rows are anchored at a source time `t` on the shared date axis. A feature
//! with `L` lags contributes the values at `t, t-1, .., t-L+1`; a horizon `h`
//! contributes the target value at `t+h`. Only anchors where every one of
//! those values exists become rows.

use alloc::vec::Vec;
use core::ops::Range;

use chrono::NaiveDate;

use crate::error::{Error, Result};
use crate::transform::{ScaleParams, TransformedSeries};

/// A transformed source and how many lags of it enter the design.
#[derive(Debug, Clone, Copy)]
pub struct FeatureSpec<'a> {
    pub source: &'a TransformedSeries,
    pub lags: usize,
}

impl<'a> FeatureSpec<'a> {
    pub fn new(source: &'a TransformedSeries, lags: usize) -> Self {
        Self { source, lags }
    }

    /// Earliest anchor at which every lag exists.
    fn first_anchor(&self) -> usize {
        self.source.origin_offset() + self.lags - 1
    }
}

/// Provenance of one design column: lag `lag` (0 = current value) of feature
/// number `feature`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ColumnInfo {
    pub feature: usize,
    pub lag: usize,
}

/// Design matrix `x` (row-major), targets `y` (one column per horizon) and the
/// bookkeeping needed to map every entry back to the date axis.
#[derive(Debug, Clone, PartialEq)]
pub struct SupervisedSet {
    n_inputs: usize,
    x: Vec<f64>,
    horizons: Vec<usize>,
    y: Vec<f64>,
    y_prev: Vec<f64>,
    anchors: Vec<usize>,
    row_dates: Vec<NaiveDate>,
    columns: Vec<ColumnInfo>,
    axis_len: usize,
    date_split: usize,
    split_index: usize,
    target_scale: Option<ScaleParams>,
}

fn check_features(features: &[FeatureSpec<'_>], axis_len: usize) -> Result<()> {
    for f in features {
        if f.lags == 0 {
            return Err(Error::InvalidParameter("a feature needs at least one lag"));
        }
        if f.source.source_len() != axis_len {
            return Err(Error::MismatchedAxis { expected: axis_len, found: f.source.source_len() });
        }
    }
    Ok(())
}

/// Builds the lagged design for `features` against `target` at every horizon.
///
/// `date_split` is the first out-of-sample index on the date axis. A row is a
/// training row only if all of its target dates fall before it.
pub fn build_design(
    features: &[FeatureSpec<'_>],
    target: &TransformedSeries,
    horizons: &[usize],
    dates: &[NaiveDate],
    date_split: usize,
) -> Result<SupervisedSet> {
    if features.is_empty() {
        return Err(Error::Empty("feature list"));
    }
    if horizons.is_empty() {
        return Err(Error::Empty("horizon list"));
    }
    if horizons[0] == 0 || horizons.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter("horizons must be positive and strictly increasing"));
    }
    let axis_len = dates.len();
    check_features(features, axis_len)?;
    if target.source_len() != axis_len {
        return Err(Error::MismatchedAxis { expected: axis_len, found: target.source_len() });
    }
    if date_split > axis_len {
        return Err(Error::InvalidSplit { split: date_split, len: axis_len });
    }

    let max_h = *horizons.last().expect("non-empty");
    let first = features
        .iter()
        .map(FeatureSpec::first_anchor)
        .max()
        .expect("non-empty")
        .max(target.origin_offset());
    let last = match axis_len.checked_sub(1 + max_h) {
        Some(last) if last >= first => last,
        _ => return Err(Error::NoUsableRows),
    };

    let columns: Vec<ColumnInfo> = features
        .iter()
        .enumerate()
        .flat_map(|(feature, f)| (0..f.lags).map(move |lag| ColumnInfo { feature, lag }))
        .collect();
    let anchors: Vec<usize> = (first..=last).collect();

    let mut x = Vec::with_capacity(anchors.len() * columns.len());
    let mut y = Vec::with_capacity(anchors.len() * horizons.len());
    let mut y_prev = Vec::with_capacity(anchors.len() * horizons.len());
    for &t in &anchors {
        for c in &columns {
            x.push(features[c.feature].source.at_source(t - c.lag).expect("lag within range"));
        }
        for &h in horizons {
            y.push(target.at_source(t + h).expect("horizon within range"));
            y_prev.push(target.at_source(t + h - 1).expect("previous target within range"));
        }
    }

    let set = SupervisedSet {
        n_inputs: columns.len(),
        x,
        horizons: horizons.to_vec(),
        y,
        y_prev,
        row_dates: anchors.iter().map(|&t| dates[t]).collect(),
        anchors,
        columns,
        axis_len,
        date_split,
        split_index: 0,
        target_scale: None,
    };
    set.finish()
}

/// Appends `extra` feature columns to `base`, dropping rows where any new lag
/// is unavailable.
pub fn append_features(base: &SupervisedSet, extra: &[FeatureSpec<'_>]) -> Result<SupervisedSet> {
    if extra.is_empty() {
        return Ok(base.clone());
    }
    check_features(extra, base.axis_len)?;
    let first = extra.iter().map(FeatureSpec::first_anchor).max().expect("non-empty");
    let keep: Vec<usize> = (0..base.n_rows()).filter(|&r| base.anchors[r] >= first).collect();
    if keep.is_empty() {
        return Err(Error::NoUsableRows);
    }

    let next_feature = base.columns.iter().map(|c| c.feature + 1).max().unwrap_or(0);
    let new_columns: Vec<ColumnInfo> = extra
        .iter()
        .enumerate()
        .flat_map(|(i, f)| (0..f.lags).map(move |lag| ColumnInfo { feature: next_feature + i, lag }))
        .collect();
    let n_inputs = base.n_inputs + new_columns.len();
    let n_out = base.horizons.len();

    let mut x = Vec::with_capacity(keep.len() * n_inputs);
    let mut y = Vec::with_capacity(keep.len() * n_out);
    let mut y_prev = Vec::with_capacity(keep.len() * n_out);
    for &r in &keep {
        let t = base.anchors[r];
        x.extend_from_slice(base.x_row(r));
        for c in &new_columns {
            let f = &extra[c.feature - next_feature];
            x.push(f.source.at_source(t - c.lag).expect("lag within range"));
        }
        y.extend_from_slice(base.y_row(r));
        y_prev.extend_from_slice(&base.y_prev[r * n_out..(r + 1) * n_out]);
    }

    let mut columns = base.columns.clone();
    columns.extend(new_columns);
    let set = SupervisedSet {
        n_inputs,
        x,
        horizons: base.horizons.clone(),
        y,
        y_prev,
        anchors: keep.iter().map(|&r| base.anchors[r]).collect(),
        row_dates: keep.iter().map(|&r| base.row_dates[r]).collect(),
        columns,
        axis_len: base.axis_len,
        date_split: base.date_split,
        split_index: 0,
        target_scale: base.target_scale,
    };
    set.finish()
}

impl SupervisedSet {
    fn finish(mut self) -> Result<Self> {
        if let Some(i) = self.x.iter().chain(&self.y).position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index: i });
        }
        let max_h = *self.horizons.last().expect("non-empty");
        self.split_index = self.anchors.iter().take_while(|&&t| t + max_h < self.date_split).count();
        Ok(self)
    }

    pub fn n_rows(&self) -> usize {
        self.anchors.len()
    }

    pub fn n_inputs(&self) -> usize {
        self.n_inputs
    }

    pub fn n_outputs(&self) -> usize {
        self.horizons.len()
    }

    pub fn horizons(&self) -> &[usize] {
        &self.horizons
    }

    /// Row-major inputs, `n_rows * n_inputs` values.
    pub fn inputs(&self) -> &[f64] {
        &self.x
    }

    /// Row-major targets on the transformed (unscaled) scale.
    pub fn targets(&self) -> &[f64] {
        &self.y
    }

    /// For every target, the target series value one step earlier.
    pub fn previous_targets(&self) -> &[f64] {
        &self.y_prev
    }

    pub fn x_row(&self, r: usize) -> &[f64] {
        &self.x[r * self.n_inputs..(r + 1) * self.n_inputs]
    }

    pub fn y_row(&self, r: usize) -> &[f64] {
        let k = self.horizons.len();
        &self.y[r * k..(r + 1) * k]
    }

    /// Source-axis index `t` of every row.
    pub fn anchors(&self) -> &[usize] {
        &self.anchors
    }

    pub fn row_dates(&self) -> &[NaiveDate] {
        &self.row_dates
    }

    pub fn columns(&self) -> &[ColumnInfo] {
        &self.columns
    }

    /// Number of leading training rows.
    pub fn split_index(&self) -> usize {
        self.split_index
    }

    pub fn train_rows(&self) -> Range<usize> {
        0..self.split_index
    }

    pub fn test_rows(&self) -> Range<usize> {
        self.split_index..self.n_rows()
    }

    pub fn date_split(&self) -> usize {
        self.date_split
    }

    /// Scaling applied to targets for training; network outputs are mapped
    /// back through it before evaluation.
    pub fn target_scale(&self) -> Option<&ScaleParams> {
        self.target_scale.as_ref()
    }

    pub fn with_target_scale(mut self, scale: Option<ScaleParams>) -> Self {
        self.target_scale = scale;
        self
    }

    /// Targets on the training scale.
    pub fn scaled_targets(&self) -> Vec<f64> {
        match &self.target_scale {
            Some(p) => self.y.iter().map(|&v| p.scale(v)).collect(),
            None => self.y.clone(),
        }
    }

    /// The same rows with only the target column for `horizons()[k]`.
    ///
    /// Rows, and therefore the split, stay those of the full multi-horizon set.
    pub fn select_horizon(&self, k: usize) -> Result<Self> {
        let n_out = self.horizons.len();
        if k >= n_out {
            return Err(Error::Dimension { expected: n_out, found: k });
        }
        let pick = |v: &[f64]| v.chunks(n_out).map(|row| row[k]).collect::<Vec<_>>();
        Ok(Self {
            horizons: alloc::vec![self.horizons[k]],
            y: pick(&self.y),
            y_prev: pick(&self.y_prev),
            ..self.clone()
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::{synthetic_start, weekdays_from};
    use crate::transform::{apply_recipe, Step};
    use alloc::vec;
    use proptest::prelude::*;

    fn axis(n: usize) -> Vec<NaiveDate> {
        weekdays_from(synthetic_start(), n)
    }

    fn ramp(n: usize) -> TransformedSeries {
        TransformedSeries::identity((0..n).map(|v| v as f64).collect())
    }

    #[test]
    fn single_series_row_count() {
        let s = ramp(10);
        let set = build_design(&[FeatureSpec::new(&s, 3)], &s, &[1], &axis(10), 10).unwrap();
        assert_eq!(set.n_rows(), 7);
        assert_eq!(set.n_inputs(), 3);
        assert_eq!(set.x_row(0), &[2.0, 1.0, 0.0]);
        assert_eq!(set.y_row(0), &[3.0]);
        assert_eq!(set.x_row(6), &[8.0, 7.0, 6.0]);
        assert_eq!(set.y_row(6), &[9.0]);
    }

    #[test]
    fn one_lag_pairs_consecutive_values() {
        let s = ramp(8);
        let set = build_design(&[FeatureSpec::new(&s, 1)], &s, &[1], &axis(8), 8).unwrap();
        assert_eq!(set.n_rows(), 7);
        for r in 0..7 {
            assert_eq!(set.y_row(r)[0], set.x_row(r)[0] + 1.0);
        }
    }

    #[test]
    fn momentum_and_force_columns_add_up() {
        let prices: Vec<f64> = (0..60).map(|t| 50.0 + (t as f64 * 0.3).sin()).collect();
        let m = apply_recipe(&prices, &[Step::Momentum { n: 1 }]).unwrap();
        let f = apply_recipe(&prices, &[Step::Force { n: 1 }]).unwrap();
        let set = build_design(
            &[FeatureSpec::new(&m, 7), FeatureSpec::new(&f, 7)],
            &f,
            &[1],
            &axis(60),
            54,
        )
        .unwrap();
        assert_eq!(set.n_inputs(), 14);
        // force starts at source index 2, so 7 lags need t >= 8
        assert_eq!(set.anchors()[0], 8);
        assert_eq!(set.n_rows(), 60 - 1 - 8);
    }

    #[test]
    fn split_follows_target_dates() {
        let s = ramp(20);
        let set = build_design(&[FeatureSpec::new(&s, 2)], &s, &[1, 3], &axis(20), 15).unwrap();
        // anchors 1..=16; training requires t + 3 < 15
        assert_eq!(set.anchors()[0], 1);
        assert_eq!(set.split_index(), 11);
        for r in set.train_rows() {
            assert!(set.anchors()[r] + 3 < 15);
        }
        assert_eq!(set.test_rows(), 11..16);
    }

    #[test]
    fn errors() {
        let s = ramp(5);
        let short = ramp(4);
        let dates = axis(5);
        assert_eq!(
            build_design(&[FeatureSpec::new(&s, 5)], &s, &[1], &dates, 5),
            Err(Error::NoUsableRows)
        );
        assert!(matches!(
            build_design(&[FeatureSpec::new(&short, 1)], &s, &[1], &dates, 5),
            Err(Error::MismatchedAxis { expected: 5, found: 4 })
        ));
        assert!(build_design(&[FeatureSpec::new(&s, 1)], &s, &[2, 1], &dates, 5).is_err());
        assert!(build_design(&[FeatureSpec::new(&s, 1)], &s, &[], &dates, 5).is_err());
        assert!(build_design(&[FeatureSpec::new(&s, 0)], &s, &[1], &dates, 5).is_err());
        let bad = TransformedSeries::identity(vec![1.0, f64::NAN, 1.0, 1.0, 1.0]);
        assert!(matches!(
            build_design(&[FeatureSpec::new(&bad, 1)], &s, &[1], &dates, 5),
            Err(Error::NonFinite { .. })
        ));
    }

    #[test]
    fn append_features_extends_columns() {
        let spot = ramp(30);
        let fut = TransformedSeries::identity((0..30).map(|v| 100.0 + v as f64).collect());
        let dates = axis(30);
        let base = build_design(&[FeatureSpec::new(&spot, 13)], &spot, &[1], &dates, 27).unwrap();
        let aug = append_features(&base, &[FeatureSpec::new(&fut, 1)]).unwrap();
        assert_eq!(aug.n_inputs(), 14);
        assert_eq!(aug.n_rows(), base.n_rows());
        assert_eq!(aug.targets(), base.targets());
        assert_eq!(aug.split_index(), base.split_index());
        assert_eq!(aug.x_row(0)[13], 112.0);

        assert_eq!(append_features(&base, &[]).unwrap(), base);

        // a longer reach trims the leading rows by the difference
        let longer = append_features(&base, &[FeatureSpec::new(&fut, 16)]).unwrap();
        assert_eq!(longer.n_rows(), base.n_rows() - 3);
        assert_eq!(longer.anchors()[0], 15);
        assert_eq!(longer.y_row(0), base.y_row(3));
    }

    #[test]
    fn append_rejects_foreign_axis() {
        let spot = ramp(30);
        let other = ramp(31);
        let base = build_design(&[FeatureSpec::new(&spot, 2)], &spot, &[1], &axis(30), 27).unwrap();
        assert!(matches!(
            append_features(&base, &[FeatureSpec::new(&other, 1)]),
            Err(Error::MismatchedAxis { .. })
        ));
    }

    #[test]
    fn select_horizon_keeps_rows() {
        let s = ramp(12);
        let set = build_design(&[FeatureSpec::new(&s, 2)], &s, &[1, 2, 3], &axis(12), 10).unwrap();
        let h2 = set.select_horizon(1).unwrap();
        assert_eq!(h2.horizons(), &[2]);
        assert_eq!(h2.n_rows(), set.n_rows());
        assert_eq!(h2.split_index(), set.split_index());
        for r in 0..h2.n_rows() {
            assert_eq!(h2.y_row(r)[0], set.y_row(r)[1]);
            assert_eq!(h2.y_row(r)[0], h2.anchors()[r] as f64 + 2.0);
            assert_eq!(h2.previous_targets()[r], h2.anchors()[r] as f64 + 1.0);
        }
        assert!(set.select_horizon(3).is_err());
    }

    #[test]
    fn scaled_targets_use_target_scale() {
        let s = ramp(6);
        let set = build_design(&[FeatureSpec::new(&s, 1)], &s, &[1], &axis(6), 6)
            .unwrap()
            .with_target_scale(Some(ScaleParams::new(1.0, 5.0).unwrap()));
        assert_eq!(set.scaled_targets(), vec![-1.0, -0.5, 0.0, 0.5, 1.0]);
        assert_eq!(set.targets(), &[1.0, 2.0, 3.0, 4.0, 5.0]);
    }

    proptest! {
        #[test]
        fn shifting_the_target_only_moves_y(
            n in 20usize..50,
            lags in 1usize..6,
            h in 1usize..4,
        ) {
            let s = TransformedSeries::identity((0..n).map(|v| (v as f64).sin()).collect());
            let shifted_values: Vec<f64> = (0..n).map(|t| ((t + h).min(n - 1) as f64).sin()).collect();
            let shifted = TransformedSeries::identity(shifted_values);
            let dates = axis(n);
            let a = build_design(&[FeatureSpec::new(&s, lags)], &s, &[h], &dates, n).unwrap();
            let b = build_design(&[FeatureSpec::new(&s, lags)], &shifted, &[h], &dates, n).unwrap();
            prop_assert_eq!(a.inputs(), b.inputs());
            for r in 0..a.n_rows() {
                let t = a.anchors()[r];
                if t + 2 * h < n {
                    prop_assert_eq!(b.y_row(r)[0], s.values()[t + 2 * h]);
                }
            }
        }

        #[test]
        fn rebuild_is_deterministic(n in 10usize..40, lags in 1usize..5) {
            let s = TransformedSeries::identity((0..n).map(|v| (v as f64).cos()).collect());
            let dates = axis(n);
            let a = build_design(&[FeatureSpec::new(&s, lags)], &s, &[1], &dates, n / 2);
            let b = build_design(&[FeatureSpec::new(&s, lags)], &s, &[1], &dates, n / 2);
            prop_assert_eq!(a, b);
        }
    }
}
