//! Forecast evaluation: direction hit rate, error statistics, Pearson
//! correlation and the information coefficient against a random-walk
//! predictor.
//!
//! Inputs are always on the transformed (relative-change) scale, so a
//! positive value means "up".

use alloc::vec::Vec;

use crate::error::{Error, Result};

fn check_pair(a: &[f64], b: &[f64]) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch { expected: a.len(), found: b.len() });
    }
    if a.is_empty() {
        return Err(Error::Empty("metric input"));
    }
    Ok(())
}

/// Fraction of samples with `target * output > 0`.
///
/// A zero on either side is a miss.
pub fn hit_rate(targets: &[f64], outputs: &[f64]) -> Result<f64> {
    check_pair(targets, outputs)?;
    let hits = targets.iter().zip(outputs).filter(|(t, o)| **t * **o > 0.0).count();
    Ok(hits as f64 / targets.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ErrorStats {
    pub rmse: f64,
    pub mse: f64,
    pub mae: f64,
    pub sse: f64,
    /// Pearson correlation; `None` when either side is constant or `n < 2`.
    pub r: Option<f64>,
    pub r_squared: Option<f64>,
}

pub fn error_stats(targets: &[f64], outputs: &[f64]) -> Result<ErrorStats> {
    check_pair(targets, outputs)?;
    let n = targets.len() as f64;
    let (sse, sae) = targets.iter().zip(outputs).fold((0.0, 0.0), |(sq, ab), (t, o)| {
        let e = o - t;
        (sq + e * e, ab + libm::fabs(e))
    });
    let mse = sse / n;
    let r = pearson(targets, outputs);
    Ok(ErrorStats { rmse: libm::sqrt(mse), mse, mae: sae / n, sse, r, r_squared: r.map(|r| r * r) })
}

fn pearson(a: &[f64], b: &[f64]) -> Option<f64> {
    if a.len() < 2 {
        return None;
    }
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if saa == 0.0 || sbb == 0.0 {
        return None;
    }
    Some((sab / libm::sqrt(saa * sbb)).clamp(-1.0, 1.0))
}

/// `sqrt(sum (y_t - x_t)^2) / sqrt(sum (x_t - x_{t-1})^2)`.
///
/// `previous[t]` holds `x_{t-1}` for `actual[t] = x_t`. Values below 1 beat
/// the naive "no change" forecast `y_t = x_{t-1}`.
pub fn info_coefficient(actual: &[f64], previous: &[f64], predicted: &[f64]) -> Result<f64> {
    check_pair(actual, predicted)?;
    check_pair(actual, previous)?;
    let num: f64 = predicted.iter().zip(actual).map(|(y, x)| (y - x) * (y - x)).sum();
    let den: f64 = actual.iter().zip(previous).map(|(x, p)| (x - p) * (x - p)).sum();
    if den == 0.0 {
        return Err(Error::ConstantRange { min: actual[0], max: actual[0] });
    }
    Ok(libm::sqrt(num) / libm::sqrt(den))
}

/// [`info_coefficient`] for a contiguous series `x_0, x_1, .., x_n` and
/// predictions `y_1, .., y_n`.
pub fn info_coefficient_series(actual_with_start: &[f64], predicted: &[f64]) -> Result<f64> {
    let (prev, actual) = match actual_with_start.len() {
        0 => return Err(Error::Empty("metric input")),
        n => (&actual_with_start[..n - 1], &actual_with_start[1..]),
    };
    info_coefficient(actual, prev, predicted)
}

/// Every metric for one evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MetricBundle {
    /// Fraction in `[0, 1]`.
    pub hit_rate: f64,
    pub rmse: f64,
    pub mse: f64,
    pub mae: f64,
    pub sse: f64,
    pub r: Option<f64>,
    pub r_squared: Option<f64>,
    /// `None` when the actual series never changes.
    pub ic: Option<f64>,
    pub n: usize,
}

impl MetricBundle {
    pub fn compute(targets: &[f64], outputs: &[f64], previous: &[f64]) -> Result<Self> {
        let hit_rate = hit_rate(targets, outputs)?;
        let e = error_stats(targets, outputs)?;
        let ic = match info_coefficient(targets, previous, outputs) {
            Ok(ic) => Some(ic),
            Err(Error::ConstantRange { .. }) => None,
            Err(other) => return Err(other),
        };
        Ok(Self {
            hit_rate,
            rmse: e.rmse,
            mse: e.mse,
            mae: e.mae,
            sse: e.sse,
            r: e.r,
            r_squared: e.r_squared,
            ic,
            n: targets.len(),
        })
    }
}

/// Mean and sample standard deviation over trials.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Spread {
    pub mean: f64,
    pub std: f64,
}

impl Spread {
    /// Sample standard deviation (`n - 1` denominator); zero for one value.
    pub fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let std = if values.len() < 2 {
            0.0
        } else {
            libm::sqrt(values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0))
        };
        Some(Self { mean, std })
    }
}

/// Per-metric spread of several [`MetricBundle`]s.
///
/// Optional metrics are summarized over the trials that report them.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MetricSummary {
    pub hit_rate: Spread,
    pub rmse: Spread,
    pub mse: Spread,
    pub mae: Spread,
    pub sse: Spread,
    pub r: Option<Spread>,
    pub r_squared: Option<Spread>,
    pub ic: Option<Spread>,
    pub n: usize,
}

impl MetricSummary {
    pub fn of(bundles: &[MetricBundle]) -> Result<Self> {
        if bundles.is_empty() {
            return Err(Error::Empty("metric bundles"));
        }
        let req = |f: fn(&MetricBundle) -> f64| {
            Spread::of(&bundles.iter().map(f).collect::<Vec<_>>()).expect("non-empty")
        };
        let opt = |f: fn(&MetricBundle) -> Option<f64>| {
            Spread::of(&bundles.iter().filter_map(f).collect::<Vec<_>>())
        };
        Ok(Self {
            hit_rate: req(|b| b.hit_rate),
            rmse: req(|b| b.rmse),
            mse: req(|b| b.mse),
            mae: req(|b| b.mae),
            sse: req(|b| b.sse),
            r: opt(|b| b.r),
            r_squared: opt(|b| b.r_squared),
            ic: opt(|b| b.ic),
            n: bundles[0].n,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn hit_rate_examples() {
        assert_eq!(hit_rate(&[1.0, -1.0, 1.0], &[2.0, -3.0, 0.5]).unwrap(), 1.0);
        assert_eq!(hit_rate(&[1.0, -1.0, 1.0], &[-2.0, 3.0, -0.5]).unwrap(), 0.0);
        assert_eq!(hit_rate(&[1.0, 1.0], &[0.0, 1.0]).unwrap(), 0.5);
        assert_eq!(hit_rate(&[0.0], &[1.0]).unwrap(), 0.0);
        assert_eq!(hit_rate(&[], &[]), Err(Error::Empty("metric input")));
        assert!(hit_rate(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn error_stats_examples() {
        let s = error_stats(&[0.5, 1.5, -2.0], &[0.5, 1.5, -2.0]).unwrap();
        assert_eq!((s.rmse, s.mse, s.mae, s.sse), (0.0, 0.0, 0.0, 0.0));
        assert!((s.r.unwrap() - 1.0).abs() < 1e-15);

        let s = error_stats(&[0.0, 0.0], &[3.0, 4.0]).unwrap();
        assert!((s.rmse - 12.5f64.sqrt()).abs() < 1e-15);
        assert!((s.rmse - 3.53553).abs() < 1e-5);
        assert_eq!(s.r, None);
        assert_eq!(s.r_squared, None);

        let t = [0.3, -1.0, 2.0, 0.7];
        let o: Vec<f64> = t.iter().map(|v| 2.0 * v + 1.0).collect();
        let s = error_stats(&t, &o).unwrap();
        assert!((s.r.unwrap() - 1.0).abs() < 1e-12);
        assert!((s.r_squared.unwrap() - 1.0).abs() < 1e-12);

        assert_eq!(error_stats(&[1.0], &[2.0]).unwrap().r, None);
    }

    #[test]
    fn info_coefficient_examples() {
        let x = [1.0, 2.0, 4.0];
        let ic = info_coefficient_series(&x, &[1.5, 3.0]).unwrap();
        assert!((ic - 0.5).abs() < 1e-15);
        assert_eq!(info_coefficient_series(&x, &[2.0, 4.0]).unwrap(), 0.0);
        assert_eq!(info_coefficient_series(&x, &[1.0, 2.0]).unwrap(), 1.0);
        assert!(matches!(
            info_coefficient_series(&[3.0, 3.0, 3.0], &[1.0, 2.0]),
            Err(Error::ConstantRange { .. })
        ));
    }

    #[test]
    fn bundle_handles_constant_actuals() {
        let b = MetricBundle::compute(&[1.0, 1.0], &[0.5, 2.0], &[1.0, 1.0]).unwrap();
        assert_eq!(b.ic, None);
        assert_eq!(b.r, None);
        assert_eq!(b.hit_rate, 1.0);
        assert_eq!(b.n, 2);
    }

    #[test]
    fn summary_of_one_has_zero_spread() {
        let b = MetricBundle::compute(&[1.0, -1.0, 0.5], &[0.5, 2.0, 0.1], &[0.0, 1.0, -1.0]).unwrap();
        let s = MetricSummary::of(&[b]).unwrap();
        assert_eq!(s.hit_rate, Spread { mean: b.hit_rate, std: 0.0 });
        assert_eq!(s.rmse.mean, b.rmse);
        assert_eq!(s.ic.unwrap().mean, b.ic.unwrap());
        assert!(MetricSummary::of(&[]).is_err());
        assert_eq!(Spread::of(&[1.0, 3.0]).unwrap(), Spread { mean: 2.0, std: 2f64.sqrt() });
    }

    proptest! {
        #[test]
        fn hit_rate_ignores_positive_rescaling(
            pairs in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..60),
            k in 1e-3f64..1e3,
        ) {
            let (t, o): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
            let scaled: Vec<f64> = o.iter().map(|v| v * k).collect();
            prop_assert_eq!(hit_rate(&t, &o).unwrap(), hit_rate(&t, &scaled).unwrap());
        }

        #[test]
        fn error_stats_are_symmetric(
            pairs in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..60),
        ) {
            let (t, o): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
            let a = error_stats(&t, &o).unwrap();
            let b = error_stats(&o, &t).unwrap();
            prop_assert!((a.sse - b.sse).abs() < 1e-12);
            prop_assert!((a.mae - b.mae).abs() < 1e-12);
            prop_assert!((a.rmse - a.mse.sqrt()).abs() < 1e-12);
            if let (Some(r), Some(r2)) = (a.r, a.r_squared) {
                prop_assert!((r2 - r * r).abs() < 1e-12);
            }
        }
    }
}
