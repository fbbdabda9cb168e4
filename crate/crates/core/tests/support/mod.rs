//! Independent reference implementations used as test oracles.

#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use oilcast_core::network::{Activation, Layout, Network};
use oilcast_core::trainer::LeastSquaresProblem;
use oilcast_core::transform::Step;
use rand::Rng;

/// Entries smaller than this are compared on an absolute scale.
pub const RELATIVE_FLOOR: f64 = 1e-2;
pub const FD_STEP: f64 = 1e-6;

pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(RELATIVE_FLOOR)
}

pub fn random_instance(rng: &mut impl Rng) -> (Network, Vec<f64>, Vec<f64>) {
    let activation = if rng.random_bool(0.5) { Activation::Tanh } else { Activation::Logistic };
    let layout = Layout::new(
        rng.random_range(1..=20),
        rng.random_range(1..=10),
        rng.random_range(1..=3),
        activation,
    )
    .unwrap();
    let params = (0..layout.n_params()).map(|_| rng.random_range(-1.0..1.0)).collect();
    let net = Network::from_params(layout, params).unwrap();
    let samples = rng.random_range(1..=4);
    let inputs = (0..samples * layout.n_inputs).map(|_| rng.random_range(-1.0..1.0)).collect();
    let targets = (0..samples * layout.n_outputs).map(|_| rng.random_range(-1.0..1.0)).collect();
    (net, inputs, targets)
}

fn perturbed(net: &Network, i: usize, delta: f64) -> Network {
    let mut p = net.params().to_vec();
    p[i] += delta;
    Network::from_params(*net.layout(), p).unwrap()
}

/// `0.5 * SSE(up) - 0.5 * SSE(down)` summed per residual as
/// `0.5 (a - b)(a + b - 2t)`, which avoids cancelling two large totals.
fn half_sse_difference(up: &[f64], down: &[f64], targets: &[f64]) -> f64 {
    up.iter()
        .zip(down)
        .zip(targets)
        .map(|((a, b), t)| 0.5 * (a - b) * (a + b - 2.0 * t))
        .sum()
}

/// Largest relative error of the analytic Jacobian and of the loss gradient
/// against central finite differences.
pub fn finite_difference_errors(net: &Network, inputs: &[f64], targets: &[f64]) -> (f64, f64) {
    let jac = net.jacobian(inputs).unwrap();
    let grad = net.gradient(inputs, targets).unwrap();
    let (mut jac_err, mut grad_err) = (0.0f64, 0.0f64);
    for i in 0..net.params().len() {
        let up = perturbed(net, i, FD_STEP);
        let down = perturbed(net, i, -FD_STEP);
        let out_up = up.forward_batch(inputs).unwrap();
        let out_down = down.forward_batch(inputs).unwrap();
        for (row, (a, b)) in out_up.iter().zip(&out_down).enumerate() {
            let fd = (a - b) / (2.0 * FD_STEP);
            jac_err = jac_err.max(relative_error(jac[(row, i)], fd));
        }
        let fd = half_sse_difference(&out_up, &out_down, targets) / (2.0 * FD_STEP);
        grad_err = grad_err.max(relative_error(grad[i], fd));
    }
    (jac_err, grad_err)
}

/// Least-squares coefficients through an SVD of the design.
pub fn ols(x: &DMatrix<f64>, y: &DVector<f64>) -> DVector<f64> {
    x.clone().svd(true, true).solve(y, 1e-14).unwrap()
}

/// `residuals = X beta - y`, a problem whose Jacobian is `X` itself.
pub struct LinearModel {
    pub x: DMatrix<f64>,
    pub y: DVector<f64>,
    pub beta: Vec<f64>,
}

impl LeastSquaresProblem for LinearModel {
    fn params(&self) -> &[f64] {
        &self.beta
    }

    fn set_params(&mut self, params: &[f64]) {
        self.beta.copy_from_slice(params);
    }

    fn residuals(&self) -> Vec<f64> {
        (&self.x * DVector::from_column_slice(&self.beta) - &self.y).as_slice().to_vec()
    }

    fn jacobian(&self) -> DMatrix<f64> {
        self.x.clone()
    }
}

/// Value of the transform `recipe` at source index `t`, recomputed from the
/// raw prices without any intermediate series.
pub fn transformed_at(raw: &[f64], recipe: &[Step], t: isize) -> Option<f64> {
    if t < 0 || t as usize >= raw.len() {
        return None;
    }
    let Some((last, rest)) = recipe.split_last() else {
        return Some(raw[t as usize]);
    };
    let v = |s: isize| transformed_at(raw, rest, s);
    match *last {
        Step::MovingAverage { window } => {
            let w = window as isize;
            let mut sum = 0.0;
            for s in t - w + 1..=t {
                sum += v(s)?;
            }
            Some(sum / window as f64)
        }
        Step::Momentum { n } => {
            let (now, base) = (v(t)?, v(t - n as isize)?);
            Some((now - base) / base)
        }
        Step::Force { n } => {
            let n = n as isize;
            let (now, base, older) = (v(t)?, v(t - n)?, v(t - 2 * n)?);
            Some((now - 2.0 * base + older) / base)
        }
    }
}

pub fn random_recipe(rng: &mut impl Rng) -> Vec<Step> {
    let mut recipe = Vec::new();
    if rng.random_bool(0.5) {
        recipe.push(Step::MovingAverage { window: rng.random_range(1..=4) });
    }
    match rng.random_range(0..3) {
        0 => recipe.push(Step::Momentum { n: rng.random_range(1..=3) }),
        1 => recipe.push(Step::Force { n: rng.random_range(1..=2) }),
        _ => {}
    }
    recipe
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0)
}

/// Outcome of one brute-force alignment audit.
#[derive(Debug, Default)]
pub struct AuditOutcome {
    pub checked: usize,
    pub mismatches: usize,
}

/// Builds a random multi-feature design and re-derives every entry from the
/// raw prices by date index.
pub fn causality_audit(rng: &mut impl Rng) -> AuditOutcome {
    use oilcast_core::series::{synthetic_start, weekdays_from};
    use oilcast_core::supervised::{build_design, FeatureSpec};
    use oilcast_core::transform::apply_recipe;

    loop {
        let len = rng.random_range(8..=50);
        let n_features = rng.random_range(1..=3);
        let raws: Vec<Vec<f64>> = (0..n_features)
            .map(|_| (0..len).map(|_| rng.random_range(50.0..150.0)).collect())
            .collect();
        let recipes: Vec<Vec<Step>> = (0..n_features).map(|_| random_recipe(rng)).collect();
        let lags: Vec<usize> = (0..n_features).map(|_| rng.random_range(1..=10)).collect();
        let target_feature = rng.random_range(0..n_features);
        let n_h = rng.random_range(1..=3);
        let mut horizons: Vec<usize> = (1..=3).collect();
        while horizons.len() > n_h {
            horizons.remove(rng.random_range(0..horizons.len()));
        }
        let date_split = rng.random_range(0..=len);
        let dates = weekdays_from(synthetic_start(), len);

        let series: Vec<_> = raws
            .iter()
            .zip(&recipes)
            .map(|(raw, recipe)| apply_recipe(raw, recipe))
            .collect::<Result<_, _>>()
            .unwrap();
        let specs: Vec<_> = series.iter().zip(&lags).map(|(s, &l)| FeatureSpec::new(s, l)).collect();
        let max_h = *horizons.last().unwrap();

        // every anchor where all inputs and targets are defined
        let valid: Vec<usize> = (0..len)
            .filter(|&t| {
                let t = t as isize;
                let inputs_ok = (0..n_features).all(|f| {
                    (0..lags[f] as isize).all(|j| transformed_at(&raws[f], &recipes[f], t - j).is_some())
                });
                let targets_ok = horizons.iter().all(|&h| {
                    transformed_at(&raws[target_feature], &recipes[target_feature], t + h as isize).is_some()
                });
                inputs_ok && targets_ok
            })
            .collect();

        let set = match build_design(&specs, &series[target_feature], &horizons, &dates, date_split) {
            Ok(set) => set,
            Err(_) => {
                if valid.is_empty() {
                    continue;
                }
                return AuditOutcome { checked: 1, mismatches: 1 };
            }
        };

        let mut out = AuditOutcome::default();
        let mut check = |ok: bool| {
            out.checked += 1;
            if !ok {
                out.mismatches += 1;
            }
        };
        check(set.anchors() == valid.as_slice());
        check(set.n_inputs() == lags.iter().sum::<usize>());
        for (r, &t) in set.anchors().iter().enumerate() {
            check(set.row_dates()[r] == dates[t]);
            check((r < set.split_index()) == (t + max_h < date_split));
            let row = set.x_row(r);
            let mut col = 0;
            for f in 0..n_features {
                for j in 0..lags[f] {
                    let expect = transformed_at(&raws[f], &recipes[f], t as isize - j as isize);
                    check(expect.is_some_and(|e| close(e, row[col])));
                    col += 1;
                }
            }
            for (k, &h) in horizons.iter().enumerate() {
                let expect = transformed_at(&raws[target_feature], &recipes[target_feature], (t + h) as isize);
                check(expect.is_some_and(|e| close(e, set.y_row(r)[k])));
            }
        }
        return out;
    }
}

pub fn hit_rate_bf(t: &[f64], o: &[f64]) -> f64 {
    let mut hits = 0usize;
    for i in 0..t.len() {
        let same = (t[i] > 0.0 && o[i] > 0.0) || (t[i] < 0.0 && o[i] < 0.0);
        if same {
            hits += 1;
        }
    }
    hits as f64 / t.len() as f64
}

/// (rmse, mse, mae, sse, r) computed with explicit loops.
pub fn error_stats_bf(t: &[f64], o: &[f64]) -> (f64, f64, f64, f64, f64) {
    let n = t.len() as f64;
    let mut sse = 0.0;
    let mut sae = 0.0;
    for i in 0..t.len() {
        sse += (t[i] - o[i]).powi(2);
        sae += (t[i] - o[i]).abs();
    }
    let mt = t.iter().sum::<f64>() / n;
    let mo = o.iter().sum::<f64>() / n;
    let cov: f64 = (0..t.len()).map(|i| (t[i] - mt) * (o[i] - mo)).sum();
    let vt: f64 = t.iter().map(|v| (v - mt).powi(2)).sum();
    let vo: f64 = o.iter().map(|v| (v - mo).powi(2)).sum();
    (
        (sse / n).sqrt(),
        sse / n,
        sae / n,
        sse,
        cov / (vt.sqrt() * vo.sqrt()),
    )
}

/// Ic from a contiguous actual series `x_0..x_n` and predictions `y_1..y_n`.
pub fn ic_bf(x: &[f64], y: &[f64]) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for t in 1..x.len() {
        num += (y[t - 1] - x[t]).powi(2);
        den += (x[t] - x[t - 1]).powi(2);
    }
    (num / den).sqrt()
}
