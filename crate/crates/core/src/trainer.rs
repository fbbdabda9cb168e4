//! Network fitting by Levenberg-Marquardt or full-batch gradient descent, and
//! multi-seed trial averaging.

use alloc::boxed::Box;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::metrics::{MetricBundle, MetricSummary};
use crate::network::{Layout, Network};
use crate::supervised::SupervisedSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum Algorithm {
    #[default]
    Lm,
    Gd,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct TrainOptions {
    pub algorithm: Algorithm,
    pub max_iterations: usize,
    /// Initial Levenberg-Marquardt damping.
    pub mu_init: f64,
    /// Damping is divided by this on an accepted step, multiplied on a rejected one.
    pub mu_factor: f64,
    /// Training stops once damping would exceed this.
    pub mu_max: f64,
    /// Damping never drops below this, so it can always grow back.
    pub mu_min: f64,
    pub grad_tol: f64,
    /// Stop once the SSE reaches this value; `0` disables the check.
    pub loss_tol: f64,
    pub gd_learning_rate: f64,
    pub seed: u64,
}

impl Default for TrainOptions {
    fn default() -> Self {
        Self {
            algorithm: Algorithm::Lm,
            max_iterations: 1000,
            mu_init: 0.01,
            mu_factor: 10.0,
            mu_max: 1e10,
            mu_min: 1e-20,
            grad_tol: 1e-7,
            loss_tol: 0.0,
            gd_learning_rate: 0.01,
            seed: 0,
        }
    }
}

impl TrainOptions {
    pub fn validate(&self) -> Result<()> {
        if self.max_iterations == 0 {
            return Err(Error::InvalidParameter("max_iterations must be at least 1"));
        }
        if self.mu_init.is_nan() || self.mu_init <= 0.0 {
            return Err(Error::InvalidParameter("mu_init must be positive"));
        }
        if self.mu_factor.is_nan() || self.mu_factor <= 1.0 {
            return Err(Error::InvalidParameter("mu_factor must exceed 1"));
        }
        if !(self.mu_min > 0.0 && self.mu_min <= self.mu_init && self.mu_init <= self.mu_max) {
            return Err(Error::InvalidParameter("damping bounds must satisfy 0 < mu_min <= mu_init <= mu_max"));
        }
        if !(self.grad_tol >= 0.0 && self.loss_tol >= 0.0 && self.gd_learning_rate >= 0.0) {
            return Err(Error::InvalidParameter("tolerances and learning rate must be non-negative"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum StopReason {
    MaxIterations,
    GradientTolerance,
    MuMax,
    LossTolerance,
    /// Gradient descent loss grew past ten times its starting value.
    Diverged,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainReport {
    pub final_net: Network,
    pub iterations_used: usize,
    /// SSE before training followed by the SSE after every iteration.
    pub loss_curve: Vec<f64>,
    pub stop_reason: StopReason,
}

/// A nonlinear least-squares problem in flattened parameters.
pub trait LeastSquaresProblem {
    fn params(&self) -> &[f64];
    fn set_params(&mut self, params: &[f64]);
    fn residuals(&self) -> Vec<f64>;
    /// Jacobian of [`residuals`](Self::residuals), one row per residual.
    fn jacobian(&self) -> DMatrix<f64>;
}

/// Outcome of [`levenberg_marquardt`].
#[derive(Debug, Clone, PartialEq)]
pub struct LmOutcome {
    pub iterations: usize,
    pub loss_curve: Vec<f64>,
    pub stop_reason: StopReason,
    pub final_mu: f64,
}

fn sum_sq(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum()
}

/// `J^T J`, through the blocked matrix product when `std` is enabled.
#[cfg(feature = "std")]
fn gram(jac: &DMatrix<f64>) -> DMatrix<f64> {
    jac.transpose() * jac
}

/// `J^T J` from column dot products, filling one triangle and mirroring it.
#[cfg(not(feature = "std"))]
fn gram(jac: &DMatrix<f64>) -> DMatrix<f64> {
    let n = jac.ncols();
    let mut out = DMatrix::zeros(n, n);
    for a in 0..n {
        let ca = jac.column(a);
        for b in a..n {
            let v = ca.dot(&jac.column(b));
            out[(a, b)] = v;
            out[(b, a)] = v;
        }
    }
    out
}

/// Minimizes the sum of squared residuals of `problem` in place.
///
/// Each iteration solves `(J^T J + mu I) delta = -J^T r`. A step is accepted
/// only if it lowers the SSE, so the returned SSE never exceeds the initial one.
pub fn levenberg_marquardt<P: LeastSquaresProblem>(problem: &mut P, opts: &TrainOptions) -> Result<LmOutcome> {
    opts.validate()?;
    let mut residuals = DVector::from_vec(problem.residuals());
    let mut sse = sum_sq(residuals.as_slice());
    if !sse.is_finite() {
        return Err(Error::NonFiniteLoss { iteration: 0 });
    }
    let mut loss_curve = alloc::vec![sse];
    let mut mu = opts.mu_init;
    let n = problem.params().len();

    for iteration in 0..opts.max_iterations {
        if opts.loss_tol > 0.0 && sse <= opts.loss_tol {
            return Ok(LmOutcome { iterations: iteration, loss_curve, stop_reason: StopReason::LossTolerance, final_mu: mu });
        }
        let jac = problem.jacobian();
        let grad = jac.tr_mul(&residuals);
        if grad.norm() < opts.grad_tol {
            return Ok(LmOutcome { iterations: iteration, loss_curve, stop_reason: StopReason::GradientTolerance, final_mu: mu });
        }
        let jtj = gram(&jac);
        let start = DVector::from_column_slice(problem.params());

        loop {
            let mut damped = jtj.clone();
            for i in 0..n {
                damped[(i, i)] += mu;
            }
            if let Some(chol) = damped.cholesky() {
                let delta = chol.solve(&-&grad);
                let trial = &start + &delta;
                problem.set_params(trial.as_slice());
                let r = DVector::from_vec(problem.residuals());
                let trial_sse = sum_sq(r.as_slice());
                if trial_sse.is_finite() && trial_sse < sse {
                    residuals = r;
                    sse = trial_sse;
                    mu = (mu / opts.mu_factor).max(opts.mu_min);
                    break;
                }
                problem.set_params(start.as_slice());
            }
            mu *= opts.mu_factor;
            if mu > opts.mu_max {
                return Ok(LmOutcome { iterations: iteration, loss_curve, stop_reason: StopReason::MuMax, final_mu: mu });
            }
        }
        loss_curve.push(sse);
    }
    Ok(LmOutcome {
        iterations: opts.max_iterations,
        loss_curve,
        stop_reason: StopReason::MaxIterations,
        final_mu: mu,
    })
}

/// Row-major training inputs with matching targets.
#[derive(Debug, Clone, Copy)]
pub struct Batch<'a> {
    pub inputs: &'a [f64],
    pub targets: &'a [f64],
}

impl<'a> Batch<'a> {
    pub fn new(inputs: &'a [f64], targets: &'a [f64]) -> Self {
        Self { inputs, targets }
    }

    fn check(&self, layout: &Layout) -> Result<()> {
        if self.inputs.is_empty() {
            return Err(Error::Empty("training batch"));
        }
        if self.inputs.len() % layout.n_inputs != 0 {
            return Err(Error::Dimension { expected: layout.n_inputs, found: self.inputs.len() % layout.n_inputs });
        }
        let expected = self.inputs.len() / layout.n_inputs * layout.n_outputs;
        if self.targets.len() != expected {
            return Err(Error::Dimension { expected, found: self.targets.len() });
        }
        Ok(())
    }
}

struct NetworkFit<'a> {
    net: Network,
    batch: Batch<'a>,
}

impl LeastSquaresProblem for NetworkFit<'_> {
    fn params(&self) -> &[f64] {
        self.net.params()
    }

    fn set_params(&mut self, params: &[f64]) {
        self.net.params_mut().copy_from_slice(params);
    }

    fn residuals(&self) -> Vec<f64> {
        self.net.residuals(self.batch.inputs, self.batch.targets).expect("batch checked")
    }

    fn jacobian(&self) -> DMatrix<f64> {
        self.net.jacobian(self.batch.inputs).expect("batch checked")
    }
}

pub fn fit_lm(net: Network, batch: Batch<'_>, opts: &TrainOptions) -> Result<TrainReport> {
    batch.check(net.layout())?;
    let mut fit = NetworkFit { net, batch };
    let out = levenberg_marquardt(&mut fit, opts)?;
    Ok(TrainReport {
        final_net: fit.net,
        iterations_used: out.iterations,
        loss_curve: out.loss_curve,
        stop_reason: out.stop_reason,
    })
}

/// Full-batch steps `params -= lr * grad(0.5 * SSE)`.
pub fn fit_gd(mut net: Network, batch: Batch<'_>, opts: &TrainOptions) -> Result<TrainReport> {
    opts.validate()?;
    batch.check(net.layout())?;
    let lr = opts.gd_learning_rate;
    let initial = net.sse(batch.inputs, batch.targets)?;
    if !initial.is_finite() {
        return Err(Error::NonFiniteLoss { iteration: 0 });
    }
    let mut sse = initial;
    let mut loss_curve = alloc::vec![sse];

    let report = |net, iterations_used, loss_curve, stop_reason| TrainReport {
        final_net: net,
        iterations_used,
        loss_curve,
        stop_reason,
    };

    for iteration in 0..opts.max_iterations {
        if opts.loss_tol > 0.0 && sse <= opts.loss_tol {
            return Ok(report(net, iteration, loss_curve, StopReason::LossTolerance));
        }
        let grad = net.gradient(batch.inputs, batch.targets)?;
        if libm::sqrt(sum_sq(&grad)) < opts.grad_tol {
            return Ok(report(net, iteration, loss_curve, StopReason::GradientTolerance));
        }
        let before = net.params().to_vec();
        for (p, g) in net.params_mut().iter_mut().zip(&grad) {
            *p -= lr * g;
        }
        let next = net.sse(batch.inputs, batch.targets)?;
        if !next.is_finite() {
            return Err(Error::NonFiniteLoss { iteration: iteration + 1 });
        }
        if next > 10.0 * initial {
            net.params_mut().copy_from_slice(&before);
            return Ok(report(net, iteration, loss_curve, StopReason::Diverged));
        }
        sse = next;
        loss_curve.push(sse);
    }
    Ok(report(net, opts.max_iterations, loss_curve, StopReason::MaxIterations))
}

/// Trains with the algorithm selected in `opts`.
pub fn fit(net: Network, batch: Batch<'_>, opts: &TrainOptions) -> Result<TrainReport> {
    match opts.algorithm {
        Algorithm::Lm => fit_lm(net, batch, opts),
        Algorithm::Gd => fit_gd(net, batch, opts),
    }
}

/// Metrics of `net` over `rows` of a single-horizon set, with outputs mapped
/// back through the set's target scale.
pub fn evaluate(net: &Network, set: &SupervisedSet, rows: core::ops::Range<usize>) -> Result<MetricBundle> {
    if set.n_outputs() != 1 {
        return Err(Error::Dimension { expected: 1, found: set.n_outputs() });
    }
    let ni = set.n_inputs();
    let inputs = &set.inputs()[rows.start * ni..rows.end * ni];
    let mut outputs = net.forward_batch(inputs)?;
    if let Some(scale) = set.target_scale() {
        outputs.iter_mut().for_each(|o| *o = scale.unscale(*o));
    }
    MetricBundle::compute(
        &set.targets()[rows.clone()],
        &outputs,
        &set.previous_targets()[rows],
    )
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialResult {
    pub index: usize,
    pub seed: u64,
    pub report: TrainReport,
    pub in_sample: MetricBundle,
    /// `None` when the set has no test rows.
    pub out_of_sample: Option<MetricBundle>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultiTrialReport {
    /// Sorted by trial index.
    pub trials: Vec<TrialResult>,
    pub in_sample: MetricSummary,
    pub out_of_sample: Option<MetricSummary>,
    /// Standard deviation of the hit rate (out of sample when available) is
    /// within the stability threshold.
    pub stable: bool,
}

impl MultiTrialReport {
    pub fn seeds(&self) -> Vec<u64> {
        self.trials.iter().map(|t| t.seed).collect()
    }

    /// Trial with the highest out-of-sample hit rate (in-sample if there is
    /// no test data); the earliest trial wins ties.
    pub fn best_trial(&self) -> &TrialResult {
        let score = |t: &TrialResult| t.out_of_sample.as_ref().unwrap_or(&t.in_sample).hit_rate;
        self.trials
            .iter()
            .reduce(|best, t| if score(t) > score(best) { t } else { best })
            .expect("at least one trial")
    }
}

/// Default ceiling on the hit-rate standard deviation (3 percentage points).
pub const DEFAULT_STABILITY_THRESHOLD: f64 = 0.03;

/// Trains trial `index` (seed `opts.seed + index`) on the training rows of a
/// single-horizon set and evaluates it on both partitions.
pub fn run_trial(layout: Layout, set: &SupervisedSet, opts: &TrainOptions, index: usize) -> Result<TrialResult> {
    let wrap = |e: Error| Error::Trial { trial: index, source: Box::new(e) };
    if layout.n_inputs != set.n_inputs() || layout.n_outputs != set.n_outputs() {
        return Err(wrap(Error::Dimension { expected: set.n_inputs(), found: layout.n_inputs }));
    }
    let train = set.train_rows();
    if train.is_empty() {
        return Err(wrap(Error::Empty("training rows")));
    }
    let seed = opts.seed.wrapping_add(index as u64);
    let targets = set.scaled_targets();
    let batch = Batch::new(
        &set.inputs()[..train.end * set.n_inputs()],
        &targets[..train.end * set.n_outputs()],
    );
    let opts = TrainOptions { seed, ..*opts };
    let report = fit(Network::init(layout, seed), batch, &opts).map_err(wrap)?;
    let in_sample = evaluate(&report.final_net, set, train).map_err(wrap)?;
    let test = set.test_rows();
    let out_of_sample = if test.is_empty() {
        None
    } else {
        Some(evaluate(&report.final_net, set, test).map_err(wrap)?)
    };
    Ok(TrialResult { index, seed, report, in_sample, out_of_sample })
}

/// Aggregates trials (in any order) into means, spreads and the stability flag.
pub fn summarize(mut trials: Vec<TrialResult>, stability_threshold: f64) -> Result<MultiTrialReport> {
    if trials.is_empty() {
        return Err(Error::Empty("trial list"));
    }
    trials.sort_by_key(|t| t.index);
    let ins: Vec<MetricBundle> = trials.iter().map(|t| t.in_sample).collect();
    let outs: Vec<MetricBundle> = trials.iter().filter_map(|t| t.out_of_sample).collect();
    let in_sample = MetricSummary::of(&ins)?;
    let out_of_sample = if outs.len() == trials.len() { Some(MetricSummary::of(&outs)?) } else { None };
    let spread = out_of_sample.as_ref().unwrap_or(&in_sample).hit_rate.std;
    Ok(MultiTrialReport { trials, in_sample, out_of_sample, stable: spread <= stability_threshold })
}

/// Runs `n_trials` trials sequentially and summarizes them.
pub fn multi_trial(
    layout: Layout,
    set: &SupervisedSet,
    opts: &TrainOptions,
    n_trials: usize,
    stability_threshold: f64,
) -> Result<MultiTrialReport> {
    if n_trials == 0 {
        return Err(Error::InvalidParameter("n_trials must be at least 1"));
    }
    let trials = (0..n_trials)
        .map(|i| run_trial(layout, set, opts, i))
        .collect::<Result<Vec<_>>>()?;
    summarize(trials, stability_threshold)
}
