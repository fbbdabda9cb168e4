//! Fully connected input -> hidden -> output network with a linear output
//! layer.
//!
//! All parameters live in one flat vector ordered `W1` (hidden x input,
//! row-major), `b1`, `W2` (output x hidden, row-major), `b2`. The Jacobian
//! columns and gradients use the same order.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Hidden-layer nonlinearity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum Activation {
    #[default]
    Tanh,
    Logistic,
    /// No nonlinearity; turns the network into an (over-parameterized) linear
    /// model, which is useful for checking the trainer against least squares.
    Identity,
}

impl Activation {
    pub fn eval(self, z: f64) -> f64 {
        match self {
            Activation::Tanh => libm::tanh(z),
            Activation::Logistic => 1.0 / (1.0 + libm::exp(-z)),
            Activation::Identity => z,
        }
    }

    /// Derivative expressed through the activation value `a = eval(z)`.
    pub fn slope(self, a: f64) -> f64 {
        match self {
            Activation::Tanh => 1.0 - a * a,
            Activation::Logistic => a * (1.0 - a),
            Activation::Identity => 1.0,
        }
    }

    /// Largest value of the derivative over the real line.
    pub fn max_slope(self) -> f64 {
        match self {
            Activation::Tanh | Activation::Identity => 1.0,
            Activation::Logistic => 0.25,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Layout {
    pub n_inputs: usize,
    pub n_hidden: usize,
    pub n_outputs: usize,
    pub hidden_activation: Activation,
}

impl Layout {
    pub fn new(n_inputs: usize, n_hidden: usize, n_outputs: usize, hidden_activation: Activation) -> Result<Self> {
        if n_inputs == 0 || n_hidden == 0 || n_outputs == 0 {
            return Err(Error::InvalidParameter("layer sizes must be at least 1"));
        }
        Ok(Self { n_inputs, n_hidden, n_outputs, hidden_activation })
    }

    pub fn n_params(&self) -> usize {
        self.n_hidden * (self.n_inputs + 1) + self.n_outputs * (self.n_hidden + 1)
    }

    fn w1_len(&self) -> usize {
        self.n_hidden * self.n_inputs
    }

    fn b1_start(&self) -> usize {
        self.w1_len()
    }

    fn w2_start(&self) -> usize {
        self.b1_start() + self.n_hidden
    }

    fn b2_start(&self) -> usize {
        self.w2_start() + self.n_outputs * self.n_hidden
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    layout: Layout,
    params: Vec<f64>,
}

impl Network {
    /// Weights uniform in `[-1/sqrt(fan_in), 1/sqrt(fan_in)]`, biases zero.
    pub fn init(layout: Layout, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut params = vec![0.0; layout.n_params()];
        let bound1 = 1.0 / libm::sqrt(layout.n_inputs as f64);
        for w in &mut params[..layout.w1_len()] {
            *w = rng.random_range(-bound1..=bound1);
        }
        let bound2 = 1.0 / libm::sqrt(layout.n_hidden as f64);
        for w in &mut params[layout.w2_start()..layout.b2_start()] {
            *w = rng.random_range(-bound2..=bound2);
        }
        Self { layout, params }
    }

    /// Rebuilds a network from its flattened parameters.
    pub fn from_params(layout: Layout, params: Vec<f64>) -> Result<Self> {
        if params.len() != layout.n_params() {
            return Err(Error::Dimension { expected: layout.n_params(), found: params.len() });
        }
        if let Some(index) = params.iter().position(|p| !p.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self { layout, params })
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    /// Flattened parameters.
    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn into_params(self) -> Vec<f64> {
        self.params
    }

    pub(crate) fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn w1(&self) -> &[f64] {
        &self.params[..self.layout.w1_len()]
    }

    pub fn b1(&self) -> &[f64] {
        &self.params[self.layout.b1_start()..self.layout.w2_start()]
    }

    pub fn w2(&self) -> &[f64] {
        &self.params[self.layout.w2_start()..self.layout.b2_start()]
    }

    pub fn b2(&self) -> &[f64] {
        &self.params[self.layout.b2_start()..]
    }

    fn hidden_into(&self, x: &[f64], hidden: &mut [f64]) {
        let l = &self.layout;
        let (w1, b1) = (self.w1(), self.b1());
        for (j, h) in hidden.iter_mut().enumerate() {
            let row = &w1[j * l.n_inputs..(j + 1) * l.n_inputs];
            let z = b1[j] + row.iter().zip(x).map(|(w, xi)| w * xi).sum::<f64>();
            *h = l.hidden_activation.eval(z);
        }
    }

    fn output_into(&self, hidden: &[f64], out: &mut [f64]) {
        let nh = self.layout.n_hidden;
        let (w2, b2) = (self.w2(), self.b2());
        for (k, o) in out.iter_mut().enumerate() {
            let row = &w2[k * nh..(k + 1) * nh];
            *o = b2[k] + row.iter().zip(hidden).map(|(w, a)| w * a).sum::<f64>();
        }
    }

    fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.layout.n_inputs {
            return Err(Error::Dimension { expected: self.layout.n_inputs, found: x.len() });
        }
        Ok(())
    }

    fn check_batch(&self, inputs: &[f64]) -> Result<usize> {
        let ni = self.layout.n_inputs;
        if inputs.is_empty() {
            return Err(Error::Empty("input batch"));
        }
        if inputs.len() % ni != 0 {
            return Err(Error::Dimension { expected: ni, found: inputs.len() % ni });
        }
        Ok(inputs.len() / ni)
    }

    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_input(x)?;
        let mut hidden = vec![0.0; self.layout.n_hidden];
        let mut out = vec![0.0; self.layout.n_outputs];
        self.hidden_into(x, &mut hidden);
        self.output_into(&hidden, &mut out);
        Ok(out)
    }

    /// Outputs for a row-major batch, `n_samples * n_outputs` values.
    pub fn forward_batch(&self, inputs: &[f64]) -> Result<Vec<f64>> {
        let n = self.check_batch(inputs)?;
        let l = &self.layout;
        let mut hidden = vec![0.0; l.n_hidden];
        let mut out = vec![0.0; n * l.n_outputs];
        for (x, o) in inputs.chunks(l.n_inputs).zip(out.chunks_mut(l.n_outputs)) {
            self.hidden_into(x, &mut hidden);
            self.output_into(&hidden, o);
        }
        Ok(out)
    }

    /// Jacobian of the outputs (equivalently of the residuals
    /// `output - target`) with respect to the flattened parameters.
    ///
    /// Row `s * n_outputs + k` belongs to output `k` of sample `s`.
    pub fn jacobian(&self, inputs: &[f64]) -> Result<DMatrix<f64>> {
        let n = self.check_batch(inputs)?;
        let l = self.layout;
        let mut jac = DMatrix::zeros(n * l.n_outputs, l.n_params());
        let mut hidden = vec![0.0; l.n_hidden];
        let mut slope = vec![0.0; l.n_hidden];
        let w2 = self.w2();

        for (s, x) in inputs.chunks(l.n_inputs).enumerate() {
            self.hidden_into(x, &mut hidden);
            for (d, &a) in slope.iter_mut().zip(&hidden) {
                *d = l.hidden_activation.slope(a);
            }
            for k in 0..l.n_outputs {
                let row = s * l.n_outputs + k;
                for j in 0..l.n_hidden {
                    let back = w2[k * l.n_hidden + j] * slope[j];
                    for (i, &xi) in x.iter().enumerate() {
                        jac[(row, j * l.n_inputs + i)] = back * xi;
                    }
                    jac[(row, l.b1_start() + j)] = back;
                    jac[(row, l.w2_start() + k * l.n_hidden + j)] = hidden[j];
                }
                jac[(row, l.b2_start() + k)] = 1.0;
            }
        }
        Ok(jac)
    }

    /// Gradient of `0.5 * sum((output - target)^2)` by backpropagation.
    pub fn gradient(&self, inputs: &[f64], targets: &[f64]) -> Result<Vec<f64>> {
        let n = self.check_batch(inputs)?;
        let l = self.layout;
        if targets.len() != n * l.n_outputs {
            return Err(Error::Dimension { expected: n * l.n_outputs, found: targets.len() });
        }
        let mut grad = vec![0.0; l.n_params()];
        let mut hidden = vec![0.0; l.n_hidden];
        let mut out = vec![0.0; l.n_outputs];
        let mut delta_hidden = vec![0.0; l.n_hidden];
        let w2 = self.w2().to_vec();

        for (x, t) in inputs.chunks(l.n_inputs).zip(targets.chunks(l.n_outputs)) {
            self.hidden_into(x, &mut hidden);
            self.output_into(&hidden, &mut out);
            delta_hidden.iter_mut().for_each(|d| *d = 0.0);
            for k in 0..l.n_outputs {
                let e = out[k] - t[k];
                for j in 0..l.n_hidden {
                    grad[l.w2_start() + k * l.n_hidden + j] += e * hidden[j];
                    delta_hidden[j] += e * w2[k * l.n_hidden + j];
                }
                grad[l.b2_start() + k] += e;
            }
            for j in 0..l.n_hidden {
                let d = delta_hidden[j] * l.hidden_activation.slope(hidden[j]);
                for (i, &xi) in x.iter().enumerate() {
                    grad[j * l.n_inputs + i] += d * xi;
                }
                grad[l.b1_start() + j] += d;
            }
        }
        Ok(grad)
    }

    /// Residuals `output - target` for a batch.
    pub fn residuals(&self, inputs: &[f64], targets: &[f64]) -> Result<Vec<f64>> {
        let mut out = self.forward_batch(inputs)?;
        if out.len() != targets.len() {
            return Err(Error::Dimension { expected: out.len(), found: targets.len() });
        }
        out.iter_mut().zip(targets).for_each(|(o, t)| *o -= t);
        Ok(out)
    }

    /// Sum of squared residuals.
    pub fn sse(&self, inputs: &[f64], targets: &[f64]) -> Result<f64> {
        Ok(self.residuals(inputs, targets)?.iter().map(|r| r * r).sum())
    }
}
