//! Two-layer Q-network: `sigmoid(W2 · relu(W1 · s + b1) + b2)`, trained with
//! Adam on the squared TD error of the taken action.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::Experience;
use crate::error::{Error, Result};
use crate::rng::SimRng;

/// Parameters are stored flat and row-major: `W1 (hidden x input)`, `b1`,
/// `W2 (output x hidden)`, `b2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QNetwork {
    pub input: usize,
    pub hidden: usize,
    pub output: usize,
    pub params: Vec<f64>,
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

impl QNetwork {
    pub fn param_count(input: usize, hidden: usize, output: usize) -> usize {
        hidden * input + hidden + output * hidden + output
    }

    pub fn zeros(input: usize, hidden: usize, output: usize) -> Self {
        QNetwork { input, hidden, output, params: vec![0.0; Self::param_count(input, hidden, output)] }
    }

    /// Uniform `(-1/sqrt(fan_in), 1/sqrt(fan_in))` weights and biases.
    pub fn init(input: usize, hidden: usize, output: usize, rng: &mut SimRng) -> Self {
        let mut net = Self::zeros(input, hidden, output);
        let (_, _, w2, _) = net.offsets();
        let a1 = 1.0 / (input as f64).sqrt();
        let a2 = 1.0 / (hidden as f64).sqrt();
        for (k, p) in net.params.iter_mut().enumerate() {
            let a = if k < w2 { a1 } else { a2 };
            *p = rng.random_range(-a..a);
        }
        net
    }

    pub fn from_params(input: usize, hidden: usize, output: usize, params: Vec<f64>) -> Result<Self> {
        let expected = Self::param_count(input, hidden, output);
        if params.len() != expected {
            return Err(Error::DimMismatch { expected, got: params.len() });
        }
        Ok(QNetwork { input, hidden, output, params })
    }

    /// Start offsets of `W1`, `b1`, `W2`, `b2`.
    fn offsets(&self) -> (usize, usize, usize, usize) {
        let b1 = self.hidden * self.input;
        let w2 = b1 + self.hidden;
        let b2 = w2 + self.output * self.hidden;
        (0, b1, w2, b2)
    }

    pub fn forward(&self, s: &[f64]) -> Result<Vec<f64>> {
        if s.len() != self.input {
            return Err(Error::DimMismatch { expected: self.input, got: s.len() });
        }
        let mut hidden = vec![0.0; self.hidden];
        let mut out = vec![0.0; self.output];
        self.forward_into(s, &mut hidden, &mut out);
        Ok(out)
    }

    /// Fills post-ReLU hidden activations and sigmoid outputs.
    fn forward_into(&self, s: &[f64], hidden: &mut [f64], out: &mut [f64]) {
        let (_, b1, w2, b2) = self.offsets();
        let p = &self.params;
        for h in 0..self.hidden {
            let row = &p[h * self.input..(h + 1) * self.input];
            let z: f64 = p[b1 + h] + row.iter().zip(s).map(|(w, x)| w * x).sum::<f64>();
            hidden[h] = z.max(0.0);
        }
        for o in 0..self.output {
            let row = &p[w2 + o * self.hidden..w2 + (o + 1) * self.hidden];
            let z: f64 = p[b2 + o] + row.iter().zip(hidden.iter()).map(|(w, x)| w * x).sum::<f64>();
            out[o] = sigmoid(z);
        }
    }

    fn max_q(&self, s: &[f64], hidden: &mut [f64], out: &mut [f64]) -> f64 {
        self.forward_into(s, hidden, out);
        out.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    fn targets(&self, target: &QNetwork, batch: &[Experience], gamma: f64) -> Vec<f64> {
        let mut hidden = vec![0.0; target.hidden];
        let mut out = vec![0.0; target.output];
        batch
            .iter()
            .map(|e| {
                if e.terminal {
                    e.reward
                } else {
                    e.reward + gamma * target.max_q(e.next.as_slice(), &mut hidden, &mut out)
                }
            })
            .collect()
    }

    /// Mean over the batch of `(y - Q(s, a))^2`.
    pub fn loss(&self, target: &QNetwork, batch: &[Experience], gamma: f64) -> f64 {
        let ys = self.targets(target, batch, gamma);
        let mut hidden = vec![0.0; self.hidden];
        let mut out = vec![0.0; self.output];
        let total: f64 = batch
            .iter()
            .zip(&ys)
            .map(|(e, y)| {
                self.forward_into(e.state.as_slice(), &mut hidden, &mut out);
                (y - out[e.action]).powi(2)
            })
            .sum();
        total / batch.len() as f64
    }

    /// Loss and its gradient with respect to `params`; targets are constants.
    pub fn loss_and_grad(&self, target: &QNetwork, batch: &[Experience], gamma: f64) -> (f64, Vec<f64>) {
        let ys = self.targets(target, batch, gamma);
        let (_, b1, w2, b2) = self.offsets();
        let mut grad = vec![0.0; self.params.len()];
        let mut hidden = vec![0.0; self.hidden];
        let mut out = vec![0.0; self.output];
        let scale = 1.0 / batch.len() as f64;
        let mut total = 0.0;
        for (e, y) in batch.iter().zip(&ys) {
            let s = e.state.as_slice();
            self.forward_into(s, &mut hidden, &mut out);
            let a = e.action;
            let residual = out[a] - y;
            total += residual * residual;
            // d/dz2 of (sigmoid(z2) - y)^2
            let dz2 = 2.0 * residual * out[a] * (1.0 - out[a]) * scale;
            grad[b2 + a] += dz2;
            let w2_row = w2 + a * self.hidden;
            for h in 0..self.hidden {
                grad[w2_row + h] += dz2 * hidden[h];
                if hidden[h] > 0.0 {
                    let dz1 = dz2 * self.params[w2_row + h];
                    grad[b1 + h] += dz1;
                    for (i, x) in s.iter().enumerate() {
                        grad[h * self.input + i] += dz1 * x;
                    }
                }
            }
        }
        (total * scale, grad)
    }

    /// One Adam step on the batch. Returns the pre-update loss.
    pub fn train_step(&mut self, adam: &mut Adam, target: &QNetwork, batch: &[Experience], gamma: f64) -> f64 {
        assert!(!batch.is_empty(), "empty minibatch");
        let (loss, grad) = self.loss_and_grad(target, batch, gamma);
        adam.step(&mut self.params, &grad);
        loss
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Adam {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    m: Vec<f64>,
    v: Vec<f64>,
    t: u64,
}

impl Adam {
    pub fn new(n_params: usize, lr: f64) -> Self {
        Adam { lr, beta1: 0.9, beta2: 0.999, eps: 1e-8, m: vec![0.0; n_params], v: vec![0.0; n_params], t: 0 }
    }

    pub fn step(&mut self, params: &mut [f64], grad: &[f64]) {
        self.t += 1;
        let bc1 = 1.0 - self.beta1.powi(self.t as i32);
        let bc2 = 1.0 - self.beta2.powi(self.t as i32);
        for k in 0..params.len() {
            self.m[k] = self.beta1 * self.m[k] + (1.0 - self.beta1) * grad[k];
            self.v[k] = self.beta2 * self.v[k] + (1.0 - self.beta2) * grad[k] * grad[k];
            let m_hat = self.m[k] / bc1;
            let v_hat = self.v[k] / bc2;
            params[k] -= self.lr * m_hat / (v_hat.sqrt() + self.eps);
        }
    }
}
