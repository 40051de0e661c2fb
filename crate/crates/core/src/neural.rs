//! Feed-forward ReLU network trained by full-batch gradient descent on logistic loss.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::sigmoid;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NeuralError {
    #[error("expected {expected} input columns, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("loss became non-finite at epoch {epoch}")]
    NonFiniteLoss { epoch: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MlpConfig {
    /// Hidden layer widths; the output layer (width 1) is implicit.
    pub hidden: Vec<usize>,
    pub learning_rate: f64,
    pub epochs: usize,
}

impl Default for MlpConfig {
    fn default() -> Self {
        Self { hidden: vec![8, 5], learning_rate: 0.01, epochs: 2000 }
    }
}

/// Dense layer with a row-major `n_out × n_in` weight matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub n_in: usize,
    pub n_out: usize,
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
}

impl Layer {
    fn w(&self, o: usize, i: usize) -> f64 {
        self.weights[o * self.n_in + i]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpFit {
    pub config: MlpConfig,
    pub layers: Vec<Layer>,
    /// Mean training loss after each gradient step.
    pub loss_history: Vec<f64>,
}

impl MlpFit {
    pub fn layer_sizes(&self) -> Vec<usize> {
        let mut s = vec![self.layers[0].n_in];
        s.extend(self.layers.iter().map(|l| l.n_out));
        s
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].n_in
    }

    pub fn n_parameters(&self) -> usize {
        self.layers.iter().map(|l| l.weights.len() + l.biases.len()).sum()
    }

    fn param_mut(&mut self, k: usize) -> &mut f64 {
        let mut k = k;
        for l in &mut self.layers {
            if k < l.weights.len() {
                return &mut l.weights[k];
            }
            k -= l.weights.len();
            if k < l.biases.len() {
                return &mut l.biases[k];
            }
            k -= l.biases.len();
        }
        panic!("parameter index out of range")
    }

    pub fn predict_proba(&self, x: &DMatrix<f64>) -> Result<Vec<f64>, NeuralError> {
        Ok(forward(self, x)?.into_iter().map(sigmoid).collect())
    }

    pub fn classify(&self, x: &DMatrix<f64>) -> Result<Vec<u8>, NeuralError> {
        Ok(self.predict_proba(x)?.into_iter().map(|p| u8::from(p > 0.5)).collect())
    }
}

/// Seeded He-uniform weights in (−√(2/fan_in), √(2/fan_in)); zero biases.
pub fn init(config: &MlpConfig, input_dim: usize, seed: u64) -> Result<MlpFit, NeuralError> {
    if input_dim == 0 || config.hidden.contains(&0) {
        return Err(NeuralError::InvalidConfig("layer widths must be at least 1".into()));
    }
    if !(config.learning_rate > 0.0) {
        return Err(NeuralError::InvalidConfig(format!("learning_rate {}", config.learning_rate)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sizes = vec![input_dim];
    sizes.extend(&config.hidden);
    sizes.push(1);
    let layers = sizes
        .windows(2)
        .map(|w| {
            let (n_in, n_out) = (w[0], w[1]);
            let s = (2.0 / n_in as f64).sqrt();
            Layer { n_in, n_out, weights: (0..n_in * n_out).map(|_| rng.random_range(-s..s)).collect(), biases: vec![0.0; n_out] }
        })
        .collect();
    Ok(MlpFit { config: config.clone(), layers, loss_history: Vec::new() })
}

/// Per-layer activations for one row: `acts[0]` is the input, the last holds the logit.
fn forward_row(model: &MlpFit, input: &[f64], acts: &mut Vec<Vec<f64>>) {
    acts.clear();
    acts.push(input.to_vec());
    let last = model.layers.len() - 1;
    for (li, l) in model.layers.iter().enumerate() {
        let prev = &acts[li];
        let out: Vec<f64> = (0..l.n_out)
            .map(|o| {
                let z = l.biases[o] + (0..l.n_in).map(|i| l.w(o, i) * prev[i]).sum::<f64>();
                if li < last {
                    z.max(0.0)
                } else {
                    z
                }
            })
            .collect();
        acts.push(out);
    }
}

fn rows_of(x: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..x.nrows()).map(|i| x.row(i).iter().copied().collect()).collect()
}

/// Raw output logits (no sigmoid).
pub fn forward(model: &MlpFit, x: &DMatrix<f64>) -> Result<Vec<f64>, NeuralError> {
    if x.ncols() != model.input_dim() {
        return Err(NeuralError::DimensionMismatch { expected: model.input_dim(), found: x.ncols() });
    }
    let mut acts = Vec::new();
    Ok(rows_of(x)
        .iter()
        .map(|r| {
            forward_row(model, r, &mut acts);
            acts.last().unwrap()[0]
        })
        .collect())
}

/// softplus(z) − y·z in its overflow-free form.
fn bce_with_logits(z: f64, y: f64) -> f64 {
    z.max(0.0) - y * z + (-z.abs()).exp().ln_1p()
}

/// Mean loss and its gradient (flattened in `param_mut` order), summed in row order.
fn loss_and_gradient(model: &MlpFit, rows: &[Vec<f64>], y: &[f64]) -> (f64, Vec<f64>) {
    let n = rows.len() as f64;
    let mut grads: Vec<(Vec<f64>, Vec<f64>)> = model.layers.iter().map(|l| (vec![0.0; l.weights.len()], vec![0.0; l.n_out])).collect();
    let mut loss = 0.0;
    let mut acts = Vec::new();
    for (r, &t) in rows.iter().zip(y) {
        forward_row(model, r, &mut acts);
        let z = acts.last().unwrap()[0];
        loss += bce_with_logits(z, t);
        let mut delta = vec![(sigmoid(z) - t) / n];
        for li in (0..model.layers.len()).rev() {
            let l = &model.layers[li];
            let input = &acts[li];
            let (gw, gb) = &mut grads[li];
            for o in 0..l.n_out {
                gb[o] += delta[o];
                for i in 0..l.n_in {
                    gw[o * l.n_in + i] += delta[o] * input[i];
                }
            }
            if li > 0 {
                delta = (0..l.n_in)
                    .map(|i| {
                        if input[i] > 0.0 {
                            (0..l.n_out).map(|o| l.w(o, i) * delta[o]).sum()
                        } else {
                            0.0
                        }
                    })
                    .collect();
            }
        }
    }
    let flat = grads.into_iter().flat_map(|(w, b)| w.into_iter().chain(b)).collect();
    (loss / n, flat)
}

fn check_inputs(model: &MlpFit, x: &DMatrix<f64>, y: &[u8]) -> Result<(), NeuralError> {
    if x.ncols() != model.input_dim() {
        return Err(NeuralError::DimensionMismatch { expected: model.input_dim(), found: x.ncols() });
    }
    if x.nrows() != y.len() {
        return Err(NeuralError::DimensionMismatch { expected: x.nrows(), found: y.len() });
    }
    Ok(())
}

/// Full-batch gradient descent for `config.epochs` steps.
///
/// Rows are put in a canonical order first so the result does not depend on
/// the order in which the caller supplies them.
pub fn train(model: &MlpFit, x: &DMatrix<f64>, y: &[u8]) -> Result<MlpFit, NeuralError> {
    check_inputs(model, x, y)?;
    let mut order: Vec<(Vec<f64>, u8)> = rows_of(x).into_iter().zip(y.iter().copied()).collect();
    order.sort_by(|a, b| {
        a.0.iter()
            .zip(&b.0)
            .map(|(p, q)| p.total_cmp(q))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.1.cmp(&b.1))
    });
    let rows: Vec<Vec<f64>> = order.iter().map(|r| r.0.clone()).collect();
    let target: Vec<f64> = order.iter().map(|r| r.1 as f64).collect();

    let mut fit = model.clone();
    let lr = fit.config.learning_rate;
    let (_, mut grad) = loss_and_gradient(&fit, &rows, &target);
    for epoch in 0..fit.config.epochs {
        for (k, g) in grad.iter().enumerate() {
            *fit.param_mut(k) -= lr * g;
        }
        let (loss, next) = loss_and_gradient(&fit, &rows, &target);
        if !loss.is_finite() {
            return Err(NeuralError::NonFiniteLoss { epoch });
        }
        fit.loss_history.push(loss);
        grad = next;
    }
    Ok(fit)
}

/// Backprop gradient of the mean loss, flattened layer by layer (weights then biases).
pub fn gradient(model: &MlpFit, x: &DMatrix<f64>, y: &[u8]) -> Result<Vec<f64>, NeuralError> {
    check_inputs(model, x, y)?;
    let target: Vec<f64> = y.iter().map(|&v| v as f64).collect();
    Ok(loss_and_gradient(model, &rows_of(x), &target).1)
}

pub fn mean_loss(model: &MlpFit, x: &DMatrix<f64>, y: &[u8]) -> Result<f64, NeuralError> {
    let z = forward(model, x)?;
    Ok(z.iter().zip(y).map(|(&z, &t)| bce_with_logits(z, t as f64)).sum::<f64>() / y.len() as f64)
}

/// Largest relative error between backprop and central finite differences over all parameters.
pub fn gradient_check(model: &MlpFit, x: &DMatrix<f64>, y: &[u8], epsilon: f64) -> Result<f64, NeuralError> {
    let analytic = gradient(model, x, y)?;
    let mut probe = model.clone();
    let mut worst: f64 = 0.0;
    for (k, &a) in analytic.iter().enumerate() {
        let orig = *probe.param_mut(k);
        *probe.param_mut(k) = orig + epsilon;
        let up = mean_loss(&probe, x, y)?;
        *probe.param_mut(k) = orig - epsilon;
        let down = mean_loss(&probe, x, y)?;
        *probe.param_mut(k) = orig;
        let numeric = (up - down) / (2.0 * epsilon);
        worst = worst.max((numeric - a).abs() / (numeric.abs() + a.abs()).max(1e-8));
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim;

    fn batch(seed: u64, n: usize, p: usize) -> (DMatrix<f64>, Vec<u8>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = DMatrix::from_vec(n, p, sim::normals(&mut rng, n * p));
        let y = (0..n).map(|i| u8::from(x[(i, 0)] + 0.5 * x[(i, 1 % p)] > 0.0)).collect();
        (x, y)
    }

    #[test]
    fn init_shapes_and_determinism() {
        let m = init(&MlpConfig::default(), 12, 4).unwrap();
        assert_eq!(m.layer_sizes(), vec![12, 8, 5, 1]);
        assert_eq!(m.layers.iter().map(|l| (l.n_out, l.n_in)).collect::<Vec<_>>(), [(8, 12), (5, 8), (1, 5)]);
        assert!(m.layers.iter().all(|l| l.biases.iter().all(|&b| b == 0.0)));
        assert_eq!(m, init(&MlpConfig::default(), 12, 4).unwrap());
        let bound = (2.0f64 / 12.0).sqrt();
        assert!(m.layers[0].weights.iter().all(|w| w.abs() < bound));
    }

    #[test]
    fn zero_network_outputs_zero_logits() {
        let mut m = init(&MlpConfig::default(), 3, 0).unwrap();
        for l in &mut m.layers {
            l.weights.fill(0.0);
        }
        let (x, y) = batch(1, 10, 3);
        assert_eq!(forward(&m, &x).unwrap(), vec![0.0; 10]);
        let g = gradient(&m, &x, &y).unwrap();
        let expected = y.iter().map(|&t| 0.5 - t as f64).sum::<f64>() / 10.0;
        assert!((g.last().unwrap() - expected).abs() < 1e-10);
    }

    #[test]
    fn no_hidden_layer_is_affine() {
        let cfg = MlpConfig { hidden: vec![], ..Default::default() };
        let m = init(&cfg, 2, 3).unwrap();
        let x = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, -0.5, 3.0]);
        let z = forward(&m, &x).unwrap();
        let w = &m.layers[0].weights;
        assert_eq!(z[0], w[0] * 1.0 + w[1] * 2.0);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let (x, y) = batch(2, 16, 12);
        let m = init(&MlpConfig::default(), 12, 7).unwrap();
        assert!(gradient_check(&m, &x, &y, 1e-5).unwrap() < 1e-5);
        let mut short = m.clone();
        short.config.epochs = 100;
        let trained = train(&short, &x, &y).unwrap();
        assert!(gradient_check(&trained, &x, &y, 1e-5).unwrap() < 1e-5);
    }

    #[test]
    fn zero_epochs_is_identity() {
        let (x, y) = batch(3, 20, 4);
        let m = init(&MlpConfig { epochs: 0, ..Default::default() }, 4, 1).unwrap();
        assert_eq!(train(&m, &x, &y).unwrap(), m);
    }

    #[test]
    fn loss_non_increasing_and_permutation_invariant() {
        let (x, y) = batch(4, 60, 4);
        let m = init(&MlpConfig { epochs: 300, ..Default::default() }, 4, 2).unwrap();
        let a = train(&m, &x, &y).unwrap();
        assert_eq!(a.loss_history.len(), 300);
        assert!(a.loss_history.windows(2).all(|w| w[1] <= w[0]));
        let perm: Vec<usize> = (0..60).rev().collect();
        let yp: Vec<u8> = perm.iter().map(|&i| y[i]).collect();
        let b = train(&m, &x.select_rows(&perm), &yp).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn dimension_errors() {
        let m = init(&MlpConfig::default(), 3, 0).unwrap();
        assert!(matches!(forward(&m, &DMatrix::zeros(2, 4)), Err(NeuralError::DimensionMismatch { .. })));
        assert!(init(&MlpConfig { learning_rate: 0.0, ..Default::default() }, 3, 0).is_err());
    }
}
