use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::forest::tree_rng;
use super::tree::{grow_tree, CartParams, Node, Ranks, Tree};
use super::{check_binary, normalize, EnsembleError};
use crate::linalg::sigmoid;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GbmConfig {
    pub learning_rate: f64,
    pub n_estimators: usize,
    pub params: CartParams,
}

impl Default for GbmConfig {
    fn default() -> Self {
        Self { learning_rate: 0.01, n_estimators: 500, params: CartParams::boosting() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GbmFit {
    /// Initial log-odds.
    pub f0: f64,
    pub trees: Vec<Tree>,
    pub learning_rate: f64,
    pub params: CartParams,
    pub importances: Vec<f64>,
    pub seed: u64,
    /// Binomial deviance on the training rows before any stage, then after each stage.
    pub train_deviance: Vec<f64>,
}

/// -2 log-likelihood of 0/1 labels under logits `f`.
fn deviance(f: &[f64], y: &[u8]) -> f64 {
    2.0 * f
        .iter()
        .zip(y)
        .map(|(&z, &t)| z.max(0.0) - t as f64 * z + (-z.abs()).exp().ln_1p())
        .sum::<f64>()
}

impl GbmFit {
    pub fn n_features(&self) -> usize {
        self.importances.len()
    }

    pub fn decision_function(&self, x: &DMatrix<f64>) -> Result<Vec<f64>, EnsembleError> {
        if x.ncols() != self.n_features() {
            return Err(EnsembleError::DimensionMismatch { expected: self.n_features(), found: x.ncols() });
        }
        Ok((0..x.nrows())
            .map(|i| {
                let mut f = self.f0;
                for t in &self.trees {
                    f += self.learning_rate * t.predict_row(x, i);
                }
                f
            })
            .collect())
    }

    pub fn predict_proba(&self, x: &DMatrix<f64>) -> Result<Vec<f64>, EnsembleError> {
        Ok(self.decision_function(x)?.into_iter().map(sigmoid).collect())
    }

    pub fn classify(&self, x: &DMatrix<f64>) -> Result<Vec<u8>, EnsembleError> {
        Ok(self.predict_proba(x)?.into_iter().map(|p| u8::from(p > 0.5)).collect())
    }
}

/// Binomial-deviance gradient boosting with one-step Newton leaf values.
pub fn fit_gbm(x: &DMatrix<f64>, y: &[u8], config: &GbmConfig, seed: u64) -> Result<GbmFit, EnsembleError> {
    config.params.validate()?;
    check_binary(y)?;
    if x.nrows() != y.len() {
        return Err(EnsembleError::DimensionMismatch { expected: x.nrows(), found: y.len() });
    }
    if !(config.learning_rate > 0.0 && config.learning_rate <= 1.0) {
        return Err(EnsembleError::InvalidParams(format!("learning_rate {} outside (0, 1]", config.learning_rate)));
    }
    if config.n_estimators == 0 {
        return Err(EnsembleError::InvalidParams("n_estimators must be at least 1".into()));
    }
    let n = y.len();
    let pbar = y.iter().filter(|&&v| v == 1).count() as f64 / n as f64;
    let f0 = (pbar / (1.0 - pbar)).ln();
    let mut f = vec![f0; n];
    let mut trace = vec![deviance(&f, y)];
    let mut trees = Vec::with_capacity(config.n_estimators);
    let mut importances = vec![0.0; x.ncols()];
    let ranks = Ranks::new(x);
    for m in 0..config.n_estimators {
        let p: Vec<f64> = f.iter().map(|&z| sigmoid(z)).collect();
        let r: Vec<f64> = y.iter().zip(&p).map(|(&t, &pi)| t as f64 - pi).collect();
        let mut tree = grow_tree(x, &ranks, &r, (0..n).collect(), &config.params, &mut tree_rng(seed, m));
        let leaf_of: Vec<usize> = (0..n).map(|i| tree.leaf_index(x, i)).collect();
        let mut num = vec![0.0; tree.nodes.len()];
        let mut den = vec![0.0; tree.nodes.len()];
        for i in 0..n {
            num[leaf_of[i]] += r[i];
            den[leaf_of[i]] += p[i] * (1.0 - p[i]);
        }
        for (j, node) in tree.nodes.iter_mut().enumerate() {
            if let Node::Leaf { value } = node {
                *value = if den[j] < 1e-150 { 0.0 } else { num[j] / den[j] };
            }
        }
        for i in 0..n {
            if let Node::Leaf { value } = tree.nodes[leaf_of[i]] {
                f[i] += config.learning_rate * value;
            }
        }
        for (acc, v) in importances.iter_mut().zip(&tree.importance) {
            *acc += v;
        }
        trace.push(deviance(&f, y));
        trees.push(tree);
    }
    normalize(&mut importances);
    Ok(GbmFit { f0, trees, learning_rate: config.learning_rate, params: config.params, importances, seed, train_deviance: trace })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::MaxFeatures;
    use crate::sim;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn noisy(seed: u64, n: usize) -> (DMatrix<f64>, Vec<u8>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = DMatrix::from_vec(n, 4, sim::normals(&mut rng, n * 4));
        let e = sim::normals(&mut rng, n);
        let y = (0..n).map(|i| u8::from(x[(i, 0)] - 0.5 * x[(i, 1)] * x[(i, 2)] + e[i] > 0.8)).collect();
        (x, y)
    }

    #[test]
    fn initial_prediction_is_prevalence() {
        let (x, y) = noisy(1, 200);
        let cfg = GbmConfig { n_estimators: 1, ..Default::default() };
        let mut fit = fit_gbm(&x, &y, &cfg, 0).unwrap();
        fit.trees.clear();
        let prev = y.iter().filter(|&&v| v == 1).count() as f64 / 200.0;
        for p in fit.predict_proba(&x).unwrap() {
            assert!((p - prev).abs() < 1e-12);
        }
    }

    #[test]
    fn separable_data_fits_exactly() {
        let x = DMatrix::from_fn(100, 2, |i, j| if j == 0 { i as f64 } else { ((i * 37) % 11) as f64 });
        let y: Vec<u8> = (0..100).map(|i| u8::from((30..70).contains(&i))).collect();
        let cfg = GbmConfig { learning_rate: 1.0, n_estimators: 200, params: CartParams { max_features: MaxFeatures::All, ..CartParams::boosting() } };
        let fit = fit_gbm(&x, &y, &cfg, 3).unwrap();
        assert_eq!(fit.classify(&x).unwrap(), y);
    }

    #[test]
    fn deviance_non_increasing() {
        let (x, y) = noisy(2, 300);
        for lr in [0.01, 0.1] {
            let fit = fit_gbm(&x, &y, &GbmConfig { learning_rate: lr, n_estimators: 200, ..Default::default() }, 5).unwrap();
            assert_eq!(fit.train_deviance.len(), 201);
            assert!(fit.train_deviance.windows(2).all(|w| w[1] <= w[0]));
        }
    }

    #[test]
    fn stump_importance_concentrates() {
        let x = DMatrix::from_fn(60, 3, |i, j| if j == 2 { i as f64 } else { 1.0 });
        let y: Vec<u8> = (0..60).map(|i| u8::from(i >= 25)).collect();
        let cfg = GbmConfig { n_estimators: 1, params: CartParams { max_depth: 1, ..CartParams::boosting() }, ..Default::default() };
        let fit = fit_gbm(&x, &y, &cfg, 0).unwrap();
        assert_eq!(fit.importances, vec![0.0, 0.0, 1.0]);
    }

    #[test]
    fn invalid_learning_rate() {
        let (x, y) = noisy(3, 50);
        let cfg = GbmConfig { learning_rate: 0.0, ..Default::default() };
        assert!(matches!(fit_gbm(&x, &y, &cfg, 0), Err(EnsembleError::InvalidParams(_))));
    }
}
