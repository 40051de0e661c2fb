use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::tree::{grow_tree, CartParams, MaxFeatures, Ranks, Tree};
use super::{check_binary, normalize, EnsembleError};
use crate::eval::stratified_kfold;

pub const DEFAULT_N_TREES: usize = 500;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestFit {
    pub trees: Vec<Tree>,
    pub params: CartParams,
    /// Impurity decrease summed over trees, normalized to unit sum.
    pub importances: Vec<f64>,
    pub seed: u64,
    pub bootstrap: bool,
}

/// Generator for tree `b`: the seed picks the key, the tree index picks the stream.
pub(crate) fn tree_rng(seed: u64, b: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(b as u64);
    rng
}

impl ForestFit {
    pub fn n_features(&self) -> usize {
        self.importances.len()
    }

    /// Mean leaf probability over trees.
    pub fn predict_proba(&self, x: &DMatrix<f64>) -> Result<Vec<f64>, EnsembleError> {
        if x.ncols() != self.n_features() {
            return Err(EnsembleError::DimensionMismatch { expected: self.n_features(), found: x.ncols() });
        }
        let b = self.trees.len() as f64;
        Ok((0..x.nrows())
            .map(|i| self.trees.iter().map(|t| t.predict_row(x, i)).sum::<f64>() / b)
            .collect())
    }

    pub fn classify(&self, x: &DMatrix<f64>) -> Result<Vec<u8>, EnsembleError> {
        Ok(self.predict_proba(x)?.into_iter().map(|p| u8::from(p > 0.5)).collect())
    }
}

pub fn fit_forest(x: &DMatrix<f64>, y: &[u8], params: &CartParams, n_trees: usize, seed: u64) -> Result<ForestFit, EnsembleError> {
    fit_forest_with(x, y, params, n_trees, seed, true)
}

/// Random forest; with `bootstrap = false` every tree sees all rows once.
pub fn fit_forest_with(x: &DMatrix<f64>, y: &[u8], params: &CartParams, n_trees: usize, seed: u64, bootstrap: bool) -> Result<ForestFit, EnsembleError> {
    params.validate()?;
    check_binary(y)?;
    if x.nrows() != y.len() {
        return Err(EnsembleError::DimensionMismatch { expected: x.nrows(), found: y.len() });
    }
    if n_trees == 0 {
        return Err(EnsembleError::InvalidParams("n_trees must be at least 1".into()));
    }
    let n = x.nrows();
    let target: Vec<f64> = y.iter().map(|&v| v as f64).collect();
    let ranks = Ranks::new(x);
    let trees: Vec<Tree> = (0..n_trees)
        .into_par_iter()
        .map(|b| {
            let mut rng = tree_rng(seed, b);
            let rows: Vec<usize> = if bootstrap { (0..n).map(|_| rng.random_range(0..n)).collect() } else { (0..n).collect() };
            grow_tree(x, &ranks, &target, rows, params, &mut rng)
        })
        .collect();
    let mut importances = vec![0.0; x.ncols()];
    for t in &trees {
        for (acc, v) in importances.iter_mut().zip(&t.importance) {
            *acc += v;
        }
    }
    normalize(&mut importances);
    Ok(ForestFit { trees, params: *params, importances, seed, bootstrap })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaxFeaturesCv {
    pub best: usize,
    /// (m, mean held-out squared error of the class-1 probability)
    pub curve: Vec<(usize, f64)>,
}

/// Choose the per-node feature count by stratified k-fold CV; ties keep the smaller m.
pub fn cv_max_features(
    x: &DMatrix<f64>,
    y: &[u8],
    candidates: &[usize],
    params: &CartParams,
    n_trees: usize,
    k: usize,
    seed: u64,
) -> Result<MaxFeaturesCv, EnsembleError> {
    let p = x.ncols();
    if candidates.is_empty() || candidates.iter().any(|&m| m == 0 || m > p) {
        return Err(EnsembleError::InvalidParams(format!("candidates must lie in 1..={p}")));
    }
    let folds = stratified_kfold(y, k, seed).map_err(|e| EnsembleError::Folds(e.to_string()))?;
    let mut curve = Vec::with_capacity(candidates.len());
    for &m in candidates {
        let pm = CartParams { max_features: MaxFeatures::Count(m), ..*params };
        let mut total = 0.0;
        for f in 0..k {
            let tr = folds.train_rows(f);
            let te = folds.test_rows(f);
            let ytr: Vec<u8> = tr.iter().map(|&i| y[i]).collect();
            let fit = fit_forest(&x.select_rows(&tr), &ytr, &pm, n_trees, seed)?;
            let prob = fit.predict_proba(&x.select_rows(&te))?;
            total += te.iter().zip(&prob).map(|(&i, p)| (p - y[i] as f64).powi(2)).sum::<f64>() / te.len() as f64;
        }
        curve.push((m, total / k as f64));
    }
    let best = curve
        .iter()
        .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)))
        .expect("non-empty candidates")
        .0;
    Ok(MaxFeaturesCv { best, curve })
}
