//! CART trees, random forests, gradient boosting and impurity importances.

mod forest;
mod gbm;
mod tree;

pub use forest::{cv_max_features, fit_forest, fit_forest_with, ForestFit, MaxFeaturesCv, DEFAULT_N_TREES};
pub use gbm::{fit_gbm, GbmConfig, GbmFit};
pub use tree::{fit_tree, CartParams, MaxFeatures, Node, SplitCriterion, Tree};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EnsembleError {
    #[error("no training rows")]
    EmptyData,
    #[error("label must contain both classes")]
    SingleClassLabel,
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("expected {expected} columns, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("{0}")]
    Folds(String),
}

/// Features ranked by weight (descending), ties by name.
pub fn tree_importances(weights: &[f64], names: &[String]) -> Vec<(String, f64)> {
    let mut v: Vec<(String, f64)> = names.iter().cloned().zip(weights.iter().copied()).collect();
    v.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    v
}

/// Scale to unit sum; an all-zero vector stays zero.
pub(crate) fn normalize(v: &mut [f64]) {
    let s: f64 = v.iter().sum();
    if s > 0.0 {
        v.iter_mut().for_each(|w| *w /= s);
    }
}

fn check_binary(y: &[u8]) -> Result<(), EnsembleError> {
    if y.is_empty() {
        return Err(EnsembleError::EmptyData);
    }
    let ones = y.iter().filter(|&&v| v == 1).count();
    if ones == 0 || ones == y.len() {
        return Err(EnsembleError::SingleClassLabel);
    }
    Ok(())
}
