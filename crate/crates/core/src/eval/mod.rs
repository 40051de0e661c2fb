//! Confusion matrices, classification metrics and k-fold cross-validation.

mod confusion;
mod cv;
mod folds;

pub use confusion::{confusion, metrics, ConfusionMatrix, Metrics};
pub use cv::{cross_validate, cross_validate_with, CvResult, FoldData, FoldResult};
pub use folds::{plain_kfold, stratified_kfold, Folds};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("non-binary value {value} at index {index}")]
    NonBinaryInput { index: usize, value: u8 },
    #[error("confusion matrix is empty")]
    EmptyMatrix,
    #[error("k = {k} exceeds the number of rows ({n})")]
    KTooLarge { k: usize, n: usize },
    #[error("k must be at least 2, got {0}")]
    InvalidK(usize),
    #[error("fold {fold}: {message}")]
    Fold { fold: usize, message: String },
}
