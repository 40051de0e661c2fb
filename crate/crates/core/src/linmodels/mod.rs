//! OLS, maximum-likelihood Probit/Logit and elastic-net regression.

mod enet;
mod glm;
mod ols;

pub use enet::{
    cv_elastic_net, enet_importance, enet_objective, fit_elastic_net, lambda_max, EnetCvPoint, EnetCvResult, EnetFit, ENET_MAX_ITER, ENET_TOL,
};
pub use glm::{classify, fit_glm, fit_glm_with, predict_proba, Family, GlmFit, GLM_MAX_ITER, GLM_TOL, SEPARATION_BOUND};
pub use ols::{fit_ols, OlsFit};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinError {
    #[error("design matrix is rank deficient")]
    RankDeficient,
    #[error("design has {rows} rows and {cols} columns; need more rows than columns")]
    TooFewRows { rows: usize, cols: usize },
    #[error("response must contain both classes")]
    SingleClass,
    #[error("perfect separation: coefficient {index} reached {value:.3}")]
    PerfectSeparation { index: usize, value: f64 },
    #[error("observed information matrix is singular")]
    SingularInformation,
    #[error("Newton iterations did not converge (gradient max-norm {grad_norm:.3e})")]
    NotConverged { grad_norm: f64, fit: Box<GlmFit> },
    #[error("expected {expected} columns, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("invalid penalty: {0}")]
    InvalidPenalty(String),
    #[error("coordinate descent did not converge in {iterations} sweeps (max change {max_change:.3e})")]
    NonConvergence { iterations: usize, max_change: f64 },
    #[error("{0}")]
    Folds(String),
}
