//! Feature selection: Boruta with shadow attributes and correlation pruning.

mod boruta;
mod corr;

use thiserror::Error;

use crate::ensembles::EnsembleError;

pub use boruta::{boruta, BorutaConfig, BorutaReport, Decision, FeatureDecision};
pub use corr::{pairwise_pearson, pearson, prune_correlated, CorrelationMatrix, Dropped, Pruning};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FeatselError {
    #[error("column {0:?} has zero variance")]
    ZeroVarianceColumn(String),
    #[error("label has a single class")]
    SingleClassLabel,
    #[error("need at least 2 features, got {0}")]
    TooFewFeatures(usize),
    #[error("unknown feature {0:?}")]
    UnknownFeature(String),
    #[error("invalid Boruta config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Forest(#[from] EnsembleError),
}
