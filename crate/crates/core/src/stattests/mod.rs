//! Statistical gates: Jarque-Bera normality, Augmented Dickey-Fuller stationarity
//! and the RESET misspecification test.

mod adf;
pub mod dist;
mod normality;
mod reset;

pub use adf::{adf_test, default_max_lag, AdfResult, ADF_CRITICAL_5PCT};
pub use dist::{chi2_sf, f_sf, normal_cdf, normal_sf};
pub use normality::{jarque_bera, JarqueBeraResult};
pub use reset::{reset_ramsey, ResetEntry, ResetResult};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StatError {
    #[error("need at least {required} observations, got {n}")]
    TooFewObservations { n: usize, required: usize },
    #[error("input has zero variance")]
    ZeroVariance,
    #[error("input contains non-finite values")]
    NonFinite,
    #[error("design matrix is rank deficient")]
    RankDeficientDesign,
    #[error("powers must be strictly increasing and start at 2 or above")]
    InvalidPowers,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
}
