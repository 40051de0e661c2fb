//! ARIMA(k, d, q) estimation by conditional Gaussian likelihood, automatic order
//! selection, forecasting and reverse-time backcasting of a missing head.

mod auto;
mod backcast;
mod fit;
mod forecast;
mod optim;

pub use auto::{auto_fit, AutoFit, Criterion, MIN_ROOT_MODULUS};
pub use backcast::{backcast_head, backcast_head_with, Backcast};
pub use fit::fit;
pub use forecast::forecast;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ArimaError {
    #[error("series of length {len} is too short; need more than {required}")]
    TooShort { len: usize, required: usize },
    #[error("invalid order: {0}")]
    InvalidOrder(String),
    #[error("optimizer diverged (best objective {best_objective}, gradient norm {grad_norm})")]
    OptimizerDivergence { best_objective: f64, grad_norm: f64 },
    #[error("series has zero variance after differencing")]
    DegenerateSeries,
    #[error("all {attempted} candidate fits failed")]
    AllFitsFailed { attempted: usize },
    #[error("history of length {len} is too short; need at least {required}")]
    InsufficientHistory { len: usize, required: usize },
    #[error("forecast horizon must be at least 1")]
    InvalidHorizon,
    #[error("series {0:?} has no missing head")]
    NoMissingHead(String),
    #[error("series {series:?} has {observed} observations; backcasting needs {required}")]
    TooFewObservations { series: String, observed: usize, required: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ArimaOrder {
    pub k: usize,
    pub d: usize,
    pub q: usize,
}

impl ArimaOrder {
    pub fn new(k: usize, d: usize, q: usize) -> Self {
        Self { k, d, q }
    }

    /// Constant-plus-noise model (no AR or MA terms).
    pub fn is_mean_only(&self) -> bool {
        self.k == 0 && self.q == 0
    }

    /// Parameters counted by the information criteria: AR, MA, intercept and variance.
    pub fn n_params(&self) -> usize {
        self.k + self.q + 2
    }
}

impl std::fmt::Display for ArimaOrder {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "ARIMA({},{},{})", self.k, self.d, self.q)
    }
}

/// A fitted model on the d-times differenced scale:
/// w_t = intercept + Σ ar_i w_{t-i} + Σ ma_j ε_{t-j} + ε_t.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedArima {
    pub order: ArimaOrder,
    pub ar: Vec<f64>,
    pub ma: Vec<f64>,
    pub intercept: f64,
    pub sigma2: f64,
    pub loglik: f64,
    pub aic: f64,
    pub bic: f64,
    pub n_effective: usize,
}

impl FittedArima {
    /// A model with given parameters and no likelihood information
    /// (loglik, aic and bic are zero, `n_effective` is 0).
    pub fn from_parameters(order: ArimaOrder, ar: Vec<f64>, ma: Vec<f64>, intercept: f64, sigma2: f64) -> Result<Self, ArimaError> {
        if ar.len() != order.k || ma.len() != order.q {
            return Err(ArimaError::InvalidOrder(format!("{order} with {} AR / {} MA coefficients", ar.len(), ma.len())));
        }
        Ok(Self { order, ar, ma, intercept, sigma2, loglik: 0.0, aic: 0.0, bic: 0.0, n_effective: 0 })
    }

    /// Process mean on the differenced scale.
    pub fn mean(&self) -> f64 {
        let s: f64 = self.ar.iter().sum();
        self.intercept / (1.0 - s)
    }

    pub fn aic_from(loglik: f64, n_params: usize) -> f64 {
        2.0 * n_params as f64 - 2.0 * loglik
    }

    pub fn bic_from(loglik: f64, n_params: usize, n_effective: usize) -> f64 {
        n_params as f64 * (n_effective as f64).ln() - 2.0 * loglik
    }

    /// Smallest modulus among roots of 1 - Σ ar_i z^i (infinite when k = 0).
    pub fn min_ar_root_modulus(&self) -> f64 {
        min_root_modulus(&self.ar)
    }

    /// Smallest modulus among roots of 1 + Σ ma_j z^j (infinite when q = 0).
    pub fn min_ma_root_modulus(&self) -> f64 {
        let neg: Vec<f64> = self.ma.iter().map(|v| -v).collect();
        min_root_modulus(&neg)
    }
}

/// Roots of 1 - Σ c_i z^i are reciprocals of the companion-matrix eigenvalues.
fn min_root_modulus(coefs: &[f64]) -> f64 {
    let k = coefs.len();
    if k == 0 || coefs.iter().all(|&c| c == 0.0) {
        return f64::INFINITY;
    }
    let companion = DMatrix::from_fn(k, k, |i, j| if i == 0 { coefs[j] } else if i == j + 1 { 1.0 } else { 0.0 });
    let max_eig = companion
        .complex_eigenvalues()
        .iter()
        .map(|z| z.norm())
        .fold(0.0_f64, f64::max);
    if max_eig == 0.0 {
        f64::INFINITY
    } else {
        1.0 / max_eig
    }
}

/// Apply the first difference `d` times.
pub fn difference(values: &[f64], d: usize) -> Result<Vec<f64>, ArimaError> {
    if values.len() <= d {
        return Err(ArimaError::TooShort { len: values.len(), required: d });
    }
    let mut out = values.to_vec();
    for _ in 0..d {
        out = out.windows(2).map(|w| w[1] - w[0]).collect();
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn differencing() {
        assert_eq!(difference(&[1.0, 2.0, 3.0, 4.0], 1).unwrap(), vec![1.0, 1.0, 1.0]);
        assert_eq!(difference(&[1.0, 4.0, 9.0, 16.0], 2).unwrap(), vec![2.0, 2.0]);
        let x = [3.0, -1.0, 2.5];
        assert_eq!(difference(&x, 0).unwrap(), x.to_vec());
        assert!(matches!(difference(&[1.0], 1), Err(ArimaError::TooShort { .. })));
    }

    #[test]
    fn root_modulus_of_ar1() {
        let m = FittedArima::from_parameters(ArimaOrder::new(1, 0, 1), vec![0.5], vec![0.25], 0.0, 1.0).unwrap();
        assert!((m.min_ar_root_modulus() - 2.0).abs() < 1e-12);
        assert!((m.min_ma_root_modulus() - 4.0).abs() < 1e-12);
    }
}
