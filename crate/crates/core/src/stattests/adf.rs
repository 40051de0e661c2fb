use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::StatError;
use crate::linalg::least_squares;

/// Asymptotic 5% Dickey-Fuller critical value, constant-only regression.
pub const ADF_CRITICAL_5PCT: f64 = -2.86;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdfResult {
    /// t-ratio of the lagged level coefficient.
    pub statistic: f64,
    pub chosen_lag: usize,
    pub stationary_at_5pct: bool,
    /// Rows used by the test regression.
    pub n_obs: usize,
}

/// Schwert-style lag ceiling, 12·(n/100)^¼, kept within the `n ≥ max_lag + 10` precondition.
pub fn default_max_lag(n: usize) -> usize {
    let rule = (12.0 * (n as f64 / 100.0).powf(0.25)).floor() as usize;
    rule.min(n.saturating_sub(10))
}

/// Augmented Dickey-Fuller test with constant, lag order picked by AIC over `0..=max_lag`.
///
/// All candidate lag orders share the same estimation sample so their AIC values compare.
/// A perfect fit (zero residual variance) reports a statistic of 0.
pub fn adf_test(values: &[f64], max_lag: usize) -> Result<AdfResult, StatError> {
    let n = values.len();
    if n < max_lag + 10 {
        return Err(StatError::TooFewObservations { n, required: max_lag + 10 });
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(StatError::NonFinite);
    }
    let first = values[0];
    if values.iter().all(|&v| v == first) {
        return Err(StatError::ZeroVariance);
    }
    // dx[i] = x[i+1] - x[i]; row i regresses dx[i] on x[i] and dx[i-1..i-p].
    let dx: Vec<f64> = values.windows(2).map(|w| w[1] - w[0]).collect();
    let rows: Vec<usize> = (max_lag..dx.len()).collect();
    let n_obs = rows.len();
    let y: Vec<f64> = rows.iter().map(|&i| dx[i]).collect();

    let mut best: Option<(f64, usize, f64)> = None;
    for p in 0..=max_lag {
        let k = p + 2;
        if n_obs <= k {
            break;
        }
        let design = DMatrix::from_fn(n_obs, k, |r, c| {
            let i = rows[r];
            match c {
                0 => 1.0,
                1 => values[i],
                _ => dx[i - (c - 1)],
            }
        });
        let Ok(fit) = least_squares(&design, &y) else {
            continue;
        };
        let sigma2_ml = (fit.rss / n_obs as f64).max(f64::MIN_POSITIVE);
        let aic = n_obs as f64 * sigma2_ml.ln() + 2.0 * k as f64;
        let s2 = fit.rss / (n_obs - k) as f64;
        let se = (s2 * fit.unscaled_variances()[1]).sqrt();
        let stat = if se > 0.0 && se.is_finite() { fit.coefficients[1] / se } else { 0.0 };
        if best.is_none_or(|(a, _, _)| aic < a) {
            best = Some((aic, p, stat));
        }
    }
    let (_, chosen_lag, statistic) = best.ok_or(StatError::RankDeficientDesign)?;
    Ok(AdfResult { statistic, chosen_lag, stationary_at_5pct: statistic < ADF_CRITICAL_5PCT, n_obs })
}
