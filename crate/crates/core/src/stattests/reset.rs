use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::dist::f_sf;
use super::StatError;
use crate::linalg::{least_squares, with_intercept};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResetEntry {
    pub power: usize,
    pub f_statistic: f64,
    pub p_value: f64,
    pub df_num: usize,
    pub df_den: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResetResult {
    pub entries: Vec<ResetEntry>,
}

/// Ramsey RESET on the OLS regression of `y` on `[1, X]`.
///
/// For each maximum power m the fitted values' powers 2..=m are added and the
/// joint nullity of their coefficients is F-tested. `x` must not contain an
/// intercept column. Fitted values are standardized before powering, which
/// leaves the test unchanged because the constant and the linear term are
/// already in the restricted model.
pub fn reset_ramsey(x: &DMatrix<f64>, y: &[f64], powers: &[usize]) -> Result<ResetResult, StatError> {
    let (n, p) = x.shape();
    if y.len() != n {
        return Err(StatError::DimensionMismatch(format!("{n} rows vs {} responses", y.len())));
    }
    if powers.is_empty() || powers[0] < 2 || powers.windows(2).any(|w| w[1] <= w[0]) {
        return Err(StatError::InvalidPowers);
    }
    let max_power = *powers.last().unwrap();
    let required = p + 1 + (max_power - 1) + 1;
    if n < required {
        return Err(StatError::TooFewObservations { n, required });
    }
    let base = with_intercept(x);
    let restricted = least_squares(&base, y).map_err(|_| StatError::RankDeficientDesign)?;
    let fitted: Vec<f64> = y.iter().zip(&restricted.residuals).map(|(a, r)| a - r).collect();
    let mean = fitted.iter().sum::<f64>() / n as f64;
    let sd = (fitted.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64).sqrt();
    if !(sd > 0.0) {
        return Err(StatError::RankDeficientDesign);
    }
    let z: Vec<f64> = fitted.iter().map(|v| (v - mean) / sd).collect();

    let mut entries = Vec::with_capacity(powers.len());
    for &m in powers {
        let q = m - 1;
        let k = base.ncols() + q;
        let aug = DMatrix::from_fn(n, k, |i, j| {
            if j < base.ncols() {
                base[(i, j)]
            } else {
                z[i].powi((j - base.ncols() + 2) as i32)
            }
        });
        let unrestricted = least_squares(&aug, y).map_err(|_| StatError::RankDeficientDesign)?;
        let df_den = n - k;
        let num = (restricted.rss - unrestricted.rss).max(0.0) / q as f64;
        let den = unrestricted.rss / df_den as f64;
        let f_statistic = if den > 0.0 { num / den } else if num > 0.0 { f64::INFINITY } else { 0.0 };
        entries.push(ResetEntry {
            power: m,
            f_statistic,
            p_value: f_sf(f_statistic, q as f64, df_den as f64),
            df_num: q,
            df_den,
        });
    }
    Ok(ResetResult { entries })
}
