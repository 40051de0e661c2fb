use serde::{Deserialize, Serialize};

use super::dist::chi2_sf;
use super::StatError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JarqueBeraResult {
    pub statistic: f64,
    pub p_value: f64,
    pub skewness: f64,
    pub excess_kurtosis: f64,
    pub mean: f64,
    /// Sample standard deviation (n - 1 denominator), descriptive only.
    pub std: f64,
    pub min: f64,
    pub max: f64,
    pub n: usize,
}

/// Jarque-Bera test with population (1/n) moments.
pub fn jarque_bera(values: &[f64]) -> Result<JarqueBeraResult, StatError> {
    let n = values.len();
    if n < 8 {
        return Err(StatError::TooFewObservations { n, required: 8 });
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(StatError::NonFinite);
    }
    let nf = n as f64;
    let mean = values.iter().sum::<f64>() / nf;
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for v in values {
        let d = v - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    m2 /= nf;
    m3 /= nf;
    m4 /= nf;
    if m2 <= (1e-12 * mean.abs()).powi(2) || m2 == 0.0 {
        return Err(StatError::ZeroVariance);
    }
    let skewness = m3 / m2.powf(1.5);
    let excess_kurtosis = m4 / (m2 * m2) - 3.0;
    let statistic = nf / 6.0 * (skewness * skewness + excess_kurtosis * excess_kurtosis / 4.0);
    Ok(JarqueBeraResult {
        statistic,
        p_value: chi2_sf(statistic, 2.0),
        skewness,
        excess_kurtosis,
        mean,
        std: (m2 * nf / (nf - 1.0)).sqrt(),
        min: values.iter().copied().fold(f64::INFINITY, f64::min),
        max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        n,
    })
}
