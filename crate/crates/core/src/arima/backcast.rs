use serde::{Deserialize, Serialize};

use super::{auto_fit, forecast, ArimaError, AutoFit, Criterion};
use crate::dataset::MonthlySeries;

pub const MIN_OBSERVED_FOR_BACKCAST: usize = 60;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Backcast {
    /// Complete series: filled head followed by the untouched observations.
    pub series: MonthlySeries,
    /// Filled values in chronological order.
    pub filled: Vec<f64>,
    /// Model fitted on the reversed observations; `None` for a constant series.
    pub model: Option<AutoFit>,
}

pub fn backcast_head(series: &MonthlySeries, max_k: usize, max_q: usize) -> Result<Backcast, ArimaError> {
    backcast_head_with(series, max_k, max_q, Criterion::Aic)
}

/// Fill the missing head by forecasting the time-reversed observations.
pub fn backcast_head_with(series: &MonthlySeries, max_k: usize, max_q: usize, criterion: Criterion) -> Result<Backcast, ArimaError> {
    let h = series.missing_head();
    if h == 0 {
        return Err(ArimaError::NoMissingHead(series.name().to_string()));
    }
    let observed = series.observed();
    if observed.len() < MIN_OBSERVED_FOR_BACKCAST {
        return Err(ArimaError::TooFewObservations {
            series: series.name().to_string(),
            observed: observed.len(),
            required: MIN_OBSERVED_FOR_BACKCAST,
        });
    }
    let (filled, model) = if observed.iter().all(|&v| v == observed[0]) {
        (vec![observed[0]; h], None)
    } else {
        let reversed: Vec<f64> = observed.iter().rev().copied().collect();
        let auto = auto_fit(&reversed, max_k, max_q, criterion)?;
        let mut ahead = forecast(&auto.model, &reversed, h)?;
        ahead.reverse();
        (ahead, Some(auto))
    };
    let mut values = filled.clone();
    values.extend_from_slice(observed);
    Ok(Backcast {
        series: MonthlySeries::complete(series.name(), series.start(), values),
        filled,
        model,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::MonthDate;
    use crate::sim;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn with_head(values: Vec<f64>, head: usize) -> MonthlySeries {
        MonthlySeries::with_missing_head("MSFT_Return", MonthDate::new(1986, 1).unwrap(), head, values)
    }

    #[test]
    fn fills_three_month_head() {
        let obs = sim::arma(&mut ChaCha8Rng::seed_from_u64(2), &[], &[0.2], 2.0, 435);
        let b = backcast_head(&with_head(obs.clone(), 3), 2, 2).unwrap();
        assert_eq!(b.series.len(), 438);
        assert_eq!(b.series.missing_head(), 0);
        assert_eq!(&b.series.observed()[3..], obs.as_slice());
        assert!(b.filled.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn constant_series_fills_constant() {
        let b = backcast_head(&with_head(vec![1.25; 100], 4), 2, 2).unwrap();
        assert_eq!(b.filled, vec![1.25; 4]);
        assert!(b.model.is_none());
    }

    #[test]
    fn time_reversal_definition() {
        let obs = sim::arma(&mut ChaCha8Rng::seed_from_u64(8), &[0.4], &[], 0.0, 200);
        let b = backcast_head(&with_head(obs.clone(), 5), 1, 1).unwrap();
        let rev: Vec<f64> = obs.iter().rev().copied().collect();
        let m = auto_fit(&rev, 1, 1, Criterion::Aic).unwrap();
        let mut f = forecast(&m.model, &rev, 5).unwrap();
        f.reverse();
        assert_eq!(b.filled, f);
    }

    #[test]
    fn preconditions() {
        let full = MonthlySeries::complete("x", MonthDate::new(2000, 1).unwrap(), vec![1.0; 100]);
        assert!(matches!(backcast_head(&full, 1, 1), Err(ArimaError::NoMissingHead(_))));
        assert!(matches!(backcast_head(&with_head(vec![0.5; 59], 2), 1, 1), Err(ArimaError::TooFewObservations { .. })));
    }
}
