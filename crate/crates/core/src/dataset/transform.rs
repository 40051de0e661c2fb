use serde::{Deserialize, Serialize};

use super::{DatasetError, MonthlySeries, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TransformSpec {
    Level,
    YoyPct,
    MonthlyReturnPct,
    FirstDiff,
    Spread { minuend: String, subtrahend: String },
}

impl TransformSpec {
    /// Leading observations consumed.
    pub fn lag(&self) -> usize {
        match self {
            TransformSpec::Level | TransformSpec::Spread { .. } => 0,
            TransformSpec::YoyPct => 12,
            TransformSpec::MonthlyReturnPct | TransformSpec::FirstDiff => 1,
        }
    }
}

/// Apply a single-series transform. The output starts `lag` months later and
/// keeps the input's missing head length.
pub fn transform(series: &MonthlySeries, spec: &TransformSpec) -> Result<MonthlySeries> {
    let lag = spec.lag();
    let obs = series.observed();
    if obs.len() <= lag {
        return Err(DatasetError::InsufficientHistory {
            series: series.name().to_string(),
            needed: lag + 1,
            available: obs.len(),
        });
    }
    let pct = |j: usize| -> Result<f64> {
        let (now, then) = (obs[j + lag], obs[j]);
        if then == 0.0 {
            let date = series.first_observed().plus_months((j + lag) as i64);
            return Err(DatasetError::DivisionByZero { series: series.name().to_string(), date });
        }
        Ok(100.0 * (now - then) / then)
    };
    let out: Vec<f64> = match spec {
        TransformSpec::Level => return Ok(series.clone()),
        TransformSpec::Spread { .. } => return Err(DatasetError::SpreadNeedsPair),
        TransformSpec::YoyPct | TransformSpec::MonthlyReturnPct => {
            (0..obs.len() - lag).map(pct).collect::<Result<_>>()?
        }
        TransformSpec::FirstDiff => obs.windows(2).map(|w| w[1] - w[0]).collect(),
    };
    Ok(MonthlySeries::with_missing_head(
        series.name(),
        series.start().plus_months(lag as i64),
        series.missing_head(),
        out,
    ))
}

/// `minuend - subtrahend` over two series with identical date ranges.
pub fn spread(minuend: &MonthlySeries, subtrahend: &MonthlySeries, name: &str) -> Result<MonthlySeries> {
    if minuend.start() != subtrahend.start() || minuend.len() != subtrahend.len() {
        return Err(DatasetError::Misaligned {
            minuend: minuend.name().to_string(),
            subtrahend: subtrahend.name().to_string(),
        });
    }
    let head = minuend.missing_head().max(subtrahend.missing_head());
    let a = &minuend.observed()[head - minuend.missing_head()..];
    let b = &subtrahend.observed()[head - subtrahend.missing_head()..];
    let values = a.iter().zip(b).map(|(x, y)| x - y).collect();
    Ok(MonthlySeries::with_missing_head(name, minuend.start(), head, values))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::MonthDate;

    fn start() -> MonthDate {
        MonthDate::new(2000, 1).unwrap()
    }

    #[test]
    fn constant_has_zero_growth() {
        let s = MonthlySeries::complete("c", start(), vec![5.0; 30]);
        let t = transform(&s, &TransformSpec::YoyPct).unwrap();
        assert_eq!(t.observed(), &[0.0; 18]);
        assert_eq!(t.start(), MonthDate::new(2001, 1).unwrap());
    }

    #[test]
    fn monthly_return_by_definition() {
        let s = MonthlySeries::complete("p", start(), vec![100.0, 110.0]);
        let t = transform(&s, &TransformSpec::MonthlyReturnPct).unwrap();
        assert_eq!(t.observed(), &[10.0]);
        assert_eq!(t.start(), MonthDate::new(2000, 2).unwrap());
    }

    #[test]
    fn geometric_growth_yoy_closed_form() {
        let s = MonthlySeries::complete("g", start(), (0..40).map(|t| 1.01_f64.powi(t)).collect());
        let t = transform(&s, &TransformSpec::YoyPct).unwrap();
        let expected = 100.0 * (1.01_f64.powi(12) - 1.0);
        assert!((expected - 12.6825).abs() < 1e-4);
        for v in t.observed() {
            assert!((v - expected).abs() < 1e-9);
        }
    }

    #[test]
    fn level_is_identity() {
        let s = MonthlySeries::new("l", start(), vec![None, Some(1.0), Some(2.0)]).unwrap();
        let once = transform(&s, &TransformSpec::Level).unwrap();
        assert_eq!(transform(&once, &TransformSpec::Level).unwrap(), s);
    }

    #[test]
    fn missing_head_is_preserved() {
        let mut vals = vec![None; 5];
        vals.extend((1..=15).map(|v| Some(v as f64)));
        let s = MonthlySeries::new("m", start(), vals).unwrap();
        let t = transform(&s, &TransformSpec::YoyPct).unwrap();
        assert_eq!(t.len(), 8);
        assert_eq!(t.missing_head(), 5);
        assert_eq!(t.observed().len(), 3);
        assert!((t.observed()[0] - 1200.0).abs() < 1e-12);
    }

    #[test]
    fn errors() {
        let short = MonthlySeries::complete("s", start(), vec![1.0; 12]);
        assert!(matches!(
            transform(&short, &TransformSpec::YoyPct),
            Err(DatasetError::InsufficientHistory { .. })
        ));
        let zero = MonthlySeries::complete("z", start(), vec![0.0, 1.0]);
        assert!(matches!(
            transform(&zero, &TransformSpec::MonthlyReturnPct),
            Err(DatasetError::DivisionByZero { .. })
        ));
    }

    #[test]
    fn spread_takes_longer_head() {
        let a = MonthlySeries::new("a", start(), vec![None, Some(5.0), Some(6.0)]).unwrap();
        let b = MonthlySeries::new("b", start(), vec![None, None, Some(1.0)]).unwrap();
        let s = spread(&a, &b, "a-b").unwrap();
        assert_eq!(s.missing_head(), 2);
        assert_eq!(s.observed(), &[5.0]);
    }
}
