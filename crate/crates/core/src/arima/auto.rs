use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{difference, fit, ArimaError, ArimaOrder, FittedArima};
use crate::stattests::{adf_test, default_max_lag, AdfResult, StatError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Criterion {
    #[default]
    Aic,
    Bic,
}

impl Criterion {
    fn score(&self, m: &FittedArima) -> f64 {
        match self {
            Criterion::Aic => m.aic,
            Criterion::Bic => m.bic,
        }
    }
}

impl std::str::FromStr for Criterion {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "aic" => Ok(Criterion::Aic),
            "bic" => Ok(Criterion::Bic),
            other => Err(format!("unknown criterion {other:?} (expected aic or bic)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AutoFit {
    pub model: FittedArima,
    /// ADF outcome for each differencing order tried, in order.
    pub stationarity: Vec<AdfResult>,
    pub failed_fits: usize,
    /// Candidates skipped because a root lies within `MIN_ROOT_MODULUS` of the unit circle.
    pub near_unit_root: usize,
}

/// Candidates whose AR or MA roots are closer to the unit circle than this are not eligible.
pub const MIN_ROOT_MODULUS: f64 = 1.01;

/// Pick d by the ADF gate, then (k, q) on the grid by the information criterion.
///
/// d is the smallest of 0, 1, 2 whose differenced series is stationary at 5%;
/// if none passes, d = 2. Ties in the criterion keep the smaller k, then q.
/// Candidates with a near-unit AR or MA root are skipped.
pub fn auto_fit(values: &[f64], max_k: usize, max_q: usize, criterion: Criterion) -> Result<AutoFit, ArimaError> {
    if max_k > 5 || max_q > 5 {
        return Err(ArimaError::InvalidOrder(format!("grid bounds ({max_k}, {max_q}) exceed 5")));
    }
    let mut stationarity = Vec::new();
    let mut d = 2;
    for cand in 0..=2 {
        let w = difference(values, cand)?;
        match adf_test(&w, default_max_lag(w.len())) {
            Ok(r) => {
                let pass = r.stationary_at_5pct;
                stationarity.push(r);
                if pass {
                    d = cand;
                    break;
                }
            }
            Err(StatError::ZeroVariance) => {
                d = cand;
                break;
            }
            Err(_) => return Err(ArimaError::TooShort { len: values.len(), required: cand + 10 }),
        }
    }

    let grid: Vec<ArimaOrder> = (0..=max_k)
        .flat_map(|k| (0..=max_q).map(move |q| ArimaOrder::new(k, d, q)))
        .filter(|o| !o.is_mean_only())
        .collect();
    let fits: Vec<Result<FittedArima, ArimaError>> = grid.par_iter().map(|&o| fit(values, o)).collect();
    let mut failed_fits = 0;
    let mut near_unit_root = 0;
    let mut best: Option<FittedArima> = None;
    for f in fits {
        match f {
            Ok(m) if m.min_ar_root_modulus() < MIN_ROOT_MODULUS || m.min_ma_root_modulus() < MIN_ROOT_MODULUS => {
                near_unit_root += 1;
            }
            Ok(m) => {
                if best.as_ref().is_none_or(|b| criterion.score(&m) < criterion.score(b)) {
                    best = Some(m);
                }
            }
            Err(_) => failed_fits += 1,
        }
    }
    if failed_fits > 0 {
        log::warn!("auto_fit: {failed_fits} of {} candidate fits failed", grid.len());
    }
    let model = match best {
        Some(m) => m,
        None => fit(values, ArimaOrder::new(0, d, 0)).map_err(|_| ArimaError::AllFitsFailed { attempted: grid.len() + 1 })?,
    };
    Ok(AutoFit { model, stationarity, failed_fits, near_unit_root })
}
