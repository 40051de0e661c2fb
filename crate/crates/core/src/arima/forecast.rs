use super::fit::residuals;
use super::{difference, ArimaError, FittedArima};

/// Iterated conditional-mean forecasts `h` steps past the end of `history`
/// (given on the original, undifferenced scale).
pub fn forecast(model: &FittedArima, history: &[f64], h: usize) -> Result<Vec<f64>, ArimaError> {
    if h == 0 {
        return Err(ArimaError::InvalidHorizon);
    }
    let (k, d) = (model.order.k, model.order.d);
    if history.len() < k + d {
        return Err(ArimaError::InsufficientHistory { len: history.len(), required: k + d });
    }
    let w = if history.len() > d { difference(history, d)? } else { Vec::new() };
    let mean = model.mean();
    let mut e = residuals(&w, mean, &model.ar, &model.ma);
    let mut dev: Vec<f64> = w.iter().map(|v| v - mean).collect();

    // last value at each differencing level 0..d
    let mut anchors: Vec<f64> = (0..d)
        .map(|lvl| *difference(&history[history.len() - (lvl + 1)..], lvl).expect("lvl + 1 values").last().unwrap())
        .collect();
    let mut out = Vec::with_capacity(h);
    for _ in 0..h {
        let t = dev.len();
        let mut v = 0.0;
        for (i, a) in model.ar.iter().enumerate() {
            if t > i {
                v += a * dev[t - 1 - i];
            }
        }
        for (j, b) in model.ma.iter().enumerate() {
            if t > j {
                v += b * e[t - 1 - j];
            }
        }
        dev.push(v);
        e.push(0.0);
        let mut level = v + mean;
        for lvl in (0..d).rev() {
            level += anchors[lvl];
            anchors[lvl] = level;
        }
        out.push(level);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arima::ArimaOrder;

    #[test]
    fn mean_model_forecasts_intercept() {
        let m = FittedArima::from_parameters(ArimaOrder::new(0, 0, 0), vec![], vec![], 2.5, 1.0).unwrap();
        assert_eq!(forecast(&m, &[1.0, 9.0], 3).unwrap(), vec![2.5; 3]);
    }

    #[test]
    fn ar1_geometric_decay() {
        let m = FittedArima::from_parameters(ArimaOrder::new(1, 0, 0), vec![0.5], vec![], 0.0, 1.0).unwrap();
        assert_eq!(forecast(&m, &[8.0], 4).unwrap(), vec![4.0, 2.0, 1.0, 0.5]);
    }

    #[test]
    fn drift_under_first_difference() {
        let m = FittedArima::from_parameters(ArimaOrder::new(0, 1, 0), vec![], vec![], 0.75, 1.0).unwrap();
        let f = forecast(&m, &[3.0, 4.0, 10.0], 3).unwrap();
        assert_eq!(f, vec![10.75, 11.5, 12.25]);
    }

    #[test]
    fn second_difference_extends_quadratic() {
        let m = FittedArima::from_parameters(ArimaOrder::new(0, 2, 0), vec![], vec![], 2.0, 1.0).unwrap();
        // squares have constant second difference 2
        let f = forecast(&m, &[1.0, 4.0, 9.0, 16.0], 2).unwrap();
        assert_eq!(f, vec![25.0, 36.0]);
    }

    #[test]
    fn ma_uses_last_residual() {
        let m = FittedArima::from_parameters(ArimaOrder::new(0, 0, 1), vec![], vec![0.5], 0.0, 1.0).unwrap();
        // residuals: e0 = 2, e1 = 1 - 0.5*2 = 0
        let f = forecast(&m, &[2.0, 1.0], 2).unwrap();
        assert_eq!(f, vec![0.0, 0.0]);
        let f = forecast(&m, &[2.0], 2).unwrap();
        assert_eq!(f, vec![1.0, 0.0]);
    }

    #[test]
    fn errors() {
        let m = FittedArima::from_parameters(ArimaOrder::new(2, 1, 0), vec![0.1, 0.1], vec![], 0.0, 1.0).unwrap();
        assert_eq!(forecast(&m, &[1.0, 2.0], 1), Err(ArimaError::InsufficientHistory { len: 2, required: 3 }));
        assert_eq!(forecast(&m, &[1.0, 2.0, 3.0], 0), Err(ArimaError::InvalidHorizon));
    }
}
