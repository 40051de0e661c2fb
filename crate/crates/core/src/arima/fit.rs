use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::optim::{minimize, Settings};
use super::{difference, ArimaError, ArimaOrder, FittedArima};

/// Partial autocorrelations are mapped into (-PACF_BOUND, PACF_BOUND) so that
/// fitted polynomials keep their roots strictly outside the unit circle.
const PACF_BOUND: f64 = 0.9999;
const INITIAL_COEF: f64 = 0.1;
const RESTARTS: usize = 3;
const RESTART_SEED: u64 = 0x5eed_a21a;
const RESTART_SPREAD: f64 = 0.5;
const SETTINGS: Settings = Settings { grad_tol: 1e-8, max_iter: 500 };
/// Gradient norm above which the best iterate is reported as a divergence.
const DIVERGENCE_GRAD: f64 = 1e-3;

/// Durbin-Levinson map from partial autocorrelations to AR coefficients of a stationary model.
pub(crate) fn pacf_to_coefs(r: &[f64]) -> Vec<f64> {
    let mut phi: Vec<f64> = Vec::with_capacity(r.len());
    for (k, &rk) in r.iter().enumerate() {
        let prev = phi.clone();
        for j in 0..k {
            phi[j] = prev[j] - rk * prev[k - 1 - j];
        }
        phi.push(rk);
    }
    phi
}

/// Inverse of [`pacf_to_coefs`]; valid for stationary coefficient vectors.
pub(crate) fn coefs_to_pacf(phi: &[f64]) -> Vec<f64> {
    let mut cur = phi.to_vec();
    let mut r = vec![0.0; phi.len()];
    for k in (0..phi.len()).rev() {
        let rk = cur[k];
        r[k] = rk;
        let denom = 1.0 - rk * rk;
        let prev: Vec<f64> = (0..k).map(|j| (cur[j] + rk * cur[k - 1 - j]) / denom).collect();
        cur = prev;
    }
    r
}

fn to_free(r: f64) -> f64 {
    (r / PACF_BOUND).clamp(-0.999_999, 0.999_999).atanh()
}

fn from_free(u: f64) -> f64 {
    PACF_BOUND * u.tanh()
}

/// Unpacked parameters: process mean, AR and MA coefficients.
pub(crate) struct Params {
    pub mean: f64,
    pub ar: Vec<f64>,
    pub ma: Vec<f64>,
}

fn unpack(theta: &[f64], k: usize, q: usize) -> Params {
    let ar_r: Vec<f64> = theta[1..1 + k].iter().map(|&u| from_free(u)).collect();
    let ma_r: Vec<f64> = theta[1 + k..1 + k + q].iter().map(|&u| from_free(u)).collect();
    Params {
        mean: theta[0],
        ar: pacf_to_coefs(&ar_r),
        ma: pacf_to_coefs(&ma_r).into_iter().map(|v| -v).collect(),
    }
}

/// Conditional residuals of the mean-form recursion; pre-sample deviations and shocks are zero.
pub(crate) fn residuals(w: &[f64], mean: f64, ar: &[f64], ma: &[f64]) -> Vec<f64> {
    let n = w.len();
    let mut e = vec![0.0; n];
    for t in 0..n {
        let mut v = w[t] - mean;
        for (i, a) in ar.iter().enumerate() {
            if t > i {
                v -= a * (w[t - 1 - i] - mean);
            }
        }
        for (j, b) in ma.iter().enumerate() {
            if t > j {
                v -= b * e[t - 1 - j];
            }
        }
        e[t] = v;
    }
    e
}

fn sse(w: &[f64], p: &Params) -> f64 {
    residuals(w, p.mean, &p.ar, &p.ma).iter().map(|e| e * e).sum()
}

/// Fit ARIMA(k, d, q) by maximizing the conditional Gaussian likelihood of the
/// differenced series. Every differenced observation enters the likelihood, so
/// `n_effective = len - d` for all (k, q) and nested models compare directly.
pub fn fit(values: &[f64], order: ArimaOrder) -> Result<FittedArima, ArimaError> {
    if order.d > 2 {
        return Err(ArimaError::InvalidOrder(format!("d = {} (must be 0, 1 or 2)", order.d)));
    }
    let required = order.d + order.k + order.q;
    if values.len() <= required {
        return Err(ArimaError::TooShort { len: values.len(), required });
    }
    let raw = difference(values, order.d)?;
    let n = raw.len();
    let center = raw.iter().sum::<f64>() / n as f64;
    let var = raw.iter().map(|v| (v - center).powi(2)).sum::<f64>() / n as f64;
    if !(var > 1e-24 * center.abs().max(1.0).powi(2)) || !var.is_finite() {
        return Err(ArimaError::DegenerateSeries);
    }
    let scale = var.sqrt();
    let (k, q) = (order.k, order.q);

    if order.is_mean_only() {
        return Ok(finish(order, Vec::new(), Vec::new(), center, var, n));
    }

    let w: Vec<f64> = raw.iter().map(|v| (v - center) / scale).collect();
    let objective = |theta: &[f64]| -> f64 {
        let s = sse(&w, &unpack(theta, k, q));
        0.5 * (s / n as f64).ln()
    };

    let mut base = vec![0.0; 1 + k + q];
    let init_ar = coefs_to_pacf(&vec![INITIAL_COEF; k]);
    let init_ma = coefs_to_pacf(&vec![-INITIAL_COEF; q]);
    for (slot, r) in base[1..].iter_mut().zip(init_ar.iter().chain(&init_ma)) {
        *slot = to_free(*r);
    }
    let mut starts = vec![base.clone()];
    let mut rng = ChaCha8Rng::seed_from_u64(RESTART_SEED);
    let jitter = Normal::new(0.0, RESTART_SPREAD).expect("valid spread");
    for _ in 0..RESTARTS {
        starts.push(base.iter().map(|b| b + jitter.sample(&mut rng)).collect());
    }

    let best = starts
        .iter()
        .map(|s| minimize(objective, s, &SETTINGS))
        .filter(|m| m.f.is_finite())
        .min_by(|a, b| a.f.total_cmp(&b.f));
    let Some(best) = best else {
        return Err(ArimaError::OptimizerDivergence { best_objective: f64::NAN, grad_norm: f64::NAN });
    };
    if best.grad_norm > DIVERGENCE_GRAD {
        return Err(ArimaError::OptimizerDivergence { best_objective: best.f, grad_norm: best.grad_norm });
    }
    let p = unpack(&best.x, k, q);
    let sigma2_std = sse(&w, &p) / n as f64;
    let mean = center + scale * p.mean;
    let intercept = mean * (1.0 - p.ar.iter().sum::<f64>());
    Ok(finish(order, p.ar, p.ma, intercept, sigma2_std * var, n))
}

fn finish(order: ArimaOrder, ar: Vec<f64>, ma: Vec<f64>, intercept: f64, sigma2: f64, n: usize) -> FittedArima {
    let loglik = -0.5 * n as f64 * ((2.0 * std::f64::consts::PI * sigma2).ln() + 1.0);
    let np = order.n_params();
    FittedArima {
        order,
        ar,
        ma,
        intercept,
        sigma2,
        loglik,
        aic: FittedArima::aic_from(loglik, np),
        bic: FittedArima::bic_from(loglik, np, n),
        n_effective: n,
    }
}
