use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::LinError;
use crate::linalg::{sigmoid, spd_inverse, spd_solve, with_intercept};
use crate::stattests::dist::normal_pdf;
use crate::stattests::{chi2_sf, normal_cdf, normal_sf};

pub const GLM_TOL: f64 = 1e-8;
pub const GLM_MAX_ITER: usize = 100;
/// Any coefficient beyond this magnitude with the likelihood still improving signals separation.
pub const SEPARATION_BOUND: f64 = 30.0;
const MAX_HALVINGS: usize = 20;
const P_CLAMP: f64 = 1e-12;
/// Relative log-likelihood change below which a full Newton step is taken on trust.
const LL_NOISE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Probit,
    Logit,
}

impl Family {
    /// (P(y = 1), P(y = 0)), each computed without cancellation.
    fn probs(self, eta: f64) -> (f64, f64) {
        match self {
            Family::Probit => (normal_cdf(eta), normal_cdf(-eta)),
            Family::Logit => (sigmoid(eta), sigmoid(-eta)),
        }
    }

    fn loglik(self, eta: &[f64], y: &[u8]) -> f64 {
        eta.iter()
            .zip(y)
            .map(|(&e, &yi)| {
                let (p, q) = self.probs(e);
                if yi == 1 {
                    p.clamp(P_CLAMP, 1.0 - P_CLAMP).ln()
                } else {
                    q.clamp(P_CLAMP, 1.0 - P_CLAMP).ln()
                }
            })
            .sum()
    }

    /// Per-row score multiplier and observed-information weight.
    fn score_weight(self, eta: f64, y: u8) -> (f64, f64) {
        match self {
            Family::Logit => {
                let p = sigmoid(eta);
                (y as f64 - p, p * sigmoid(-eta))
            }
            Family::Probit => {
                // signed inverse Mills ratio
                let (num, den) = if y == 1 { (normal_pdf(eta), normal_cdf(eta)) } else { (-normal_pdf(eta), normal_cdf(-eta)) };
                if den < 1e-300 {
                    return (-eta, 1.0);
                }
                let lam = num / den;
                (lam, lam * (lam + eta))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlmFit {
    pub family: Family,
    /// Intercept first.
    pub coefficients: Vec<f64>,
    pub std_errors: Vec<f64>,
    pub z_values: Vec<f64>,
    pub p_values: Vec<f64>,
    pub loglik: f64,
    pub loglik_null: f64,
    pub pseudo_r2: f64,
    pub llr_p_value: f64,
    pub converged: bool,
    pub n_obs: usize,
    pub iterations: usize,
    /// Max-norm of the score at the returned coefficients.
    pub score_norm: f64,
}

pub(crate) struct Newton {
    pub beta: Vec<f64>,
    pub loglik: f64,
    pub score_norm: f64,
    pub converged: bool,
    pub iterations: usize,
    /// Log-likelihood after each accepted step.
    #[cfg_attr(not(test), allow(dead_code))]
    pub trace: Vec<f64>,
}

fn linear_index(xd: &DMatrix<f64>, beta: &[f64]) -> Vec<f64> {
    (0..xd.nrows()).map(|i| (0..beta.len()).map(|j| xd[(i, j)] * beta[j]).sum()).collect()
}

fn score_and_information(xd: &DMatrix<f64>, y: &[u8], eta: &[f64], family: Family) -> (Vec<f64>, DMatrix<f64>) {
    let p = xd.ncols();
    let mut g = vec![0.0; p];
    let mut info = DMatrix::zeros(p, p);
    for i in 0..xd.nrows() {
        let (s, w) = family.score_weight(eta[i], y[i]);
        for a in 0..p {
            let xa = xd[(i, a)];
            g[a] += s * xa;
            for b in 0..=a {
                info[(a, b)] += w * xa * xd[(i, b)];
            }
        }
    }
    for a in 0..p {
        for b in 0..a {
            info[(b, a)] = info[(a, b)];
        }
    }
    (g, info)
}

fn max_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// The linear index puts every row on its own class's side, so no finite maximum exists.
fn separates(eta: &[f64], y: &[u8]) -> bool {
    eta.iter().zip(y).all(|(&e, &yi)| if yi == 1 { e > 0.0 } else { e < 0.0 })
}

/// Newton-Raphson from zero with step halving; `xd` already holds the intercept column.
pub(crate) fn newton(xd: &DMatrix<f64>, y: &[u8], family: Family, tol: f64, max_iter: usize) -> Result<Newton, LinError> {
    let mut beta = vec![0.0; xd.ncols()];
    let mut eta = linear_index(xd, &beta);
    let mut ll = family.loglik(&eta, y);
    let mut trace = vec![ll];
    let mut iterations = 0;
    loop {
        let (g, info) = score_and_information(xd, y, &eta, family);
        let score_norm = max_norm(&g);
        if iterations >= max_iter && score_norm >= tol {
            return Ok(Newton { beta, loglik: ll, score_norm, converged: false, iterations, trace });
        }
        let delta = spd_solve(&info, &g).ok_or(LinError::SingularInformation)?;
        if score_norm < tol {
            // one polishing step, kept only if the score shrinks
            let cand: Vec<f64> = beta.iter().zip(&delta).map(|(b, d)| b + d).collect();
            let cand_eta = linear_index(xd, &cand);
            let (cand_g, _) = score_and_information(xd, y, &cand_eta, family);
            let cand_norm = max_norm(&cand_g);
            if cand_norm < score_norm {
                trace.push(family.loglik(&cand_eta, y));
                let loglik = *trace.last().unwrap();
                return Ok(Newton { beta: cand, loglik, score_norm: cand_norm, converged: true, iterations: iterations + 1, trace });
            }
            return Ok(Newton { beta, loglik: ll, score_norm, converged: true, iterations, trace });
        }
        let within_noise = g.iter().zip(&delta).map(|(a, b)| a * b).sum::<f64>() <= LL_NOISE * (1.0 + ll.abs());
        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..=MAX_HALVINGS {
            let cand: Vec<f64> = beta.iter().zip(&delta).map(|(b, d)| b + step * d).collect();
            let cand_eta = linear_index(xd, &cand);
            let cand_ll = family.loglik(&cand_eta, y);
            if cand_ll.is_finite() && (cand_ll >= ll || within_noise) {
                accepted = Some((cand, cand_eta, cand_ll));
                break;
            }
            step *= 0.5;
        }
        let Some((cand, cand_eta, cand_ll)) = accepted else {
            return Ok(Newton { beta, loglik: ll, score_norm, converged: false, iterations, trace });
        };
        if cand_ll > ll {
            if let Some(index) = cand.iter().position(|b| b.abs() > SEPARATION_BOUND) {
                return Err(LinError::PerfectSeparation { index, value: cand[index] });
            }
        }
        if separates(&cand_eta, y) {
            let index = (0..cand.len()).max_by(|&a, &b| cand[a].abs().total_cmp(&cand[b].abs())).unwrap_or(0);
            return Err(LinError::PerfectSeparation { index, value: cand[index] });
        }
        beta = cand;
        eta = cand_eta;
        ll = cand_ll;
        trace.push(ll);
        iterations += 1;
    }
}

pub fn fit_glm(x: &DMatrix<f64>, y: &[u8], family: Family) -> Result<GlmFit, LinError> {
    fit_glm_with(x, y, family, GLM_TOL, GLM_MAX_ITER)
}

/// Maximum-likelihood binary GLM. An intercept column is prepended internally.
pub fn fit_glm_with(x: &DMatrix<f64>, y: &[u8], family: Family, tol: f64, max_iter: usize) -> Result<GlmFit, LinError> {
    if x.nrows() != y.len() {
        return Err(LinError::DimensionMismatch { expected: x.nrows(), found: y.len() });
    }
    let ones = y.iter().filter(|&&v| v == 1).count();
    if ones == 0 || ones == y.len() {
        return Err(LinError::SingleClass);
    }
    let xd = with_intercept(x);
    let full = newton(&xd, y, family, tol, max_iter)?;
    let null = newton(&DMatrix::from_element(y.len(), 1, 1.0), y, family, tol, max_iter)?;

    let eta = linear_index(&xd, &full.beta);
    let (_, info) = score_and_information(&xd, y, &eta, family);
    let cov = spd_inverse(&info).ok_or(LinError::SingularInformation)?;
    let std_errors: Vec<f64> = (0..xd.ncols()).map(|j| cov[(j, j)].sqrt()).collect();
    let z_values: Vec<f64> = full.beta.iter().zip(&std_errors).map(|(b, s)| b / s).collect();
    let p_values = z_values.iter().map(|z| 2.0 * normal_sf(z.abs())).collect();
    let fit = GlmFit {
        family,
        std_errors,
        z_values,
        p_values,
        loglik: full.loglik,
        loglik_null: null.loglik,
        pseudo_r2: 1.0 - full.loglik / null.loglik,
        llr_p_value: chi2_sf(2.0 * (full.loglik - null.loglik), x.ncols() as f64),
        converged: full.converged,
        n_obs: y.len(),
        iterations: full.iterations,
        score_norm: full.score_norm,
        coefficients: full.beta,
    };
    if !fit.converged {
        return Err(LinError::NotConverged { grad_norm: fit.score_norm, fit: Box::new(fit) });
    }
    Ok(fit)
}

pub fn predict_proba(fit: &GlmFit, x: &DMatrix<f64>) -> Result<Vec<f64>, LinError> {
    if x.ncols() + 1 != fit.coefficients.len() {
        return Err(LinError::DimensionMismatch { expected: fit.coefficients.len() - 1, found: x.ncols() });
    }
    let eta = linear_index(&with_intercept(x), &fit.coefficients);
    Ok(eta.into_iter().map(|e| fit.family.probs(e).0).collect())
}

/// Strict `p > threshold`.
pub fn classify(probabilities: &[f64], threshold: f64) -> Vec<u8> {
    probabilities.iter().map(|&p| u8::from(p > threshold)).collect()
}
