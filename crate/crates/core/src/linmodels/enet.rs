use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::LinError;
use crate::dataset::Standardizer;
use crate::eval::{plain_kfold, stratified_kfold};

pub const ENET_TOL: f64 = 1e-7;
pub const ENET_MAX_ITER: usize = 10_000;

/// Elastic-net fit on internally standardized predictors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnetFit {
    pub intercept: f64,
    /// Coefficients on the standardized scale.
    pub coefficients: Vec<f64>,
    pub lambda: f64,
    pub l1_ratio: f64,
    pub n_iterations: usize,
    pub converged: bool,
    pub standardizer: Standardizer,
}

impl EnetFit {
    /// Linear prediction on raw (unstandardized) predictors.
    pub fn predict(&self, x: &DMatrix<f64>) -> Result<Vec<f64>, LinError> {
        if x.ncols() != self.coefficients.len() {
            return Err(LinError::DimensionMismatch { expected: self.coefficients.len(), found: x.ncols() });
        }
        let z = self.standardizer.transform(x);
        Ok((0..z.nrows())
            .map(|i| self.intercept + (0..z.ncols()).map(|j| z[(i, j)] * self.coefficients[j]).sum::<f64>())
            .collect())
    }
}

fn soft_threshold(v: f64, t: f64) -> f64 {
    if v > t {
        v - t
    } else if v < -t {
        v + t
    } else {
        0.0
    }
}

fn check_penalty(lambda: f64, l1_ratio: f64) -> Result<(), LinError> {
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(LinError::InvalidPenalty(format!("lambda = {lambda}")));
    }
    if !(0.0..=1.0).contains(&l1_ratio) {
        return Err(LinError::InvalidPenalty(format!("l1_ratio = {l1_ratio}")));
    }
    Ok(())
}

/// Smallest lambda at which every coefficient is zero for the given mixing ratio.
pub fn lambda_max(x: &DMatrix<f64>, y: &[f64], l1_ratio: f64) -> f64 {
    let z = Standardizer::fit(x).transform(x);
    let n = y.len() as f64;
    let ybar = y.iter().sum::<f64>() / n;
    let m = z
        .column_iter()
        .map(|c| c.iter().zip(y).map(|(a, b)| a * (b - ybar)).sum::<f64>().abs() / n)
        .fold(0.0, f64::max);
    m / l1_ratio
}

/// (1/2n)·RSS + λ·((1 − α)/2·‖β‖² + α·‖β‖₁) on the standardized scale.
pub fn enet_objective(fit: &EnetFit, x: &DMatrix<f64>, y: &[f64]) -> f64 {
    let pred = fit.predict(x).expect("fit matches x");
    let n = y.len() as f64;
    let rss: f64 = y.iter().zip(&pred).map(|(a, b)| (a - b) * (a - b)).sum();
    let l2: f64 = fit.coefficients.iter().map(|b| b * b).sum();
    let l1: f64 = fit.coefficients.iter().map(|b| b.abs()).sum();
    rss / (2.0 * n) + fit.lambda * ((1.0 - fit.l1_ratio) / 2.0 * l2 + fit.l1_ratio * l1)
}

/// Cyclic coordinate descent; converged when the largest coefficient change in a sweep is below `tol`.
pub fn fit_elastic_net(x: &DMatrix<f64>, y: &[f64], lambda: f64, l1_ratio: f64, tol: f64, max_iter: usize) -> Result<EnetFit, LinError> {
    descend(x, y, lambda, l1_ratio, tol, max_iter, |_, _| {})
}

/// `after_sweep` sees the coefficients and residuals at the end of every sweep.
fn descend<F: FnMut(&[f64], &[f64])>(
    x: &DMatrix<f64>,
    y: &[f64],
    lambda: f64,
    l1_ratio: f64,
    tol: f64,
    max_iter: usize,
    mut after_sweep: F,
) -> Result<EnetFit, LinError> {
    check_penalty(lambda, l1_ratio)?;
    let (n, p) = x.shape();
    if n != y.len() {
        return Err(LinError::DimensionMismatch { expected: n, found: y.len() });
    }
    if n < 2 {
        return Err(LinError::TooFewRows { rows: n, cols: p });
    }
    let standardizer = Standardizer::fit(x);
    let z = standardizer.transform(x);
    let nf = n as f64;
    let intercept = y.iter().sum::<f64>() / nf;
    let cols: Vec<Vec<f64>> = z.column_iter().map(|c| c.iter().copied().collect()).collect();
    let curvature: Vec<f64> = cols.iter().map(|c| c.iter().map(|v| v * v).sum::<f64>() / nf).collect();
    let mut beta = vec![0.0; p];
    let mut resid: Vec<f64> = y.iter().map(|v| v - intercept).collect();
    let l1 = lambda * l1_ratio;
    let l2 = lambda * (1.0 - l1_ratio);
    for sweep in 1..=max_iter {
        let mut max_change: f64 = 0.0;
        for j in 0..p {
            let denom = curvature[j] + l2;
            if denom == 0.0 {
                continue;
            }
            let c = &cols[j];
            let rho = c.iter().zip(&resid).map(|(a, r)| a * r).sum::<f64>() / nf + curvature[j] * beta[j];
            let new = soft_threshold(rho, l1) / denom;
            let delta = new - beta[j];
            if delta != 0.0 {
                for (r, a) in resid.iter_mut().zip(c) {
                    *r -= delta * a;
                }
                beta[j] = new;
                max_change = max_change.max(delta.abs());
            }
        }
        after_sweep(&beta, &resid);
        if max_change < tol {
            return Ok(EnetFit { intercept, coefficients: beta, lambda, l1_ratio, n_iterations: sweep, converged: true, standardizer });
        }
        if sweep == max_iter {
            return Err(LinError::NonConvergence { iterations: sweep, max_change });
        }
    }
    Ok(EnetFit { intercept, coefficients: beta, lambda, l1_ratio, n_iterations: 0, converged: true, standardizer })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnetCvPoint {
    pub lambda: f64,
    pub l1_ratio: f64,
    pub mean_loss: f64,
    pub std_loss: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnetCvResult {
    pub grid: Vec<EnetCvPoint>,
    pub best_lambda: f64,
    pub best_l1_ratio: f64,
    pub refit: EnetFit,
}

/// Grid search by k-fold squared-error CV. Folds are stratified when `y` is 0/1.
///
/// The best pair minimizes mean held-out MSE; exact ties prefer the larger
/// lambda, then the larger l1_ratio.
pub fn cv_elastic_net(x: &DMatrix<f64>, y: &[f64], lambda_grid: &[f64], alpha_grid: &[f64], k: usize, seed: u64) -> Result<EnetCvResult, LinError> {
    if lambda_grid.is_empty() || alpha_grid.is_empty() {
        return Err(LinError::InvalidPenalty("empty grid".into()));
    }
    for &l in lambda_grid {
        for &a in alpha_grid {
            check_penalty(l, a)?;
        }
    }
    let binary = y.iter().all(|&v| v == 0.0 || v == 1.0);
    let folds = if binary {
        let labels: Vec<u8> = y.iter().map(|&v| v as u8).collect();
        stratified_kfold(&labels, k, seed)
    } else {
        plain_kfold(y.len(), k, seed)
    }
    .map_err(|e| LinError::Folds(e.to_string()))?;
    let splits: Vec<(DMatrix<f64>, Vec<f64>, DMatrix<f64>, Vec<f64>)> = (0..k)
        .map(|f| {
            let tr = folds.train_rows(f);
            let te = folds.test_rows(f);
            (x.select_rows(&tr), tr.iter().map(|&i| y[i]).collect(), x.select_rows(&te), te.iter().map(|&i| y[i]).collect())
        })
        .collect();

    let pairs: Vec<(f64, f64)> = lambda_grid.iter().flat_map(|&l| alpha_grid.iter().map(move |&a| (l, a))).collect();
    let grid = pairs
        .par_iter()
        .map(|&(lambda, l1_ratio)| {
            let losses = splits
                .iter()
                .map(|(xtr, ytr, xte, yte)| {
                    let fit = fit_elastic_net(xtr, ytr, lambda, l1_ratio, ENET_TOL, ENET_MAX_ITER)?;
                    let pred = fit.predict(xte)?;
                    Ok(yte.iter().zip(&pred).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() / yte.len() as f64)
                })
                .collect::<Result<Vec<f64>, LinError>>()?;
            let m = losses.iter().sum::<f64>() / k as f64;
            let s = (losses.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (k as f64 - 1.0)).sqrt();
            Ok(EnetCvPoint { lambda, l1_ratio, mean_loss: m, std_loss: s })
        })
        .collect::<Result<Vec<_>, LinError>>()?;

    let best = grid
        .iter()
        .min_by(|a, b| {
            a.mean_loss
                .total_cmp(&b.mean_loss)
                .then(b.lambda.total_cmp(&a.lambda))
                .then(b.l1_ratio.total_cmp(&a.l1_ratio))
        })
        .expect("non-empty grid");
    let refit = fit_elastic_net(x, y, best.lambda, best.l1_ratio, ENET_TOL, ENET_MAX_ITER)?;
    Ok(EnetCvResult { best_lambda: best.lambda, best_l1_ratio: best.l1_ratio, grid, refit })
}

/// Features ranked by absolute standardized coefficient, ties by name.
pub fn enet_importance(fit: &EnetFit, names: &[String]) -> Vec<(String, f64)> {
    let mut v: Vec<(String, f64)> = names.iter().cloned().zip(fit.coefficients.iter().map(|c| c.abs())).collect();
    v.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linmodels::fit_ols;
    use crate::sim;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn fixture(seed: u64, n: usize, p: usize) -> (DMatrix<f64>, Vec<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = DMatrix::from_vec(n, p, sim::normals(&mut rng, n * p));
        let noise = sim::normals(&mut rng, n);
        let y = (0..n).map(|i| 1.0 + 2.0 * x[(i, 0)] - x[(i, 1)] + 0.5 * x[(i, 2 % p)] + noise[i]).collect();
        (x, y)
    }

    #[test]
    fn zero_penalty_is_standardized_ols() {
        let (x, y) = fixture(1, 200, 10);
        let fit = fit_elastic_net(&x, &y, 0.0, 0.5, 1e-12, ENET_MAX_ITER).unwrap();
        let z = crate::linalg::with_intercept(&fit.standardizer.transform(&x));
        let ols = fit_ols(&z, &y).unwrap();
        for j in 0..10 {
            assert!((fit.coefficients[j] - ols.coefficients[j + 1]).abs() < 1e-6);
        }
        assert!((fit.intercept - ols.coefficients[0]).abs() < 1e-6);
    }

    #[test]
    fn lasso_above_lambda_max_is_empty() {
        let (x, y) = fixture(2, 100, 6);
        let lm = lambda_max(&x, &y, 1.0);
        let fit = fit_elastic_net(&x, &y, lm, 1.0, ENET_TOL, ENET_MAX_ITER).unwrap();
        assert!(fit.coefficients.iter().all(|&b| b == 0.0));
        let fit = fit_elastic_net(&x, &y, lm * 0.99, 1.0, ENET_TOL, ENET_MAX_ITER).unwrap();
        assert!(fit.coefficients.iter().any(|&b| b != 0.0));
    }

    #[test]
    fn kkt_conditions_hold() {
        let (x, y) = fixture(3, 200, 10);
        let (lambda, a) = (0.1, 0.5);
        let fit = fit_elastic_net(&x, &y, lambda, a, 1e-10, ENET_MAX_ITER).unwrap();
        let z = fit.standardizer.transform(&x);
        let pred = fit.predict(&x).unwrap();
        let n = y.len() as f64;
        for j in 0..10 {
            let g = z.column(j).iter().zip(y.iter().zip(&pred)).map(|(zz, (yy, pp))| zz * (yy - pp)).sum::<f64>() / n;
            let b = fit.coefficients[j];
            if b == 0.0 {
                assert!(g.abs() <= lambda * a + 1e-5);
            } else {
                assert!((g - lambda * (1.0 - a) * b - lambda * a * b.signum()).abs() < 1e-5);
            }
        }
    }

    #[test]
    fn objective_never_rises_across_sweeps() {
        for (seed, lambda, a) in [(7, 0.05, 0.5), (8, 0.01, 1.0), (9, 0.3, 0.1)] {
            let (x, y) = fixture(seed, 150, 12);
            let n = y.len() as f64;
            let mut trace = Vec::new();
            descend(&x, &y, lambda, a, 1e-12, ENET_MAX_ITER, |b, r| {
                let rss: f64 = r.iter().map(|v| v * v).sum();
                let l2: f64 = b.iter().map(|v| v * v).sum();
                let l1: f64 = b.iter().map(|v| v.abs()).sum();
                trace.push(rss / (2.0 * n) + lambda * ((1.0 - a) / 2.0 * l2 + a * l1));
            })
            .unwrap();
            assert!(trace.len() > 2);
            for w in trace.windows(2) {
                assert!(w[1] <= w[0] + 1e-14 * w[0].abs(), "{} -> {}", w[0], w[1]);
            }
        }
    }

    #[test]
    fn importance_ordering() {
        let (x, y) = fixture(4, 60, 3);
        let mut fit = fit_elastic_net(&x, &y, 0.1, 0.5, ENET_TOL, ENET_MAX_ITER).unwrap();
        let names: Vec<String> = ["c", "a", "b"].iter().map(|s| s.to_string()).collect();
        fit.coefficients = vec![0.0; 3];
        let r = enet_importance(&fit, &names);
        assert_eq!(r.iter().map(|(n, _)| n.as_str()).collect::<Vec<_>>(), ["a", "b", "c"]);
        fit.coefficients = vec![0.0, 0.0, -0.3];
        assert_eq!(enet_importance(&fit, &names)[0].0, "b");
    }

    #[test]
    fn singleton_grid() {
        let (x, y) = fixture(5, 80, 4);
        let r = cv_elastic_net(&x, &y, &[0.2], &[0.7], 5, 1).unwrap();
        assert_eq!((r.best_lambda, r.best_l1_ratio), (0.2, 0.7));
        assert_eq!(r.grid.len(), 1);
    }

    #[test]
    fn invalid_penalties() {
        let (x, y) = fixture(6, 20, 2);
        assert!(matches!(fit_elastic_net(&x, &y, -1.0, 0.5, ENET_TOL, 10), Err(LinError::InvalidPenalty(_))));
        assert!(matches!(fit_elastic_net(&x, &y, 0.1, 1.5, ENET_TOL, 10), Err(LinError::InvalidPenalty(_))));
        assert!(cv_elastic_net(&x, &y, &[], &[0.5], 5, 0).is_err());
    }
}
