//! Small dense least-squares helpers shared by the regression-style modules.

use nalgebra::{DMatrix, DVector};

/// Relative threshold on the diagonal of R below which a design is treated as rank deficient.
const RANK_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub(crate) struct LeastSquares {
    pub coefficients: Vec<f64>,
    pub residuals: Vec<f64>,
    pub rss: f64,
    r: DMatrix<f64>,
}

impl LeastSquares {
    /// Diagonal of (X'X)^-1, computed from the triangular factor.
    pub fn unscaled_variances(&self) -> Vec<f64> {
        let p = self.r.ncols();
        let rinv = self
            .r
            .clone()
            .solve_upper_triangular(&DMatrix::identity(p, p))
            .expect("R verified non-singular at construction");
        (0..p).map(|i| rinv.row(i).iter().map(|v| v * v).sum()).collect()
    }
}

/// Marker for a rank-deficient design; callers map it into their own error type.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct RankDeficient;

/// Householder-QR least squares. Requires `rows > cols` is not enforced here; rank is.
pub(crate) fn least_squares(x: &DMatrix<f64>, y: &[f64]) -> Result<LeastSquares, RankDeficient> {
    let (n, p) = x.shape();
    assert_eq!(n, y.len(), "design/response length mismatch");
    if p == 0 {
        let rss = y.iter().map(|v| v * v).sum();
        return Ok(LeastSquares {
            coefficients: vec![],
            residuals: y.to_vec(),
            rss,
            r: DMatrix::zeros(0, 0),
        });
    }
    if n < p {
        return Err(RankDeficient);
    }
    let col_scale = (0..p)
        .map(|j| x.column(j).norm())
        .fold(0.0_f64, f64::max);
    if !(col_scale > 0.0) || !col_scale.is_finite() {
        return Err(RankDeficient);
    }
    let qr = x.clone().qr();
    let r = qr.r();
    for i in 0..p {
        if r[(i, i)].abs() <= RANK_TOL * col_scale {
            return Err(RankDeficient);
        }
    }
    let yv = DVector::from_column_slice(y);
    let qty = qr.q().transpose() * &yv;
    let beta = r
        .clone()
        .solve_upper_triangular(&qty)
        .ok_or(RankDeficient)?;
    let fitted = x * &beta;
    let residuals: Vec<f64> = y.iter().zip(fitted.iter()).map(|(a, b)| a - b).collect();
    let rss = residuals.iter().map(|v| v * v).sum();
    Ok(LeastSquares {
        coefficients: beta.iter().copied().collect(),
        residuals,
        rss,
        r,
    })
}

/// Inverse of a symmetric positive-definite matrix, `None` when Cholesky fails.
pub(crate) fn spd_inverse(m: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    m.clone().cholesky().map(|c| c.inverse())
}

/// Solve `m * x = b` for symmetric positive-definite `m`.
pub(crate) fn spd_solve(m: &DMatrix<f64>, b: &[f64]) -> Option<Vec<f64>> {
    let chol = m.clone().cholesky()?;
    let sol = chol.solve(&DVector::from_column_slice(b));
    Some(sol.iter().copied().collect())
}

/// Prepend a column of ones.
pub(crate) fn with_intercept(x: &DMatrix<f64>) -> DMatrix<f64> {
    let (n, p) = x.shape();
    DMatrix::from_fn(n, p + 1, |i, j| if j == 0 { 1.0 } else { x[(i, j - 1)] })
}

/// Logistic function without overflow for large |z|.
pub(crate) fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_exact_system() {
        let x = DMatrix::from_row_slice(4, 2, &[1.0, 0.0, 1.0, 1.0, 1.0, 2.0, 1.0, 3.0]);
        let y = [1.0, 3.0, 5.0, 7.0];
        let fit = least_squares(&x, &y).unwrap();
        assert!((fit.coefficients[0] - 1.0).abs() < 1e-12);
        assert!((fit.coefficients[1] - 2.0).abs() < 1e-12);
        assert!(fit.rss < 1e-20);
    }

    #[test]
    fn flags_duplicate_columns() {
        let x = DMatrix::from_row_slice(3, 2, &[1.0, 1.0, 2.0, 2.0, 3.0, 3.0]);
        assert_eq!(least_squares(&x, &[1.0, 2.0, 3.0]).unwrap_err(), RankDeficient);
    }

    #[test]
    fn unscaled_variances_match_explicit_inverse() {
        let x = DMatrix::from_row_slice(5, 2, &[1.0, 0.3, 1.0, -1.2, 1.0, 2.0, 1.0, 0.7, 1.0, -0.1]);
        let fit = least_squares(&x, &[0.0; 5]).unwrap();
        let inv = (x.transpose() * &x).try_inverse().unwrap();
        let v = fit.unscaled_variances();
        assert!((v[0] - inv[(0, 0)]).abs() < 1e-12);
        assert!((v[1] - inv[(1, 1)]).abs() < 1e-12);
    }
}
