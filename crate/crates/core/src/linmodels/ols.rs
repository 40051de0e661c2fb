use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::LinError;
use crate::linalg::least_squares;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OlsFit {
    pub coefficients: Vec<f64>,
    pub residuals: Vec<f64>,
    pub rss: f64,
}

/// Least squares by Householder QR. No intercept is added.
pub fn fit_ols(x: &DMatrix<f64>, y: &[f64]) -> Result<OlsFit, LinError> {
    if x.nrows() != y.len() {
        return Err(LinError::DimensionMismatch { expected: x.nrows(), found: y.len() });
    }
    if x.nrows() <= x.ncols() {
        return Err(LinError::TooFewRows { rows: x.nrows(), cols: x.ncols() });
    }
    let ls = least_squares(x, y).map_err(|_| LinError::RankDeficient)?;
    Ok(OlsFit { coefficients: ls.coefficients, residuals: ls.residuals, rss: ls.rss })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn exact_linear_response() {
        let x = DMatrix::from_fn(20, 2, |i, j| if j == 0 { 1.0 } else { i as f64 * 0.5 });
        let y: Vec<f64> = (0..20).map(|i| 3.0 - 2.0 * i as f64 * 0.5).collect();
        let f = fit_ols(&x, &y).unwrap();
        assert!(f.residuals.iter().all(|r| r.abs() <= 1e-10));
        assert!(f.rss <= 1e-18);
    }

    #[test]
    fn ones_column_gives_mean() {
        let y = [1.0, 4.0, 2.5, 7.0];
        let f = fit_ols(&DMatrix::from_element(4, 1, 1.0), &y).unwrap();
        assert!((f.coefficients[0] - 3.625).abs() < 1e-14);
    }

    #[test]
    fn matches_pseudo_inverse() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let x = DMatrix::from_vec(50, 3, sim::normals(&mut rng, 150));
        let y = sim::normals(&mut rng, 50);
        let f = fit_ols(&x, &y).unwrap();
        let pinv = x.clone().pseudo_inverse(1e-14).unwrap();
        let b = pinv * nalgebra::DVector::from_column_slice(&y);
        for j in 0..3 {
            assert!((f.coefficients[j] - b[j]).abs() < 1e-8);
        }
    }

    #[test]
    fn rank_and_shape_errors() {
        let x = DMatrix::from_fn(5, 2, |i, _| i as f64);
        assert_eq!(fit_ols(&x, &[1.0; 5]), Err(LinError::RankDeficient));
        assert!(matches!(fit_ols(&DMatrix::zeros(2, 2), &[1.0; 2]), Err(LinError::TooFewRows { .. })));
    }
}
