use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

/// Per-column centering and scaling constants (population standard deviation).
///
/// Constant columns keep scale 1 so they map to zero rather than NaN.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
}

impl Standardizer {
    pub fn fit(x: &DMatrix<f64>) -> Self {
        let n = x.nrows() as f64;
        let mut mean = Vec::with_capacity(x.ncols());
        let mut scale = Vec::with_capacity(x.ncols());
        for col in x.column_iter() {
            let m = col.iter().sum::<f64>() / n;
            let var = col.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / n;
            mean.push(m);
            scale.push(if var > 0.0 { var.sqrt() } else { 1.0 });
        }
        Self { mean, scale }
    }

    /// Fit on the given rows only.
    pub fn fit_rows(x: &DMatrix<f64>, rows: &[usize]) -> Self {
        Self::fit(&x.select_rows(rows))
    }

    pub fn identity(p: usize) -> Self {
        Self { mean: vec![0.0; p], scale: vec![1.0; p] }
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn transform(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        assert_eq!(x.ncols(), self.dim(), "standardizer fitted on a different column count");
        DMatrix::from_fn(x.nrows(), x.ncols(), |i, j| (x[(i, j)] - self.mean[j]) / self.scale[j])
    }
}
