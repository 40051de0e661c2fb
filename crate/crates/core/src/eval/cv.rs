use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{confusion, metrics, ConfusionMatrix, EvalError, Folds, Metrics};
use crate::dataset::{Panel, Standardizer};
use crate::models::ModelSpec;

/// Inputs handed to a fold's fit-and-predict step. Both matrices are
/// standardized with constants computed from the training rows alone.
pub struct FoldData<'a> {
    pub fold: usize,
    pub train_rows: &'a [usize],
    pub test_rows: &'a [usize],
    pub x_train: DMatrix<f64>,
    pub y_train: Vec<u8>,
    pub x_test: DMatrix<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldResult {
    pub fold: usize,
    pub n_train: usize,
    pub n_test: usize,
    pub confusion: ConfusionMatrix,
    pub metrics: Metrics,
    pub standardizer: Standardizer,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvResult {
    pub k: usize,
    pub assignment: Vec<usize>,
    pub folds: Vec<FoldResult>,
    pub mean: Metrics,
    /// Sample standard deviation across folds.
    pub std: Metrics,
}

fn aggregate(ms: &[Metrics]) -> (Metrics, Metrics) {
    let k = ms.len() as f64;
    let get = |f: fn(&Metrics) -> f64| -> (f64, f64) {
        let vals: Vec<f64> = ms.iter().map(f).collect();
        let m = vals.iter().sum::<f64>() / k;
        let var = if ms.len() > 1 { vals.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (k - 1.0) } else { 0.0 };
        (m, var.sqrt())
    };
    let (a, sa) = get(|m| m.accuracy);
    let (p, sp) = get(|m| m.precision);
    let (r, sr) = get(|m| m.recall);
    let (f, sf) = get(|m| m.f1);
    (
        Metrics { accuracy: a, precision: p, recall: r, f1: f },
        Metrics { accuracy: sa, precision: sp, recall: sr, f1: sf },
    )
}

/// Run `predict` on every fold (concurrently) and collect per-fold metrics in fold order.
pub fn cross_validate_with<F>(x: &DMatrix<f64>, y: &[u8], folds: &Folds, predict: F) -> Result<CvResult, EvalError>
where
    F: Fn(&FoldData) -> Result<Vec<u8>, String> + Sync,
{
    if x.nrows() != y.len() || folds.assignment.len() != y.len() {
        return Err(EvalError::LengthMismatch { left: x.nrows(), right: y.len() });
    }
    let results: Vec<Result<FoldResult, EvalError>> = (0..folds.k)
        .into_par_iter()
        .map(|fold| {
            let train_rows = folds.train_rows(fold);
            let test_rows = folds.test_rows(fold);
            let standardizer = Standardizer::fit_rows(x, &train_rows);
            let data = FoldData {
                fold,
                train_rows: &train_rows,
                test_rows: &test_rows,
                x_train: standardizer.transform(&x.select_rows(&train_rows)),
                y_train: train_rows.iter().map(|&i| y[i]).collect(),
                x_test: standardizer.transform(&x.select_rows(&test_rows)),
            };
            let pred = predict(&data).map_err(|message| EvalError::Fold { fold, message })?;
            let truth: Vec<u8> = test_rows.iter().map(|&i| y[i]).collect();
            let cm = confusion(&truth, &pred).map_err(|e| EvalError::Fold { fold, message: e.to_string() })?;
            Ok(FoldResult {
                fold,
                n_train: train_rows.len(),
                n_test: test_rows.len(),
                confusion: cm,
                metrics: metrics(&cm)?,
                standardizer,
            })
        })
        .collect();
    let folds_out = results.into_iter().collect::<Result<Vec<_>, _>>()?;
    let ms: Vec<Metrics> = folds_out.iter().map(|f| f.metrics).collect();
    let (mean, std) = aggregate(&ms);
    Ok(CvResult { k: folds.k, assignment: folds.assignment.clone(), folds: folds_out, mean, std })
}

/// Stratified k-fold evaluation of one model family on a panel.
pub fn cross_validate(spec: &ModelSpec, panel: &Panel, k: usize, seed: u64) -> Result<CvResult, EvalError> {
    let folds = super::stratified_kfold(panel.label(), k, seed)?;
    cross_validate_with(panel.features(), panel.label(), &folds, |d| {
        let fit = spec.fit(&d.x_train, &d.y_train, seed).map_err(|e| e.to_string())?;
        fit.classify(&d.x_test).map_err(|e| e.to_string())
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::stratified_kfold;

    fn prevalence_fixture() -> (DMatrix<f64>, Vec<u8>) {
        let mut y = vec![0u8; 438];
        for v in y.iter_mut().skip(50).take(40) {
            *v = 1;
        }
        (DMatrix::from_fn(438, 2, |i, j| (i * (j + 1)) as f64), y)
    }

    #[test]
    fn constant_zero_predictor() {
        let (x, y) = prevalence_fixture();
        let folds = stratified_kfold(&y, 5, 1).unwrap();
        let r = cross_validate_with(&x, &y, &folds, |d| Ok(vec![0; d.test_rows.len()])).unwrap();
        assert!((r.mean.accuracy - 398.0 / 438.0).abs() < 2e-3);
        assert_eq!(r.mean.f1, 0.0);
        assert_eq!(r.folds.len(), 5);
    }

    #[test]
    fn label_oracle_scores_one() {
        let (x, y) = prevalence_fixture();
        for k in [2, 5] {
            let folds = stratified_kfold(&y, k, 4).unwrap();
            let r = cross_validate_with(&x, &y, &folds, |d| Ok(d.test_rows.iter().map(|&i| y[i]).collect())).unwrap();
            assert_eq!(r.folds.len(), k);
            for f in &r.folds {
                assert_eq!((f.metrics.accuracy, f.metrics.f1), (1.0, 1.0));
            }
        }
    }

    #[test]
    fn canary_scaled_from_training_rows() {
        let (x, y) = prevalence_fixture();
        let folds = stratified_kfold(&y, 5, 9).unwrap();
        cross_validate_with(&x, &y, &folds, |d| {
            let idx: Vec<f64> = d.train_rows.iter().map(|&i| i as f64).collect();
            let m = idx.iter().sum::<f64>() / idx.len() as f64;
            let sd = (idx.iter().map(|v| (v - m).powi(2)).sum::<f64>() / idx.len() as f64).sqrt();
            for (r, &row) in d.test_rows.iter().enumerate() {
                assert!((d.x_test[(r, 0)] - (row as f64 - m) / sd).abs() < 1e-12);
            }
            Ok(vec![0; d.test_rows.len()])
        })
        .unwrap();
    }

    #[test]
    fn fold_errors_carry_index() {
        let (x, y) = prevalence_fixture();
        let folds = stratified_kfold(&y, 3, 0).unwrap();
        let r = cross_validate_with(&x, &y, &folds, |d| if d.fold == 1 { Err("boom".into()) } else { Ok(vec![0; d.test_rows.len()]) });
        assert_eq!(r.unwrap_err(), EvalError::Fold { fold: 1, message: "boom".into() });
    }
}
