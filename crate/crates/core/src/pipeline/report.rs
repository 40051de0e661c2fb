use serde::{Deserialize, Serialize};

use super::config::{FeatureConfig, PipelineConfig};
use crate::arima::ArimaOrder;
use crate::dataset::MonthDate;
use crate::eval::{ConfusionMatrix, Metrics};
use crate::featsel::{BorutaReport, CorrelationMatrix, Pruning};
use crate::linmodels::GlmFit;
use crate::models::{ModelFamily, ModelFit, TrainedModel};

pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub seed: u64,
    pub config: PipelineConfig,
    pub stages: Vec<StageRecord>,
    pub upstream: UpstreamReport,
    pub downstream: DownstreamReport,
}

/// What a stage read, wrote and was parameterized with.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub stage: String,
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    pub parameters: Vec<(String, String)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BackcastRecord {
    pub series: String,
    pub missing_head: usize,
    /// `None` when the observed part was constant.
    pub order: Option<ArimaOrder>,
    pub aic: Option<f64>,
    pub bic: Option<f64>,
    pub filled: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitSummary {
    pub train_fraction: f64,
    pub shuffle: bool,
    pub n_train: usize,
    pub n_test: usize,
    pub train_positives: usize,
    pub test_positives: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UpstreamReport {
    pub columns: Vec<String>,
    pub backcast: Vec<BackcastRecord>,
    pub features: Vec<FeatureConfig>,
    pub window_start: MonthDate,
    pub window_end: MonthDate,
    pub n_rows: usize,
    pub n_positive: usize,
    pub split: SplitSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionReport {
    pub boruta: BorutaReport,
    pub confirmed: Vec<String>,
    pub tentative: Vec<String>,
    pub rejected: Vec<String>,
    /// Confirmed features plus the label, on the training rows.
    pub correlation: CorrelationMatrix,
    pub pruning: Pruning,
    /// Features passed to the models, in training-panel column order.
    pub selected: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Coefficient {
    pub name: String,
    pub estimate: f64,
    pub std_error: f64,
    pub z_value: f64,
    pub p_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelSummary {
    Glm {
        coefficients: Vec<Coefficient>,
        loglik: f64,
        loglik_null: f64,
        pseudo_r2: f64,
        llr_p_value: f64,
        iterations: usize,
    },
    ElasticNet {
        lambda: f64,
        l1_ratio: f64,
        intercept: f64,
        coefficients: Vec<(String, f64)>,
        n_nonzero: usize,
        cv_loss: f64,
    },
    RandomForest {
        n_trees: usize,
        max_features: usize,
        max_features_curve: Option<Vec<(usize, f64)>>,
    },
    GradientBoosting {
        n_estimators: usize,
        learning_rate: f64,
        initial_deviance: f64,
        final_deviance: f64,
    },
    NeuralNetwork {
        layer_sizes: Vec<usize>,
        n_parameters: usize,
        initial_loss: f64,
        final_loss: f64,
    },
}

fn glm_summary(f: &GlmFit, names: &[String]) -> ModelSummary {
    let labels = std::iter::once("const".to_string()).chain(names.iter().cloned());
    let coefficients = labels
        .enumerate()
        .map(|(j, name)| Coefficient { name, estimate: f.coefficients[j], std_error: f.std_errors[j], z_value: f.z_values[j], p_value: f.p_values[j] })
        .collect();
    ModelSummary::Glm { coefficients, loglik: f.loglik, loglik_null: f.loglik_null, pseudo_r2: f.pseudo_r2, llr_p_value: f.llr_p_value, iterations: f.iterations }
}

impl ModelSummary {
    pub fn of(model: &TrainedModel) -> Self {
        let names = &model.feature_names;
        match &model.fit {
            ModelFit::Probit(f) | ModelFit::Logit(f) => glm_summary(f, names),
            ModelFit::ElasticNet(cv) => {
                let r = &cv.refit;
                let cv_loss = cv
                    .grid
                    .iter()
                    .find(|p| p.lambda == cv.best_lambda && p.l1_ratio == cv.best_l1_ratio)
                    .map_or(f64::NAN, |p| p.mean_loss);
                ModelSummary::ElasticNet {
                    lambda: r.lambda,
                    l1_ratio: r.l1_ratio,
                    intercept: r.intercept,
                    coefficients: names.iter().cloned().zip(r.coefficients.iter().copied()).collect(),
                    n_nonzero: r.coefficients.iter().filter(|c| **c != 0.0).count(),
                    cv_loss,
                }
            }
            ModelFit::RandomForest { fit, max_features_cv } => ModelSummary::RandomForest {
                n_trees: fit.trees.len(),
                max_features: fit.params.max_features.resolve(names.len()),
                max_features_curve: max_features_cv.as_ref().map(|c| c.curve.clone()),
            },
            ModelFit::GradientBoosting(g) => ModelSummary::GradientBoosting {
                n_estimators: g.trees.len(),
                learning_rate: g.learning_rate,
                initial_deviance: g.train_deviance[0],
                final_deviance: *g.train_deviance.last().expect("deviance trace"),
            },
            ModelFit::NeuralNetwork(m) => ModelSummary::NeuralNetwork {
                layer_sizes: m.layer_sizes(),
                n_parameters: m.n_parameters(),
                initial_loss: m.loss_history.first().copied().unwrap_or(f64::NAN),
                final_loss: m.loss_history.last().copied().unwrap_or(f64::NAN),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelReport {
    pub family: ModelFamily,
    pub name: String,
    /// Path of the persisted model, relative to the output directory.
    pub model_file: String,
    pub n_train: usize,
    pub n_test: usize,
    pub confusion: ConfusionMatrix,
    pub metrics: Metrics,
    pub summary: ModelSummary,
    pub importances: Option<Vec<(String, f64)>>,
}

/// One column of the headline table, in percent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub family: ModelFamily,
    pub name: String,
    pub accuracy_pct: f64,
    pub f1_pct: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DownstreamReport {
    pub selection: SelectionReport,
    pub models: Vec<ModelReport>,
    pub summary: Vec<SummaryRow>,
}

impl SummaryRow {
    pub fn new(family: ModelFamily, metrics: &Metrics) -> Self {
        Self { family, name: family.display_name().to_string(), accuracy_pct: 100.0 * metrics.accuracy, f1_pct: 100.0 * metrics.f1 }
    }
}

impl RunReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, String> {
        let r: Self = serde_json::from_str(text).map_err(|e| e.to_string())?;
        if r.schema_version != REPORT_SCHEMA_VERSION {
            return Err(format!("unsupported report schema version {}", r.schema_version));
        }
        Ok(r)
    }
}
