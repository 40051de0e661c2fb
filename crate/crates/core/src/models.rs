//! The six classifier families behind one interface, plus the persisted model format.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{Panel, Standardizer};
use crate::ensembles::{cv_max_features, fit_forest, fit_gbm, CartParams, EnsembleError, ForestFit, GbmConfig, GbmFit, MaxFeatures, MaxFeaturesCv};
use crate::linmodels::{classify, cv_elastic_net, fit_glm_with, predict_proba, EnetCvResult, Family, GlmFit, LinError, GLM_MAX_ITER, GLM_TOL};
use crate::neural::{self, MlpConfig, MlpFit, NeuralError};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error(transparent)]
    Linear(#[from] LinError),
    #[error(transparent)]
    Ensemble(#[from] EnsembleError),
    #[error(transparent)]
    Neural(#[from] NeuralError),
    #[error("model expects features {expected:?}, panel has {found:?}")]
    FeatureMismatch { expected: Vec<String>, found: Vec<String> },
    #[error("unsupported model schema version {0}")]
    SchemaVersion(u32),
    #[error("model json: {0}")]
    Json(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelFamily {
    Probit,
    Logit,
    ElasticNet,
    RandomForest,
    GradientBoosting,
    NeuralNetwork,
}

impl ModelFamily {
    pub const ALL: [ModelFamily; 6] = [
        ModelFamily::Probit,
        ModelFamily::Logit,
        ModelFamily::ElasticNet,
        ModelFamily::RandomForest,
        ModelFamily::GradientBoosting,
        ModelFamily::NeuralNetwork,
    ];

    pub fn display_name(&self) -> &'static str {
        match self {
            ModelFamily::Probit => "Probit",
            ModelFamily::Logit => "Logit",
            ModelFamily::ElasticNet => "Elastic Net",
            ModelFamily::RandomForest => "Random Forest",
            ModelFamily::GradientBoosting => "Gradient Boosting",
            ModelFamily::NeuralNetwork => "Neural Network",
        }
    }

    /// File-name friendly identifier, e.g. `random_forest`.
    pub fn slug(&self) -> &'static str {
        match self {
            ModelFamily::Probit => "probit",
            ModelFamily::Logit => "logit",
            ModelFamily::ElasticNet => "elastic_net",
            ModelFamily::RandomForest => "random_forest",
            ModelFamily::GradientBoosting => "gradient_boosting",
            ModelFamily::NeuralNetwork => "neural_network",
        }
    }
}

impl std::str::FromStr for ModelFamily {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|f| f.slug() == s.to_ascii_lowercase().replace(['-', ' '], "_"))
            .ok_or_else(|| format!("unknown model family {s:?}"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GlmConfig {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for GlmConfig {
    fn default() -> Self {
        Self { tol: GLM_TOL, max_iter: GLM_MAX_ITER }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EnetConfig {
    pub lambda_grid: Vec<f64>,
    pub l1_ratio_grid: Vec<f64>,
    pub folds: usize,
}

impl Default for EnetConfig {
    fn default() -> Self {
        Self {
            lambda_grid: vec![0.001, 0.003, 0.01, 0.03, 0.1, 0.3, 1.0],
            l1_ratio_grid: vec![0.01, 0.1, 0.5, 0.9, 1.0],
            folds: 5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ForestConfig {
    pub n_trees: usize,
    pub params: CartParams,
    /// Choose max_features over 1..=p by cross-validation before the final fit.
    pub tune_max_features: bool,
    pub cv_n_trees: usize,
    pub cv_folds: usize,
}

impl Default for ForestConfig {
    fn default() -> Self {
        Self { n_trees: 500, params: CartParams::forest(), tune_max_features: true, cv_n_trees: 100, cv_folds: 5 }
    }
}

/// A model family with its hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum ModelSpec {
    Probit(GlmConfig),
    Logit(GlmConfig),
    ElasticNet(EnetConfig),
    RandomForest(ForestConfig),
    GradientBoosting(GbmConfig),
    NeuralNetwork(MlpConfig),
}

impl ModelSpec {
    pub fn default_for(family: ModelFamily) -> Self {
        match family {
            ModelFamily::Probit => ModelSpec::Probit(GlmConfig::default()),
            ModelFamily::Logit => ModelSpec::Logit(GlmConfig::default()),
            ModelFamily::ElasticNet => ModelSpec::ElasticNet(EnetConfig::default()),
            ModelFamily::RandomForest => ModelSpec::RandomForest(ForestConfig::default()),
            ModelFamily::GradientBoosting => ModelSpec::GradientBoosting(GbmConfig::default()),
            ModelFamily::NeuralNetwork => ModelSpec::NeuralNetwork(MlpConfig::default()),
        }
    }

    pub fn family(&self) -> ModelFamily {
        match self {
            ModelSpec::Probit(_) => ModelFamily::Probit,
            ModelSpec::Logit(_) => ModelFamily::Logit,
            ModelSpec::ElasticNet(_) => ModelFamily::ElasticNet,
            ModelSpec::RandomForest(_) => ModelFamily::RandomForest,
            ModelSpec::GradientBoosting(_) => ModelFamily::GradientBoosting,
            ModelSpec::NeuralNetwork(_) => ModelFamily::NeuralNetwork,
        }
    }

    /// Fit on features that the caller has already standardized.
    pub fn fit(&self, x: &DMatrix<f64>, y: &[u8], seed: u64) -> Result<ModelFit, ModelError> {
        Ok(match self {
            ModelSpec::Probit(c) => ModelFit::Probit(fit_glm_with(x, y, Family::Probit, c.tol, c.max_iter)?),
            ModelSpec::Logit(c) => ModelFit::Logit(fit_glm_with(x, y, Family::Logit, c.tol, c.max_iter)?),
            ModelSpec::ElasticNet(c) => {
                let yf: Vec<f64> = y.iter().map(|&v| v as f64).collect();
                ModelFit::ElasticNet(cv_elastic_net(x, &yf, &c.lambda_grid, &c.l1_ratio_grid, c.folds, seed)?)
            }
            ModelSpec::RandomForest(c) => {
                let (params, cv) = if c.tune_max_features {
                    let candidates: Vec<usize> = (1..=x.ncols()).collect();
                    let cv = cv_max_features(x, y, &candidates, &c.params, c.cv_n_trees, c.cv_folds, seed)?;
                    (CartParams { max_features: MaxFeatures::Count(cv.best), ..c.params }, Some(cv))
                } else {
                    (c.params, None)
                };
                ModelFit::RandomForest { fit: fit_forest(x, y, &params, c.n_trees, seed)?, max_features_cv: cv }
            }
            ModelSpec::GradientBoosting(c) => ModelFit::GradientBoosting(fit_gbm(x, y, c, seed)?),
            ModelSpec::NeuralNetwork(c) => {
                let init = neural::init(c, x.ncols(), seed)?;
                ModelFit::NeuralNetwork(neural::train(&init, x, y)?)
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum ModelFit {
    Probit(GlmFit),
    Logit(GlmFit),
    ElasticNet(EnetCvResult),
    RandomForest { fit: ForestFit, max_features_cv: Option<MaxFeaturesCv> },
    GradientBoosting(GbmFit),
    NeuralNetwork(MlpFit),
}

impl ModelFit {
    pub fn family(&self) -> ModelFamily {
        match self {
            ModelFit::Probit(_) => ModelFamily::Probit,
            ModelFit::Logit(_) => ModelFamily::Logit,
            ModelFit::ElasticNet(_) => ModelFamily::ElasticNet,
            ModelFit::RandomForest { .. } => ModelFamily::RandomForest,
            ModelFit::GradientBoosting(_) => ModelFamily::GradientBoosting,
            ModelFit::NeuralNetwork(_) => ModelFamily::NeuralNetwork,
        }
    }

    /// Class-1 probability, or the linear prediction for the elastic net.
    pub fn score(&self, x: &DMatrix<f64>) -> Result<Vec<f64>, ModelError> {
        Ok(match self {
            ModelFit::Probit(f) | ModelFit::Logit(f) => predict_proba(f, x)?,
            ModelFit::ElasticNet(cv) => cv.refit.predict(x)?,
            ModelFit::RandomForest { fit, .. } => fit.predict_proba(x)?,
            ModelFit::GradientBoosting(f) => f.predict_proba(x)?,
            ModelFit::NeuralNetwork(f) => f.predict_proba(x)?,
        })
    }

    /// Strict `score > 0.5`.
    pub fn classify(&self, x: &DMatrix<f64>) -> Result<Vec<u8>, ModelError> {
        Ok(classify(&self.score(x)?, 0.5))
    }

    /// Per-feature importance weights where the family defines them.
    pub fn importances(&self) -> Option<Vec<f64>> {
        match self {
            ModelFit::ElasticNet(cv) => Some(cv.refit.coefficients.iter().map(|c| c.abs()).collect()),
            ModelFit::RandomForest { fit, .. } => Some(fit.importances.clone()),
            ModelFit::GradientBoosting(f) => Some(f.importances.clone()),
            _ => None,
        }
    }
}

/// A fitted model with the metadata needed to score a raw panel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub schema_version: u32,
    pub family: ModelFamily,
    pub feature_names: Vec<String>,
    pub label_name: String,
    pub seed: u64,
    /// Training-split constants applied before every prediction.
    pub standardizer: Standardizer,
    pub fit: ModelFit,
}

impl TrainedModel {
    pub fn train(spec: &ModelSpec, panel: &Panel, seed: u64) -> Result<Self, ModelError> {
        let standardizer = Standardizer::fit(panel.features());
        let fit = spec.fit(&standardizer.transform(panel.features()), panel.label(), seed)?;
        Ok(Self {
            schema_version: SCHEMA_VERSION,
            family: spec.family(),
            feature_names: panel.feature_names().to_vec(),
            label_name: panel.label_name().to_string(),
            seed,
            standardizer,
            fit,
        })
    }

    fn features_of(&self, panel: &Panel) -> Result<DMatrix<f64>, ModelError> {
        let sub = panel.select_features(&self.feature_names).map_err(|_| ModelError::FeatureMismatch {
            expected: self.feature_names.clone(),
            found: panel.feature_names().to_vec(),
        })?;
        Ok(self.standardizer.transform(sub.features()))
    }

    pub fn score(&self, panel: &Panel) -> Result<Vec<f64>, ModelError> {
        self.fit.score(&self.features_of(panel)?)
    }

    pub fn classify(&self, panel: &Panel) -> Result<Vec<u8>, ModelError> {
        self.fit.classify(&self.features_of(panel)?)
    }

    /// Ranked (feature, weight) pairs, descending with name tie-break.
    pub fn ranked_importances(&self) -> Option<Vec<(String, f64)>> {
        self.fit.importances().map(|w| crate::ensembles::tree_importances(&w, &self.feature_names))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serializes")
    }

    pub fn from_json(s: &str) -> Result<Self, ModelError> {
        let m: Self = serde_json::from_str(s).map_err(|e| ModelError::Json(e.to_string()))?;
        if m.schema_version != SCHEMA_VERSION {
            return Err(ModelError::SchemaVersion(m.schema_version));
        }
        Ok(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::MonthDate;
    use crate::sim;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn panel(seed: u64, n: usize) -> Panel {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = DMatrix::from_vec(n, 3, sim::normals(&mut rng, n * 3));
        let e = sim::normals(&mut rng, n);
        let y: Vec<u8> = (0..n).map(|i| u8::from(2.0 * x[(i, 0)] - x[(i, 2)] + e[i] > 1.0)).collect();
        let start = MonthDate::new(2000, 1).unwrap();
        let dates = (0..n).map(|i| start.plus_months(i as i64)).collect();
        Panel::new(dates, x.map(|v| 10.0 + 3.0 * v), vec!["a".into(), "b".into(), "c".into()], y, "Recession").unwrap()
    }

    fn quick(family: ModelFamily) -> ModelSpec {
        match ModelSpec::default_for(family) {
            ModelSpec::RandomForest(c) => ModelSpec::RandomForest(ForestConfig { n_trees: 30, cv_n_trees: 10, ..c }),
            ModelSpec::GradientBoosting(c) => ModelSpec::GradientBoosting(GbmConfig { n_estimators: 50, ..c }),
            ModelSpec::NeuralNetwork(c) => ModelSpec::NeuralNetwork(MlpConfig { epochs: 200, ..c }),
            other => other,
        }
    }

    #[test]
    fn every_family_round_trips_through_json() {
        let p = panel(1, 150);
        for family in ModelFamily::ALL {
            let m = TrainedModel::train(&quick(family), &p, 3).unwrap();
            assert_eq!(m.family, family);
            let back = TrainedModel::from_json(&m.to_json()).unwrap();
            assert_eq!(back.to_json(), m.to_json());
            assert_eq!(back.classify(&p).unwrap(), m.classify(&p).unwrap());
        }
    }

    #[test]
    fn spec_serde_is_tagged() {
        let s = serde_json::to_string(&ModelSpec::default_for(ModelFamily::Logit)).unwrap();
        assert!(s.starts_with(r#"{"family":"logit""#), "{s}");
        let back: ModelSpec = serde_json::from_str(r#"{"family":"probit"}"#).unwrap();
        assert_eq!(back, ModelSpec::default_for(ModelFamily::Probit));
    }

    #[test]
    fn family_names_parse() {
        for f in ModelFamily::ALL {
            assert_eq!(f.slug().parse::<ModelFamily>().unwrap(), f);
        }
        assert_eq!("Random Forest".parse::<ModelFamily>().unwrap(), ModelFamily::RandomForest);
    }

    #[test]
    fn rejects_wrong_schema_and_features() {
        let p = panel(2, 80);
        let m = TrainedModel::train(&quick(ModelFamily::Logit), &p, 0).unwrap();
        let bumped = m.to_json().replace("\"schema_version\": 1", "\"schema_version\": 99");
        assert_eq!(TrainedModel::from_json(&bumped), Err(ModelError::SchemaVersion(99)));
        let other = p.select_features(&["a".to_string(), "b".to_string()]).unwrap();
        assert!(matches!(m.classify(&other), Err(ModelError::FeatureMismatch { .. })));
    }
}
