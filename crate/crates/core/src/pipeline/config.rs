use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::PipelineError;
use crate::arima::Criterion;
use crate::dataset::{MonthDate, SplitMode, SplitSpec, TransformSpec};
use crate::ensembles::{CartParams, GbmConfig};
use crate::featsel::BorutaConfig;
use crate::models::{EnetConfig, ForestConfig, GlmConfig, ModelFamily, ModelSpec};
use crate::neural::MlpConfig;

/// Everything a run needs. Relative paths resolve against the config file's directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    /// The single entropy source: split shuffling, Boruta and every model derive from it.
    pub seed: u64,
    #[serde(default = "default_output")]
    pub output: PathBuf,
    pub data: DataConfig,
    #[serde(default)]
    pub backcast: BackcastConfig,
    /// Model inputs built from CSV columns; empty means every non-label column as is.
    #[serde(default)]
    pub features: Vec<FeatureConfig>,
    #[serde(default)]
    pub split: SplitConfig,
    #[serde(default)]
    pub selection: SelectionConfig,
    #[serde(default)]
    pub models: ModelsConfig,
    #[serde(skip)]
    pub base_dir: PathBuf,
}

fn default_output() -> PathBuf {
    PathBuf::from("macrosig-out")
}

fn default_date_column() -> String {
    "date".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataConfig {
    pub input: PathBuf,
    #[serde(default = "default_date_column")]
    pub date_column: String,
    pub label: String,
    /// Panel window; defaults to the widest span every feature and the label cover.
    #[serde(default)]
    pub start: Option<MonthDate>,
    #[serde(default)]
    pub end: Option<MonthDate>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BackcastConfig {
    pub max_k: usize,
    pub max_q: usize,
    pub criterion: Criterion,
}

impl Default for BackcastConfig {
    fn default() -> Self {
        Self { max_k: 3, max_q: 3, criterion: Criterion::Aic }
    }
}

fn level() -> TransformSpec {
    TransformSpec::Level
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeatureConfig {
    pub name: String,
    /// CSV column; defaults to `name`. Ignored by spreads, which name both operands.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
    #[serde(default = "level")]
    pub transform: TransformSpec,
}

impl FeatureConfig {
    pub fn source(&self) -> &str {
        self.source.as_deref().unwrap_or(&self.name)
    }

    /// CSV columns this feature reads.
    pub fn columns(&self) -> Vec<&str> {
        match &self.transform {
            TransformSpec::Spread { minuend, subtrahend } => vec![minuend, subtrahend],
            _ => vec![self.source()],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SplitConfig {
    pub train_fraction: f64,
    /// Shuffle rows with the run seed before cutting; otherwise the split is chronological.
    pub shuffle: bool,
}

impl Default for SplitConfig {
    fn default() -> Self {
        Self { train_fraction: 0.75, shuffle: false }
    }
}

impl SplitConfig {
    pub fn spec(&self, seed: u64) -> SplitSpec {
        let mode = if self.shuffle { SplitMode::Random { seed } } else { SplitMode::Chronological };
        SplitSpec { train_fraction: self.train_fraction, mode }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SelectionConfig {
    pub n_iterations: usize,
    pub alpha: f64,
    pub n_trees: usize,
    pub forest: CartParams,
    pub correlation_threshold: f64,
}

impl Default for SelectionConfig {
    fn default() -> Self {
        let b = BorutaConfig::default();
        Self { n_iterations: b.n_iterations, alpha: b.alpha, n_trees: b.n_trees, forest: b.forest, correlation_threshold: 0.8 }
    }
}

impl SelectionConfig {
    pub fn boruta(&self, seed: u64) -> BorutaConfig {
        BorutaConfig { n_iterations: self.n_iterations, alpha: self.alpha, forest: self.forest, n_trees: self.n_trees, seed }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelsConfig {
    pub families: Vec<ModelFamily>,
    pub probit: GlmConfig,
    pub logit: GlmConfig,
    pub elastic_net: EnetConfig,
    pub random_forest: ForestConfig,
    pub gradient_boosting: GbmConfig,
    pub neural_network: MlpConfig,
}

impl Default for ModelsConfig {
    fn default() -> Self {
        Self {
            families: ModelFamily::ALL.to_vec(),
            probit: GlmConfig::default(),
            logit: GlmConfig::default(),
            elastic_net: EnetConfig::default(),
            random_forest: ForestConfig::default(),
            gradient_boosting: GbmConfig::default(),
            neural_network: MlpConfig::default(),
        }
    }
}

impl ModelsConfig {
    pub fn spec(&self, family: ModelFamily) -> ModelSpec {
        match family {
            ModelFamily::Probit => ModelSpec::Probit(self.probit),
            ModelFamily::Logit => ModelSpec::Logit(self.logit),
            ModelFamily::ElasticNet => ModelSpec::ElasticNet(self.elastic_net.clone()),
            ModelFamily::RandomForest => ModelSpec::RandomForest(self.random_forest),
            ModelFamily::GradientBoosting => ModelSpec::GradientBoosting(self.gradient_boosting),
            ModelFamily::NeuralNetwork => ModelSpec::NeuralNetwork(self.neural_network.clone()),
        }
    }
}

impl PipelineConfig {
    pub fn from_toml(text: &str, base_dir: impl Into<PathBuf>) -> Result<Self, PipelineError> {
        let mut cfg: Self = toml::from_str(text).map_err(|e| PipelineError::Config(e.to_string()))?;
        cfg.base_dir = base_dir.into();
        cfg.validate_static()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, PipelineError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| PipelineError::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text, path.parent().unwrap_or(Path::new("")))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn input_path(&self) -> PathBuf {
        self.resolve(&self.data.input)
    }

    pub fn output_dir(&self) -> PathBuf {
        self.resolve(&self.output)
    }

    /// Checks that need no data.
    pub fn validate_static(&self) -> Result<(), PipelineError> {
        let bad = |m: String| Err(PipelineError::Config(m));
        if let (Some(s), Some(e)) = (self.data.start, self.data.end) {
            if e < s {
                return bad(format!("window end {e} precedes start {s}"));
            }
        }
        let f = self.split.train_fraction;
        if !(f > 0.0 && f < 1.0) {
            return bad(format!("split.train_fraction {f} outside (0, 1)"));
        }
        let t = self.selection.correlation_threshold;
        if !(t > 0.0 && t <= 1.0) {
            return bad(format!("selection.correlation_threshold {t} outside (0, 1]"));
        }
        self.selection.boruta(self.seed).validate().map_err(|e| PipelineError::Config(e.to_string()))?;
        if self.backcast.max_k > 5 || self.backcast.max_q > 5 {
            return bad("backcast grid bounds must not exceed 5".into());
        }
        if self.models.families.is_empty() {
            return bad("models.families is empty".into());
        }
        let mut seen = std::collections::BTreeSet::new();
        for fam in &self.models.families {
            if !seen.insert(*fam) {
                return bad(format!("model family {} listed twice", fam.slug()));
            }
        }
        let mut names = std::collections::BTreeSet::new();
        for feat in &self.features {
            if !names.insert(feat.name.as_str()) {
                return bad(format!("feature {:?} defined twice", feat.name));
            }
            if feat.name == self.data.label {
                return bad(format!("feature {:?} collides with the label", feat.name));
            }
        }
        Ok(())
    }

    /// Checks against the CSV header.
    pub fn validate_columns(&self, columns: &[String]) -> Result<(), PipelineError> {
        let has = |c: &str| columns.iter().any(|x| x == c);
        if !has(&self.data.label) {
            return Err(PipelineError::Config(format!("label column {:?} not found in {}", self.data.label, self.data.input.display())));
        }
        for feat in &self.features {
            for col in feat.columns() {
                if !has(col) {
                    return Err(PipelineError::Config(format!("feature {:?} reads unknown column {col:?}", feat.name)));
                }
                if col == self.data.label {
                    return Err(PipelineError::Config(format!("feature {:?} reads the label column", feat.name)));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"
seed = 11

[data]
input = "raw.csv"
label = "Recession"
start = "1990-01"

[[features]]
name = "T10Y3M"
transform = { kind = "spread", minuend = "GS10", subtrahend = "TB3MS" }

[[features]]
name = "CPI_YOY"
source = "CPI"
transform = { kind = "yoy_pct" }

[[features]]
name = "VIX"

[split]
train_fraction = 0.7
shuffle = true

[selection]
n_iterations = 40

[models]
families = ["logit", "random_forest"]

[models.random_forest]
n_trees = 50
"#;

    #[test]
    fn parses_and_round_trips() {
        let cfg = PipelineConfig::from_toml(SAMPLE, "/tmp/x").unwrap();
        assert_eq!(cfg.seed, 11);
        assert_eq!(cfg.data.date_column, "date");
        assert_eq!(cfg.features[1].source(), "CPI");
        assert_eq!(cfg.features[2].transform, TransformSpec::Level);
        assert_eq!(cfg.features[0].columns(), vec!["GS10", "TB3MS"]);
        assert_eq!(cfg.models.families, vec![ModelFamily::Logit, ModelFamily::RandomForest]);
        assert_eq!(cfg.models.random_forest.n_trees, 50);
        assert_eq!(cfg.models.random_forest.cv_folds, 5);
        assert_eq!(cfg.selection.n_iterations, 40);
        assert_eq!(cfg.selection.correlation_threshold, 0.8);
        assert_eq!(cfg.input_path(), PathBuf::from("/tmp/x/raw.csv"));
        assert_eq!(cfg.split.spec(cfg.seed).mode, SplitMode::Random { seed: 11 });
        let again = PipelineConfig::from_toml(&cfg.to_toml(), "/tmp/x").unwrap();
        assert_eq!(again, cfg);
    }

    #[test]
    fn rejects_bad_values() {
        for (from, to) in [
            ("train_fraction = 0.7", "train_fraction = 1.5"),
            ("n_iterations = 40", "n_iterations = 5"),
            ("families = [\"logit\", \"random_forest\"]", "families = []"),
            ("families = [\"logit\", \"random_forest\"]", "families = [\"logit\", \"logit\"]"),
            ("name = \"VIX\"", "name = \"CPI_YOY\""),
            ("shuffle = true", "shuffle = true\nbogus = 1"),
        ] {
            let text = SAMPLE.replace(from, to);
            assert!(matches!(PipelineConfig::from_toml(&text, "."), Err(PipelineError::Config(_))), "{to}");
        }
    }

    #[test]
    fn unknown_columns_are_named() {
        let cfg = PipelineConfig::from_toml(SAMPLE, ".").unwrap();
        let cols: Vec<String> = ["GS10", "TB3MS", "CPI", "VIX"].map(String::from).to_vec();
        let err = cfg.validate_columns(&cols).unwrap_err().to_string();
        assert!(err.contains("Recession"), "{err}");
        let mut cols = cols;
        cols.push("Recession".into());
        cfg.validate_columns(&cols).unwrap();
        cols.retain(|c| c != "TB3MS");
        assert!(cfg.validate_columns(&cols).unwrap_err().to_string().contains("TB3MS"));
    }
}
