use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::FeatselError;
use crate::dataset::Panel;
use crate::ensembles::{fit_forest, CartParams};
use crate::stattests::dist::{binomial_cdf, binomial_sf};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BorutaConfig {
    pub n_iterations: usize,
    pub alpha: f64,
    pub forest: CartParams,
    pub n_trees: usize,
    pub seed: u64,
}

impl Default for BorutaConfig {
    fn default() -> Self {
        Self { n_iterations: 100, alpha: 0.05, forest: CartParams::forest(), n_trees: 300, seed: 0 }
    }
}

impl BorutaConfig {
    pub fn validate(&self) -> Result<(), FeatselError> {
        if self.n_iterations < 20 {
            return Err(FeatselError::InvalidConfig(format!("n_iterations {} below 20", self.n_iterations)));
        }
        if !(self.alpha > 0.0 && self.alpha < 0.5) {
            return Err(FeatselError::InvalidConfig(format!("alpha {} outside (0, 0.5)", self.alpha)));
        }
        if self.n_trees == 0 {
            return Err(FeatselError::InvalidConfig("n_trees must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Decision {
    Confirmed,
    Rejected,
    Tentative,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureDecision {
    pub name: String,
    pub decision: Decision,
    pub hit_count: usize,
    /// Bonferroni-adjusted two-sided binomial p-value.
    pub p_value: f64,
    pub importance_history: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BorutaReport {
    pub config: BorutaConfig,
    pub iterations: usize,
    /// In panel column order.
    pub features: Vec<FeatureDecision>,
    /// Largest shadow importance per iteration.
    pub mzsa_history: Vec<f64>,
}

impl BorutaReport {
    pub fn with_decision(&self, d: Decision) -> Vec<String> {
        self.features.iter().filter(|f| f.decision == d).map(|f| f.name.clone()).collect()
    }

    pub fn confirmed(&self) -> Vec<String> {
        self.with_decision(Decision::Confirmed)
    }

    pub fn rejected(&self) -> Vec<String> {
        self.with_decision(Decision::Rejected)
    }

    pub fn tentative(&self) -> Vec<String> {
        self.with_decision(Decision::Tentative)
    }
}

/// Real columns followed by one independently row-permuted copy of each.
fn with_shadows(x: &DMatrix<f64>, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let (n, p) = x.shape();
    let mut data = Vec::with_capacity(2 * n * p);
    data.extend_from_slice(x.as_slice());
    for j in 0..p {
        let mut col: Vec<f64> = x.column(j).iter().copied().collect();
        col.shuffle(rng);
        data.extend(col);
    }
    DMatrix::from_vec(n, 2 * p, data)
}

fn decide(hits: usize, iterations: usize, n_features: usize, alpha: f64) -> (Decision, f64) {
    let (h, n) = (hits as u64, iterations as u64);
    let upper = binomial_sf(h, n, 0.5);
    let lower = binomial_cdf(h, n, 0.5);
    let p = (2.0 * upper.min(lower)).min(1.0);
    let adjusted = (p * n_features as f64).min(1.0);
    let decision = if adjusted >= alpha || 2 * hits == iterations {
        Decision::Tentative
    } else if 2 * hits > iterations {
        Decision::Confirmed
    } else {
        Decision::Rejected
    };
    (decision, adjusted)
}

/// All-relevant selection: a feature earns a hit whenever its forest importance beats every shadow.
pub fn boruta(panel: &Panel, config: &BorutaConfig) -> Result<BorutaReport, FeatselError> {
    config.validate()?;
    let p = panel.n_features();
    if p < 2 {
        return Err(FeatselError::TooFewFeatures(p));
    }
    let y = panel.label();
    let positives = panel.positives();
    if positives == 0 || positives == y.len() {
        return Err(FeatselError::SingleClassLabel);
    }
    let x = panel.features();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut hits = vec![0usize; p];
    let mut history = vec![Vec::with_capacity(config.n_iterations); p];
    let mut mzsa_history = Vec::with_capacity(config.n_iterations);
    for _ in 0..config.n_iterations {
        let augmented = with_shadows(x, &mut rng);
        let forest = fit_forest(&augmented, y, &config.forest, config.n_trees, rng.next_u64())?;
        let imp = &forest.importances;
        let mzsa = imp[p..].iter().copied().fold(f64::NEG_INFINITY, f64::max);
        for j in 0..p {
            if imp[j] > mzsa {
                hits[j] += 1;
            }
            history[j].push(imp[j]);
        }
        mzsa_history.push(mzsa);
    }
    let features = panel
        .feature_names()
        .iter()
        .zip(hits)
        .zip(history)
        .map(|((name, hit_count), importance_history)| {
            let (decision, p_value) = decide(hit_count, config.n_iterations, p, config.alpha);
            FeatureDecision { name: name.clone(), decision, hit_count, p_value, importance_history }
        })
        .collect();
    Ok(BorutaReport { config: *config, iterations: config.n_iterations, features, mzsa_history })
}
