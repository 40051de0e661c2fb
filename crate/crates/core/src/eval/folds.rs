use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::EvalError;

/// Fold index for every row.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Folds {
    pub k: usize,
    pub assignment: Vec<usize>,
}

impl Folds {
    pub fn test_rows(&self, fold: usize) -> Vec<usize> {
        (0..self.assignment.len()).filter(|&i| self.assignment[i] == fold).collect()
    }

    pub fn train_rows(&self, fold: usize) -> Vec<usize> {
        (0..self.assignment.len()).filter(|&i| self.assignment[i] != fold).collect()
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut s = vec![0; self.k];
        for &f in &self.assignment {
            s[f] += 1;
        }
        s
    }
}

fn check_k(k: usize, n: usize) -> Result<(), EvalError> {
    if k < 2 {
        return Err(EvalError::InvalidK(k));
    }
    if k > n {
        return Err(EvalError::KTooLarge { k, n });
    }
    Ok(())
}

/// Shuffle each class with a seeded generator and deal rows round-robin.
///
/// Positives continue the deal where negatives stopped, so overall fold
/// sizes also differ by at most one.
pub fn stratified_kfold(labels: &[u8], k: usize, seed: u64) -> Result<Folds, EvalError> {
    check_k(k, labels.len())?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut neg: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == 0).collect();
    let mut pos: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] != 0).collect();
    if neg.len() < k || pos.len() < k {
        log::warn!("stratified_kfold: class counts ({}, {}) below k = {k}", neg.len(), pos.len());
    }
    neg.shuffle(&mut rng);
    pos.shuffle(&mut rng);
    let mut assignment = vec![0; labels.len()];
    for (slot, &row) in neg.iter().chain(&pos).enumerate() {
        assignment[row] = slot % k;
    }
    Ok(Folds { k, assignment })
}

/// Unstratified folds: one seeded shuffle of all rows, dealt round-robin.
pub fn plain_kfold(n: usize, k: usize, seed: u64) -> Result<Folds, EvalError> {
    check_k(k, n)?;
    let mut rows: Vec<usize> = (0..n).collect();
    rows.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut assignment = vec![0; n];
    for (slot, &row) in rows.iter().enumerate() {
        assignment[row] = slot % k;
    }
    Ok(Folds { k, assignment })
}
