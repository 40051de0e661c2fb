use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::FeatselError;
use crate::dataset::Panel;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationMatrix {
    pub names: Vec<String>,
    /// Row-major, symmetric, unit diagonal.
    pub values: Vec<Vec<f64>>,
}

impl CorrelationMatrix {
    pub fn get(&self, a: &str, b: &str) -> Option<f64> {
        let i = self.names.iter().position(|n| n == a)?;
        let j = self.names.iter().position(|n| n == b)?;
        Some(self.values[i][j])
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }
}

fn centered(v: &[f64]) -> (Vec<f64>, f64) {
    let m = v.iter().sum::<f64>() / v.len() as f64;
    let c: Vec<f64> = v.iter().map(|x| x - m).collect();
    let ss = c.iter().map(|x| x * x).sum();
    (c, ss)
}

/// Pearson correlation; `None` when either side is constant.
pub fn pearson(a: &[f64], b: &[f64]) -> Option<f64> {
    assert_eq!(a.len(), b.len(), "pearson needs equal lengths");
    let (ca, sa) = centered(a);
    let (cb, sb) = centered(b);
    if sa == 0.0 || sb == 0.0 {
        return None;
    }
    let sab: f64 = ca.iter().zip(&cb).map(|(x, y)| x * y).sum();
    Some((sab / (sa.sqrt() * sb.sqrt())).clamp(-1.0, 1.0))
}

/// Correlations between every feature pair, with the label as a final column on request.
pub fn pairwise_pearson(panel: &Panel, include_label: bool) -> Result<CorrelationMatrix, FeatselError> {
    let mut names = panel.feature_names().to_vec();
    let mut cols: Vec<Vec<f64>> = (0..panel.n_features()).map(|j| panel.features().column(j).iter().copied().collect()).collect();
    if include_label {
        names.push(panel.label_name().to_string());
        cols.push(panel.label_f64());
    }
    let mut prepared = Vec::with_capacity(cols.len());
    for (name, col) in names.iter().zip(&cols) {
        let (c, ss) = centered(col);
        if ss == 0.0 {
            return Err(FeatselError::ZeroVarianceColumn(name.clone()));
        }
        prepared.push((c, ss.sqrt()));
    }
    let k = names.len();
    let mut values = vec![vec![1.0; k]; k];
    for i in 0..k {
        for j in i + 1..k {
            let (ci, si) = &prepared[i];
            let (cj, sj) = &prepared[j];
            let r = (ci.iter().zip(cj).map(|(a, b)| a * b).sum::<f64>() / (si * sj)).clamp(-1.0, 1.0);
            values[i][j] = r;
            values[j][i] = r;
        }
    }
    Ok(CorrelationMatrix { names, values })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dropped {
    pub name: String,
    /// The feature it collided with, which stayed in the candidate set at that step.
    pub partner: String,
    pub correlation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pruning {
    pub threshold: f64,
    /// Survivors in name order.
    pub kept: Vec<String>,
    /// Eliminations in the order they happened.
    pub dropped: Vec<Dropped>,
}

/// Greedy elimination until no candidate pair has |r| above `threshold`.
///
/// From the worst pair the member less correlated with the label goes; ties drop the later name.
/// Constant columns count as uncorrelated with everything.
pub fn prune_correlated(panel: &Panel, candidates: &[String], threshold: f64) -> Result<Pruning, FeatselError> {
    let names: Vec<String> = candidates.iter().cloned().collect::<BTreeSet<_>>().into_iter().collect();
    let mut cols = Vec::with_capacity(names.len());
    for name in &names {
        cols.push(panel.column(name).ok_or_else(|| FeatselError::UnknownFeature(name.clone()))?);
    }
    let label = panel.label_f64();
    let to_label: Vec<f64> = cols.iter().map(|c| pearson(c, &label).unwrap_or(0.0).abs()).collect();
    let k = names.len();
    let mut r = vec![vec![0.0; k]; k];
    for i in 0..k {
        for j in i + 1..k {
            let v = pearson(&cols[i], &cols[j]).unwrap_or(0.0);
            r[i][j] = v;
            r[j][i] = v;
        }
    }
    let mut alive = vec![true; k];
    let mut dropped = Vec::new();
    loop {
        let mut worst: Option<(usize, usize)> = None;
        for i in (0..k).filter(|&i| alive[i]) {
            for j in (i + 1..k).filter(|&j| alive[j]) {
                if r[i][j].abs() > threshold && worst.is_none_or(|(a, b)| r[i][j].abs() > r[a][b].abs()) {
                    worst = Some((i, j));
                }
            }
        }
        let Some((i, j)) = worst else { break };
        let (gone, stays) = if to_label[i] < to_label[j] { (i, j) } else { (j, i) };
        alive[gone] = false;
        dropped.push(Dropped { name: names[gone].clone(), partner: names[stays].clone(), correlation: r[i][j] });
    }
    let kept = names.into_iter().zip(alive).filter(|(_, a)| *a).map(|(n, _)| n).collect();
    Ok(Pruning { threshold, kept, dropped })
}
