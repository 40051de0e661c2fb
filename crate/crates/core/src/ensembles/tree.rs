use nalgebra::DMatrix;
use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::EnsembleError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitCriterion {
    /// Gini impurity for 0/1 targets.
    Gini,
    /// Within-node sum of squares for real targets.
    Variance,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaxFeatures {
    All,
    Sqrt,
    Count(usize),
}

impl MaxFeatures {
    /// Number of features drawn per node; counts above `p` are capped at `p`.
    pub fn resolve(&self, p: usize) -> usize {
        match *self {
            MaxFeatures::All => p,
            MaxFeatures::Sqrt => ((p as f64).sqrt().floor() as usize).max(1),
            MaxFeatures::Count(m) => m.min(p),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CartParams {
    pub max_depth: usize,
    pub min_samples_leaf: usize,
    pub max_features: MaxFeatures,
    pub criterion: SplitCriterion,
}

impl CartParams {
    pub fn forest() -> Self {
        Self { max_depth: 8, min_samples_leaf: 1, max_features: MaxFeatures::Sqrt, criterion: SplitCriterion::Gini }
    }

    pub fn boosting() -> Self {
        Self { max_depth: 3, min_samples_leaf: 5, max_features: MaxFeatures::Count(6), criterion: SplitCriterion::Variance }
    }

    pub(crate) fn validate(&self) -> Result<(), EnsembleError> {
        if self.max_depth == 0 || self.min_samples_leaf == 0 {
            return Err(EnsembleError::InvalidParams("max_depth and min_samples_leaf must be at least 1".into()));
        }
        if self.max_features == MaxFeatures::Count(0) {
            return Err(EnsembleError::InvalidParams("max_features must be at least 1".into()));
        }
        Ok(())
    }
}

impl Default for CartParams {
    fn default() -> Self {
        Self::forest()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Node {
    /// Rows with `x[feature] <= threshold` go left.
    Split { feature: usize, threshold: f64, left: usize, right: usize },
    Leaf { value: f64 },
}

/// Flat node array; node 0 is the root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
    /// Total weighted impurity decrease per feature.
    pub importance: Vec<f64>,
}

impl Tree {
    pub fn leaf_index(&self, x: &DMatrix<f64>, row: usize) -> usize {
        let mut at = 0;
        loop {
            match self.nodes[at] {
                Node::Leaf { .. } => return at,
                Node::Split { feature, threshold, left, right } => {
                    at = if x[(row, feature)] <= threshold { left } else { right };
                }
            }
        }
    }

    pub fn predict_row(&self, x: &DMatrix<f64>, row: usize) -> f64 {
        match self.nodes[self.leaf_index(x, row)] {
            Node::Leaf { value } => value,
            Node::Split { .. } => unreachable!("leaf_index stops at leaves"),
        }
    }

    pub fn predict(&self, x: &DMatrix<f64>) -> Vec<f64> {
        (0..x.nrows()).map(|i| self.predict_row(x, i)).collect()
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], at: usize) -> usize {
            match nodes[at] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, left).max(walk(nodes, right)),
            }
        }
        walk(&self.nodes, 0)
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::Leaf { .. })).count()
    }
}

/// Dense per-column value ranks, shared by every tree of an ensemble.
pub(crate) struct Ranks(Vec<Vec<u32>>, u32);

impl Ranks {
    pub(crate) fn new(x: &DMatrix<f64>) -> Self {
        let n = x.nrows();
        let mut top = 0;
        let cols = (0..x.ncols())
            .map(|j| {
                let col = x.column(j);
                let mut order: Vec<usize> = (0..n).collect();
                order.sort_unstable_by(|&a, &b| col[a].total_cmp(&col[b]));
                let mut ranks = vec![0u32; n];
                let mut r = 0u32;
                for w in 0..n {
                    if w > 0 && col[order[w]] != col[order[w - 1]] {
                        r += 1;
                    }
                    ranks[order[w]] = r;
                }
                top = top.max(r);
                ranks
            })
            .collect();
        Ranks(cols, top)
    }
}

const ROW_MASK: u64 = u32::MAX as u64;
const RADIX_MIN: usize = 96;

/// Sort `rank << 32 | row` keys by rank with byte-wise LSD radix passes; rows keep input order within a rank.
fn radix_sort(keys: &mut Vec<u64>, buf: &mut Vec<u64>, top: u32) {
    let mut shift = 32;
    while shift < 64 && (top as u64) >> (shift - 32) > 0 {
        let mut counts = [0usize; 257];
        for &k in keys.iter() {
            counts[((k >> shift) & 0xff) as usize + 1] += 1;
        }
        for d in 0..256 {
            counts[d + 1] += counts[d];
        }
        buf.clear();
        buf.resize(keys.len(), 0);
        for &k in keys.iter() {
            let d = ((k >> shift) & 0xff) as usize;
            buf[counts[d]] = k;
            counts[d] += 1;
        }
        std::mem::swap(keys, buf);
        shift += 8;
    }
}

struct Grower<'a, R: Rng> {
    cols: Vec<&'a [f64]>,
    ranks: &'a Ranks,
    y: &'a [f64],
    params: CartParams,
    draw: usize,
    rng: &'a mut R,
    nodes: Vec<Node>,
    importance: Vec<f64>,
    /// `rank << 32 | row`, so a plain integer sort orders rows by value.
    scratch: Vec<u64>,
    radix_buf: Vec<u64>,
}

/// Weighted impurity of a node with `n` rows, target sum `s` and sum of squares `q`.
fn weighted_impurity(criterion: SplitCriterion, n: f64, s: f64, q: f64) -> f64 {
    let v = match criterion {
        SplitCriterion::Gini => 2.0 * (s - s * s / n),
        SplitCriterion::Variance => q - s * s / n,
    };
    v.max(0.0)
}

impl<R: Rng> Grower<'_, R> {
    fn grow(&mut self, rows: Vec<usize>, depth: usize) -> usize {
        let m = rows.len();
        let (mut s, mut q) = (0.0, 0.0);
        for &r in &rows {
            s += self.y[r];
            q += self.y[r] * self.y[r];
        }
        let idx = self.nodes.len();
        self.nodes.push(Node::Leaf { value: s / m as f64 });
        let parent = weighted_impurity(self.params.criterion, m as f64, s, q);
        let min_leaf = self.params.min_samples_leaf;
        let first = self.y[rows[0]];
        if depth >= self.params.max_depth || m < 2 * min_leaf || rows.iter().all(|&r| self.y[r] == first) {
            return idx;
        }

        // visiting in draw order breaks exact ties at random rather than by column position
        let feats = sample(self.rng, self.cols.len(), self.draw).into_vec();
        let mut best: Option<(f64, usize, f64)> = None;
        for &f in &feats {
            let col = self.cols[f];
            let rank = &self.ranks.0[f];
            self.scratch.clear();
            self.scratch.extend(rows.iter().map(|&r| (rank[r] as u64) << 32 | r as u64));
            if m >= RADIX_MIN {
                radix_sort(&mut self.scratch, &mut self.radix_buf, self.ranks.1);
            } else {
                self.scratch.sort_unstable();
            }
            if self.scratch[0] >> 32 == self.scratch[m - 1] >> 32 {
                continue;
            }
            let (mut sl, mut ql) = (0.0, 0.0);
            for i in 0..m - 1 {
                let (key, next_key) = (self.scratch[i], self.scratch[i + 1]);
                let t = self.y[(key & ROW_MASK) as usize];
                sl += t;
                ql += t * t;
                let nl = i + 1;
                if key >> 32 == next_key >> 32 || nl < min_leaf || m - nl < min_leaf {
                    continue;
                }
                let loss = weighted_impurity(self.params.criterion, nl as f64, sl, ql)
                    + weighted_impurity(self.params.criterion, (m - nl) as f64, s - sl, q - ql);
                if best.is_none_or(|b| loss < b.0) {
                    let v = col[(key & ROW_MASK) as usize];
                    let next = col[(next_key & ROW_MASK) as usize];
                    let mut thr = v + (next - v) / 2.0;
                    if thr >= next {
                        thr = v;
                    }
                    best = Some((loss, f, thr));
                }
            }
        }
        let Some((loss, feature, threshold)) = best else {
            return idx;
        };
        self.importance[feature] += (parent - loss).max(0.0);
        let col = self.cols[feature];
        let (left_rows, right_rows): (Vec<usize>, Vec<usize>) = rows.into_iter().partition(|&r| col[r] <= threshold);
        let left = self.grow(left_rows, depth + 1);
        let right = self.grow(right_rows, depth + 1);
        self.nodes[idx] = Node::Split { feature, threshold, left, right };
        idx
    }
}

/// Grow a tree on the given row sample (duplicates allowed, as in a bootstrap).
pub(crate) fn grow_tree<R: Rng>(x: &DMatrix<f64>, ranks: &Ranks, y: &[f64], rows: Vec<usize>, params: &CartParams, rng: &mut R) -> Tree {
    let n = x.nrows();
    let data = x.as_slice();
    let cols: Vec<&[f64]> = (0..x.ncols()).map(|j| &data[j * n..(j + 1) * n]).collect();
    let p = cols.len();
    let mut g = Grower {
        cols,
        ranks,
        y,
        params: *params,
        draw: params.max_features.resolve(p),
        rng,
        nodes: Vec::new(),
        importance: vec![0.0; p],
        scratch: Vec::with_capacity(rows.len()),
        radix_buf: Vec::with_capacity(rows.len()),
    };
    g.grow(rows, 0);
    Tree { nodes: g.nodes, importance: g.importance }
}

/// Fit a CART tree on all rows of `x`.
pub fn fit_tree<R: Rng>(x: &DMatrix<f64>, y: &[f64], params: &CartParams, rng: &mut R) -> Result<Tree, EnsembleError> {
    params.validate()?;
    if x.nrows() == 0 || x.ncols() == 0 {
        return Err(EnsembleError::EmptyData);
    }
    if x.nrows() != y.len() {
        return Err(EnsembleError::DimensionMismatch { expected: x.nrows(), found: y.len() });
    }
    if x.nrows() < 2 * params.min_samples_leaf {
        return Err(EnsembleError::InvalidParams(format!(
            "{} rows cannot hold two leaves of {}",
            x.nrows(),
            params.min_samples_leaf
        )));
    }
    Ok(grow_tree(x, &Ranks::new(x), y, (0..x.nrows()).collect(), params, rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn stump() -> CartParams {
        CartParams { max_depth: 1, min_samples_leaf: 1, max_features: MaxFeatures::All, criterion: SplitCriterion::Gini }
    }

    #[test]
    fn pure_target_is_single_leaf() {
        let x = DMatrix::from_fn(10, 2, |i, j| (i + j) as f64);
        let t = fit_tree(&x, &[1.0; 10], &CartParams::forest(), &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        assert_eq!(t.nodes, vec![Node::Leaf { value: 1.0 }]);
    }

    #[test]
    fn separable_line_splits_once() {
        let x = DMatrix::from_fn(40, 1, |i, _| i as f64 - 20.0);
        let y: Vec<f64> = (0..40).map(|i| if i >= 20 { 1.0 } else { 0.0 }).collect();
        let t = fit_tree(&x, &y, &CartParams::forest(), &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        assert_eq!(t.depth(), 1);
        assert_eq!(t.predict(&x), y);
        assert!(matches!(t.nodes[0], Node::Split { threshold, .. } if threshold == -0.5));
    }

    #[test]
    fn repeated_fits_identical() {
        let x = DMatrix::from_fn(50, 3, |i, j| ((i * 7 + j * 13) % 17) as f64);
        let y: Vec<f64> = (0..50).map(|i| ((i * 3) % 2) as f64).collect();
        let p = CartParams { max_features: MaxFeatures::All, ..CartParams::forest() };
        let first = fit_tree(&x, &y, &p, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        for _ in 0..5 {
            assert_eq!(fit_tree(&x, &y, &p, &mut ChaCha8Rng::seed_from_u64(1)).unwrap(), first);
        }
    }

    #[test]
    fn depth_and_leaf_size_respected() {
        let x = DMatrix::from_fn(200, 2, |i, j| ((i * (j + 3) * 31) % 101) as f64);
        let y: Vec<f64> = (0..200).map(|i| ((i * 7) % 3 == 0) as u8 as f64).collect();
        let p = CartParams { max_depth: 4, min_samples_leaf: 7, ..CartParams::forest() };
        let t = fit_tree(&x, &y, &p, &mut ChaCha8Rng::seed_from_u64(2)).unwrap();
        assert!(t.depth() <= 4);
        let mut counts = vec![0; t.nodes.len()];
        for i in 0..200 {
            counts[t.leaf_index(&x, i)] += 1;
        }
        for (i, n) in t.nodes.iter().enumerate() {
            if matches!(n, Node::Leaf { .. }) {
                assert!(counts[i] >= 7);
            }
        }
    }

    #[test]
    fn variance_criterion_fits_step() {
        let x = DMatrix::from_fn(30, 1, |i, _| i as f64);
        let y: Vec<f64> = (0..30).map(|i| if i < 10 { -2.0 } else { 3.0 }).collect();
        let p = CartParams { criterion: SplitCriterion::Variance, ..stump() };
        let t = fit_tree(&x, &y, &p, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        assert_eq!(t.predict(&x), y);
    }

    #[test]
    fn stump_importance_on_one_feature() {
        let x = DMatrix::from_fn(20, 3, |i, j| if j == 1 { i as f64 } else { 0.0 });
        let y: Vec<f64> = (0..20).map(|i| (i >= 8) as u8 as f64).collect();
        let t = fit_tree(&x, &y, &stump(), &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        assert_eq!(t.importance[0], 0.0);
        assert_eq!(t.importance[2], 0.0);
        assert!(t.importance[1] > 0.0);
    }

    #[test]
    fn rejects_bad_inputs() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(fit_tree(&DMatrix::zeros(0, 2), &[], &stump(), &mut rng), Err(EnsembleError::EmptyData));
        let p = CartParams { min_samples_leaf: 3, ..stump() };
        assert!(fit_tree(&DMatrix::zeros(5, 1), &[0.0; 5], &p, &mut rng).is_err());
    }
}
