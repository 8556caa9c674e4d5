use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::Predict;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ForestConfig {
    pub trees: usize,
    /// Features tried per split; `None` means all.
    pub max_features: Option<usize>,
    pub min_leaf: usize,
    pub max_depth: Option<usize>,
    pub seed: u64,
}

impl Default for ForestConfig {
    fn default() -> Self {
        Self {
            trees: 100,
            max_features: None,
            min_leaf: 1,
            max_depth: None,
            seed: 0,
        }
    }
}

const LEAF: u32 = u32::MAX;

/// Internal node, or a leaf when `feature == LEAF`; a leaf's `left` is the
/// offset of its mean vector in [`Tree::values`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
struct Node {
    feature: u32,
    threshold: f64,
    left: u32,
    right: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Tree {
    nodes: Vec<Node>,
    values: Vec<f64>,
}

impl Tree {
    fn predict_into(&self, row: &[f64], out: &mut [f64]) {
        let mut at = 0usize;
        loop {
            let node = self.nodes[at];
            if node.feature == LEAF {
                let base = node.left as usize;
                let len = out.len();
                for (o, v) in out.iter_mut().zip(&self.values[base..base + len]) {
                    *o += v;
                }
                return;
            }
            at = if row[node.feature as usize] <= node.threshold {
                node.left as usize
            } else {
                node.right as usize
            };
        }
    }
}

/// Bagged regression trees with a summed-variance split criterion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    pub config: ForestConfig,
    n_features: usize,
    n_targets: usize,
    trees: Vec<Tree>,
}

struct Builder<'a> {
    x: &'a [Vec<f64>],
    y: &'a [Vec<f64>],
    m: usize,
    config: &'a ForestConfig,
    rng: ChaCha8Rng,
    tree: Tree,
}

impl Builder<'_> {
    fn leaf(&mut self, rows: &[usize]) -> u32 {
        let offset = self.tree.values.len();
        let mut mean = vec![0.0; self.m];
        for &r in rows {
            for (s, v) in mean.iter_mut().zip(&self.y[r]) {
                *s += v;
            }
        }
        let n = rows.len() as f64;
        self.tree.values.extend(mean.iter().map(|s| s / n));
        self.push(Node {
            feature: LEAF,
            threshold: 0.0,
            left: offset as u32,
            right: 0,
        })
    }

    fn push(&mut self, node: Node) -> u32 {
        self.tree.nodes.push(node);
        (self.tree.nodes.len() - 1) as u32
    }

    /// Summed squared deviation of the targets of `rows`.
    fn sse(&self, rows: &[usize]) -> f64 {
        let n = rows.len() as f64;
        (0..self.m)
            .map(|c| {
                let (s, s2) = rows.iter().fold((0.0, 0.0), |(s, s2), &r| {
                    let v = self.y[r][c];
                    (s + v, s2 + v * v)
                });
                s2 - s * s / n
            })
            .sum()
    }

    fn build(&mut self, rows: &mut [usize], depth: usize) -> u32 {
        let min_leaf = self.config.min_leaf.max(1);
        let parent = self.sse(rows);
        let depth_ok = self.config.max_depth.is_none_or(|d| depth < d);
        if !depth_ok || rows.len() < 2 * min_leaf || parent <= 1e-12 * rows.len() as f64 {
            return self.leaf(rows);
        }
        let f = self.x[0].len();
        let tried: Vec<usize> = match self.config.max_features {
            Some(k) if k < f => {
                let mut v = sample(&mut self.rng, f, k.max(1)).into_vec();
                v.sort_unstable();
                v
            }
            _ => (0..f).collect(),
        };

        let n = rows.len();
        let mut best: Option<(f64, usize, f64)> = None;
        let mut left_sum = vec![0.0; self.m];
        let mut left_sq = vec![0.0; self.m];
        let mut total = vec![0.0; self.m];
        let mut total_sq = vec![0.0; self.m];
        for &r in rows.iter() {
            for c in 0..self.m {
                let v = self.y[r][c];
                total[c] += v;
                total_sq[c] += v * v;
            }
        }
        for &feat in &tried {
            rows.sort_by(|&a, &b| self.x[a][feat].total_cmp(&self.x[b][feat]).then(a.cmp(&b)));
            left_sum.iter_mut().for_each(|v| *v = 0.0);
            left_sq.iter_mut().for_each(|v| *v = 0.0);
            for i in 0..n - 1 {
                let r = rows[i];
                for c in 0..self.m {
                    let v = self.y[r][c];
                    left_sum[c] += v;
                    left_sq[c] += v * v;
                }
                let (nl, nr) = (i + 1, n - i - 1);
                if nl < min_leaf || nr < min_leaf {
                    continue;
                }
                let (a, b) = (self.x[r][feat], self.x[rows[i + 1]][feat]);
                if !(a < b) {
                    continue;
                }
                let mut cost = 0.0;
                for c in 0..self.m {
                    let (sl, ql) = (left_sum[c], left_sq[c]);
                    let (sr, qr) = (total[c] - sl, total_sq[c] - ql);
                    cost += ql - sl * sl / nl as f64 + qr - sr * sr / nr as f64;
                }
                if best.is_none_or(|(bc, _, _)| cost < bc) {
                    let mut threshold = 0.5 * (a + b);
                    if !(threshold < b) {
                        threshold = a;
                    }
                    best = Some((cost, feat, threshold));
                }
            }
        }
        let Some((cost, feat, threshold)) = best else {
            return self.leaf(rows);
        };
        if cost >= parent {
            return self.leaf(rows);
        }
        let mid = partition(rows, |r| self.x[r][feat] <= threshold);
        let at = self.push(Node {
            feature: feat as u32,
            threshold,
            left: 0,
            right: 0,
        });
        let (lo, hi) = rows.split_at_mut(mid);
        let left = self.build(lo, depth + 1);
        let right = self.build(hi, depth + 1);
        let node = &mut self.tree.nodes[at as usize];
        node.left = left;
        node.right = right;
        at
    }
}

/// Stable partition; returns the number of rows satisfying `pred`.
fn partition(rows: &mut [usize], pred: impl Fn(usize) -> bool) -> usize {
    let (yes, no): (Vec<usize>, Vec<usize>) = rows.iter().partition(|&&r| pred(r));
    let mid = yes.len();
    rows[..mid].copy_from_slice(&yes);
    rows[mid..].copy_from_slice(&no);
    mid
}

impl ForestModel {
    pub fn fit(features: &[Vec<f64>], targets: &[Vec<f64>], config: &ForestConfig) -> Result<Self> {
        if features.is_empty() {
            return Err(Error::Empty("training set"));
        }
        if features.len() != targets.len() {
            return Err(Error::Dimension("feature and target row counts differ".into()));
        }
        if config.trees == 0 {
            return Err(Error::Domain("tree count must be at least 1".into()));
        }
        let n = features.len();
        let m = targets[0].len();
        let trees = (0..config.trees)
            .into_par_iter()
            .map(|t| {
                let mut rng = ChaCha8Rng::seed_from_u64(config.seed.wrapping_add(t as u64));
                let mut rows: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
                let mut b = Builder {
                    x: features,
                    y: targets,
                    m,
                    config,
                    rng,
                    tree: Tree {
                        nodes: Vec::new(),
                        values: Vec::new(),
                    },
                };
                b.build(&mut rows, 0);
                b.tree
            })
            .collect();
        Ok(Self {
            config: config.clone(),
            n_features: features[0].len(),
            n_targets: m,
            trees,
        })
    }

    pub fn tree_count(&self) -> usize {
        self.trees.len()
    }

    /// Features used by at least one split.
    pub fn split_features(&self) -> Vec<usize> {
        let mut f: Vec<usize> = self
            .trees
            .iter()
            .flat_map(|t| t.nodes.iter().filter(|n| n.feature != LEAF).map(|n| n.feature as usize))
            .collect();
        f.sort_unstable();
        f.dedup();
        f
    }

    /// `(feature, threshold)` of every internal node.
    pub fn thresholds(&self) -> Vec<(usize, f64)> {
        self.trees
            .iter()
            .flat_map(|t| t.nodes.iter().filter(|n| n.feature != LEAF))
            .map(|n| (n.feature as usize, n.threshold))
            .collect()
    }
}

impl Predict for ForestModel {
    fn predict(&self, rows: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        if let Some(r) = rows.iter().find(|r| r.len() != self.n_features) {
            return Err(Error::Contract(format!(
                "model expects {} features, got {}",
                self.n_features,
                r.len()
            )));
        }
        let scale = 1.0 / self.trees.len() as f64;
        Ok(rows
            .par_iter()
            .map(|row| {
                let mut out = vec![0.0; self.n_targets];
                for t in &self.trees {
                    t.predict_into(row, &mut out);
                }
                out.iter_mut().for_each(|v| *v *= scale);
                out
            })
            .collect())
    }
}
