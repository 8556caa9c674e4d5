use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::Predict;
use crate::error::{Error, Result};

/// Unweighted k-nearest-neighbour regression in Euclidean distance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnnModel {
    pub k: usize,
    features: Vec<Vec<f64>>,
    targets: Vec<Vec<f64>>,
}

impl KnnModel {
    pub fn fit(features: &[Vec<f64>], targets: &[Vec<f64>], k: usize) -> Result<Self> {
        if features.is_empty() {
            return Err(Error::Empty("training set"));
        }
        if features.len() != targets.len() {
            return Err(Error::Dimension("feature and target row counts differ".into()));
        }
        if k == 0 || k > features.len() {
            return Err(Error::Domain(format!("k = {k} outside 1..={}", features.len())));
        }
        Ok(Self {
            k,
            features: features.to_vec(),
            targets: targets.to_vec(),
        })
    }

    /// Training rows nearest to `query`, ties broken by lower row index.
    pub fn neighbours(&self, query: &[f64]) -> Vec<usize> {
        let mut dist: Vec<(f64, usize)> = self
            .features
            .iter()
            .enumerate()
            .map(|(i, f)| (f.iter().zip(query).map(|(a, b)| (a - b) * (a - b)).sum(), i))
            .collect();
        let cmp = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
        if self.k < dist.len() {
            dist.select_nth_unstable_by(self.k - 1, cmp);
            dist.truncate(self.k);
        }
        dist.sort_by(cmp);
        dist.into_iter().map(|(_, i)| i).collect()
    }

    fn predict_row(&self, query: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.targets[0].len()];
        for i in self.neighbours(query) {
            for (o, t) in out.iter_mut().zip(&self.targets[i]) {
                *o += t;
            }
        }
        out.iter_mut().for_each(|o| *o /= self.k as f64);
        out
    }
}

impl Predict for KnnModel {
    fn predict(&self, rows: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        let width = self.features[0].len();
        if let Some(r) = rows.iter().find(|r| r.len() != width) {
            return Err(Error::Contract(format!("model expects {width} features, got {}", r.len())));
        }
        Ok(rows.par_iter().map(|r| self.predict_row(r)).collect())
    }
}
