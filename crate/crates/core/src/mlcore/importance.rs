use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{mse, Predict};
use crate::error::{Error, Result};

/// Increase in validation MSE when each feature column is shuffled.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Importance {
    pub baseline_mse: f64,
    /// Mean increase per feature, in feature order.
    pub raw: Vec<f64>,
    /// Standard deviation of the increase over repeats.
    pub std: Vec<f64>,
    /// Feature indices, most important first; ties keep the lower index.
    pub ranking: Vec<usize>,
}

impl Importance {
    /// Position of `feature` in the ranking (0 = most important).
    pub fn rank_of(&self, feature: usize) -> usize {
        self.ranking.iter().position(|&f| f == feature).unwrap_or(usize::MAX)
    }
}

pub fn permutation_importance(
    model: &impl Predict,
    features: &[Vec<f64>],
    targets: &[Vec<f64>],
    repeats: usize,
    seed: u64,
) -> Result<Importance> {
    if repeats == 0 {
        return Err(Error::Domain("repeats must be at least 1".into()));
    }
    let first = features.first().ok_or(Error::Empty("validation set"))?;
    let baseline_mse = mse(targets, &model.predict(features)?)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut raw = Vec::with_capacity(first.len());
    let mut std = Vec::with_capacity(first.len());
    let mut column: Vec<f64> = Vec::with_capacity(features.len());
    for j in 0..first.len() {
        let mut deltas = Vec::with_capacity(repeats);
        for _ in 0..repeats {
            column.clear();
            column.extend(features.iter().map(|r| r[j]));
            column.shuffle(&mut rng);
            let shuffled: Vec<Vec<f64>> = features
                .iter()
                .zip(&column)
                .map(|(r, &v)| {
                    let mut r = r.clone();
                    r[j] = v;
                    r
                })
                .collect();
            deltas.push(mse(targets, &model.predict(&shuffled)?)? - baseline_mse);
        }
        let mean = deltas.iter().sum::<f64>() / repeats as f64;
        let var = deltas.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / repeats as f64;
        raw.push(mean);
        std.push(var.sqrt());
    }
    let mut ranking: Vec<usize> = (0..raw.len()).collect();
    ranking.sort_by(|&a, &b| raw[b].total_cmp(&raw[a]).then(a.cmp(&b)));
    Ok(Importance {
        baseline_mse,
        raw,
        std,
        ranking,
    })
}
