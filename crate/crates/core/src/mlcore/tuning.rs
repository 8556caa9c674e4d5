use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{mse, ModelSpec, Pipeline, Predict};
use crate::dataset::Dataset;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    pub best: ModelSpec,
    pub best_index: usize,
    /// Mean validation MSE over folds, one per candidate.
    pub scores: Vec<f64>,
}

/// Exhaustive search over `candidates` by seeded k-fold cross-validation.
///
/// Each fold refits the scaler on its own training part. Ties keep the
/// earlier candidate.
pub fn grid_search_cv(candidates: &[ModelSpec], train: &Dataset, folds: usize, seed: u64) -> Result<SearchResult> {
    if candidates.is_empty() {
        return Err(Error::Empty("parameter grid"));
    }
    if folds < 2 || folds > train.len() {
        return Err(Error::Domain(format!("fold count {folds} outside 2..={}", train.len())));
    }
    let mut order: Vec<usize> = (0..train.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let splits: Vec<(Dataset, Dataset)> = (0..folds)
        .map(|f| {
            let (mut fit, mut hold) = (Vec::new(), Vec::new());
            for (pos, &row) in order.iter().enumerate() {
                if pos % folds == f {
                    hold.push(row);
                } else {
                    fit.push(row);
                }
            }
            (train.subset(&fit), train.subset(&hold))
        })
        .collect();

    let mut scores = Vec::with_capacity(candidates.len());
    for spec in candidates {
        let mut total = 0.0;
        for (fit, hold) in &splits {
            let (p, _) = Pipeline::fit(spec, fit, hold)?;
            total += mse(&hold.targets, &p.predict(&hold.features)?)?;
        }
        scores.push(total / folds as f64);
    }
    let best_index = scores
        .iter()
        .enumerate()
        .fold(0, |b, (i, s)| if *s < scores[b] { i } else { b });
    Ok(SearchResult {
        best: candidates[best_index].clone(),
        best_index,
        scores,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn linear(n: usize) -> Dataset {
        let f: Vec<Vec<f64>> = (0..n).map(|i| vec![i as f64 / n as f64, ((i * 13) % n) as f64 / n as f64]).collect();
        let t = f.iter().map(|r| vec![r[0] - 2.0 * r[1]]).collect();
        Dataset::new(f, t).unwrap()
    }

    #[test]
    fn single_candidate_wins() {
        let r = grid_search_cv(&[ModelSpec::Knn { k: 2 }], &linear(30), 3, 1).unwrap();
        assert_eq!(r.best, ModelSpec::Knn { k: 2 });
        assert_eq!(r.scores.len(), 1);
    }

    #[test]
    fn knn_search_is_reproducible() {
        let grid: Vec<ModelSpec> = (1..=10).map(|k| ModelSpec::Knn { k }).collect();
        let a = grid_search_cv(&grid, &linear(80), 5, 7).unwrap();
        let b = grid_search_cv(&grid, &linear(80), 5, 7).unwrap();
        assert_eq!(a, b);
        assert!(a.scores.iter().all(|&s| s >= a.scores[a.best_index]));
    }

    #[test]
    fn ties_keep_first() {
        let grid = vec![ModelSpec::Knn { k: 1 }, ModelSpec::Knn { k: 1 }];
        assert_eq!(grid_search_cv(&grid, &linear(20), 2, 0).unwrap().best_index, 0);
    }

    #[test]
    fn invalid_inputs() {
        assert!(grid_search_cv(&[], &linear(10), 2, 0).is_err());
        assert!(grid_search_cv(&[ModelSpec::Knn { k: 1 }], &linear(10), 1, 0).is_err());
    }
}
