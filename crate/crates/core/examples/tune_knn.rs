//! Grid search over the neighbour count with 5-fold cross-validation on the
//! reduced Sturm–Liouville set.

use invspec::dataset::{generate, shuffle_split, GridSpec};
use invspec::mlcore::{grid_search_cv, ModelSpec};

fn main() -> invspec::Result<()> {
    let data = generate(&GridSpec::sl_desk())?.data;
    let (train, _) = shuffle_split(&data, 0.7, 7)?;
    let candidates: Vec<ModelSpec> = (1..=8).map(|k| ModelSpec::Knn { k }).collect();
    let result = grid_search_cv(&candidates, &train, 5, 7)?;
    for (c, s) in candidates.iter().zip(&result.scores) {
        if let ModelSpec::Knn { k } = c {
            println!("k = {k}: cv mse {s:.5}");
        }
    }
    println!("best: {:?}", result.best);
    Ok(())
}
