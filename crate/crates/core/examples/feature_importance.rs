//! Which eigenvalues does a random forest rely on? Permutation importance on
//! the validation part of the reduced Sturm–Liouville set.

use invspec::dataset::{generate, shuffle_split, GridSpec};
use invspec::mlcore::{permutation_importance, ForestConfig, ModelSpec, Pipeline};

fn main() -> invspec::Result<()> {
    let data = generate(&GridSpec::sl_desk())?.data;
    let (train, validate) = shuffle_split(&data, 0.7, 3)?;
    let spec = ModelSpec::Forest(ForestConfig { trees: 50, seed: 3, ..ForestConfig::default() });
    let (model, _) = Pipeline::fit(&spec, &train, &validate)?;
    let imp = permutation_importance(&model, &validate.features, &validate.targets, 10, 3)?;
    println!("baseline mse {:.5}", imp.baseline_mse);
    for (rank, &f) in imp.ranking.iter().enumerate() {
        println!("{}. k{}  {:.5} ± {:.5}", rank + 1, f + 1, imp.raw[f], imp.std[f]);
    }
    Ok(())
}
