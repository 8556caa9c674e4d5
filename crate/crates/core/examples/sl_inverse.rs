//! The Sturm–Liouville inverse problem end to end: 1001 potentials, a 70/30
//! split, three regressors, and the four out-of-sample potentials.
//!
//! Pass `--desk` for the 101-sample grid.

use invspec::cli::{builtin_tests, evaluate, train};
use invspec::dataset::{generate, GridSpec};
use invspec::mlcore::{ForestConfig, MlpConfig, ModelSpec};

fn main() -> invspec::Result<()> {
    let desk = std::env::args().any(|a| a == "--desk");
    let spec = if desk { GridSpec::sl_desk() } else { GridSpec::sl_default() };
    let data = generate(&spec)?.data;
    let tests = builtin_tests(5, 21, None)?;

    let models = [
        ModelSpec::Knn { k: 3 },
        ModelSpec::Forest(ForestConfig { trees: 100, ..ForestConfig::default() }),
        ModelSpec::Mlp(MlpConfig::default()),
    ];
    println!("model  train_r2  validate_r2  test_rmse");
    for m in &models {
        let (pipeline, report, _) = train(&data, m, 0.7, 42)?;
        let eval = evaluate(&pipeline, &tests)?;
        println!(
            "{:5} {:9.4} {:12.4} {:10.4}",
            m.name(),
            report.train_r2,
            report.validate_r2,
            eval.total_rmse
        );
        for (label, e) in eval.labels.iter().zip(&eval.item_rmse) {
            println!("      {label:>10}  rmse {e:.4}");
        }
    }
    Ok(())
}
