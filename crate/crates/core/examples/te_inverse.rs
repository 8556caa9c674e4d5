//! The two-layer transmission inverse problem on the reduced grid
//! (15129 indices, n step 0.2). Test inputs are determinant eigenvalues of
//! indices outside the grid. Pass `--full` for the 59049-sample grid.
//!
//! Takes several minutes, mostly training the 191103-parameter network.

use invspec::cli::{builtin_tests, evaluate, train};
use invspec::dataset::{generate, GridSpec};
use invspec::mlcore::{ForestConfig, MlpConfig, ModelSpec};

fn main() -> invspec::Result<()> {
    let full = std::env::args().any(|a| a == "--full");
    let spec = if full { GridSpec::te2_default() } else { GridSpec::te2_desk() };
    let data = generate(&spec)?.data;
    println!("{} samples", data.len());
    let tests = builtin_tests(6, 3, Some(5))?;

    let models = [
        ModelSpec::Knn { k: 3 },
        ModelSpec::Forest(ForestConfig { trees: 200, ..ForestConfig::default() }),
        ModelSpec::Mlp(MlpConfig { hidden: vec![800, 200, 100, 50], ..MlpConfig::default() }),
    ];
    for m in &models {
        let (pipeline, report, _) = train(&data, m, 0.7, 42)?;
        let eval = evaluate(&pipeline, &tests)?;
        println!("{}: validate R² {:.4}, test RMSE {:.4}", m.name(), report.validate_r2, eval.total_rmse);
        for ((label, p), e) in eval.labels.iter().zip(&eval.predicted).zip(&eval.item_rmse) {
            println!("  {label:>12} -> {:.2?}  ({e:.3})", p);
        }
    }
    Ok(())
}
