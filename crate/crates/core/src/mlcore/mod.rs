//! Multi-output regression for the inverse problems.
//!
//! Every model maps a scaled feature row (eigenvalues) to a target row
//! (potential samples or index parameters). [`Pipeline`] bundles a fitted
//! [`Scaler`] with one of the models and is what gets trained, saved and
//! evaluated.

mod forest;
mod importance;
mod knn;
mod metrics;
mod mlp;
mod pipeline;
mod scaler;
mod tuning;

pub use forest::{ForestConfig, ForestModel};
pub use importance::{permutation_importance, Importance};
pub use knn::KnnModel;
pub use metrics::{item_rmse, mse, r2_score, r2_score_with, rmse, ConstantOutput};
pub use mlp::{MlpConfig, MlpModel, Optimizer, TrainingHistory};
pub use pipeline::{FitReport, Model, ModelSpec, Pipeline, MODEL_FORMAT_VERSION};
pub use scaler::Scaler;
pub use tuning::{grid_search_cv, SearchResult};

/// Anything that maps feature rows to target rows.
pub trait Predict {
    fn predict(&self, rows: &[Vec<f64>]) -> crate::Result<Vec<Vec<f64>>>;
}
