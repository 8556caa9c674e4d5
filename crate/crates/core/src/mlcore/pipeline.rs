use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{
    r2_score_with, rmse, ConstantOutput, ForestConfig, ForestModel, KnnModel, MlpConfig, MlpModel, Predict, Scaler,
    TrainingHistory,
};
use crate::dataset::Dataset;
use crate::error::{Error, Result};

pub const MODEL_FORMAT_VERSION: u32 = 1;

/// Model family and hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "lowercase")]
pub enum ModelSpec {
    Knn { k: usize },
    Forest(ForestConfig),
    Mlp(MlpConfig),
}

impl ModelSpec {
    pub fn name(&self) -> &'static str {
        match self {
            ModelSpec::Knn { .. } => "knn",
            ModelSpec::Forest(_) => "rf",
            ModelSpec::Mlp(_) => "mlp",
        }
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        match self {
            ModelSpec::Knn { k } => ModelSpec::Knn { k: *k },
            ModelSpec::Forest(c) => ModelSpec::Forest(ForestConfig { seed, ..c.clone() }),
            ModelSpec::Mlp(c) => ModelSpec::Mlp(MlpConfig { seed, ..c.clone() }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "lowercase")]
pub enum Model {
    Knn(KnnModel),
    Forest(ForestModel),
    Mlp(MlpModel),
}

impl Predict for Model {
    fn predict(&self, rows: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        match self {
            Model::Knn(m) => m.predict(rows),
            Model::Forest(m) => m.predict(rows),
            Model::Mlp(m) => m.predict(rows),
        }
    }
}

/// Scores of a fitted pipeline on its training and validation sets.
///
/// R² uses [`ConstantOutput::Convention`] so that always-zero targets (the
/// potential at the centre) do not make the score undefined.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub spec: ModelSpec,
    pub train_r2: f64,
    pub validate_r2: f64,
    pub train_rmse: f64,
    pub validate_rmse: f64,
    pub history: Option<TrainingHistory>,
}

/// Feature scaler plus model; predicts from raw eigenvalues.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pipeline {
    pub spec: ModelSpec,
    pub scaler: Scaler,
    pub model: Model,
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format_version: u32,
    pipeline: Pipeline,
}

impl Pipeline {
    /// Fits the scaler on `train` only, then the model. `validate` drives
    /// early stopping for the MLP and is otherwise only scored.
    pub fn fit(spec: &ModelSpec, train: &Dataset, validate: &Dataset) -> Result<(Self, FitReport)> {
        if train.is_empty() {
            return Err(Error::Empty("training set"));
        }
        let scaler = Scaler::fit(&train.features)?;
        let x = scaler.transform(&train.features)?;
        let mut history = None;
        let model = match spec {
            ModelSpec::Knn { k } => Model::Knn(KnnModel::fit(&x, &train.targets, *k)?),
            ModelSpec::Forest(c) => Model::Forest(ForestModel::fit(&x, &train.targets, c)?),
            ModelSpec::Mlp(c) => {
                let vx = scaler.transform(&validate.features)?;
                let (m, h) = MlpModel::fit(&x, &train.targets, &vx, &validate.targets, c)?;
                history = Some(h);
                Model::Mlp(m)
            }
        };
        let pipeline = Self {
            spec: spec.clone(),
            scaler,
            model,
        };
        let score = |d: &Dataset| -> Result<(f64, f64)> {
            if d.len() < 2 {
                return Ok((f64::NAN, f64::NAN));
            }
            let p = pipeline.predict(&d.features)?;
            Ok((r2_score_with(&d.targets, &p, ConstantOutput::Convention)?, rmse(&d.targets, &p)?))
        };
        let (train_r2, train_rmse) = score(train)?;
        let (validate_r2, validate_rmse) = score(validate)?;
        let report = FitReport {
            spec: spec.clone(),
            train_r2,
            validate_r2,
            train_rmse,
            validate_rmse,
            history,
        };
        Ok((pipeline, report))
    }

    pub fn n_features(&self) -> usize {
        self.scaler.dim()
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = ModelFile {
            format_version: MODEL_FORMAT_VERSION,
            pipeline: self.clone(),
        };
        let json = serde_json::to_string(&file).map_err(|e| Error::Format(e.to_string()))?;
        fs::write(path, json).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let value: serde_json::Value =
            serde_json::from_str(&text).map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
        let version = value.get("format_version").and_then(|v| v.as_u64());
        if version != Some(u64::from(MODEL_FORMAT_VERSION)) {
            return Err(Error::Format(format!(
                "{}: unsupported model format version {version:?}",
                path.display()
            )));
        }
        let file: ModelFile =
            serde_json::from_value(value).map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
        Ok(file.pipeline)
    }
}

impl Predict for Pipeline {
    fn predict(&self, rows: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        if let Some(r) = rows.iter().find(|r| r.len() != self.n_features()) {
            return Err(Error::Contract(format!(
                "model expects {} eigenvalues, got {}",
                self.n_features(),
                r.len()
            )));
        }
        self.model.predict(&self.scaler.transform(rows)?)
    }
}
