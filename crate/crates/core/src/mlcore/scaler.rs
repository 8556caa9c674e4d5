use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Per-column z-score transform `(x - μ) / σ` with the population σ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scaler {
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
}

fn moments(rows: &[Vec<f64>]) -> Result<(Vec<f64>, Vec<f64>)> {
    let first = rows.first().ok_or(Error::Empty("scaler input"))?;
    let n = rows.len() as f64;
    let cols = first.len();
    let mut means = vec![0.0; cols];
    for r in rows {
        if r.len() != cols {
            return Err(Error::Dimension("ragged rows".into()));
        }
        for (m, v) in means.iter_mut().zip(r) {
            *m += v;
        }
    }
    means.iter_mut().for_each(|m| *m /= n);
    let mut vars = vec![0.0; cols];
    for r in rows {
        for ((s, v), m) in vars.iter_mut().zip(r).zip(&means) {
            *s += (v - m) * (v - m);
        }
    }
    Ok((means, vars.into_iter().map(|v| (v / n).sqrt()).collect()))
}

impl Scaler {
    /// Fails on a constant column.
    pub fn fit(rows: &[Vec<f64>]) -> Result<Self> {
        let (means, stds) = moments(rows)?;
        if let Some(index) = stds.iter().position(|&s| !(s > 0.0)) {
            return Err(Error::DegenerateFeature { index });
        }
        Ok(Self { means, stds })
    }

    /// Like [`Scaler::fit`], but a constant column gets σ = 1 (it is only centred).
    pub fn fit_lenient(rows: &[Vec<f64>]) -> Result<Self> {
        let (means, stds) = moments(rows)?;
        let stds = stds.into_iter().map(|s| if s > 0.0 { s } else { 1.0 }).collect();
        Ok(Self { means, stds })
    }

    pub fn dim(&self) -> usize {
        self.means.len()
    }

    pub fn transform_row(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .zip(&self.means)
            .zip(&self.stds)
            .map(|((x, m), s)| (x - m) / s)
            .collect()
    }

    pub fn inverse_row(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .zip(&self.means)
            .zip(&self.stds)
            .map(|((z, m), s)| z * s + m)
            .collect()
    }

    pub fn transform(&self, rows: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        self.check(rows)?;
        Ok(rows.iter().map(|r| self.transform_row(r)).collect())
    }

    pub fn inverse(&self, rows: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        self.check(rows)?;
        Ok(rows.iter().map(|r| self.inverse_row(r)).collect())
    }

    fn check(&self, rows: &[Vec<f64>]) -> Result<()> {
        match rows.iter().find(|r| r.len() != self.dim()) {
            Some(r) => Err(Error::Contract(format!(
                "scaler expects {} columns, got {}",
                self.dim(),
                r.len()
            ))),
            None => Ok(()),
        }
    }
}
