use ndarray::{Array1, Array2, Axis};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::{Predict, Scaler};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Optimizer {
    Adam {
        learning_rate: f64,
        beta1: f64,
        beta2: f64,
        epsilon: f64,
    },
    Sgd {
        learning_rate: f64,
    },
}

impl Optimizer {
    pub fn adam() -> Self {
        Optimizer::Adam {
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MlpConfig {
    pub hidden: Vec<usize>,
    pub optimizer: Optimizer,
    /// Weight of `Σ‖W‖²` in the loss; biases are not penalized.
    pub l2: f64,
    pub batch_size: usize,
    pub max_epochs: usize,
    pub patience: usize,
    /// Train against standardized targets.
    pub scale_targets: bool,
    pub seed: u64,
}

impl Default for MlpConfig {
    fn default() -> Self {
        Self {
            hidden: vec![10, 30],
            optimizer: Optimizer::adam(),
            l2: 1e-4,
            batch_size: 32,
            max_epochs: 500,
            patience: 20,
            scale_targets: true,
            seed: 0,
        }
    }
}

/// Per-epoch mean training loss and validation loss (scaled target space).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainingHistory {
    pub train_loss: Vec<f64>,
    pub validate_loss: Vec<f64>,
    pub best_epoch: usize,
}

/// Fully connected network, ReLU on hidden layers, identity output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpModel {
    pub sizes: Vec<usize>,
    /// `fan_in × fan_out` per layer.
    pub weights: Vec<Array2<f64>>,
    pub biases: Vec<Array1<f64>>,
    pub target_scaler: Option<Scaler>,
}

/// Gradients laid out like [`MlpModel::parameters`].
struct Grads {
    weights: Vec<Array2<f64>>,
    biases: Vec<Array1<f64>>,
}

pub(crate) fn to_array(rows: &[Vec<f64>]) -> Array2<f64> {
    let cols = rows.first().map_or(0, Vec::len);
    Array2::from_shape_fn((rows.len(), cols), |(i, j)| rows[i][j])
}

fn from_array(a: &Array2<f64>) -> Vec<Vec<f64>> {
    a.rows().into_iter().map(|r| r.to_vec()).collect()
}

impl MlpModel {
    /// He-initialized weights, zero biases.
    pub fn new(sizes: &[usize], seed: u64) -> Result<Self> {
        if sizes.len() < 2 || sizes.contains(&0) {
            return Err(Error::Domain(format!("invalid layer sizes {sizes:?}")));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut weights = Vec::new();
        let mut biases = Vec::new();
        for w in sizes.windows(2) {
            let normal = Normal::new(0.0, (2.0 / w[0] as f64).sqrt()).expect("positive variance");
            weights.push(Array2::from_shape_simple_fn((w[0], w[1]), || normal.sample(&mut rng)));
            biases.push(Array1::zeros(w[1]));
        }
        Ok(Self {
            sizes: sizes.to_vec(),
            weights,
            biases,
            target_scaler: None,
        })
    }

    /// `Σ (fan_in + 1) · fan_out`.
    pub fn parameter_count(sizes: &[usize]) -> usize {
        sizes.windows(2).map(|w| (w[0] + 1) * w[1]).sum()
    }

    pub fn parameters(&self) -> Vec<f64> {
        self.weights
            .iter()
            .zip(&self.biases)
            .flat_map(|(w, b)| w.iter().chain(b.iter()).copied().collect::<Vec<_>>())
            .collect()
    }

    pub fn set_parameters(&mut self, params: &[f64]) -> Result<()> {
        if params.len() != Self::parameter_count(&self.sizes) {
            return Err(Error::Dimension(format!(
                "{} parameters for a network with {}",
                params.len(),
                Self::parameter_count(&self.sizes)
            )));
        }
        let mut it = params.iter().copied();
        for (w, b) in self.weights.iter_mut().zip(&mut self.biases) {
            w.iter_mut().chain(b.iter_mut()).for_each(|v| *v = it.next().unwrap_or(0.0));
        }
        Ok(())
    }

    /// Network output in training space (before undoing target scaling).
    pub fn forward(&self, x: &Array2<f64>) -> Array2<f64> {
        let last = self.weights.len() - 1;
        let mut a = x.clone();
        for (l, (w, b)) in self.weights.iter().zip(&self.biases).enumerate() {
            a = a.dot(w) + b;
            if l < last {
                a.mapv_inplace(|v| v.max(0.0));
            }
        }
        a
    }

    fn backward(&self, x: &Array2<f64>, y: &Array2<f64>, l2: f64) -> (f64, Grads) {
        let last = self.weights.len() - 1;
        let mut acts = vec![x.clone()];
        for (l, (w, b)) in self.weights.iter().zip(&self.biases).enumerate() {
            let mut z = acts[l].dot(w) + b;
            if l < last {
                z.mapv_inplace(|v| v.max(0.0));
            }
            acts.push(z);
        }
        let out = &acts[last + 1];
        let count = (out.nrows() * out.ncols()) as f64;
        let diff = out - y;
        let penalty: f64 = self.weights.iter().map(|w| w.iter().map(|v| v * v).sum::<f64>()).sum();
        let loss = diff.iter().map(|v| v * v).sum::<f64>() / count + l2 * penalty;

        let mut delta = diff * (2.0 / count);
        let mut gw = vec![Array2::zeros((0, 0)); self.weights.len()];
        let mut gb = vec![Array1::zeros(0); self.weights.len()];
        for l in (0..=last).rev() {
            gw[l] = acts[l].t().dot(&delta) + &(&self.weights[l] * (2.0 * l2));
            gb[l] = delta.sum_axis(Axis(0));
            if l > 0 {
                let mut prev = delta.dot(&self.weights[l].t());
                prev.zip_mut_with(&acts[l], |d, &a| {
                    if a <= 0.0 {
                        *d = 0.0;
                    }
                });
                delta = prev;
            }
        }
        (loss, Grads { weights: gw, biases: gb })
    }

    /// Loss (MSE plus L2 penalty) and its gradient, flattened like [`MlpModel::parameters`].
    pub fn loss_gradient(&self, x: &Array2<f64>, y: &Array2<f64>, l2: f64) -> (f64, Vec<f64>) {
        let (loss, g) = self.backward(x, y, l2);
        let flat = g
            .weights
            .iter()
            .zip(&g.biases)
            .flat_map(|(w, b)| w.iter().chain(b.iter()).copied().collect::<Vec<_>>())
            .collect();
        (loss, flat)
    }

    /// Trains on `train`, monitoring `validate` for early stopping; the
    /// returned model carries the weights of the best validation epoch.
    pub fn fit(
        train_x: &[Vec<f64>],
        train_y: &[Vec<f64>],
        val_x: &[Vec<f64>],
        val_y: &[Vec<f64>],
        config: &MlpConfig,
    ) -> Result<(Self, TrainingHistory)> {
        if train_x.is_empty() || val_x.is_empty() {
            return Err(Error::Empty("training or validation set"));
        }
        if config.batch_size == 0 {
            return Err(Error::Domain("batch size must be positive".into()));
        }
        let mut sizes = vec![train_x[0].len()];
        sizes.extend(&config.hidden);
        sizes.push(train_y[0].len());
        let mut model = Self::new(&sizes, config.seed)?;

        let target_scaler = if config.scale_targets {
            Some(Scaler::fit_lenient(train_y)?)
        } else {
            None
        };
        let scale = |rows: &[Vec<f64>]| -> Result<Array2<f64>> {
            Ok(match &target_scaler {
                Some(s) => to_array(&s.transform(rows)?),
                None => to_array(rows),
            })
        };
        let (x, y) = (to_array(train_x), scale(train_y)?);
        let (vx, vy) = (to_array(val_x), scale(val_y)?);

        let mut m_w: Vec<Array2<f64>> = model.weights.iter().map(|w| Array2::zeros(w.raw_dim())).collect();
        let mut v_w = m_w.clone();
        let mut m_b: Vec<Array1<f64>> = model.biases.iter().map(|b| Array1::zeros(b.raw_dim())).collect();
        let mut v_b = m_b.clone();
        let mut step = 0i32;

        let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ 0x5eed);
        let mut order: Vec<usize> = (0..x.nrows()).collect();
        let mut history = TrainingHistory::default();
        let mut best = (f64::INFINITY, model.clone());
        let mut since_best = 0;

        let val_loss = |m: &MlpModel| {
            let d = m.forward(&vx) - &vy;
            d.iter().map(|v| v * v).sum::<f64>() / (d.nrows() * d.ncols()) as f64
        };

        for epoch in 0..config.max_epochs {
            order.shuffle(&mut rng);
            let mut epoch_loss = 0.0;
            for batch in order.chunks(config.batch_size) {
                let bx = x.select(Axis(0), batch);
                let by = y.select(Axis(0), batch);
                let (loss, g) = model.backward(&bx, &by, config.l2);
                if !loss.is_finite() {
                    return Err(Error::Divergence { epoch });
                }
                epoch_loss += loss * batch.len() as f64;
                step += 1;
                match config.optimizer {
                    Optimizer::Sgd { learning_rate } => {
                        for (w, gw) in model.weights.iter_mut().zip(&g.weights) {
                            w.scaled_add(-learning_rate, gw);
                        }
                        for (b, gb) in model.biases.iter_mut().zip(&g.biases) {
                            b.scaled_add(-learning_rate, gb);
                        }
                    }
                    Optimizer::Adam {
                        learning_rate,
                        beta1,
                        beta2,
                        epsilon,
                    } => {
                        let lr = learning_rate * (1.0 - beta2.powi(step)).sqrt() / (1.0 - beta1.powi(step));
                        let update = |p: &mut f64, g: f64, m: &mut f64, v: &mut f64| {
                            *m = beta1 * *m + (1.0 - beta1) * g;
                            *v = beta2 * *v + (1.0 - beta2) * g * g;
                            *p -= lr * *m / (v.sqrt() + epsilon);
                        };
                        for l in 0..model.weights.len() {
                            ndarray::Zip::from(&mut model.weights[l])
                                .and(&g.weights[l])
                                .and(&mut m_w[l])
                                .and(&mut v_w[l])
                                .for_each(|p, &g, m, v| update(p, g, m, v));
                            ndarray::Zip::from(&mut model.biases[l])
                                .and(&g.biases[l])
                                .and(&mut m_b[l])
                                .and(&mut v_b[l])
                                .for_each(|p, &g, m, v| update(p, g, m, v));
                        }
                    }
                }
            }
            let vl = val_loss(&model);
            if !vl.is_finite() {
                return Err(Error::Divergence { epoch });
            }
            history.train_loss.push(epoch_loss / x.nrows() as f64);
            history.validate_loss.push(vl);
            if vl < best.0 {
                best = (vl, model.clone());
                history.best_epoch = epoch;
                since_best = 0;
            } else {
                since_best += 1;
                if since_best >= config.patience {
                    break;
                }
            }
        }
        let mut model = best.1;
        model.target_scaler = target_scaler;
        Ok((model, history))
    }
}

impl Predict for MlpModel {
    fn predict(&self, rows: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        if let Some(r) = rows.iter().find(|r| r.len() != self.sizes[0]) {
            return Err(Error::Contract(format!(
                "model expects {} features, got {}",
                self.sizes[0],
                r.len()
            )));
        }
        if rows.is_empty() {
            return Ok(Vec::new());
        }
        let out = from_array(&self.forward(&to_array(rows)));
        match &self.target_scaler {
            Some(s) => s.inverse(&out),
            None => Ok(out),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_parameter_counts() {
        assert_eq!(MlpModel::parameter_count(&[5, 10, 30, 21]), 1041);
        assert_eq!(MlpModel::parameter_count(&[6, 800, 200, 100, 50, 3]), 191103);
        let m = MlpModel::new(&[5, 10, 30, 21], 1).unwrap();
        assert_eq!(m.parameters().len(), 1041);
    }

    #[test]
    fn zero_network_predicts_zero() {
        let mut m = MlpModel::new(&[3, 4, 2], 0).unwrap();
        m.set_parameters(&vec![0.0; MlpModel::parameter_count(&[3, 4, 2])]).unwrap();
        assert_eq!(m.predict(&[vec![1.0, -2.0, 3.0]]).unwrap(), vec![vec![0.0, 0.0]]);
    }

    #[test]
    fn gradient_matches_central_differences() {
        let mut m = MlpModel::new(&[3, 4, 2], 11).unwrap();
        let mut p = m.parameters();
        // hidden biases away from the kinks
        for (i, v) in p.iter_mut().enumerate().skip(12).take(4) {
            *v = 0.3 + 0.1 * i as f64;
        }
        m.set_parameters(&p).unwrap();
        let x = to_array(&[vec![0.5, -0.2, 0.9], vec![0.1, 0.4, -0.3]]);
        let y = to_array(&[vec![1.0, -1.0], vec![0.5, 0.2]]);
        let z = x.dot(&m.weights[0]) + &m.biases[0];
        assert!(z.iter().all(|v| v.abs() > 1e-3));
        let (_, g) = m.loss_gradient(&x, &y, 1e-2);
        let h = 1e-5;
        for i in 0..p.len() {
            let mut up = m.clone();
            let mut q = p.clone();
            q[i] += h;
            up.set_parameters(&q).unwrap();
            let (lp, _) = up.loss_gradient(&x, &y, 1e-2);
            q[i] -= 2.0 * h;
            up.set_parameters(&q).unwrap();
            let (lm, _) = up.loss_gradient(&x, &y, 1e-2);
            let fd = (lp - lm) / (2.0 * h);
            let rel = (fd - g[i]).abs() / fd.abs().max(g[i].abs()).max(1e-8);
            assert!(rel < 1e-5, "param {i}: {fd} vs {}", g[i]);
        }
    }

    #[test]
    fn learns_a_smooth_map_and_is_deterministic() {
        let xs: Vec<Vec<f64>> = (0..200).map(|i| vec![(i as f64 / 100.0) - 1.0, ((i * 37 % 200) as f64 / 100.0) - 1.0]).collect();
        let ys: Vec<Vec<f64>> = xs.iter().map(|r| vec![r[0] + 2.0 * r[1], r[0] * r[1]]).collect();
        let config = MlpConfig {
            hidden: vec![16, 16],
            max_epochs: 300,
            seed: 4,
            ..Default::default()
        };
        let (m, hist) = MlpModel::fit(&xs[..150], &ys[..150], &xs[150..], &ys[150..], &config).unwrap();
        let (m2, _) = MlpModel::fit(&xs[..150], &ys[..150], &xs[150..], &ys[150..], &config).unwrap();
        assert_eq!(m, m2);
        assert!(hist.validate_loss[hist.best_epoch] <= hist.validate_loss[0]);
        let p = m.predict(&xs[150..]).unwrap();
        let r2 = super::super::r2_score(&ys[150..], &p).unwrap();
        assert!(r2 > 0.85, "{r2}");
    }

    #[test]
    fn divergence_is_reported() {
        let xs: Vec<Vec<f64>> = (0..20).map(|i| vec![i as f64 * 1e3]).collect();
        let ys: Vec<Vec<f64>> = (0..20).map(|i| vec![i as f64]).collect();
        let config = MlpConfig {
            hidden: vec![],
            optimizer: Optimizer::Sgd { learning_rate: 1e3 },
            scale_targets: false,
            ..Default::default()
        };
        assert!(matches!(MlpModel::fit(&xs, &ys, &xs, &ys, &config), Err(Error::Divergence { .. })));
    }
}
