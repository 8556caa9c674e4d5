//! A small network fit with Adam and early stopping; prints the loss curve
//! and checks the backpropagated gradient against central differences.

use invspec::mlcore::{MlpConfig, MlpModel};
use ndarray::Array2;
use rand::{Rng, SeedableRng};

fn main() -> invspec::Result<()> {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
    let sample = |rng: &mut rand_chacha::ChaCha8Rng, n: usize| {
        let x: Vec<Vec<f64>> = (0..n).map(|_| vec![rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)]).collect();
        let y = x.iter().map(|r| vec![r[0] * r[1], (2.0 * r[0]).sin()]).collect::<Vec<_>>();
        (x, y)
    };
    let (tx, ty) = sample(&mut rng, 600);
    let (vx, vy) = sample(&mut rng, 200);
    let cfg = MlpConfig { hidden: vec![32, 32], max_epochs: 200, seed: 1, ..MlpConfig::default() };
    let (model, history) = MlpModel::fit(&tx, &ty, &vx, &vy, &cfg)?;
    for (e, (t, v)) in history.train_loss.iter().zip(&history.validate_loss).enumerate().step_by(20) {
        println!("epoch {:3}  train {t:.5}  validate {v:.5}", e + 1);
    }
    println!("best epoch {}, {} parameters", history.best_epoch, MlpModel::parameter_count(&model.sizes));

    let net = MlpModel::new(&[3, 4, 2], 9)?;
    let x = Array2::from_shape_vec((2, 3), vec![0.3, -0.2, 0.8, -0.5, 0.4, 0.1]).unwrap();
    let y = Array2::from_shape_vec((2, 2), vec![0.1, 0.2, -0.3, 0.5]).unwrap();
    let (_, grad) = net.loss_gradient(&x, &y, 1e-3);
    let params = net.parameters();
    let mut worst: f64 = 0.0;
    for i in 0..params.len() {
        let h = 1e-6;
        let mut shifted = net.clone();
        let mut p = params.clone();
        p[i] += h;
        shifted.set_parameters(&p)?;
        let up = shifted.loss_gradient(&x, &y, 1e-3).0;
        p[i] -= 2.0 * h;
        shifted.set_parameters(&p)?;
        let down = shifted.loss_gradient(&x, &y, 1e-3).0;
        let fd = (up - down) / (2.0 * h);
        worst = worst.max((fd - grad[i]).abs() / fd.abs().max(grad[i].abs()).max(1e-8));
    }
    println!("gradient check: max relative error {worst:.2e}");
    Ok(())
}
