use crate::error::{Error, Result};

/// How [`r2_score_with`] treats an output whose actual values are constant.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstantOutput {
    /// The score is undefined; report an error.
    Error,
    /// Score 1 if predicted exactly, else 0.
    Convention,
}

fn check_shapes(actual: &[Vec<f64>], predicted: &[Vec<f64>]) -> Result<usize> {
    if actual.len() != predicted.len() {
        return Err(Error::Dimension(format!("{} rows vs {} rows", actual.len(), predicted.len())));
    }
    let cols = actual.first().ok_or(Error::Empty("score input"))?.len();
    if actual.iter().chain(predicted).any(|r| r.len() != cols) {
        return Err(Error::Dimension("rows differ in width".into()));
    }
    Ok(cols)
}

/// Uniform average over outputs of `1 - SS_res / SS_tot`.
pub fn r2_score(actual: &[Vec<f64>], predicted: &[Vec<f64>]) -> Result<f64> {
    r2_score_with(actual, predicted, ConstantOutput::Error)
}

pub fn r2_score_with(actual: &[Vec<f64>], predicted: &[Vec<f64>], constant: ConstantOutput) -> Result<f64> {
    let cols = check_shapes(actual, predicted)?;
    if actual.len() < 2 {
        return Err(Error::Domain("R² needs at least two rows".into()));
    }
    let n = actual.len() as f64;
    let mut total = 0.0;
    for c in 0..cols {
        let mean = actual.iter().map(|r| r[c]).sum::<f64>() / n;
        let ss_tot: f64 = actual.iter().map(|r| (r[c] - mean).powi(2)).sum();
        let ss_res: f64 = actual.iter().zip(predicted).map(|(a, p)| (a[c] - p[c]).powi(2)).sum();
        total += if ss_tot > 0.0 {
            1.0 - ss_res / ss_tot
        } else {
            match constant {
                ConstantOutput::Error => return Err(Error::UndefinedScore { output: c }),
                ConstantOutput::Convention if ss_res == 0.0 => 1.0,
                ConstantOutput::Convention => 0.0,
            }
        };
    }
    Ok(total / cols as f64)
}

/// Mean squared error over all entries.
pub fn mse(actual: &[Vec<f64>], predicted: &[Vec<f64>]) -> Result<f64> {
    let cols = check_shapes(actual, predicted)?;
    let sum: f64 = actual
        .iter()
        .zip(predicted)
        .flat_map(|(a, p)| a.iter().zip(p).map(|(x, y)| (x - y) * (x - y)))
        .sum();
    Ok(sum / (actual.len() * cols) as f64)
}

pub fn rmse(actual: &[Vec<f64>], predicted: &[Vec<f64>]) -> Result<f64> {
    mse(actual, predicted).map(f64::sqrt)
}

/// RMSE of one item over its outputs.
pub fn item_rmse(actual: &[f64], predicted: &[f64]) -> f64 {
    let sum: f64 = actual.iter().zip(predicted).map(|(x, y)| (x - y) * (x - y)).sum();
    (sum / actual.len() as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_prediction() {
        let a = vec![vec![1.0, 2.0], vec![3.0, 5.0], vec![0.0, 1.0]];
        assert_eq!(r2_score(&a, &a).unwrap(), 1.0);
        assert_eq!(rmse(&a, &a).unwrap(), 0.0);
    }

    #[test]
    fn mean_prediction_scores_zero() {
        let a = vec![vec![1.0, 2.0], vec![3.0, 6.0], vec![5.0, 1.0]];
        let means = vec![vec![3.0, 3.0]; 3];
        assert!(r2_score(&a, &means).unwrap().abs() < 1e-15);
    }

    #[test]
    fn unit_rmse() {
        assert_eq!(rmse(&[vec![0.0, 0.0]], &[vec![1.0, 1.0]]).unwrap(), 1.0);
        assert_eq!(item_rmse(&[0.0, 0.0], &[1.0, 1.0]), 1.0);
    }

    #[test]
    fn constant_output_handling() {
        let a = vec![vec![1.0, 0.0], vec![2.0, 0.0]];
        let exact = a.clone();
        let off = vec![vec![1.0, 0.1], vec![2.0, 0.0]];
        assert!(matches!(r2_score(&a, &exact), Err(Error::UndefinedScore { output: 1 })));
        assert_eq!(r2_score_with(&a, &exact, ConstantOutput::Convention).unwrap(), 1.0);
        assert_eq!(r2_score_with(&a, &off, ConstantOutput::Convention).unwrap(), 0.5);
    }

    #[test]
    fn shape_errors() {
        assert!(r2_score(&[vec![1.0]], &[vec![1.0]]).is_err());
        assert!(mse(&[vec![1.0]], &[vec![1.0, 2.0]]).is_err());
        assert!(mse(&[], &[]).is_err());
    }
}
