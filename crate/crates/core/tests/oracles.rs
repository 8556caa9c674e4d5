mod common;

use invspec::sturm::{sl_eigenvalues, RobinBc, SymmetricPotential};
use invspec::transmission::{det_eigenvalues, galerkin_eigenvalues, LayeredIndex};

#[test]
fn sl_solver_matches_finite_differences() {
    for b in [-17.3, -4.0, 0.7, 9.5, 19.9] {
        let ours = sl_eigenvalues(&SymmetricPotential::new(b), RobinBc::NEUMANN, 5).unwrap().eigenvalues;
        let fd = common::fd_richardson(common::symmetric_potential(b), 400, 5);
        for (a, r) in ours.iter().zip(&fd) {
            assert!((a - r).abs() < 1e-6, "b = {b}: {a} vs {r}");
        }
    }
}

#[test]
fn fd_oracle_reproduces_flat_spectrum() {
    let fd = common::fd_richardson(|_| 0.0, 200, 4);
    let pi2 = std::f64::consts::PI.powi(2);
    for (l, v) in fd.iter().enumerate() {
        assert!((v - (l * l) as f64 * pi2).abs() < 1e-7, "{l}: {v}");
    }
}

fn closed_form_lowest(n: f64, m_max: i32, count: usize) -> Vec<f64> {
    let mut all: Vec<f64> = (0..=m_max).flat_map(|m| common::homogeneous_roots(n, m, 8.0)).collect();
    all.sort_by(f64::total_cmp);
    all.dedup_by(|a, b| (*a - *b).abs() < 1e-6);
    all.truncate(count);
    all
}

#[test]
fn determinant_matches_homogeneous_closed_form() {
    for n in [4.0, 6.5] {
        let exact = closed_form_lowest(n, 4, 6);
        let index = LayeredIndex::homogeneous(n, 3).unwrap();
        let det = det_eigenvalues(&index, 4, 8.0, 6).unwrap().values();
        for (a, b) in det.iter().zip(&exact) {
            assert!((a - b).abs() < 1e-8, "n = {n}: {a} vs {b}");
        }
    }
}

#[test]
fn galerkin_matches_homogeneous_closed_form() {
    let exact = closed_form_lowest(4.0, 4, 6);
    let g = galerkin_eigenvalues(&LayeredIndex::homogeneous(4.0, 4).unwrap(), 4, 20, 6)
        .unwrap()
        .values();
    for (a, b) in g.iter().zip(&exact) {
        assert!((a - b).abs() < 1e-6, "{a} vs {b}");
    }
}
