//! Independent reference values used by the integration and acceptance tests.

#![allow(dead_code)]

/// Lowest `count` eigenvalues of the symmetric tridiagonal matrix with
/// diagonal `d` and off-diagonal `e`, by Sturm-sequence bisection.
pub fn tridiagonal_eigenvalues(d: &[f64], e: &[f64], count: usize) -> Vec<f64> {
    let n = d.len();
    let bound = d
        .iter()
        .enumerate()
        .map(|(i, &di)| {
            let left = if i > 0 { e[i - 1].abs() } else { 0.0 };
            let right = if i + 1 < n { e[i].abs() } else { 0.0 };
            di.abs() + left + right
        })
        .fold(0.0, f64::max);
    // number of eigenvalues below x
    let below = |x: f64| -> usize {
        let mut q = d[0] - x;
        let mut c = usize::from(q < 0.0);
        for i in 1..n {
            let denom = if q == 0.0 { f64::EPSILON } else { q };
            q = d[i] - x - e[i - 1] * e[i - 1] / denom;
            c += usize::from(q < 0.0);
        }
        c
    };
    (0..count)
        .map(|j| {
            let (mut lo, mut hi) = (-bound, bound);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if below(mid) > j {
                    hi = mid;
                } else {
                    lo = mid;
                }
                if hi - lo < 1e-13 * (1.0 + mid.abs()) {
                    break;
                }
            }
            0.5 * (lo + hi)
        })
        .collect()
}

/// Neumann eigenvalues of `-y'' + q y` on `(0, 1)` by central differences
/// on `n` intervals with ghost-point boundary rows, symmetrized.
pub fn fd_neumann(q: impl Fn(f64) -> f64, n: usize, count: usize) -> Vec<f64> {
    let h = 1.0 / n as f64;
    let h2 = h * h;
    let d: Vec<f64> = (0..=n).map(|i| 2.0 / h2 + q(i as f64 * h)).collect();
    let mut e = vec![-1.0 / h2; n];
    // rows 0 and n read (2y_0 - 2y_1)/h²; the similarity diag(1/√2, 1, .., 1, 1/√2) symmetrizes them
    e[0] = -std::f64::consts::SQRT_2 / h2;
    e[n - 1] = -std::f64::consts::SQRT_2 / h2;
    tridiagonal_eigenvalues(&d, &e, count)
}

/// Two Richardson steps on meshes `n, 2n, 4n` (error terms h² and h⁴).
pub fn fd_richardson(q: impl Fn(f64) -> f64 + Copy, n: usize, count: usize) -> Vec<f64> {
    let a = fd_neumann(q, n, count);
    let b = fd_neumann(q, 2 * n, count);
    let c = fd_neumann(q, 4 * n, count);
    (0..count)
        .map(|i| {
            let ab = (4.0 * b[i] - a[i]) / 3.0;
            let bc = (4.0 * c[i] - b[i]) / 3.0;
            (16.0 * bc - ab) / 15.0
        })
        .collect()
}

/// `q(x) = 1 - exp(b (x - 1/2)²)`.
pub fn symmetric_potential(b: f64) -> impl Fn(f64) -> f64 + Copy {
    move |x| 1.0 - (b * (x - 0.5) * (x - 0.5)).exp()
}

/// `J_m(x)` from its power series; adequate for `x ≤ 25`.
pub fn bessel_j_series(m: i32, x: f64) -> f64 {
    if m < 0 {
        let v = bessel_j_series(-m, x);
        return if m % 2 == 0 { v } else { -v };
    }
    let half = 0.5 * x;
    let mut term = (1..=m).fold(1.0, |t, i| t * half / i as f64);
    let mut sum = term;
    for j in 1..200 {
        term *= -half * half / (j as f64 * (j + m) as f64);
        sum += term;
        if term.abs() < 1e-18 * sum.abs() {
            break;
        }
    }
    sum
}

pub fn bessel_j_series_deriv(m: i32, x: f64) -> f64 {
    0.5 * (bessel_j_series(m - 1, x) - bessel_j_series(m + 1, x))
}

/// Transmission eigenvalues of the homogeneous unit disc with index `n` in
/// angular order `m`: roots of `√n J_m'(k√n) J_m(k) - J_m(k√n) J_m'(k)`.
pub fn homogeneous_roots(n: f64, m: i32, k_max: f64) -> Vec<f64> {
    let s = n.sqrt();
    let f = |k: f64| s * bessel_j_series_deriv(m, k * s) * bessel_j_series(m, k) - bessel_j_series(m, k * s) * bessel_j_series_deriv(m, k);
    let mut roots = Vec::new();
    let step = 1e-3;
    let mut k = 0.1;
    while k < k_max {
        let (a, b) = (f(k), f(k + step));
        if a == 0.0 || a.signum() != b.signum() {
            let (mut lo, mut hi) = (k, k + step);
            for _ in 0..100 {
                let mid = 0.5 * (lo + hi);
                if f(lo).signum() == f(mid).signum() {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            roots.push(0.5 * (lo + hi));
        }
        k += step;
    }
    roots
}
