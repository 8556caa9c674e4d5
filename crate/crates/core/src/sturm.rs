//! Sturm–Liouville eigenvalues of `-y'' + q(x) y = λ y` on `(0, 1)` with
//! `y'(0) - h y(0) = 0` and `y'(1) + H y(1) = 0`.
//!
//! The solver uses the scaled Prüfer substitution
//! `y = ρ sin θ / √S`, `y' = √S ρ cos θ`, under which
//! `θ' = S cos²θ + (λ - q) sin²θ / S`. The angle is integrated with RK4 from
//! both ends to the midpoint; the mismatch `θ_left(½) - θ_right(½)` increases
//! strictly with λ and equals `lπ` exactly at the `l`-th eigenvalue, so every
//! eigenvalue is found by its index without any risk of skipping one.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Number of grid points used by [`sample_potential`].
pub const SAMPLE_POINTS: usize = 21;

/// Coefficient function of the operator.
pub trait Potential {
    fn value(&self, x: f64) -> f64;

    /// Lower and upper bounds of `q` on `[0, 1]`.
    fn bounds(&self) -> (f64, f64);
}

/// `q(x) = 1 - exp(b (x - 1/2)²) + offset`.
///
/// `offset` is zero for the family used in the datasets; a nonzero offset
/// shifts the whole spectrum by the same amount.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymmetricPotential {
    pub b: f64,
    pub offset: f64,
}

impl SymmetricPotential {
    pub fn new(b: f64) -> Self {
        Self { b, offset: 0.0 }
    }

    pub fn with_offset(self, offset: f64) -> Self {
        Self { offset, ..self }
    }
}

impl Potential for SymmetricPotential {
    fn value(&self, x: f64) -> f64 {
        let d = x - 0.5;
        1.0 - (self.b * d * d).exp() + self.offset
    }

    fn bounds(&self) -> (f64, f64) {
        let edge = 1.0 - (0.25 * self.b).exp() + self.offset;
        let centre = self.offset;
        (edge.min(centre), edge.max(centre))
    }
}

/// Robin coefficients `h` (left) and `H` (right).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RobinBc {
    pub h: f64,
    pub big_h: f64,
}

impl RobinBc {
    pub const NEUMANN: RobinBc = RobinBc { h: 0.0, big_h: 0.0 };

    pub fn new(h: f64, big_h: f64) -> Self {
        Self { h, big_h }
    }
}

/// Ascending eigenvalues `λ_0 < λ_1 < ...`.
#[derive(Debug, Clone, PartialEq)]
pub struct SlSpectrum {
    pub eigenvalues: Vec<f64>,
}

#[derive(Debug, Clone, Copy)]
pub struct ShootingConfig {
    /// RK4 steps on each half interval.
    pub steps_per_half: usize,
    /// Absolute tolerance on λ.
    pub tolerance: f64,
}

impl Default for ShootingConfig {
    fn default() -> Self {
        Self {
            steps_per_half: 2000,
            tolerance: 1e-10,
        }
    }
}

impl ShootingConfig {
    /// Default settings with the mesh refined for deep potentials: the step
    /// count grows with the square root of the range of `q` beyond 150.
    pub fn for_potential(q: &impl Potential) -> Self {
        let (lo, hi) = q.bounds();
        let factor = ((hi - lo) / 150.0).sqrt().ceil().max(1.0);
        let base = Self::default();
        Self {
            steps_per_half: base.steps_per_half * factor as usize,
            ..base
        }
    }
}

/// `q(x_i)` for `x_i = 0.05 i`, `i = 0..=20`.
pub fn sample_potential(q: &SymmetricPotential) -> [f64; SAMPLE_POINTS] {
    let mut out = [0.0; SAMPLE_POINTS];
    for (i, v) in out.iter_mut().enumerate() {
        // (x_i - 1/2) = (i - 10) / 20, symmetric about i = 10 bit for bit
        let d = (i as f64 - 10.0) / 20.0;
        *v = 1.0 - (q.b * d * d).exp() + q.offset;
    }
    out
}

pub fn sl_eigenvalues(q: &SymmetricPotential, bc: RobinBc, count: usize) -> Result<SlSpectrum> {
    if !(1..=20).contains(&count) {
        return Err(Error::Domain(format!("eigenvalue count {count} outside 1..=20")));
    }
    if q.b.abs() > 40.0 {
        return Err(Error::Domain(format!("|b| = {} exceeds 40", q.b.abs())));
    }
    PruferSolver::new(q, bc, ShootingConfig::for_potential(q)).eigenvalues(count)
}

/// Shooting solver with the potential tabulated on the RK4 grid.
pub struct PruferSolver {
    bc: RobinBc,
    config: ShootingConfig,
    q_bounds: (f64, f64),
    /// q at x = j·h/2 for j = 0..=4n (nodes and midpoints over [0, 1]).
    table: Vec<f64>,
}

impl PruferSolver {
    pub fn new<P: Potential>(q: &P, bc: RobinBc, config: ShootingConfig) -> Self {
        let n = config.steps_per_half;
        let half_step = 0.5 / (2 * n) as f64;
        let table = (0..=4 * n).map(|j| q.value(j as f64 * half_step)).collect();
        Self {
            bc,
            config,
            q_bounds: q.bounds(),
            table,
        }
    }

    fn scale(&self, lambda: f64) -> f64 {
        (lambda - self.q_bounds.0).max(1.0).sqrt()
    }

    /// `θ_left(½) - θ_right(½)`; strictly increasing in λ, equal to `lπ` at `λ_l`.
    pub fn mismatch(&self, lambda: f64) -> f64 {
        let s = self.scale(lambda);
        let n = self.config.steps_per_half;
        let h = 0.5 / n as f64;

        let rhs = |theta: f64, q: f64| {
            let c2 = (2.0 * theta).cos();
            0.5 * (s * (1.0 + c2) + (lambda - q) / s * (1.0 - c2))
        };

        let mut left = s.atan2(self.bc.h);
        for i in 0..n {
            let (q0, qm, q1) = (self.table[2 * i], self.table[2 * i + 1], self.table[2 * i + 2]);
            left = rk4(left, h, q0, qm, q1, &rhs);
        }

        let last = 4 * n;
        let mut right = s.atan2(-self.bc.big_h);
        for i in 0..n {
            let (q0, qm, q1) = (
                self.table[last - 2 * i],
                self.table[last - 2 * i - 1],
                self.table[last - 2 * i - 2],
            );
            right = rk4(right, -h, q0, qm, q1, &rhs);
        }
        left - right
    }

    pub fn eigenvalues(&self, count: usize) -> Result<SlSpectrum> {
        let mut out: Vec<f64> = Vec::with_capacity(count);
        for l in 0..count {
            let lower = out.last().copied();
            out.push(self.eigenvalue(l, lower)?);
        }
        Ok(SlSpectrum { eigenvalues: out })
    }

    /// Eigenvalue with index `l`, optionally knowing `λ_{l-1}`.
    pub fn eigenvalue(&self, l: usize, lower: Option<f64>) -> Result<f64> {
        let target = l as f64 * PI;
        let g = |lam: f64| self.mismatch(lam) - target;
        let (qmin, qmax) = self.q_bounds;
        let robin = self.bc.h.abs() + self.bc.big_h.abs();

        let mut lo = lower.unwrap_or(qmin - 1.0 - robin * robin);
        let mut glo = g(lo);
        let mut step = 1.0 + robin * robin;
        let mut tries = 0;
        while glo >= 0.0 {
            lo -= step;
            step *= 2.0;
            glo = g(lo);
            tries += 1;
            if tries > 60 {
                return Err(Error::Bracket { index: l, lo, hi: lo + step });
            }
        }
        let mut hi = qmax + ((l as f64 + 1.0) * PI).powi(2) + 1.0 + robin * robin;
        if hi <= lo {
            hi = lo + 1.0;
        }
        let mut ghi = g(hi);
        tries = 0;
        while ghi <= 0.0 {
            let width = hi - lo;
            lo = hi;
            glo = ghi;
            hi += 2.0 * width;
            ghi = g(hi);
            tries += 1;
            if tries > 60 {
                return Err(Error::Bracket { index: l, lo, hi });
            }
        }

        let tol = self.config.tolerance;
        // Bisection to a small bracket, then Illinois-style secant steps.
        while hi - lo > 1e-3 * (1.0 + hi.abs().min(lo.abs())) {
            let mid = 0.5 * (lo + hi);
            let gm = g(mid);
            if gm == 0.0 {
                return Ok(mid);
            }
            if gm < 0.0 {
                lo = mid;
                glo = gm;
            } else {
                hi = mid;
                ghi = gm;
            }
        }
        let mut side = 0i8;
        for _ in 0..200 {
            if hi - lo <= tol.max(4.0 * f64::EPSILON * hi.abs().max(lo.abs())) {
                break;
            }
            let mut x = (lo * ghi - hi * glo) / (ghi - glo);
            if !(x > lo && x < hi) {
                x = 0.5 * (lo + hi);
            }
            let gx = g(x);
            if gx == 0.0 {
                return Ok(x);
            }
            if gx < 0.0 {
                lo = x;
                glo = gx;
                if side == -1 {
                    ghi *= 0.5;
                }
                side = -1;
            } else {
                hi = x;
                ghi = gx;
                if side == 1 {
                    glo *= 0.5;
                }
                side = 1;
            }
        }
        Ok(0.5 * (lo + hi))
    }
}

fn rk4(theta: f64, h: f64, q0: f64, qm: f64, q1: f64, f: &impl Fn(f64, f64) -> f64) -> f64 {
    let k1 = f(theta, q0);
    let k2 = f(theta + 0.5 * h * k1, qm);
    let k3 = f(theta + 0.5 * h * k2, qm);
    let k4 = f(theta + h * k3, q1);
    theta + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
}

#[cfg(test)]
pub(crate) mod oracle {
    //! Second-order finite differences with Richardson extrapolation.

    use super::Potential;

    /// Lowest `count` eigenvalues of the Neumann problem on a node-centred
    /// mesh with `n` intervals, via Sturm-sequence bisection on the
    /// symmetrized tridiagonal matrix.
    pub fn fd_neumann(q: &impl Potential, n: usize, count: usize) -> Vec<f64> {
        let h = 1.0 / n as f64;
        let h2 = 1.0 / (h * h);
        let diag: Vec<f64> = (0..=n).map(|i| 2.0 * h2 + q.value(i as f64 * h)).collect();
        // squared off-diagonals of the symmetrized matrix
        let mut off2 = vec![h2 * h2; n];
        off2[0] = 2.0 * h2 * h2;
        off2[n - 1] = 2.0 * h2 * h2;

        let count_below = |x: f64| -> usize {
            let mut c = 0;
            let mut d = diag[0] - x;
            if d < 0.0 {
                c += 1;
            }
            for i in 1..=n {
                if d == 0.0 {
                    d = 1e-300;
                }
                d = diag[i] - x - off2[i - 1] / d;
                if d < 0.0 {
                    c += 1;
                }
            }
            c
        };

        let (qmin, qmax) = q.bounds();
        (0..count)
            .map(|l| {
                let mut lo = qmin - 1.0;
                let mut hi = qmax + 4.0 * h2 + 1.0;
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if count_below(mid) > l {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                    if hi - lo < 1e-13 * hi.abs().max(1.0) {
                        break;
                    }
                }
                0.5 * (lo + hi)
            })
            .collect()
    }

    pub fn fd_richardson(q: &impl Potential, count: usize) -> Vec<f64> {
        let coarse = fd_neumann(q, 2000, count);
        let fine = fd_neumann(q, 4000, count);
        coarse.iter().zip(&fine).map(|(c, f)| (4.0 * f - c) / 3.0).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn neumann(b: f64, count: usize) -> Vec<f64> {
        sl_eigenvalues(&SymmetricPotential::new(b), RobinBc::NEUMANN, count)
            .unwrap()
            .eigenvalues
    }

    #[test]
    fn free_neumann_spectrum() {
        let ev = neumann(0.0, 5);
        for (l, v) in ev.iter().enumerate() {
            let want = (l as f64 * PI).powi(2);
            assert!((v - want).abs() < 1e-8, "λ_{l} = {v}, want {want}");
        }
    }

    #[test]
    fn constant_offset_shifts_spectrum() {
        for b in [-7.0, 3.0] {
            let base = neumann(b, 5);
            let q = SymmetricPotential::new(b).with_offset(2.5);
            let shifted = sl_eigenvalues(&q, RobinBc::NEUMANN, 5).unwrap().eigenvalues;
            for (a, s) in base.iter().zip(&shifted) {
                assert!((s - a - 2.5).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn matches_finite_difference_oracle() {
        let b = 2f64.sqrt();
        let got = neumann(b, 5);
        let want = oracle::fd_richardson(&SymmetricPotential::new(b), 5);
        for (g, w) in got.iter().zip(&want) {
            assert!((g - w).abs() < 1e-6, "{g} vs {w}");
        }
    }

    #[test]
    fn random_potentials_match_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        for _ in 0..20 {
            let b: f64 = rng.random_range(-20.0..20.0);
            let got = neumann(b, 5);
            let want = oracle::fd_richardson(&SymmetricPotential::new(b), 5);
            for (g, w) in got.iter().zip(&want) {
                assert!((g - w).abs() < 1e-6, "b={b}: {g} vs {w}");
            }
        }
    }

    #[test]
    fn robin_conditions() {
        // q = 0, h = H: eigenvalues are μ² with tan μ = 2hμ/(μ² - h²)
        let q = SymmetricPotential::new(0.0);
        let hh = 1.5;
        let ev = sl_eigenvalues(&q, RobinBc::new(hh, hh), 4).unwrap().eigenvalues;
        for &lam in &ev {
            let mu = lam.sqrt();
            let resid = (mu * mu - hh * hh) * mu.sin() - 2.0 * hh * mu * mu.cos();
            assert!(resid.abs() < 1e-7, "λ = {lam}: residual {resid}");
        }
        assert!(ev.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn negative_robin_gives_negative_ground_state() {
        let q = SymmetricPotential::new(0.0);
        let ev = sl_eigenvalues(&q, RobinBc::new(-1.0, -1.0), 2).unwrap().eigenvalues;
        // -μ² with tanh-type condition: λ_0 < 0
        assert!(ev[0] < 0.0);
        let kappa = (-ev[0]).sqrt();
        let resid = (kappa * kappa + 1.0) * kappa.sinh() - 2.0 * kappa * kappa.cosh();
        assert!(resid.abs() < 1e-7, "{resid}");
    }

    #[test]
    fn domain_checks() {
        let q = SymmetricPotential::new(0.0);
        assert!(sl_eigenvalues(&q, RobinBc::NEUMANN, 0).is_err());
        assert!(sl_eigenvalues(&q, RobinBc::NEUMANN, 21).is_err());
        assert!(sl_eigenvalues(&SymmetricPotential::new(41.0), RobinBc::NEUMANN, 1).is_err());
    }

    #[test]
    fn sample_potential_examples() {
        assert_eq!(sample_potential(&SymmetricPotential::new(0.0)), [0.0; 21]);
        let b = -10.0 * 2f64.sqrt();
        let s = sample_potential(&SymmetricPotential::new(b));
        assert_eq!(s[10], 0.0);
        assert_eq!(s[0], 1.0 - (b * 0.25).exp());
        for b in [-20.0, -1.3, 0.7, 19.96] {
            let s = sample_potential(&SymmetricPotential::new(b));
            for i in 0..21 {
                assert_eq!(s[i], s[20 - i]);
            }
        }
    }

    #[test]
    fn prufer_angle_monotone_in_lambda() {
        for b in [-20.0, -3.0, 0.0, 5.0, 20.0] {
            let solver =
                PruferSolver::new(&SymmetricPotential::new(b), RobinBc::NEUMANN, ShootingConfig::default());
            let mut prev = f64::NEG_INFINITY;
            for i in 0..400 {
                let lam = -200.0 + i as f64;
                let f = solver.mismatch(lam);
                assert!(f >= prev, "b={b}: mismatch decreased at λ={lam}");
                prev = f;
            }
        }
    }

    #[test]
    fn perturbation_bound_between_grid_neighbours() {
        let delta = 0.04;
        for b in [-20.0, -8.0, 0.0, 6.4, 19.96] {
            let a = neumann(b, 5);
            let c = neumann(b + delta, 5);
            // sup over [0, 1] of |q_{b+δ} - q_b|; for b >= 0 this is the
            // endpoint value |exp((b+δ)/4) - exp(b/4)|, otherwise it may be interior
            let (p, r) = (SymmetricPotential::new(b), SymmetricPotential::new(b + delta));
            let bound = (0..=100_000)
                .map(|i| {
                    let x = i as f64 / 100_000.0;
                    (r.value(x) - p.value(x)).abs()
                })
                .fold(0.0, f64::max);
            if b >= 0.0 {
                let endpoint = ((b + delta) / 4.0).exp() - (b / 4.0).exp();
                assert!((bound - endpoint).abs() <= 1e-12 * endpoint);
            }
            for (x, y) in a.iter().zip(&c) {
                assert!((x - y).abs() <= bound + 1e-9, "b={b}: {x} {y} bound {bound}");
            }
        }
    }

    #[test]
    fn strictly_increasing() {
        let ev = sl_eigenvalues(&SymmetricPotential::new(20.0), RobinBc::NEUMANN, 20).unwrap();
        assert!(ev.eigenvalues.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn mesh_refinement_reaches_tolerance() {
        for b in [-40.0, 20.0, 40.0] {
            let q = SymmetricPotential::new(b);
            let got = sl_eigenvalues(&q, RobinBc::NEUMANN, 20).unwrap().eigenvalues;
            let fine = ShootingConfig {
                steps_per_half: 64_000,
                tolerance: 1e-11,
            };
            let reference = PruferSolver::new(&q, RobinBc::NEUMANN, fine).eigenvalues(20).unwrap();
            for (g, r) in got.iter().zip(&reference.eigenvalues) {
                assert!((g - r).abs() < 1e-8, "b={b}: {g} vs {r}");
            }
        }
    }
}
