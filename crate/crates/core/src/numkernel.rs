//! Dense real linear algebra: LU with overflow-safe determinants, linear
//! solves, and eigenvalues of nonsymmetric matrices by Hessenberg reduction
//! followed by Francis double-shift QR.

use std::fmt;
use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};

/// Pivots with magnitude below this are treated as exact zeros.
pub const PIVOT_TOLERANCE: f64 = 1e-300;

/// Real dense matrix stored row-major.
#[derive(Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Dimension(format!("empty matrix {rows}x{cols}")));
        }
        if data.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::Domain(format!(
                "non-finite entry at ({}, {})",
                pos / cols,
                pos % cols
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    /// Builds a matrix from equally sized rows.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::Dimension("ragged rows".into()));
        }
        Self::new(rows.len(), cols, rows.concat())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols, "vector length must equal column count");
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn matmul(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        if self.cols != other.rows {
            return Err(Error::Dimension(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        Ok(out)
    }

    pub fn trace(&self) -> f64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Divides each row by its largest absolute entry. Zero rows are left
    /// untouched. Returns the factors used.
    pub fn scale_rows_by_max(&mut self) -> Vec<f64> {
        (0..self.rows)
            .map(|i| {
                let row = self.row_mut(i);
                let s = row.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
                if s > 0.0 {
                    row.iter_mut().for_each(|v| *v /= s);
                    s
                } else {
                    1.0
                }
            })
            .collect()
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        self.is_square()
            && (0..self.rows).all(|i| {
                (0..i).all(|j| {
                    let (a, b) = (self[(i, j)], self[(j, i)]);
                    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
                })
            })
    }
}

impl Index<(usize, usize)> for DenseMatrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for DenseMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for DenseMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "DenseMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            writeln!(f, "  {:?}", self.row(i))?;
        }
        write!(f, "]")
    }
}

/// Determinant as sign and natural log of magnitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogDeterminant {
    pub sign: i8,
    pub log_abs: f64,
}

impl LogDeterminant {
    /// `sign * exp(log_abs)` with the exponent clamped so the result stays finite.
    pub fn value_clamped(&self) -> f64 {
        f64::from(self.sign) * self.log_abs.clamp(-700.0, 700.0).exp()
    }
}

/// Complex number as a plain pair; enough for eigenvalue output.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Complex {
    pub re: f64,
    pub im: f64,
}

impl Complex {
    pub fn new(re: f64, im: f64) -> Self {
        Self { re, im }
    }

    pub fn abs(&self) -> f64 {
        self.re.hypot(self.im)
    }
}

/// Eigenvalues of a real matrix; complex values come in conjugate pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexList {
    pub values: Vec<Complex>,
}

impl ComplexList {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Real parts of the entries whose imaginary part is within `tol(|z|)`.
    pub fn real_values(&self, tol: impl Fn(f64) -> f64) -> Vec<f64> {
        self.values
            .iter()
            .filter(|z| z.im.abs() <= tol(z.abs()))
            .map(|z| z.re)
            .collect()
    }
}

/// LU factorization with partial pivoting, `P·A = L·U` packed in one matrix.
#[derive(Debug, Clone)]
pub struct Lu {
    factors: DenseMatrix,
    perm: Vec<usize>,
    swaps_odd: bool,
    /// First pivot that fell below [`PIVOT_TOLERANCE`].
    singular_at: Option<usize>,
}

impl Lu {
    pub fn factor(m: &DenseMatrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::Dimension(format!(
                "LU needs a square matrix, got {}x{}",
                m.rows, m.cols
            )));
        }
        let n = m.rows;
        let mut a = m.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut swaps_odd = false;
        let mut singular_at = None;

        for k in 0..n {
            let (p, pmax) = (k..n)
                .map(|i| (i, a[(i, k)].abs()))
                .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if pmax < PIVOT_TOLERANCE {
                singular_at.get_or_insert(k);
                continue;
            }
            if p != k {
                for j in 0..n {
                    a.data.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
                swaps_odd = !swaps_odd;
            }
            let pivot = a[(k, k)];
            for i in k + 1..n {
                let f = a[(i, k)] / pivot;
                a[(i, k)] = f;
                if f != 0.0 {
                    for j in k + 1..n {
                        a.data[i * n + j] -= f * a.data[k * n + j];
                    }
                }
            }
        }
        Ok(Self {
            factors: a,
            perm,
            swaps_odd,
            singular_at,
        })
    }

    pub fn pivots(&self) -> Vec<f64> {
        (0..self.factors.rows).map(|i| self.factors[(i, i)]).collect()
    }

    pub fn permutation_sign(&self) -> f64 {
        if self.swaps_odd {
            -1.0
        } else {
            1.0
        }
    }

    pub fn is_singular(&self) -> bool {
        self.singular_at.is_some()
    }

    pub fn log_determinant(&self) -> LogDeterminant {
        if self.singular_at.is_some() {
            return LogDeterminant {
                sign: 0,
                log_abs: f64::NEG_INFINITY,
            };
        }
        let mut sign: i8 = if self.swaps_odd { -1 } else { 1 };
        let mut log_abs = 0.0;
        for p in self.pivots() {
            if p < 0.0 {
                sign = -sign;
            }
            log_abs += p.abs().ln();
        }
        LogDeterminant { sign, log_abs }
    }

    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        let n = self.factors.rows;
        if b.len() != n {
            return Err(Error::Dimension(format!(
                "right-hand side of length {} for a {n}x{n} system",
                b.len()
            )));
        }
        if let Some(index) = self.singular_at {
            return Err(Error::Singular { index });
        }
        let a = &self.factors;
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 1..n {
            let s: f64 = (0..i).map(|j| a[(i, j)] * x[j]).sum();
            x[i] -= s;
        }
        for i in (0..n).rev() {
            let s: f64 = (i + 1..n).map(|j| a[(i, j)] * x[j]).sum();
            x[i] = (x[i] - s) / a[(i, i)];
        }
        Ok(x)
    }
}

/// Sign and log-magnitude of `det(m)`.
pub fn lu_determinant(m: &DenseMatrix) -> Result<LogDeterminant> {
    Ok(Lu::factor(m)?.log_determinant())
}

/// Solves `m·x = b` for every `b` in `rhs`.
pub fn lu_solve(m: &DenseMatrix, rhs: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    let lu = Lu::factor(m)?;
    rhs.iter().map(|b| lu.solve(b)).collect()
}

/// `m⁻¹·b` column by column, where `b` is a matrix.
pub fn lu_solve_matrix(m: &DenseMatrix, b: &DenseMatrix) -> Result<DenseMatrix> {
    let lu = Lu::factor(m)?;
    let bt = b.transpose();
    let mut out = DenseMatrix::zeros(b.rows, b.cols);
    for j in 0..b.cols {
        let x = lu.solve(bt.row(j))?;
        for (i, v) in x.into_iter().enumerate() {
            out[(i, j)] = v;
        }
    }
    Ok(out)
}

/// All eigenvalues of a real square matrix.
///
/// The matrix is balanced, reduced to upper Hessenberg form with Householder
/// reflections, and then driven to quasi-triangular form by Francis
/// double-shift QR with deflation. Complex pairs never require complex
/// arithmetic internally.
pub fn eigenvalues_qr(m: &DenseMatrix) -> Result<ComplexList> {
    if !m.is_square() {
        return Err(Error::Dimension(format!(
            "eigenvalues need a square matrix, got {}x{}",
            m.rows, m.cols
        )));
    }
    let n = m.rows;
    let mut a = m.clone();
    balance(&mut a);
    hessenberg(&mut a);
    hessenberg_qr(&mut a, 30 * n)
}

const RADIX: f64 = 2.0;

/// Diagonal similarity scaling by powers of two so that row and column norms
/// are comparable. Exact in floating point.
fn balance(a: &mut DenseMatrix) {
    let n = a.rows;
    let sqrdx = RADIX * RADIX;
    let mut done = false;
    while !done {
        done = true;
        for i in 0..n {
            let mut r = 0.0;
            let mut c = 0.0;
            for j in 0..n {
                if j != i {
                    c += a[(j, i)].abs();
                    r += a[(i, j)].abs();
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let mut g = r / RADIX;
            let mut f = 1.0;
            let s = c + r;
            while c < g {
                f *= RADIX;
                c *= sqrdx;
            }
            g = r * RADIX;
            while c > g {
                f /= RADIX;
                c /= sqrdx;
            }
            if (c + r) / f < 0.95 * s {
                done = false;
                let g = 1.0 / f;
                for j in 0..n {
                    a[(i, j)] *= g;
                }
                for j in 0..n {
                    a[(j, i)] *= f;
                }
            }
        }
    }
}

/// In-place Householder reduction to upper Hessenberg form.
fn hessenberg(a: &mut DenseMatrix) {
    let n = a.rows;
    if n < 3 {
        return;
    }
    let mut v = vec![0.0; n];
    for k in 0..n - 2 {
        let norm = (k + 1..n).map(|i| a[(i, k)].powi(2)).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        let x0 = a[(k + 1, k)];
        let alpha = if x0 >= 0.0 { -norm } else { norm };
        for i in k + 1..n {
            v[i] = a[(i, k)];
        }
        v[k + 1] -= alpha;
        let vnorm2: f64 = (k + 1..n).map(|i| v[i] * v[i]).sum();
        if vnorm2 == 0.0 {
            continue;
        }
        // A <- (I - 2vv'/v'v) A
        for j in 0..n {
            let dot: f64 = (k + 1..n).map(|i| v[i] * a[(i, j)]).sum();
            let f = 2.0 * dot / vnorm2;
            for i in k + 1..n {
                a[(i, j)] -= f * v[i];
            }
        }
        // A <- A (I - 2vv'/v'v)
        for i in 0..n {
            let dot: f64 = (k + 1..n).map(|j| a[(i, j)] * v[j]).sum();
            let f = 2.0 * dot / vnorm2;
            for j in k + 1..n {
                a[(i, j)] -= f * v[j];
            }
        }
        for i in k + 2..n {
            a[(i, k)] = 0.0;
        }
    }
}

fn sign_of(a: f64, b: f64) -> f64 {
    if b >= 0.0 {
        a.abs()
    } else {
        -a.abs()
    }
}

/// Francis double-shift QR on an upper Hessenberg matrix (eigenvalues only).
fn hessenberg_qr(a: &mut DenseMatrix, max_sweeps: usize) -> Result<ComplexList> {
    let n = a.rows as isize;
    let mut wr = vec![0.0; a.rows];
    let mut wi = vec![0.0; a.rows];
    let at = |a: &DenseMatrix, i: isize, j: isize| a[(i as usize, j as usize)];

    let mut anorm = 0.0;
    for i in 0..n {
        for j in (i - 1).max(0)..n {
            anorm += at(a, i, j).abs();
        }
    }

    let mut nn = n - 1;
    let mut t = 0.0;
    let mut sweeps = 0usize;
    let (mut p, mut q, mut r) = (0.0, 0.0, 0.0);

    while nn >= 0 {
        let mut its = 0;
        loop {
            // Find a negligible subdiagonal element.
            let mut l = nn;
            while l >= 1 {
                let mut s = at(a, l - 1, l - 1).abs() + at(a, l, l).abs();
                if s == 0.0 {
                    s = anorm;
                }
                if at(a, l, l - 1).abs() <= f64::EPSILON * s {
                    a[(l as usize, (l - 1) as usize)] = 0.0;
                    break;
                }
                l -= 1;
            }
            let mut x = at(a, nn, nn);
            if l == nn {
                wr[nn as usize] = x + t;
                wi[nn as usize] = 0.0;
                nn -= 1;
                break;
            }
            let mut y = at(a, nn - 1, nn - 1);
            let mut w = at(a, nn, nn - 1) * at(a, nn - 1, nn);
            if l == nn - 1 {
                let p2 = 0.5 * (y - x);
                let q2 = p2 * p2 + w;
                let z = q2.abs().sqrt();
                x += t;
                let (i0, i1) = ((nn - 1) as usize, nn as usize);
                if q2 >= 0.0 {
                    let z = p2 + sign_of(z, p2);
                    wr[i0] = x + z;
                    wr[i1] = x + z;
                    if z != 0.0 {
                        wr[i1] = x - w / z;
                    }
                    wi[i0] = 0.0;
                    wi[i1] = 0.0;
                } else {
                    wr[i0] = x + p2;
                    wr[i1] = x + p2;
                    wi[i0] = -z;
                    wi[i1] = z;
                }
                nn -= 2;
                break;
            }

            if sweeps >= max_sweeps {
                return Err(Error::NoConvergence { sweeps });
            }
            if its == 10 || its == 20 {
                // Exceptional shift.
                t += x;
                for i in 0..=nn {
                    a[(i as usize, i as usize)] -= x;
                }
                let s = at(a, nn, nn - 1).abs() + at(a, nn - 1, nn - 2).abs();
                x = 0.75 * s;
                y = x;
                w = -0.4375 * s * s;
            }
            its += 1;
            sweeps += 1;

            // Look for two consecutive small subdiagonal elements.
            let mut m = nn - 2;
            let mut z;
            while m >= l {
                z = at(a, m, m);
                let rr = x - z;
                let ss = y - z;
                p = (rr * ss - w) / at(a, m + 1, m) + at(a, m, m + 1);
                q = at(a, m + 1, m + 1) - z - rr - ss;
                r = at(a, m + 2, m + 1);
                let s = p.abs() + q.abs() + r.abs();
                p /= s;
                q /= s;
                r /= s;
                if m == l {
                    break;
                }
                let u = at(a, m, m - 1).abs() * (q.abs() + r.abs());
                let v = p.abs() * (at(a, m - 1, m - 1).abs() + z.abs() + at(a, m + 1, m + 1).abs());
                if u <= f64::EPSILON * v {
                    break;
                }
                m -= 1;
            }
            for i in m + 2..=nn {
                a[(i as usize, (i - 2) as usize)] = 0.0;
                if i != m + 2 {
                    a[(i as usize, (i - 3) as usize)] = 0.0;
                }
            }

            // Double QR step on rows l..=nn and columns m..=nn.
            let mut k = m;
            while k < nn {
                if k != m {
                    p = at(a, k, k - 1);
                    q = at(a, k + 1, k - 1);
                    r = 0.0;
                    if k != nn - 1 {
                        r = at(a, k + 2, k - 1);
                    }
                    x = p.abs() + q.abs() + r.abs();
                    if x != 0.0 {
                        p /= x;
                        q /= x;
                        r /= x;
                    }
                }
                let s = sign_of((p * p + q * q + r * r).sqrt(), p);
                if s != 0.0 {
                    let (ku, k1) = (k as usize, (k + 1) as usize);
                    if k == m {
                        if l != m {
                            a[(ku, ku - 1)] = -a[(ku, ku - 1)];
                        }
                    } else {
                        a[(ku, ku - 1)] = -s * x;
                    }
                    p += s;
                    x = p / s;
                    y = q / s;
                    z = r / s;
                    q /= p;
                    r /= p;
                    for j in k..=nn {
                        let j = j as usize;
                        let mut pp = a[(ku, j)] + q * a[(k1, j)];
                        if k != nn - 1 {
                            pp += r * a[(ku + 2, j)];
                            a[(ku + 2, j)] -= pp * z;
                        }
                        a[(k1, j)] -= pp * y;
                        a[(ku, j)] -= pp * x;
                    }
                    let mmin = if nn < k + 3 { nn } else { k + 3 };
                    for i in l..=mmin {
                        let i = i as usize;
                        let mut pp = x * a[(i, ku)] + y * a[(i, k1)];
                        if k != nn - 1 {
                            pp += z * a[(i, ku + 2)];
                            a[(i, ku + 2)] -= pp * r;
                        }
                        a[(i, k1)] -= pp * q;
                        a[(i, ku)] -= pp;
                    }
                }
                k += 1;
            }
        }
    }

    Ok(ComplexList {
        values: wr
            .into_iter()
            .zip(wi)
            .map(|(re, im)| Complex::new(re, im))
            .collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn sorted_real(list: &ComplexList) -> Vec<f64> {
        let mut v: Vec<f64> = list.values.iter().map(|z| z.re).collect();
        v.sort_by(f64::total_cmp);
        v
    }

    /// Companion matrix of the monic polynomial with the given roots.
    fn companion_from_roots(roots: &[f64]) -> DenseMatrix {
        // coefficients of prod (x - r), highest degree first
        let mut c = vec![1.0];
        for &r in roots {
            let mut next = vec![0.0; c.len() + 1];
            for (i, &ci) in c.iter().enumerate() {
                next[i] += ci;
                next[i + 1] -= r * ci;
            }
            c = next;
        }
        let n = roots.len();
        let mut m = DenseMatrix::zeros(n, n);
        for j in 0..n {
            m[(0, j)] = -c[j + 1];
        }
        for i in 1..n {
            m[(i, i - 1)] = 1.0;
        }
        m
    }

    fn random_matrix(rng: &mut ChaCha8Rng, n: usize) -> DenseMatrix {
        let data = (0..n * n).map(|_| rng.random_range(-1.0..1.0)).collect();
        DenseMatrix::new(n, n, data).unwrap()
    }

    #[test]
    fn determinant_examples() {
        let d = lu_determinant(&DenseMatrix::identity(3)).unwrap();
        assert_eq!(d, LogDeterminant { sign: 1, log_abs: 0.0 });

        let d = lu_determinant(&DenseMatrix::from_diagonal(&[2.0, 3.0])).unwrap();
        assert_eq!(d.sign, 1);
        assert!((d.log_abs - 6f64.ln()).abs() < 1e-15);

        let m = DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]).unwrap();
        let d = lu_determinant(&m).unwrap();
        assert_eq!(d.sign, 0);
        assert_eq!(d.log_abs, f64::NEG_INFINITY);

        let m = DenseMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        assert_eq!(lu_determinant(&m).unwrap().sign, -1);
    }

    #[test]
    fn determinant_rejects_non_square() {
        let m = DenseMatrix::zeros(2, 3);
        assert!(matches!(lu_determinant(&m), Err(Error::Dimension(_))));
    }

    #[test]
    fn matrix_constructor_checks() {
        assert!(DenseMatrix::new(2, 2, vec![1.0; 3]).is_err());
        assert!(DenseMatrix::new(0, 2, vec![]).is_err());
        assert!(DenseMatrix::new(1, 1, vec![f64::NAN]).is_err());
    }

    #[test]
    fn solve_examples() {
        let x = lu_solve(&DenseMatrix::identity(3), &[vec![1.0, 2.0, 3.0]]).unwrap();
        assert_eq!(x[0], vec![1.0, 2.0, 3.0]);
        let x = lu_solve(&DenseMatrix::from_diagonal(&[2.0, 4.0]), &[vec![2.0, 8.0]]).unwrap();
        assert_eq!(x[0], vec![1.0, 2.0]);
    }

    #[test]
    fn solve_singular_reports_pivot() {
        let m = DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]).unwrap();
        match lu_solve(&m, &[vec![1.0, 1.0]]) {
            Err(Error::Singular { index }) => assert_eq!(index, 1),
            other => panic!("expected singular error, got {other:?}"),
        }
    }

    #[test]
    fn solve_recovers_known_solution() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut m = random_matrix(&mut rng, 10);
        for i in 0..10 {
            m[(i, i)] += 10.0;
        }
        let x: Vec<f64> = (0..10).map(|i| i as f64 - 4.5).collect();
        let b = m.mul_vec(&x);
        let got = lu_solve(&m, &[b]).unwrap().remove(0);
        for (g, e) in got.iter().zip(&x) {
            assert!((g - e).abs() < 1e-10);
        }
    }

    #[test]
    fn eigenvalue_examples() {
        let ev = eigenvalues_qr(&DenseMatrix::from_diagonal(&[1.0, 2.0, 3.0])).unwrap();
        assert_eq!(sorted_real(&ev), vec![1.0, 2.0, 3.0]);

        let rot = DenseMatrix::from_rows(&[vec![0.0, 1.0], vec![-1.0, 0.0]]).unwrap();
        let ev = eigenvalues_qr(&rot).unwrap();
        let mut ims: Vec<f64> = ev.values.iter().map(|z| z.im).collect();
        ims.sort_by(f64::total_cmp);
        assert!((ims[0] + 1.0).abs() < 1e-14 && (ims[1] - 1.0).abs() < 1e-14);
        assert!(ev.values.iter().all(|z| z.re.abs() < 1e-14));

        // lambda^2 - 3 lambda + 2
        let comp = DenseMatrix::from_rows(&[vec![3.0, -2.0], vec![1.0, 0.0]]).unwrap();
        let ev = sorted_real(&eigenvalues_qr(&comp).unwrap());
        assert!((ev[0] - 1.0).abs() < 1e-14 && (ev[1] - 2.0).abs() < 1e-14);
    }

    #[test]
    fn eigenvalues_of_1x1() {
        let m = DenseMatrix::from_diagonal(&[-4.0]);
        assert_eq!(sorted_real(&eigenvalues_qr(&m).unwrap()), vec![-4.0]);
    }

    #[test]
    fn companion_roots_recovered() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let degree = rng.random_range(2..=10);
            let mut roots: Vec<f64> = Vec::new();
            while roots.len() < degree {
                let r: f64 = rng.random_range(-5.0..5.0);
                if roots.iter().all(|&s| (s - r).abs() >= 0.1) {
                    roots.push(r);
                }
            }
            roots.sort_by(f64::total_cmp);
            let ev = eigenvalues_qr(&companion_from_roots(&roots)).unwrap();
            assert!(ev.values.iter().all(|z| z.im.abs() < 1e-6), "{ev:?}");
            for (g, e) in sorted_real(&ev).iter().zip(&roots) {
                assert!((g - e).abs() < 1e-6, "root {e} recovered as {g}");
            }
        }
    }

    #[test]
    fn conjugate_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let m = random_matrix(&mut rng, 15);
        let ev = eigenvalues_qr(&m).unwrap();
        assert_eq!(ev.len(), 15);
        let mut complex: Vec<Complex> =
            ev.values.iter().copied().filter(|z| z.im.abs() > 1e-12).collect();
        complex.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        assert_eq!(complex.len() % 2, 0);
        for pair in complex.chunks(2) {
            assert!((pair[0].re - pair[1].re).abs() < 1e-10);
            assert!((pair[0].im + pair[1].im).abs() < 1e-10);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]

        #[test]
        fn eigenvalue_sum_equals_trace(n in 1usize..50, seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let m = random_matrix(&mut rng, n);
            let ev = eigenvalues_qr(&m).unwrap();
            let sum_re: f64 = ev.values.iter().map(|z| z.re).sum();
            let sum_im: f64 = ev.values.iter().map(|z| z.im).sum();
            let scale = m.norm().max(1.0);
            prop_assert!((sum_re - m.trace()).abs() <= 1e-8 * scale);
            prop_assert!(sum_im.abs() <= 1e-8 * scale);
        }

        #[test]
        fn log_determinant_matches_pivot_product(n in 1usize..=20, seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut m = random_matrix(&mut rng, n);
            for i in 0..n {
                m[(i, i)] += 3.0;
            }
            let lu = Lu::factor(&m).unwrap();
            let product: f64 = lu.pivots().iter().product::<f64>() * lu.permutation_sign();
            let d = lu.log_determinant();
            let value = f64::from(d.sign) * d.log_abs.exp();
            prop_assert!((value - product).abs() <= 1e-12 * product.abs());
        }

        #[test]
        fn triangular_determinant_is_diagonal_product(
            diag in proptest::collection::vec(0.1f64..5.0, 1..12),
            signs in proptest::collection::vec(any::<bool>(), 12),
            seed in any::<u64>(),
        ) {
            let n = diag.len();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut m = DenseMatrix::zeros(n, n);
            let mut product = 1.0;
            for i in 0..n {
                let d = if signs[i] { -diag[i] } else { diag[i] };
                m[(i, i)] = d;
                product *= d;
                for j in i + 1..n {
                    m[(i, j)] = rng.random_range(-1.0..1.0);
                }
            }
            let d = lu_determinant(&m).unwrap();
            let value = f64::from(d.sign) * d.log_abs.exp();
            prop_assert!((value - product).abs() <= 1e-12 * product.abs());
        }
    }
}
