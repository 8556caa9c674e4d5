//! Real interior transmission eigenvalues of the unit disc with a piecewise
//! constant, radially layered refractive index.
//!
//! Two solvers are provided:
//!
//! * the determinant path: for each angular order `m`, separation of
//!   variables reduces the problem to the zeros of a `2L × 2L` determinant of
//!   Bessel-function entries. Zeros are bracketed on a uniform `k` grid and
//!   refined by bisection. These are the exact eigenvalues.
//! * the Galerkin path: the equivalent fourth-order problem for `u = w - v`
//!   is projected, one Fourier mode at a time, onto radial polynomials that
//!   vanish to second order at `r = 1`, giving the quadratic eigenproblem
//!   `(A - k² B + k⁴ C) c = 0`, which is linearized and solved with QR.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numkernel::{eigenvalues_qr, lu_determinant, lu_solve_matrix, DenseMatrix, LogDeterminant};
use crate::specfun::{bessel_j_with_deriv, bessel_y_with_deriv};

/// Smallest admissible `n_l - 1`.
const MIN_CONTRAST: f64 = 1e-6;

/// Piecewise constant refractive index `n_1, ..., n_L` on the annuli
/// `0 < r < d_1 < ... < d_{L-1} < r < 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayeredIndex {
    values: Vec<f64>,
    jumps: Vec<f64>,
}

impl LayeredIndex {
    pub fn new(values: Vec<f64>, jumps: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidIndex("no layers".into()));
        }
        if jumps.len() + 1 != values.len() {
            return Err(Error::InvalidIndex(format!(
                "{} layers need {} jump radii, got {}",
                values.len(),
                values.len() - 1,
                jumps.len()
            )));
        }
        if let Some(n) = values.iter().find(|&&n| !(n > 1.0 + MIN_CONTRAST) || !n.is_finite()) {
            return Err(Error::InvalidIndex(format!("n = {n} must exceed 1")));
        }
        let mut prev = 0.0;
        for &d in &jumps {
            if !(d > prev && d < 1.0) {
                return Err(Error::InvalidIndex(format!(
                    "jump radii must increase strictly inside (0, 1): {jumps:?}"
                )));
            }
            prev = d;
        }
        Ok(Self { values, jumps })
    }

    /// Constant index `n` split into `layers` equal-width annuli.
    pub fn homogeneous(n: f64, layers: usize) -> Result<Self> {
        let jumps = (1..layers).map(|l| l as f64 / layers as f64).collect();
        Self::new(vec![n; layers], jumps)
    }

    pub fn layers(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn jumps(&self) -> &[f64] {
        &self.jumps
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::MIN, f64::max)
    }

    /// `(inner, outer)` radius of every layer.
    pub fn layer_bounds(&self) -> Vec<(f64, f64)> {
        let mut edges = Vec::with_capacity(self.values.len() + 1);
        edges.push(0.0);
        edges.extend_from_slice(&self.jumps);
        edges.push(1.0);
        edges.windows(2).map(|w| (w[0], w[1])).collect()
    }
}

/// One eigenvalue with the angular order that produced it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumEntry {
    pub k: f64,
    pub m: u32,
}

/// Possible problems with a determinant spectrum.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpectrumWarnings {
    /// The last returned eigenvalue lies within 5% of the scan limit.
    pub near_scan_limit: bool,
    /// Adding angular order `m_max + 1` would change the returned list.
    pub mode_cutoff_sensitive: bool,
}

impl SpectrumWarnings {
    pub fn any(&self) -> bool {
        self.near_scan_limit || self.mode_cutoff_sensitive
    }
}

/// Ascending distinct eigenvalues.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub entries: Vec<SpectrumEntry>,
    pub warnings: SpectrumWarnings,
}

impl Spectrum {
    pub fn values(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.k).collect()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Sorts by `k`, drops values within `tol` of the previous kept one.
fn merge_distinct(mut all: Vec<SpectrumEntry>, tol: f64) -> Vec<SpectrumEntry> {
    all.sort_by(|a, b| a.k.total_cmp(&b.k).then(a.m.cmp(&b.m)));
    let mut out: Vec<SpectrumEntry> = Vec::with_capacity(all.len());
    for e in all {
        if out.last().is_none_or(|last| e.k - last.k >= tol) {
            out.push(e);
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Determinant path
// ---------------------------------------------------------------------------

/// Values `C(k√n r)` and radial derivatives `d/dr C(k√n r)` for `C = J` and `C = N`.
struct RadialBessel {
    j: f64,
    dj: f64,
    y: f64,
    dy: f64,
}

fn radial(m: u32, wavenumber: f64, r: f64, need_y: bool) -> Result<RadialBessel> {
    let x = wavenumber * r;
    let j = bessel_j_with_deriv(m, x)?;
    let (y, dy) = if need_y {
        let y = bessel_y_with_deriv(m, x)?;
        (y.value, y.deriv * wavenumber)
    } else {
        (0.0, 0.0)
    };
    Ok(RadialBessel {
        j: j.value,
        dj: j.deriv * wavenumber,
        y,
        dy,
    })
}

/// The `2L × 2L` matrix whose determinant vanishes exactly at the
/// transmission eigenvalues of angular order `m`.
///
/// Unknowns are ordered `(a, b_1, b_2, c_2, ..., b_L, c_L)`. Rows 0 and 1
/// match `w` and `∂_r w` against `v` at `r = 1` through the outer layer;
/// rows `2l, 2l + 1` enforce continuity of `w` and `∂_r w` across `d_l`.
/// The innermost layer has no Neumann term.
pub fn det_matrix(index: &LayeredIndex, m: u32, k: f64) -> Result<DenseMatrix> {
    if !(k > 0.0) {
        return Err(Error::Domain(format!("wavenumber {k} must be positive")));
    }
    let layers = index.layers();
    let size = 2 * layers;
    let mut mat = DenseMatrix::zeros(size, size);
    // column of b_l and c_l (1-based layer l)
    let b_col = |l: usize| if l == 1 { 1 } else { 2 * l - 2 };
    let c_col = |l: usize| 2 * l - 1;

    let outer = radial(m, k, 1.0, false)?;
    mat[(0, 0)] = outer.j;
    mat[(1, 0)] = outer.dj;

    let last = layers;
    let wave_last = k * index.values[last - 1].sqrt();
    let w = radial(m, wave_last, 1.0, last > 1)?;
    mat[(0, b_col(last))] = -w.j;
    mat[(1, b_col(last))] = -w.dj;
    if last > 1 {
        mat[(0, c_col(last))] = -w.y;
        mat[(1, c_col(last))] = -w.dy;
    }

    for (i, &d) in index.jumps.iter().enumerate() {
        let inner_layer = i + 1;
        let outer_layer = i + 2;
        let row = 2 * inner_layer;
        let inner = radial(m, k * index.values[i].sqrt(), d, inner_layer > 1)?;
        mat[(row, b_col(inner_layer))] = inner.j;
        mat[(row + 1, b_col(inner_layer))] = inner.dj;
        if inner_layer > 1 {
            mat[(row, c_col(inner_layer))] = inner.y;
            mat[(row + 1, c_col(inner_layer))] = inner.dy;
        }
        let outer = radial(m, k * index.values[i + 1].sqrt(), d, true)?;
        mat[(row, b_col(outer_layer))] = -outer.j;
        mat[(row + 1, b_col(outer_layer))] = -outer.dj;
        mat[(row, c_col(outer_layer))] = -outer.y;
        mat[(row + 1, c_col(outer_layer))] = -outer.dy;
    }
    Ok(mat)
}

/// Sign and log-magnitude of the determinant after scaling each row by its
/// largest entry. Row scaling does not move the zeros.
pub fn det_sign(index: &LayeredIndex, m: u32, k: f64) -> Result<LogDeterminant> {
    let mut mat = det_matrix(index, m, k)?;
    mat.scale_rows_by_max();
    lu_determinant(&mat)
}

/// Scan and refinement settings of the determinant root finder.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetConfig {
    pub k_min: f64,
    pub k_step: f64,
    /// Bisection stops once the bracket is narrower than this.
    pub tolerance: f64,
    /// Eigenvalues closer than this are reported once.
    pub dedupe: f64,
}

impl Default for DetConfig {
    fn default() -> Self {
        Self {
            k_min: 0.05,
            k_step: 0.005,
            tolerance: 1e-10,
            dedupe: 1e-6,
        }
    }
}

/// `(k, sign · exp(log|D_m(k)|))` on the scan grid, for plotting.
pub fn det_scan(index: &LayeredIndex, m: u32, k_max: f64, config: &DetConfig) -> Result<Vec<(f64, f64)>> {
    scan_grid(config, k_max)
        .map(|k| Ok((k, det_sign(index, m, k)?.value_clamped())))
        .collect()
}

fn scan_grid(config: &DetConfig, k_max: f64) -> impl Iterator<Item = f64> {
    let steps = ((k_max - config.k_min) / config.k_step).floor().max(0.0) as usize;
    let (k_min, k_step) = (config.k_min, config.k_step);
    (0..=steps).map(move |i| k_min + i as f64 * k_step)
}

/// Roots of `D_m` in `[k_min, k_max]` located by sign changes on the scan grid.
pub fn det_roots(index: &LayeredIndex, m: u32, k_max: f64, config: &DetConfig) -> Result<Vec<f64>> {
    let sign = |k: f64| -> Result<i8> { Ok(det_sign(index, m, k)?.sign) };
    let mut roots = Vec::new();
    let mut prev: Option<(f64, i8)> = None;
    for k in scan_grid(config, k_max) {
        let s = sign(k)?;
        if s == 0 {
            roots.push(k);
            prev = None;
            continue;
        }
        if let Some((pk, ps)) = prev {
            if ps != s {
                roots.push(bisect(pk, k, ps, &sign, config.tolerance)?);
            }
        }
        prev = Some((k, s));
    }
    Ok(roots)
}

fn bisect(mut lo: f64, mut hi: f64, slo: i8, sign: &impl Fn(f64) -> Result<i8>, tol: f64) -> Result<f64> {
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let s = sign(mid)?;
        if s == 0 {
            return Ok(mid);
        }
        if s == slo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Lowest `count` distinct transmission eigenvalues over `m = 0..=m_max`.
pub fn det_eigenvalues(index: &LayeredIndex, m_max: u32, k_max: f64, count: usize) -> Result<Spectrum> {
    det_eigenvalues_with(index, m_max, k_max, count, &DetConfig::default())
}

pub fn det_eigenvalues_with(
    index: &LayeredIndex,
    m_max: u32,
    k_max: f64,
    count: usize,
    config: &DetConfig,
) -> Result<Spectrum> {
    if count == 0 || count > 30 {
        return Err(Error::Domain(format!("eigenvalue count {count} outside 1..=30")));
    }
    if m_max > 10 {
        return Err(Error::Domain(format!("m_max = {m_max} exceeds 10")));
    }
    let mut all = Vec::new();
    for m in 0..=m_max {
        all.extend(det_roots(index, m, k_max, config)?.into_iter().map(|k| SpectrumEntry { k, m }));
    }
    let merged = merge_distinct(all.clone(), config.dedupe);
    if merged.len() < count {
        return Err(Error::InsufficientRange {
            wanted: count,
            k_max,
            found: merged.iter().map(|e| e.k).collect(),
        });
    }
    let entries: Vec<SpectrumEntry> = merged[..count].to_vec();
    let last = entries[count - 1].k;

    all.extend(
        det_roots(index, m_max + 1, k_max, config)?
            .into_iter()
            .map(|k| SpectrumEntry { k, m: m_max + 1 }),
    );
    let extended = merge_distinct(all, config.dedupe);
    let mode_cutoff_sensitive = extended[..count]
        .iter()
        .zip(&entries)
        .any(|(a, b)| a.k != b.k);

    Ok(Spectrum {
        entries,
        warnings: SpectrumWarnings {
            near_scan_limit: last > 0.95 * k_max,
            mode_cutoff_sensitive,
        },
    })
}

/// Largest wavenumber accepted by the Bessel evaluation for this index.
pub fn k_limit(index: &LayeredIndex) -> f64 {
    100.0 / index.max_value().sqrt()
}

/// Like [`det_eigenvalues`], but raises `m_max` (up to 10) while adding one
/// more angular order changes the list, and widens the scan by half while
/// it comes up short or ends within 5% of `k_max`.
pub fn det_eigenvalues_adaptive(index: &LayeredIndex, m_max: u32, k_max: f64, count: usize) -> Result<Spectrum> {
    let limit = k_limit(index);
    let (mut m, mut k_max) = (m_max, k_max.min(limit));
    loop {
        let widen = (k_max * 1.5).min(limit);
        match det_eigenvalues(index, m, k_max, count) {
            Err(Error::InsufficientRange { .. }) if widen > k_max => k_max = widen,
            Err(e) => return Err(e),
            Ok(spec) if spec.warnings.near_scan_limit && widen > k_max => k_max = widen,
            Ok(spec) if spec.warnings.mode_cutoff_sensitive && m < 10 => m += 1,
            Ok(spec) => return Ok(spec),
        }
    }
}

// ---------------------------------------------------------------------------
// Galerkin path
// ---------------------------------------------------------------------------

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let half = n.div_ceil(2);
    for i in 0..half {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for j in 2..=n {
                let p2 = ((2 * j - 1) as f64 * z * p1 - (j - 1) as f64 * p0) / j as f64;
                p0 = p1;
                p1 = p2;
            }
            if n == 1 {
                p0 = 1.0;
                p1 = z;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (mut p0, mut p1) = (1.0, z);
        for j in 2..=n {
            let p2 = ((2 * j - 1) as f64 * z * p1 - (j - 1) as f64 * p0) / j as f64;
            p0 = p1;
            p1 = p2;
        }
        if n > 1 {
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
        }
        let w = 2.0 / ((1.0 - z * z) * dp * dp);
        nodes[i] = -z;
        nodes[n - 1 - i] = z;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Radial basis function `R_{m,j}(r) = (1 - r²)² r^m P_j(2r² - 1)` and its
/// derivatives at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BasisPoint {
    pub value: f64,
    pub d1: f64,
    pub d2: f64,
    /// `R'' + R'/r - m² R / r²`
    pub lap: f64,
}

/// Evaluates `R_{m,j}` for `j = 0..n_r` at `r`.
pub fn radial_basis(m: u32, n_r: usize, r: f64) -> Vec<BasisPoint> {
    let s = 2.0 * r * r - 1.0;
    // Legendre P_j(s) with first and second derivatives.
    let mut p = vec![0.0; n_r.max(2)];
    let mut dp = vec![0.0; n_r.max(2)];
    let mut d2p = vec![0.0; n_r.max(2)];
    p[0] = 1.0;
    p[1] = s;
    dp[1] = 1.0;
    for j in 1..n_r.saturating_sub(1) {
        let jf = j as f64;
        p[j + 1] = ((2.0 * jf + 1.0) * s * p[j] - jf * p[j - 1]) / (jf + 1.0);
        dp[j + 1] = dp[j - 1] + (2.0 * jf + 1.0) * p[j];
        d2p[j + 1] = d2p[j - 1] + (2.0 * jf + 1.0) * dp[j];
    }

    let r2 = r * r;
    let om = 1.0 - r2;
    let f = om * om;
    let mf = f64::from(m);
    let rm = r.powi(m as i32);
    let rm1 = if m >= 1 { r.powi(m as i32 - 1) } else { 0.0 };
    let rm2 = if m >= 2 { r.powi(m as i32 - 2) } else { 0.0 };

    (0..n_r)
        .map(|j| {
            let (pj, dpj, d2pj) = (p[j], dp[j], d2p[j]);
            // p(r) = f(r) P_j(s(r)); derivatives by the chain rule, ds/dr = 4r
            let pv = f * pj;
            let dp_over_r = -4.0 * om * pj + 4.0 * f * dpj;
            let dpv = r * dp_over_r;
            let d2pv = -4.0 * (1.0 - 3.0 * r2) * pj + (4.0 * f - 32.0 * r2 * om) * dpj + 16.0 * r2 * f * d2pj;
            let value = rm * pv;
            let d1 = mf * rm1 * pv + rm * dpv;
            let d2 = mf * (mf - 1.0) * rm2 * pv + 2.0 * mf * rm1 * dpv + rm * d2pv;
            let lap = rm * (d2pv + (2.0 * mf + 1.0) * dp_over_r);
            BasisPoint { value, d1, d2, lap }
        })
        .collect()
}

/// Per-mode matrices of the quadratic eigenproblem `(A - k² B + k⁴ C) c = 0`.
#[derive(Debug, Clone)]
pub struct GalerkinOperator {
    pub a_mat: DenseMatrix,
    pub b_mat: DenseMatrix,
    pub c_mat: DenseMatrix,
    pub m: u32,
    pub n_r: usize,
}

/// Gauss–Legendre points per layer used by default.
pub const QUADRATURE_NODES: usize = 40;

pub fn galerkin_matrices(index: &LayeredIndex, m: u32, n_r: usize) -> Result<GalerkinOperator> {
    galerkin_matrices_with(index, m, n_r, &gauss_legendre(QUADRATURE_NODES))
}

/// Assembles the radial matrices with the given reference quadrature rule.
///
/// The common `2π` from the angular integral is dropped.
pub fn galerkin_matrices_with(
    index: &LayeredIndex,
    m: u32,
    n_r: usize,
    rule: &(Vec<f64>, Vec<f64>),
) -> Result<GalerkinOperator> {
    if n_r == 0 || n_r > 30 {
        return Err(Error::Domain(format!("basis size {n_r} outside 1..=30")));
    }
    if let Some(n) = index.values.iter().find(|&&n| n <= 1.0) {
        return Err(Error::InvalidIndex(format!("n = {n} must exceed 1")));
    }
    let mut a = DenseMatrix::zeros(n_r, n_r);
    let mut b = DenseMatrix::zeros(n_r, n_r);
    let mut c = DenseMatrix::zeros(n_r, n_r);
    let (nodes, weights) = rule;

    for ((lo, hi), &n) in index.layer_bounds().into_iter().zip(&index.values) {
        let inv = 1.0 / (n - 1.0);
        let ratio = n * inv;
        let (mid, half) = (0.5 * (lo + hi), 0.5 * (hi - lo));
        for (&t, &wt) in nodes.iter().zip(weights) {
            let r = mid + half * t;
            let w = wt * half * r;
            let basis = radial_basis(m, n_r, r);
            for i in 0..n_r {
                let (ri, li) = (basis[i].value, basis[i].lap);
                for j in 0..n_r {
                    let (rj, lj) = (basis[j].value, basis[j].lap);
                    a[(i, j)] += w * inv * li * lj;
                    b[(i, j)] -= w * (ratio * li * rj + inv * ri * lj);
                    c[(i, j)] += w * ratio * ri * rj;
                }
            }
        }
    }
    Ok(GalerkinOperator {
        a_mat: a,
        b_mat: b,
        c_mat: c,
        m,
        n_r,
    })
}

/// Positive real `k` from the quadratic pencil of one operator, ascending.
pub fn galerkin_mode_eigenvalues(op: &GalerkinOperator) -> Result<Vec<f64>> {
    let n = op.n_r;
    let c_inv_a = lu_solve_matrix(&op.c_mat, &op.a_mat).map_err(|e| match e {
        Error::Singular { index } => Error::InvalidIndex(format!("C matrix singular at pivot {index}")),
        other => other,
    })?;
    let c_inv_b = lu_solve_matrix(&op.c_mat, &op.b_mat)?;
    let mut companion = DenseMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        companion[(i, n + i)] = 1.0;
        for j in 0..n {
            companion[(n + i, j)] = -c_inv_a[(i, j)];
            companion[(n + i, n + j)] = c_inv_b[(i, j)];
        }
    }
    let lambdas = eigenvalues_qr(&companion)?;
    let mut ks: Vec<f64> = lambdas
        .values
        .iter()
        .filter(|z| z.im.abs() <= 1e-6 * (1.0 + z.abs()) && z.re > 1e-8)
        .map(|z| z.re.sqrt())
        .collect();
    ks.sort_by(f64::total_cmp);
    Ok(ks)
}

/// Lowest `count` distinct positive real Galerkin eigenvalues over `m = 0..=m_max`.
pub fn galerkin_eigenvalues(index: &LayeredIndex, m_max: u32, n_r: usize, count: usize) -> Result<Spectrum> {
    let rule = gauss_legendre(QUADRATURE_NODES);
    let mut all = Vec::new();
    for m in 0..=m_max {
        let op = galerkin_matrices_with(index, m, n_r, &rule)?;
        all.extend(galerkin_mode_eigenvalues(&op)?.into_iter().map(|k| SpectrumEntry { k, m }));
    }
    let merged = merge_distinct(all, DetConfig::default().dedupe);
    if merged.len() < count {
        return Err(Error::InsufficientRange {
            wanted: count,
            k_max: f64::INFINITY,
            found: merged.iter().map(|e| e.k).collect(),
        });
    }
    Ok(Spectrum {
        entries: merged[..count].to_vec(),
        warnings: SpectrumWarnings::default(),
    })
}
