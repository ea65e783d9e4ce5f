//! Dense complex linear algebra.
//!
//! A small row-major matrix type plus the handful of kernels the RIS models
//! need: DFT frames, Kronecker products, LU inversion with partial pivoting
//! and an economy SVD based on one-sided Jacobi rotations.
//!
//! Storage: `data[i * cols + j]` holds `A[i, j]`.

use std::f64::consts::PI;
use std::ops::{Index, IndexMut};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Relative pivot threshold used by [`invert`].
pub const SINGULAR_RTOL: f64 = 1e-14;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Dense complex matrix in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl CMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::InvalidDimension(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(CMatrix { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMatrix {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = ONE;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        CMatrix { rows, cols, data }
    }

    pub fn from_diag(d: &[C64]) -> Self {
        let n = d.len();
        let mut m = Self::zeros(n, n);
        for (i, &v) in d.iter().enumerate() {
            m.data[i * n + i] = v;
        }
        m
    }

    /// Builds a matrix whose columns are the given vectors.
    pub fn from_columns(cols: &[Vec<C64>]) -> Self {
        let ncols = cols.len();
        let nrows = cols.first().map_or(0, Vec::len);
        Self::from_fn(nrows, ncols, |i, j| cols[j][i])
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[C64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn diag(&self) -> Vec<C64> {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn conj(&self) -> Self {
        self.map(|z| z.conj())
    }

    pub fn map(&self, f: impl Fn(C64) -> C64) -> Self {
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| f(z)).collect(),
        }
    }

    pub fn scale(&self, s: C64) -> Self {
        self.map(|z| z * s)
    }

    pub fn add(&self, other: &CMatrix) -> Self {
        assert_eq!(self.shape(), other.shape(), "add: shape mismatch");
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &CMatrix) -> Self {
        assert_eq!(self.shape(), other.shape(), "sub: shape mismatch");
        self.zip_with(other, |a, b| a - b)
    }

    fn zip_with(&self, other: &CMatrix, f: impl Fn(C64, C64) -> C64) -> Self {
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    /// Matrix product. Panics on non-conformable shapes.
    pub fn matmul(&self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(
            self.cols, rhs.rows,
            "matmul: {}x{} times {}x{}",
            self.rows, self.cols, rhs.rows, rhs.cols
        );
        let (n, p) = (self.rows, rhs.cols);
        let mut out = vec![ZERO; n * p];
        for i in 0..n {
            let out_row = &mut out[i * p..(i + 1) * p];
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == ZERO {
                    continue;
                }
                let rhs_row = &rhs.data[k * p..(k + 1) * p];
                for (o, &b) in out_row.iter_mut().zip(rhs_row) {
                    *o += a * b;
                }
            }
        }
        CMatrix {
            rows: n,
            cols: p,
            data: out,
        }
    }

    pub fn matvec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(self.cols, v.len(), "matvec: shape mismatch");
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(&a, &b)| a * b).sum())
            .collect()
    }

    /// `self * diag(d)`: scales column j by `d[j]`.
    pub fn mul_diag_right(&self, d: &[C64]) -> CMatrix {
        assert_eq!(self.cols, d.len());
        let mut out = self.clone();
        for i in 0..self.rows {
            for (j, &dj) in d.iter().enumerate() {
                out.data[i * self.cols + j] *= dj;
            }
        }
        out
    }

    /// `diag(d) * self`: scales row i by `d[i]`.
    pub fn mul_diag_left(&self, d: &[C64]) -> CMatrix {
        assert_eq!(self.rows, d.len());
        let mut out = self.clone();
        for (i, &di) in d.iter().enumerate() {
            for z in &mut out.data[i * self.cols..(i + 1) * self.cols] {
                *z *= di;
            }
        }
        out
    }

    pub fn frobenius_norm_sqr(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.frobenius_norm_sqr().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &CMatrix) -> f64 {
        assert_eq!(self.shape(), other.shape());
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn trace(&self) -> C64 {
        self.diag().into_iter().sum()
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = C64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

/// Returns `m` when `n == m * m`.
pub fn exact_sqrt(n: usize) -> Option<usize> {
    let r = (n as f64).sqrt().round() as usize;
    (r * r == n).then_some(r)
}

/// Unitary DFT matrix, `D[j,k] = exp(-2πi jk/m) / √m`.
pub fn dft_matrix(m: usize) -> Result<CMatrix> {
    if m == 0 {
        return Err(Error::InvalidDimension("DFT size must be at least 1".into()));
    }
    let norm = 1.0 / (m as f64).sqrt();
    Ok(CMatrix::from_fn(m, m, |j, k| {
        // reduce jk mod m before scaling to keep the angle small
        let idx = (j * k) % m;
        C64::from_polar(norm, -2.0 * PI * idx as f64 / m as f64)
    }))
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (br, bc) = b.shape();
    CMatrix::from_fn(a.rows * br, a.cols * bc, |i, j| {
        a[(i / br, j / bc)] * b[(i % br, j % bc)]
    })
}

/// Two-dimensional DFT frame `D ⊗ D` for an `m × m` planar array, `M = m²`.
pub fn two_dft(elements: usize) -> Result<CMatrix> {
    let m = exact_sqrt(elements).ok_or_else(|| {
        Error::InvalidDimension(format!(
            "element count {elements} is not a perfect square"
        ))
    })?;
    let d = dft_matrix(m)?;
    Ok(kron(&d, &d))
}

/// LU factorization with partial pivoting, stored compactly.
#[derive(Debug, Clone)]
pub struct Lu {
    lu: CMatrix,
    perm: Vec<usize>,
}

impl Lu {
    pub fn factor(a: &CMatrix) -> Result<Self> {
        Self::factor_with_threshold(a, SINGULAR_RTOL * a.max_abs())
    }

    /// Factors `a`, failing when a pivot modulus is at or below `threshold`.
    pub fn factor_with_threshold(a: &CMatrix, threshold: f64) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::InvalidDimension(format!(
                "LU needs a square matrix, got {}x{}",
                a.rows, a.cols
            )));
        }
        let n = a.rows;
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let (p, pivot) = (k..n)
                .map(|i| (i, lu[(i, k)].norm()))
                .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if pivot <= threshold || pivot == 0.0 {
                return Err(Error::Singular { pivot, threshold });
            }
            if p != k {
                for j in 0..n {
                    lu.data.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
            }
            let inv_pivot = lu[(k, k)].inv();
            for i in (k + 1)..n {
                let factor = lu[(i, k)] * inv_pivot;
                lu[(i, k)] = factor;
                if factor == ZERO {
                    continue;
                }
                for j in (k + 1)..n {
                    let u = lu.data[k * n + j];
                    lu.data[i * n + j] -= factor * u;
                }
            }
        }
        Ok(Lu { lu, perm })
    }

    /// Solves `A X = B` for a matrix right-hand side.
    pub fn solve(&self, b: &CMatrix) -> CMatrix {
        let n = self.lu.rows;
        assert_eq!(b.rows, n, "lu solve: shape mismatch");
        let p = b.cols;
        let mut x = CMatrix::from_fn(n, p, |i, j| b[(self.perm[i], j)]);
        // forward substitution, unit lower triangle
        for i in 0..n {
            for k in 0..i {
                let l = self.lu.data[i * n + k];
                if l == ZERO {
                    continue;
                }
                for j in 0..p {
                    let v = x.data[k * p + j];
                    x.data[i * p + j] -= l * v;
                }
            }
        }
        for i in (0..n).rev() {
            for k in (i + 1)..n {
                let u = self.lu.data[i * n + k];
                if u == ZERO {
                    continue;
                }
                for j in 0..p {
                    let v = x.data[k * p + j];
                    x.data[i * p + j] -= u * v;
                }
            }
            let inv = self.lu.data[i * n + i].inv();
            for j in 0..p {
                x.data[i * p + j] *= inv;
            }
        }
        x
    }

    /// Solves `A^T X = B` with the same factorization.
    pub fn solve_transposed(&self, b: &CMatrix) -> CMatrix {
        let n = self.lu.rows;
        assert_eq!(b.rows, n, "lu solve: shape mismatch");
        let p = b.cols;
        let mut z = b.clone();
        // U^T y = b
        for i in 0..n {
            for k in 0..i {
                let u = self.lu.data[k * n + i];
                if u == ZERO {
                    continue;
                }
                for j in 0..p {
                    let v = z.data[k * p + j];
                    z.data[i * p + j] -= u * v;
                }
            }
            let inv = self.lu.data[i * n + i].inv();
            for j in 0..p {
                z.data[i * p + j] *= inv;
            }
        }
        // L^T z = y, unit diagonal
        for i in (0..n).rev() {
            for k in (i + 1)..n {
                let l = self.lu.data[k * n + i];
                if l == ZERO {
                    continue;
                }
                for j in 0..p {
                    let v = z.data[k * p + j];
                    z.data[i * p + j] -= l * v;
                }
            }
        }
        let mut x = CMatrix::zeros(n, p);
        for i in 0..n {
            for j in 0..p {
                x.data[self.perm[i] * p + j] = z.data[i * p + j];
            }
        }
        x
    }
}

/// Matrix inverse via partial-pivot LU.
pub fn invert(a: &CMatrix) -> Result<CMatrix> {
    let lu = Lu::factor(a)?;
    Ok(lu.solve(&CMatrix::identity(a.rows)))
}

/// Economy singular value decomposition `A = U diag(S) V^H`.
///
/// For an `m × n` input with `r = min(m, n)`, `u` is `m × r`, `v` is `n × r`
/// and `s` holds `r` non-negative values in non-increasing order.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: CMatrix,
    pub s: Vec<f64>,
    pub v: CMatrix,
}

impl Svd {
    pub fn reconstruct(&self) -> CMatrix {
        let s: Vec<C64> = self.s.iter().map(|&x| C64::new(x, 0.0)).collect();
        self.u.mul_diag_right(&s).matmul(&self.v.adjoint())
    }
}

const JACOBI_MAX_SWEEPS: usize = 80;

/// One-sided (Hestenes) Jacobi SVD.
pub fn svd_economy(a: &CMatrix) -> Svd {
    if a.rows < a.cols {
        let t = svd_economy(&a.adjoint());
        return Svd {
            u: t.v,
            s: t.s,
            v: t.u,
        };
    }
    let (m, n) = a.shape();
    // work column-major: cols[j] is column j of the working matrix
    let mut w: Vec<Vec<C64>> = (0..n).map(|j| a.column(j)).collect();
    let mut v: Vec<Vec<C64>> = (0..n)
        .map(|j| (0..n).map(|i| if i == j { ONE } else { ZERO }).collect())
        .collect();

    let tol = f64::EPSILON * (m as f64);
    for _ in 0..JACOBI_MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let alpha: f64 = w[p].iter().map(|z| z.norm_sqr()).sum();
                let beta: f64 = w[q].iter().map(|z| z.norm_sqr()).sum();
                let gamma: C64 = w[p].iter().zip(&w[q]).map(|(x, y)| x.conj() * y).sum();
                let g = gamma.norm();
                if g == 0.0 || g <= tol * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let phase = gamma / g;
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let t = if zeta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                let ph_conj = phase.conj();
                rotate_pair(&mut w, p, q, c, s, ph_conj);
                rotate_pair(&mut v, p, q, c, s, ph_conj);
            }
        }
        if !rotated {
            break;
        }
    }

    let mut order: Vec<(usize, f64)> = w
        .iter()
        .enumerate()
        .map(|(j, col)| (j, col.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()))
        .collect();
    order.sort_by(|a, b| b.1.total_cmp(&a.1));

    let s: Vec<f64> = order.iter().map(|&(_, sv)| sv).collect();
    let smax = s.first().copied().unwrap_or(0.0);
    let mut u_cols: Vec<Vec<C64>> = Vec::with_capacity(n);
    let mut pending: Vec<usize> = Vec::new();
    for (k, &(j, sv)) in order.iter().enumerate() {
        if sv > 0.0 && sv > smax * f64::EPSILON * (m as f64) {
            u_cols.push(w[j].iter().map(|z| z / sv).collect());
        } else {
            u_cols.push(vec![ZERO; m]);
            pending.push(k);
        }
    }
    complete_orthonormal(&mut u_cols, &pending);
    let v_sorted: Vec<Vec<C64>> = order.iter().map(|&(j, _)| v[j].clone()).collect();

    Svd {
        u: CMatrix::from_columns(&u_cols),
        s,
        v: CMatrix::from_columns(&v_sorted),
    }
}

/// Applies the plane rotation that zeroes `<col_p, col_q>` after rephasing
/// `col_q` by `ph_conj`.
fn rotate_pair(cols: &mut [Vec<C64>], p: usize, q: usize, c: f64, s: f64, ph_conj: C64) {
    let (left, right) = cols.split_at_mut(q);
    let cp = &mut left[p];
    let cq = &mut right[0];
    for (x, y) in cp.iter_mut().zip(cq.iter_mut()) {
        let yq = *y * ph_conj;
        let xp = *x;
        *x = xp * c - yq * s;
        *y = xp * s + yq * c;
    }
}

/// Fills the listed (zero) columns with unit vectors orthogonal to every other
/// column, via Gram-Schmidt against the standard basis.
fn complete_orthonormal(cols: &mut [Vec<C64>], pending: &[usize]) {
    if pending.is_empty() {
        return;
    }
    let m = cols[0].len();
    let mut candidate = 0;
    for &k in pending {
        loop {
            assert!(candidate < m, "cannot complete orthonormal basis");
            let mut e = vec![ZERO; m];
            e[candidate] = ONE;
            candidate += 1;
            for _ in 0..2 {
                for (j, col) in cols.iter().enumerate() {
                    if j == k || col.iter().all(|z| *z == ZERO) {
                        continue;
                    }
                    let proj: C64 = col.iter().zip(&e).map(|(a, b)| a.conj() * b).sum();
                    for (ei, ci) in e.iter_mut().zip(col) {
                        *ei -= proj * ci;
                    }
                }
            }
            let norm = e.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if norm > 1e-8 {
                cols[k] = e.into_iter().map(|z| z / norm).collect();
                break;
            }
        }
    }
}

/// Numerical rank: singular values above `rtol * s_max`.
pub fn rank(a: &CMatrix, rtol: f64) -> usize {
    let s = svd_economy(a).s;
    let smax = s.first().copied().unwrap_or(0.0);
    if smax == 0.0 {
        return 0;
    }
    s.iter().filter(|&&x| x > rtol * smax).count()
}

/// Largest singular value.
pub fn spectral_norm(a: &CMatrix) -> f64 {
    svd_economy(a).s.first().copied().unwrap_or(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(rows: usize, cols: usize, rng: &mut impl Rng) -> CMatrix {
        CMatrix::from_fn(rows, cols, |_, _| {
            C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        })
    }

    fn unitarity_residual(a: &CMatrix) -> f64 {
        a.matmul(&a.adjoint())
            .max_abs_diff(&CMatrix::identity(a.rows()))
    }

    /// Reversal permutation Π_m⊗Π_m with Π_m: 0→0, k→m−k.
    fn reversal_2d(m: usize) -> CMatrix {
        let rev = |k: usize| (m - k) % m;
        CMatrix::from_fn(m * m, m * m, |i, j| {
            let (p, q) = (i / m, i % m);
            if j == rev(p) * m + rev(q) {
                ONE
            } else {
                ZERO
            }
        })
    }

    #[test]
    fn lu_transposed_solve() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let a = random_matrix(7, 7, &mut rng);
        let b = random_matrix(7, 3, &mut rng);
        let lu = Lu::factor(&a).unwrap();
        assert!(a.matmul(&lu.solve(&b)).max_abs_diff(&b) < 1e-10);
        assert!(a.transpose().matmul(&lu.solve_transposed(&b)).max_abs_diff(&b) < 1e-10);
    }

    #[test]
    fn dft_small_cases() {
        assert_eq!(dft_matrix(1).unwrap(), CMatrix::identity(1));
        let d2 = dft_matrix(2).unwrap();
        let h = 1.0 / 2f64.sqrt();
        let expected = CMatrix::new(
            2,
            2,
            vec![
                C64::new(h, 0.0),
                C64::new(h, 0.0),
                C64::new(h, 0.0),
                C64::new(-h, 0.0),
            ],
        )
        .unwrap();
        assert!(d2.max_abs_diff(&expected) < 1e-15);
        assert!(matches!(dft_matrix(0), Err(Error::InvalidDimension(_))));
    }

    #[test]
    fn dft_unitary_and_symmetric() {
        for m in 1..=16 {
            let d = dft_matrix(m).unwrap();
            assert!(unitarity_residual(&d) < 1e-12, "m={m}");
            assert!(d.max_abs_diff(&d.transpose()) < 1e-12, "m={m}");
        }
    }

    #[test]
    fn kron_cases() {
        let i2 = CMatrix::identity(2);
        assert_eq!(kron(&i2, &i2), CMatrix::identity(4));
        let swap = CMatrix::new(2, 2, vec![ZERO, ONE, ONE, ZERO]).unwrap();
        let two = CMatrix::new(1, 1, vec![C64::new(2.0, 0.0)]).unwrap();
        let expected =
            CMatrix::new(2, 2, vec![ZERO, C64::new(2.0, 0.0), C64::new(2.0, 0.0), ZERO]).unwrap();
        assert_eq!(kron(&swap, &two), expected);
        let d2 = dft_matrix(2).unwrap();
        assert!(unitarity_residual(&kron(&d2, &d2)) < 1e-12);
    }

    #[test]
    fn two_dft_cases() {
        let f4 = two_dft(4).unwrap();
        for j in 0..4 {
            assert!((f4[(0, j)] - C64::new(0.5, 0.0)).norm() < 1e-15);
        }
        assert_eq!(two_dft(1).unwrap(), CMatrix::identity(1));
        assert!(matches!(two_dft(15), Err(Error::InvalidDimension(_))));
        for m in [2usize, 4, 8] {
            let f = two_dft(m * m).unwrap();
            let sq = f.matmul(&f);
            assert!(sq.max_abs_diff(&reversal_2d(m)) < 1e-12, "m={m}");
            assert!(f.max_abs_diff(&f.transpose()) < 1e-12);
        }
    }

    #[test]
    fn invert_cases() {
        assert_eq!(invert(&CMatrix::identity(3)).unwrap(), CMatrix::identity(3));
        let d = CMatrix::from_diag(&[C64::new(2.0, 0.0), C64::new(4.0, 0.0)]);
        let di = invert(&d).unwrap();
        assert!(di.max_abs_diff(&CMatrix::from_diag(&[C64::new(0.5, 0.0), C64::new(0.25, 0.0)])) < 1e-15);

        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = random_matrix(8, 8, &mut rng).add(&CMatrix::identity(8).scale(C64::new(3.0, 0.0)));
        let residual = a.matmul(&invert(&a).unwrap()).sub(&CMatrix::identity(8));
        assert!(residual.frobenius_norm() < 1e-10);
        let back = invert(&invert(&a).unwrap()).unwrap();
        assert!(back.max_abs_diff(&a) < 1e-9);
    }

    #[test]
    fn invert_rejects_singular_and_nonsquare() {
        let s = CMatrix::new(2, 2, vec![ONE, ONE, ONE, ONE]).unwrap();
        assert!(matches!(invert(&s), Err(Error::Singular { .. })));
        assert!(matches!(
            invert(&CMatrix::zeros(2, 3)),
            Err(Error::InvalidDimension(_))
        ));
    }

    #[test]
    fn svd_cases() {
        let svd = svd_economy(&CMatrix::identity(3));
        for s in &svd.s {
            assert!((s - 1.0).abs() < 1e-15);
        }
        let d = CMatrix::from_diag(&[C64::new(3.0, 0.0), ZERO]);
        let svd = svd_economy(&d);
        assert!((svd.s[0] - 3.0).abs() < 1e-15 && svd.s[1].abs() < 1e-15);
        assert!(svd.u.adjoint().matmul(&svd.u).max_abs_diff(&CMatrix::identity(2)) < 1e-12);
        assert!(svd.reconstruct().max_abs_diff(&d) < 1e-14);
    }

    #[test]
    fn svd_random_residuals() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for (r, c) in [(6, 6), (7, 3), (3, 7), (12, 12)] {
            let a = random_matrix(r, c, &mut rng);
            let svd = svd_economy(&a);
            let k = r.min(c);
            assert_eq!(svd.s.len(), k);
            assert!(svd.reconstruct().sub(&a).frobenius_norm() < 1e-10 * a.frobenius_norm());
            assert!(svd.u.adjoint().matmul(&svd.u).max_abs_diff(&CMatrix::identity(k)) < 1e-12);
            assert!(svd.v.adjoint().matmul(&svd.v).max_abs_diff(&CMatrix::identity(k)) < 1e-12);
            assert!(svd.s.windows(2).all(|w| w[0] >= w[1]));
            assert!(svd.s.iter().all(|&s| s >= 0.0));
        }
    }

    #[test]
    fn svd_of_unitary_has_unit_spectrum() {
        for m in [2usize, 3, 4] {
            let f = two_dft(m * m).unwrap();
            assert!(svd_economy(&f).s.iter().all(|s| (s - 1.0).abs() < 1e-10));
        }
    }

    #[test]
    fn rank_of_outer_product() {
        let u = [ONE, C64::new(0.0, 1.0), C64::new(2.0, 0.0)];
        let a = CMatrix::from_fn(3, 3, |i, j| u[i] * u[j].conj());
        assert_eq!(rank(&a, 1e-10), 1);
        assert_eq!(rank(&CMatrix::identity(4), 1e-10), 4);
    }
}
