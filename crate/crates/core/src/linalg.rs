//! Dense complex linear algebra for the tiny Hilbert spaces used here.
//!
//! Nothing in this module tries to be fast for large matrices: Fock
//! dimensions stay in the tens, so simple row-major storage, closed-form
//! eigenvalues for `n <= 3` and cyclic Jacobi sweeps beyond that are enough.

use std::ops::{Index, IndexMut, Mul};

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);

/// Row-major dense complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
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
        Self { rows, cols, data }
    }

    pub fn from_rows(rows: Vec<Vec<C64>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            if row.len() != c {
                return Err(Error::DimensionMismatch {
                    what: "matrix row",
                    expected: c,
                    found: row.len(),
                });
            }
            data.extend(row);
        }
        Ok(Self {
            rows: r,
            cols: c,
            data,
        })
    }

    /// Builds a matrix whose columns are the given vectors.
    pub fn from_columns(columns: &[ComplexVector]) -> Result<Self> {
        let rows = columns.first().map_or(0, ComplexVector::len);
        if let Some(bad) = columns.iter().find(|c| c.len() != rows) {
            return Err(Error::DimensionMismatch {
                what: "matrix column",
                expected: rows,
                found: bad.len(),
            });
        }
        Ok(Self::from_fn(rows, columns.len(), |i, j| columns[j][i]))
    }

    pub fn diagonal(entries: &[C64]) -> Self {
        let mut m = Self::zeros(entries.len(), entries.len());
        for (i, &e) in entries.iter().enumerate() {
            m[(i, i)] = e;
        }
        m
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

    /// Row-major entries.
    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[C64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<C64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| z * factor).collect(),
        }
    }

    pub fn mul_vec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(v.len(), self.cols, "matrix-vector dimension mismatch");
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// `max |(M^dag M - I)_ij|`; infinite for non-square input.
    pub fn unitarity_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let gram = &self.adjoint() * self;
        gram.max_abs_diff(&Self::identity(self.rows))
    }

    /// `max |M_ij - conj(M_ji)|`; infinite for non-square input.
    pub fn hermiticity_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut worst = 0.0_f64;
        for i in 0..self.rows {
            for j in i..self.cols {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// Submatrix with (possibly repeated) row and column selections.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> Self {
        Self::from_fn(rows.len(), cols.len(), |i, j| self[(rows[i], cols[j])])
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.cols + j]
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.cols, rhs.rows, "matrix product dimension mismatch");
        let mut out = ComplexMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == ZERO {
                    continue;
                }
                for j in 0..rhs.cols {
                    out[(i, j)] += a * rhs[(k, j)];
                }
            }
        }
        out
    }
}

/// Plain complex vector with the physics inner-product convention
/// (`dot` conjugates the left operand).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexVector(pub Vec<C64>);

impl ComplexVector {
    pub fn zeros(n: usize) -> Self {
        Self(vec![ZERO; n])
    }

    pub fn basis(n: usize, k: usize) -> Self {
        let mut v = Self::zeros(n);
        v.0[k] = ONE;
        v
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `<self|other>`
    pub fn dot(&self, other: &Self) -> C64 {
        inner(&self.0, &other.0)
    }

    pub fn norm(&self) -> f64 {
        norm_sqr(&self.0).sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn scaled(&self, factor: C64) -> Self {
        Self(self.0.iter().map(|&z| z * factor).collect())
    }

    /// `self += factor * other`
    pub fn axpy(&mut self, factor: C64, other: &Self) {
        for (a, &b) in self.0.iter_mut().zip(&other.0) {
            *a += factor * b;
        }
    }
}

impl Index<usize> for ComplexVector {
    type Output = C64;
    fn index(&self, i: usize) -> &C64 {
        &self.0[i]
    }
}

/// `<a|b> = sum conj(a_i) b_i`
pub fn inner(a: &[C64], b: &[C64]) -> C64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn norm_sqr(a: &[C64]) -> f64 {
    a.iter().map(C64::norm_sqr).sum()
}

/// Real symmetric matrix, stored densely.
#[derive(Debug, Clone, PartialEq)]
pub struct RealSymMatrix {
    dim: usize,
    data: Vec<f64>,
}

/// Absolute symmetry tolerance enforced by [`RealSymMatrix::from_rows`].
pub const SYMMETRY_TOL: f64 = 1e-12;

impl RealSymMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![0.0; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_upper(dim, |i, j| if i == j { 1.0 } else { 0.0 })
    }

    /// Fills the upper triangle (`i <= j`) from `f` and mirrors it.
    pub fn from_upper(dim: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in i..dim {
                let v = f(i, j);
                m.data[i * dim + j] = v;
                m.data[j * dim + i] = v;
            }
        }
        m
    }

    /// Symmetrizes an arbitrary square array as `(A + A^T) / 2`.
    pub fn symmetrized(dim: usize, data: &[f64]) -> Self {
        assert_eq!(data.len(), dim * dim);
        Self::from_upper(dim, |i, j| 0.5 * (data[i * dim + j] + data[j * dim + i]))
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let dim = rows.len();
        let mut data = Vec::with_capacity(dim * dim);
        for row in &rows {
            if row.len() != dim {
                return Err(Error::NotSquare {
                    rows: dim,
                    cols: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        let m = Self { dim, data };
        let asym = m.asymmetry();
        if asym > SYMMETRY_TOL {
            return Err(Error::NotHermitian {
                max_asymmetry: asym,
            });
        }
        Ok(m)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    /// Row-major entries.
    pub fn entries(&self) -> &[f64] {
        &self.data
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.dim.max(1)).map(<[f64]>::to_vec).collect()
    }

    /// Upper triangle in row-major order: `m11, m12, .., m1d, m22, ..`.
    pub fn upper_triangle(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.dim * (self.dim + 1) / 2);
        for i in 0..self.dim {
            for j in i..self.dim {
                out.push(self.get(i, j));
            }
        }
        out
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|x| x * factor).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        Self {
            dim: self.dim,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        Self {
            dim: self.dim,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim);
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    fn asymmetry(&self) -> f64 {
        let mut worst = 0.0_f64;
        for i in 0..self.dim {
            for j in i + 1..self.dim {
                worst = worst.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        worst
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        symmetric_eigenvalues(self.dim, &self.data)
    }

    /// Largest eigenvalue magnitude (equals the largest singular value).
    pub fn spectral_norm(&self) -> f64 {
        spectral_norm(self)
    }
}

impl Serialize for RealSymMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_rows().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for RealSymMatrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<Vec<f64>>::deserialize(deserializer)?;
        RealSymMatrix::from_rows(rows).map_err(serde::de::Error::custom)
    }
}

/// Input accepted by [`hermitian_eigenvalues`].
pub trait HermitianInput {
    fn hermitian_eigenvalues(&self, tol: f64) -> Result<Vec<f64>>;
}

impl HermitianInput for RealSymMatrix {
    fn hermitian_eigenvalues(&self, tol: f64) -> Result<Vec<f64>> {
        let asym = self.asymmetry();
        if asym > tol {
            return Err(Error::NotHermitian {
                max_asymmetry: asym,
            });
        }
        Ok(self.eigenvalues())
    }
}

impl HermitianInput for ComplexMatrix {
    fn hermitian_eigenvalues(&self, tol: f64) -> Result<Vec<f64>> {
        if !self.is_square() {
            return Err(Error::NotSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        let defect = self.hermiticity_defect();
        if defect > tol {
            return Err(Error::NotHermitian {
                max_asymmetry: defect,
            });
        }
        let n = self.rows;
        if self.data.iter().all(|z| z.im == 0.0) {
            let re: Vec<f64> = self.data.iter().map(|z| z.re).collect();
            let sym = RealSymMatrix::symmetrized(n, &re);
            return Ok(sym.eigenvalues());
        }
        // H = A + iB  ->  [[A, -B], [B, A]] has every eigenvalue of H twice.
        let big = 2 * n;
        let mut emb = vec![0.0; big * big];
        for i in 0..n {
            for j in 0..n {
                let h = 0.5 * (self[(i, j)] + self[(j, i)].conj());
                emb[i * big + j] = h.re;
                emb[(i + n) * big + (j + n)] = h.re;
                emb[i * big + (j + n)] = -h.im;
                emb[(i + n) * big + j] = h.im;
            }
        }
        let doubled = symmetric_eigenvalues(big, &emb);
        Ok(doubled.chunks(2).map(|p| 0.5 * (p[0] + p[1])).collect())
    }
}

/// Eigenvalues of a Hermitian (or real symmetric) matrix, ascending.
pub fn hermitian_eigenvalues<M: HermitianInput + ?Sized>(m: &M, tol: f64) -> Result<Vec<f64>> {
    m.hermitian_eigenvalues(tol)
}

pub fn spectral_norm(m: &RealSymMatrix) -> f64 {
    m.eigenvalues().into_iter().map(f64::abs).fold(0.0, f64::max)
}

fn symmetric_eigenvalues(n: usize, a: &[f64]) -> Vec<f64> {
    let mut ev = match n {
        0 => Vec::new(),
        1 => vec![a[0]],
        2 => eig2(a[0], a[1], a[3]),
        3 => eig3(a),
        _ => jacobi_eigenvalues(n, a),
    };
    ev.sort_by(f64::total_cmp);
    ev
}

fn eig2(a: f64, b: f64, d: f64) -> Vec<f64> {
    let mean = 0.5 * (a + d);
    let r = (0.5 * (a - d)).hypot(b);
    vec![mean - r, mean + r]
}

// Trigonometric solution of the characteristic cubic.
fn eig3(m: &[f64]) -> Vec<f64> {
    let (a00, a01, a02, a11, a12, a22) = (m[0], m[1], m[2], m[4], m[5], m[8]);
    let p1 = a01 * a01 + a02 * a02 + a12 * a12;
    if p1 == 0.0 {
        return vec![a00, a11, a22];
    }
    let q = (a00 + a11 + a22) / 3.0;
    let p2 = (a00 - q).powi(2) + (a11 - q).powi(2) + (a22 - q).powi(2) + 2.0 * p1;
    let p = (p2 / 6.0).sqrt();
    let (b00, b11, b22) = ((a00 - q) / p, (a11 - q) / p, (a22 - q) / p);
    let (b01, b02, b12) = (a01 / p, a02 / p, a12 / p);
    let det = b00 * (b11 * b22 - b12 * b12) - b01 * (b01 * b22 - b12 * b02)
        + b02 * (b01 * b12 - b11 * b02);
    let r = (0.5 * det).clamp(-1.0, 1.0);
    let phi = r.acos() / 3.0;
    let hi = q + 2.0 * p * phi.cos();
    let lo = q + 2.0 * p * (phi + 2.0 * std::f64::consts::FRAC_PI_3).cos();
    vec![lo, 3.0 * q - hi - lo, hi]
}

const JACOBI_OFF_TARGET: f64 = 1e-12;
const JACOBI_MAX_SWEEPS: usize = 100;

fn jacobi_eigenvalues(n: usize, a: &[f64]) -> Vec<f64> {
    let mut m = a.to_vec();
    let scale = m.iter().map(|x| x * x).sum::<f64>().sqrt().max(1.0);
    for _ in 0..JACOBI_MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .map(|(i, j)| m[i * n + j].powi(2))
            .sum::<f64>()
            .sqrt();
        if off <= JACOBI_OFF_TARGET * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (m[q * n + q] - m[p * n + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (m[k * n + p], m[k * n + q]);
                    m[k * n + p] = c * akp - s * akq;
                    m[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (m[p * n + k], m[q * n + k]);
                    m[p * n + k] = c * apk - s * aqk;
                    m[q * n + k] = s * apk + c * aqk;
                }
            }
        }
    }
    (0..n).map(|i| m[i * n + i]).collect()
}

/// Matrix permanent via Ryser's formula with Gray-code subset order,
/// `O(2^n n)` operations.
pub fn permanent(m: &ComplexMatrix) -> Result<C64> {
    if !m.is_square() {
        return Err(Error::NotSquare {
            rows: m.rows(),
            cols: m.cols(),
        });
    }
    let n = m.rows();
    if n == 0 {
        return Ok(ONE);
    }
    assert!(n < 64, "permanent of a {n}x{n} matrix is out of reach");
    let mut row_sums = vec![ZERO; n];
    let mut total = ZERO;
    let mut gray: u64 = 0;
    for k in 1u64..(1u64 << n) {
        let col = k.trailing_zeros() as usize;
        gray ^= 1 << col;
        if gray & (1 << col) != 0 {
            for (i, s) in row_sums.iter_mut().enumerate() {
                *s += m[(i, col)];
            }
        } else {
            for (i, s) in row_sums.iter_mut().enumerate() {
                *s -= m[(i, col)];
            }
        }
        let prod: C64 = row_sums.iter().product();
        if (n - gray.count_ones() as usize).is_multiple_of(2) {
            total += prod;
        } else {
            total -= prod;
        }
    }
    Ok(total)
}

/// Orthonormal vectors spanning the same space as the inputs, each a real
/// linear combination of the inputs.
#[derive(Debug, Clone)]
pub struct RealSpan {
    pub vectors: Vec<ComplexVector>,
    /// `coefficients[k][i]`: weight of input `i` in output `k`.
    pub coefficients: Vec<Vec<f64>>,
    /// Input index each output was seeded from.
    pub sources: Vec<usize>,
}

/// Modified Gram-Schmidt with two re-orthogonalization passes and real
/// projection coefficients. Inputs whose residual norm drops below `tol`
/// are discarded.
pub fn gram_schmidt_real_span(vectors: &[ComplexVector], tol: f64) -> Result<RealSpan> {
    let n = vectors.first().map_or(0, ComplexVector::len);
    if let Some(bad) = vectors.iter().find(|v| v.len() != n) {
        return Err(Error::DimensionMismatch {
            what: "Gram-Schmidt input",
            expected: n,
            found: bad.len(),
        });
    }
    let mut max_imag = 0.0_f64;
    for (i, a) in vectors.iter().enumerate() {
        for b in &vectors[i + 1..] {
            max_imag = max_imag.max(a.dot(b).im.abs());
        }
    }
    if max_imag > tol {
        return Err(Error::ComplexGram { max_imag });
    }

    let count = vectors.len();
    let mut span = RealSpan {
        vectors: Vec::new(),
        coefficients: Vec::new(),
        sources: Vec::new(),
    };
    for (k, x) in vectors.iter().enumerate() {
        let mut v = x.clone();
        let mut beta = vec![0.0; count];
        beta[k] = 1.0;
        for _pass in 0..2 {
            for (e, b) in span.vectors.iter().zip(&span.coefficients) {
                let c = e.dot(&v).re;
                v.axpy(C64::new(-c, 0.0), e);
                for (bi, ei) in beta.iter_mut().zip(b) {
                    *bi -= c * ei;
                }
            }
        }
        let norm = v.norm();
        if norm < tol {
            continue;
        }
        span.vectors.push(v.scaled(C64::new(1.0 / norm, 0.0)));
        span.coefficients.push(beta.iter().map(|b| b / norm).collect());
        span.sources.push(k);
    }
    Ok(span)
}

/// Extends an orthonormal family to a full orthonormal basis of `C^dim`
/// by orthogonalizing canonical basis vectors in index order.
pub fn orthonormal_completion(existing: &[ComplexVector], dim: usize) -> Vec<ComplexVector> {
    const ACCEPT: f64 = 1e-6;
    let mut accepted: Vec<ComplexVector> = Vec::new();
    for k in 0..dim {
        if existing.len() + accepted.len() >= dim {
            break;
        }
        let mut v = ComplexVector::basis(dim, k);
        for _pass in 0..2 {
            for e in existing.iter().chain(&accepted) {
                let c = e.dot(&v);
                v.axpy(-c, e);
            }
        }
        let norm = v.norm();
        if norm > ACCEPT {
            accepted.push(v.scaled(C64::new(1.0 / norm, 0.0)));
        }
    }
    accepted
}
