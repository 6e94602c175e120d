//! Dense complex matrices, antilinear operators and residuals.
//!
//! Every operator in the crate is a small dense matrix (at most 32×32), so
//! products are plain triple loops and spectral quantities go through
//! `nalgebra`.

use std::ops::{Add, Index, Mul, Neg, Sub};

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
pub use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// The imaginary unit.
pub const IM: C64 = C64::new(0.0, 1.0);

pub fn c64(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Row-major dense complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct CMat {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl CMat {
    pub fn new(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if rows == 0 || cols == 0 || data.len() != rows * cols {
            return Err(Error::Shape(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { rows, cols, data })
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

    /// Builds a matrix from nested rows; panics on ragged input.
    pub fn from_rows<const N: usize>(rows: &[[C64; N]]) -> Self {
        Self::from_fn(rows.len(), N, |i, j| rows[i][j])
    }

    pub fn from_real(rows: usize, cols: usize, data: &[f64]) -> Result<Self> {
        Self::new(rows, cols, data.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![C64::new(0.0, 0.0); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| if i == j { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) })
    }

    pub fn diag(entries: &[C64]) -> Self {
        let n = entries.len();
        Self::from_fn(n, n, |i, j| if i == j { entries[i] } else { C64::new(0.0, 0.0) })
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

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn conj(&self) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|z| z.conj()).collect() }
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn scale(&self, z: C64) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|w| w * z).collect() }
    }

    pub fn kron(&self, other: &CMat) -> Self {
        let (r2, c2) = (other.rows, other.cols);
        Self::from_fn(self.rows * r2, self.cols * c2, |i, j| {
            self[(i / r2, j / c2)] * other[(i % r2, j % c2)]
        })
    }

    pub fn commutator(&self, other: &CMat) -> Self {
        &(self * other) - &(other * self)
    }

    pub fn anticommutator(&self, other: &CMat) -> Self {
        &(self * other) + &(other * self)
    }

    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(v.len(), self.cols, "vector length does not match matrix");
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self[(i, j)] * v[j]).sum())
            .collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest singular value. Square matrices only.
    pub fn op_norm(&self) -> Result<f64> {
        if !self.is_square() {
            return Err(Error::NotSquare { rows: self.rows, cols: self.cols });
        }
        Ok(self.spectral_norm())
    }

    /// Operator norm of `self - other`.
    pub fn dist(&self, other: &CMat) -> f64 {
        (self - other).spectral_norm()
    }

    pub fn inverse(&self) -> Result<CMat> {
        if !self.is_square() {
            return Err(Error::NotSquare { rows: self.rows, cols: self.cols });
        }
        let inv = self.to_nalgebra().try_inverse().ok_or(Error::Singular)?;
        let out = Self::from_nalgebra(&inv);
        if out.data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Singular);
        }
        Ok(out)
    }

    pub fn to_nalgebra(&self) -> DMatrix<C64> {
        DMatrix::from_row_slice(self.rows, self.cols, &self.data)
    }

    pub fn from_nalgebra(m: &DMatrix<C64>) -> Self {
        Self::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
    }

    fn spectral_norm(&self) -> f64 {
        if self.data.iter().all(|z| *z == C64::new(0.0, 0.0)) {
            return 0.0;
        }
        self.to_nalgebra().singular_values().max()
    }
}

impl Index<(usize, usize)> for CMat {
    type Output = C64;

    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.cols + j]
    }
}

impl Mul for &CMat {
    type Output = CMat;

    fn mul(self, rhs: &CMat) -> CMat {
        assert_eq!(self.cols, rhs.rows, "matrix product shape mismatch");
        let mut out = CMat::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                let row = &rhs.data[k * rhs.cols..(k + 1) * rhs.cols];
                let dst = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
                for (d, b) in dst.iter_mut().zip(row) {
                    *d += a * b;
                }
            }
        }
        out
    }
}

impl Mul for CMat {
    type Output = CMat;

    fn mul(self, rhs: CMat) -> CMat {
        &self * &rhs
    }
}

impl Mul<C64> for &CMat {
    type Output = CMat;

    fn mul(self, z: C64) -> CMat {
        self.scale(z)
    }
}

impl Mul<f64> for &CMat {
    type Output = CMat;

    fn mul(self, x: f64) -> CMat {
        self.scale(C64::new(x, 0.0))
    }
}

fn zip_with(a: &CMat, b: &CMat, f: impl Fn(C64, C64) -> C64) -> CMat {
    assert!(a.rows == b.rows && a.cols == b.cols, "elementwise shape mismatch");
    CMat {
        rows: a.rows,
        cols: a.cols,
        data: a.data.iter().zip(&b.data).map(|(x, y)| f(*x, *y)).collect(),
    }
}

impl Add for &CMat {
    type Output = CMat;

    fn add(self, rhs: &CMat) -> CMat {
        zip_with(self, rhs, |x, y| x + y)
    }
}

impl Add for CMat {
    type Output = CMat;

    fn add(self, rhs: CMat) -> CMat {
        &self + &rhs
    }
}

impl Sub for &CMat {
    type Output = CMat;

    fn sub(self, rhs: &CMat) -> CMat {
        zip_with(self, rhs, |x, y| x - y)
    }
}

impl Sub for CMat {
    type Output = CMat;

    fn sub(self, rhs: CMat) -> CMat {
        &self - &rhs
    }
}

impl Neg for &CMat {
    type Output = CMat;

    fn neg(self) -> CMat {
        self.scale(C64::new(-1.0, 0.0))
    }
}

impl Neg for CMat {
    type Output = CMat;

    fn neg(self) -> CMat {
        -&self
    }
}

/// Standard inner product, antilinear in the first slot.
pub fn inner(a: &[C64], b: &[C64]) -> C64 {
    assert_eq!(a.len(), b.len(), "inner product length mismatch");
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn vec_norm(a: &[C64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn kron_vec(a: &[C64], b: &[C64]) -> Vec<C64> {
    a.iter().flat_map(|x| b.iter().map(move |y| x * y)).collect()
}

/// `count` standard-normal vectors in `R^dim`, deterministic in `seed`.
pub fn gaussian_vectors(dim: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| (0..dim).map(|_| rng.sample(StandardNormal)).collect()).collect()
}

/// `count` complex vectors in `C^dim` with standard-normal parts.
pub fn gaussian_states(dim: usize, count: usize, seed: u64) -> Vec<Vec<C64>> {
    gaussian_vectors(2 * dim, count, seed)
        .into_iter()
        .map(|v| v.chunks(2).map(|p| c64(p[0], p[1])).collect())
        .collect()
}

/// Antilinear operator `ψ ↦ mat · conj(ψ)`.
#[derive(Clone, Debug, PartialEq)]
pub struct AntilinearOp {
    mat: CMat,
}

impl AntilinearOp {
    pub fn new(mat: CMat) -> Result<Self> {
        if !mat.is_square() {
            return Err(Error::NotSquare { rows: mat.rows(), cols: mat.cols() });
        }
        Ok(Self { mat })
    }

    /// Plain complex conjugation on `C^n`.
    pub fn conjugation(n: usize) -> Self {
        Self { mat: CMat::identity(n) }
    }

    pub fn mat(&self) -> &CMat {
        &self.mat
    }

    pub fn dim(&self) -> usize {
        self.mat.rows()
    }

    pub fn apply(&self, psi: &[C64]) -> Vec<C64> {
        let conj: Vec<C64> = psi.iter().map(|z| z.conj()).collect();
        self.mat.apply(&conj)
    }

    /// `self ∘ other`, a linear map with matrix `A · conj(B)`.
    pub fn compose(&self, other: &AntilinearOp) -> CMat {
        &self.mat * &other.mat.conj()
    }

    /// `self ∘ L` for a linear `L`.
    pub fn then_after(&self, l: &CMat) -> AntilinearOp {
        AntilinearOp { mat: &self.mat * &l.conj() }
    }

    /// `L ∘ self` for a linear `L`.
    pub fn premul(&self, l: &CMat) -> AntilinearOp {
        AntilinearOp { mat: l * &self.mat }
    }

    pub fn square(&self) -> CMat {
        self.compose(self)
    }

    pub fn inverse(&self) -> Result<AntilinearOp> {
        Ok(AntilinearOp { mat: self.mat.inverse()?.conj() })
    }

    pub fn kron(&self, other: &AntilinearOp) -> AntilinearOp {
        AntilinearOp { mat: self.mat.kron(&other.mat) }
    }

    /// The linear operator `J A J⁻¹`.
    pub fn conjugate(&self, a: &CMat) -> Result<CMat> {
        antilinear_conjugate(self, a)
    }
}

pub fn antilinear_conjugate(j: &AntilinearOp, a: &CMat) -> Result<CMat> {
    if a.rows() != j.dim() || a.cols() != j.dim() {
        return Err(Error::Shape(format!(
            "{}x{} operator under a {}-dimensional antilinear map",
            a.rows(),
            a.cols(),
            j.dim()
        )));
    }
    Ok(&(&j.mat * &a.conj()) * &j.mat.inverse()?)
}

/// A measured norm compared against a tolerance.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Residual {
    pub value: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl Residual {
    pub fn new(value: f64, tolerance: f64) -> Self {
        Self { value, tolerance, passed: value <= tolerance }
    }

    /// Residual `‖a − b‖` in operator norm.
    pub fn between(a: &CMat, b: &CMat, tolerance: f64) -> Self {
        Self::new(a.dist(b), tolerance)
    }

    /// Worst of several residuals under a common tolerance.
    pub fn worst(values: impl IntoIterator<Item = f64>, tolerance: f64) -> Self {
        let v = values
            .into_iter()
            .fold(0.0, |acc: f64, x| if acc.is_nan() || x.is_nan() { f64::NAN } else { acc.max(x) });
        Self::new(v, tolerance)
    }
}

/// Measures `s` in `lhs = s · rhs` with `s = ±1`.
///
/// A pair that satisfies both relations (both sides zero) reports `+1`.
pub fn measure_sign(what: &str, lhs: &CMat, rhs: &CMat, tol: f64) -> Result<i8> {
    let plus = lhs.dist(rhs);
    if plus <= tol {
        return Ok(1);
    }
    let minus = (lhs + rhs).op_norm()?;
    if minus <= tol {
        return Ok(-1);
    }
    Err(Error::NotASign { what: what.to_string(), plus, minus })
}

/// Pauli matrices σ1, σ2, σ3.
pub fn pauli(k: usize) -> CMat {
    let (o, z, i) = (c64(1.0, 0.0), c64(0.0, 0.0), IM);
    match k {
        1 => CMat::from_rows(&[[z, o], [o, z]]),
        2 => CMat::from_rows(&[[z, -i], [i, z]]),
        3 => CMat::from_rows(&[[o, z], [z, -o]]),
        _ => panic!("Pauli index must be 1, 2 or 3"),
    }
}
