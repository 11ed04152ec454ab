//! Dense real linear algebra.

mod eigen;
mod expm;
mod ode;
mod sparse;

pub use eigen::{sym_eigen, SymEigen};
pub use expm::expm;
pub use ode::{integrate_linear, integrate_linear_strided, LinearOperator, Trajectory};
pub use sparse::CsrMatrix;

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Index, IndexMut};

use crate::{Error, Result};

/// Dense row-major real matrix with at least one row and one column.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

/// Column vector with at least one entry.
#[derive(Debug, Clone, PartialEq)]
pub struct Vector(Vec<f64>);

impl Matrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Empty);
        }
        if data.len() != rows * cols {
            return Err(Error::Dimension {
                op: "Matrix::new",
                detail: format!(
                    "{rows}x{cols} needs {} entries, got {}",
                    rows * cols,
                    data.len()
                ),
            });
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from row slices; all rows must have equal length.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.as_ref().len());
        let mut data = Vec::with_capacity(r * c);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != c {
                return Err(Error::Dimension {
                    op: "Matrix::from_rows",
                    detail: format!("row {i} has {} entries, expected {c}", row.len()),
                });
            }
            data.extend_from_slice(row);
        }
        Self::new(r, c, data)
    }

    /// # Panics
    /// Panics if either dimension is zero.
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

    pub fn from_diag(diag: &[f64]) -> Result<Self> {
        if diag.is_empty() {
            return Err(Error::Empty);
        }
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        Ok(m)
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

    #[inline]
    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vector {
        Vector((0..self.rows).map(|i| self[(i, j)]).collect())
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
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

    /// Elementwise absolute value `|M|`.
    pub fn abs(&self) -> Self {
        self.map(libm::fabs)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&x| f(x)).collect(),
        }
    }

    pub fn scale(&self, k: f64) -> Self {
        self.map(|x| k * x)
    }

    pub fn add(&self, other: &Matrix) -> Result<Self> {
        self.zip_with(other, "add", |a, b| a + b)
    }

    pub fn sub(&self, other: &Matrix) -> Result<Self> {
        self.zip_with(other, "sub", |a, b| a - b)
    }

    fn zip_with(
        &self,
        other: &Matrix,
        op: &'static str,
        f: impl Fn(f64, f64) -> f64,
    ) -> Result<Self> {
        if self.shape() != other.shape() {
            return Err(shape_error(op, self.shape(), other.shape()));
        }
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| f(a, b))
            .collect();
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }

    /// `self + c·I`.
    pub fn shift_diagonal(&self, c: f64) -> Result<Self> {
        if !self.is_square() {
            return Err(shape_error("shift_diagonal", self.shape(), self.shape()));
        }
        let mut m = self.clone();
        for i in 0..self.rows {
            m[(i, i)] += c;
        }
        Ok(m)
    }

    pub fn matmul(&self, other: &Matrix) -> Result<Self> {
        if self.cols != other.rows {
            return Err(shape_error("matmul", self.shape(), other.shape()));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                let src = other.row(k);
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (d, &b) in dst.iter_mut().zip(src) {
                    *d += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn matvec(&self, x: &[f64]) -> Result<Vector> {
        if x.len() != self.cols {
            return Err(shape_error("matvec", self.shape(), (x.len(), 1)));
        }
        let mut y = vec![0.0; self.rows];
        self.apply_into(x, &mut y);
        Ok(Vector(y))
    }

    /// Largest absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (0..self.rows)
            .map(|i| self.row(i).iter().map(|x| libm::fabs(*x)).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Largest absolute column sum.
    pub fn norm_1(&self) -> f64 {
        (0..self.cols)
            .map(|j| {
                (0..self.rows)
                    .map(|i| libm::fabs(self[(i, j)]))
                    .sum::<f64>()
            })
            .fold(0.0, f64::max)
    }

    pub fn norm_frobenius(&self) -> f64 {
        libm::sqrt(self.data.iter().map(|x| x * x).sum())
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|x| libm::fabs(*x)).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    /// True iff every off-diagonal entry is `≥ −tol`.
    pub fn is_metzler(&self, tol: f64) -> Result<bool> {
        Ok(self.first_negative_off_diagonal(tol)?.is_none())
    }

    /// Position of the first off-diagonal entry below `−tol`, in row-major order.
    pub fn first_negative_off_diagonal(&self, tol: f64) -> Result<Option<(usize, usize)>> {
        if !self.is_square() {
            return Err(Error::Dimension {
                op: "is_metzler",
                detail: format!("expected a square matrix, got {}x{}", self.rows, self.cols),
            });
        }
        for i in 0..self.rows {
            for j in 0..self.cols {
                if i != j && self[(i, j)] < -tol {
                    return Ok(Some((i, j)));
                }
            }
        }
        Ok(None)
    }

    /// True iff every entry is `≥ −tol`. The zero matrix counts as nonnegative.
    pub fn is_nonnegative(&self, tol: f64) -> bool {
        self.first_negative(tol).is_none()
    }

    /// Position of the first entry below `−tol`, in row-major order.
    pub fn first_negative(&self, tol: f64) -> Option<(usize, usize)> {
        self.data
            .iter()
            .position(|&x| x < -tol)
            .map(|k| (k / self.cols, k % self.cols))
    }

    /// Kronecker product; block `(i, j)` of the result is `self[i, j] · other`.
    pub fn kron(&self, other: &Matrix) -> Matrix {
        let (p, q) = other.shape();
        let mut out = Matrix::zeros(self.rows * p, self.cols * q);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self[(i, j)];
                if a == 0.0 {
                    continue;
                }
                for k in 0..p {
                    for l in 0..q {
                        out[(i * p + k, j * q + l)] = a * other[(k, l)];
                    }
                }
            }
        }
        out
    }

    /// Largest `|m_ij − m_ji|` and its position; `None` when not square.
    pub(crate) fn asymmetry(&self) -> Option<(usize, usize, f64)> {
        if !self.is_square() {
            return None;
        }
        let mut worst = (0, 0, 0.0);
        for i in 0..self.rows {
            for j in i + 1..self.cols {
                let d = libm::fabs(self[(i, j)] - self[(j, i)]);
                if d > worst.2 {
                    worst = (i, j, d);
                }
            }
        }
        Some(worst)
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

pub(crate) fn shape_error(op: &'static str, a: (usize, usize), b: (usize, usize)) -> Error {
    Error::Dimension {
        op,
        detail: format!("{}x{} vs {}x{}", a.0, a.1, b.0, b.1),
    }
}

/// `X ⊗ Y`.
pub fn kron(x: &Matrix, y: &Matrix) -> Matrix {
    x.kron(y)
}

impl Vector {
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::Empty);
        }
        Ok(Self(entries))
    }

    /// # Panics
    /// Panics if `n == 0`.
    pub fn zeros(n: usize) -> Self {
        assert!(n > 0, "vector dimension must be positive");
        Self(vec![0.0; n])
    }

    /// # Panics
    /// Panics if `n == 0`.
    pub fn ones(n: usize) -> Self {
        assert!(n > 0, "vector dimension must be positive");
        Self(vec![1.0; n])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn dot(&self, other: &[f64]) -> f64 {
        self.0.iter().zip(other).map(|(a, b)| a * b).sum()
    }

    pub fn norm_inf(&self) -> f64 {
        self.0.iter().map(|x| libm::fabs(*x)).fold(0.0, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.0.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// The `dim × 1` matrix with the same entries.
    pub fn to_matrix(&self) -> Matrix {
        Matrix {
            rows: self.0.len(),
            cols: 1,
            data: self.0.clone(),
        }
    }
}

impl core::ops::Deref for Vector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl core::ops::DerefMut for Vector {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }
}

impl TryFrom<Vec<f64>> for Vector {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        Vector::new(v)
    }
}

impl TryFrom<Matrix> for Vector {
    type Error = Error;

    fn try_from(m: Matrix) -> Result<Self> {
        if m.cols != 1 {
            return Err(shape_error("Vector::try_from", m.shape(), (m.rows, 1)));
        }
        Ok(Vector(m.data))
    }
}
