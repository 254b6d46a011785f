//! Dense quaternion matrices.
//!
//! [`QMatrix`] is the computational substrate for every tensor operation:
//! tensors are matricized, multiplied, inverted here, and reshaped back.

mod adjoint;
mod pinv;
mod svd;

pub use adjoint::{from_complex_adjoint, to_complex_adjoint, ComplexAdjoint};
pub(crate) use pinv::pinv_detail;
pub use pinv::{mat_pinv, mat_pinv_with_floor, penrose_check, PenroseResiduals, DEFAULT_RANK_TOL};
pub use svd::{jacobi_svd, ComplexSvd};

use std::ops::Range;

use crate::error::{Error, Result};
use crate::quaternion::Quaternion;

/// Row-major dense quaternion matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct QMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Quaternion>,
}

impl QMatrix {
    pub fn from_vec(rows: usize, cols: usize, data: Vec<Quaternion>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::ShapeMismatch(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(QMatrix { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Quaternion) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        QMatrix { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        QMatrix { rows, cols, data: vec![Quaternion::ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        QMatrix::from_fn(n, n, |i, j| if i == j { Quaternion::ONE } else { Quaternion::ZERO })
    }

    pub fn diagonal(values: &[Quaternion]) -> Self {
        let n = values.len();
        QMatrix::from_fn(n, n, |i, j| if i == j { values[i] } else { Quaternion::ZERO })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn data(&self) -> &[Quaternion] {
        &self.data
    }

    pub fn into_data(self) -> Vec<Quaternion> {
        self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Quaternion {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Quaternion) {
        self.data[i * self.cols + j] = v;
    }

    /// Matrix product with factor order `a[i,k] * b[k,j]`.
    pub fn matmul(&self, other: &QMatrix) -> Result<QMatrix> {
        if self.cols != other.rows {
            return Err(Error::ShapeMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(self.mul_unchecked(other))
    }

    fn mul_unchecked(&self, other: &QMatrix) -> QMatrix {
        let (n, m, p) = (self.rows, self.cols, other.cols);
        let mut out = vec![Quaternion::ZERO; n * p];
        for i in 0..n {
            let row = &mut out[i * p..(i + 1) * p];
            for k in 0..m {
                let a = self.data[i * m + k];
                if a.is_zero() {
                    continue;
                }
                let brow = &other.data[k * p..(k + 1) * p];
                for (o, &b) in row.iter_mut().zip(brow) {
                    *o += a * b;
                }
            }
        }
        QMatrix { rows: n, cols: p, data: out }
    }

    /// `A*`: `(A*)[j,i] = conj(A[i,j])`.
    pub fn conj_transpose(&self) -> QMatrix {
        QMatrix::from_fn(self.cols, self.rows, |i, j| self.get(j, i).conj())
    }

    /// Plain transpose without conjugation.
    pub fn transpose(&self) -> QMatrix {
        QMatrix::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    pub fn add(&self, other: &QMatrix) -> Result<QMatrix> {
        self.zip_with(other, "add", |a, b| a + b)
    }

    pub fn sub(&self, other: &QMatrix) -> Result<QMatrix> {
        self.zip_with(other, "subtract", |a, b| a - b)
    }

    fn zip_with(&self, other: &QMatrix, what: &str, f: impl Fn(Quaternion, Quaternion) -> Quaternion) -> Result<QMatrix> {
        if self.shape() != other.shape() {
            return Err(Error::ShapeMismatch(format!(
                "cannot {what} {}x{} and {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect();
        Ok(QMatrix { rows: self.rows, cols: self.cols, data })
    }

    pub fn scale(&self, s: f64) -> QMatrix {
        QMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|q| q.scale(s)).collect() }
    }

    pub fn neg(&self) -> QMatrix {
        self.scale(-1.0)
    }

    /// Left scalar multiple `q * A`.
    pub fn left_scale(&self, q: Quaternion) -> QMatrix {
        QMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&a| q * a).collect() }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|q| q.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest coefficient-wise absolute difference.
    pub fn max_abs_diff(&self, other: &QMatrix) -> f64 {
        assert_eq!(self.shape(), other.shape(), "max_abs_diff on mismatched shapes");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| {
                let d = *a - *b;
                d.w.abs().max(d.x.abs()).max(d.y.abs()).max(d.z.abs())
            })
            .fold(0.0, f64::max)
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|q| q.is_zero())
    }

    pub fn trace(&self) -> Result<Quaternion> {
        if self.rows != self.cols {
            return Err(Error::ShapeMismatch(format!("trace of non-square {}x{} matrix", self.rows, self.cols)));
        }
        Ok((0..self.rows).fold(Quaternion::ZERO, |acc, i| acc + self.get(i, i)))
    }

    pub fn row_block(&self, range: Range<usize>) -> QMatrix {
        assert!(range.end <= self.rows);
        let data = self.data[range.start * self.cols..range.end * self.cols].to_vec();
        QMatrix { rows: range.len(), cols: self.cols, data }
    }

    pub fn col_block(&self, range: Range<usize>) -> QMatrix {
        assert!(range.end <= self.cols);
        QMatrix::from_fn(self.rows, range.len(), |i, j| self.get(i, range.start + j))
    }

    /// `[self other]`.
    pub fn hstack(&self, other: &QMatrix) -> Result<QMatrix> {
        if self.rows != other.rows {
            return Err(Error::ShapeMismatch(format!(
                "horizontal concatenation needs equal rows, got {} and {}",
                self.rows, other.rows
            )));
        }
        let c = self.cols;
        Ok(QMatrix::from_fn(self.rows, c + other.cols, |i, j| {
            if j < c {
                self.get(i, j)
            } else {
                other.get(i, j - c)
            }
        }))
    }

    /// `[self; other]`.
    pub fn vstack(&self, other: &QMatrix) -> Result<QMatrix> {
        if self.cols != other.cols {
            return Err(Error::ShapeMismatch(format!(
                "vertical concatenation needs equal columns, got {} and {}",
                self.cols, other.cols
            )));
        }
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        Ok(QMatrix { rows: self.rows + other.rows, cols: self.cols, data })
    }
}

/// Free-function form of [`QMatrix::matmul`].
pub fn mat_mul(a: &QMatrix, b: &QMatrix) -> Result<QMatrix> {
    a.matmul(b)
}

pub fn conj_transpose(a: &QMatrix) -> QMatrix {
    a.conj_transpose()
}
