//! Complex adjoint representation of quaternion matrices.
//!
//! Writing `A = A₁ + A₂ j` with complex `A₁, A₂` (j multiplying on the right),
//! the adjoint is the 2m×2n complex block matrix
//!
//! ```text
//! χ(A) = [  A₁        A₂      ]
//!        [ -conj(A₂)  conj(A₁) ]
//! ```
//!
//! χ is an injective ring homomorphism with `χ(A*) = χ(A)ᴴ`.

use num_complex::Complex64;

use super::QMatrix;
use crate::error::{Error, Result};
use crate::quaternion::Quaternion;

/// Row-major dense complex matrix carrying the adjoint block layout.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexAdjoint {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexAdjoint {
    pub fn from_vec(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::ShapeMismatch(format!(
                "{rows}x{cols} complex matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(ComplexAdjoint { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        ComplexAdjoint { rows, cols, data: vec![Complex64::new(0.0, 0.0); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = ComplexAdjoint::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Complex64::new(1.0, 0.0));
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn matmul(&self, other: &ComplexAdjoint) -> Result<ComplexAdjoint> {
        if self.cols != other.rows {
            return Err(Error::ShapeMismatch(format!(
                "cannot multiply {}x{} by {}x{} complex matrices",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let (n, m, p) = (self.rows, self.cols, other.cols);
        let mut out = ComplexAdjoint::zeros(n, p);
        for i in 0..n {
            for k in 0..m {
                let a = self.data[i * m + k];
                for j in 0..p {
                    out.data[i * p + j] += a * other.data[k * p + j];
                }
            }
        }
        Ok(out)
    }

    /// Hermitian transpose.
    pub fn adjoint(&self) -> ComplexAdjoint {
        let mut out = ComplexAdjoint::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(j, i, self.get(i, j).conj());
            }
        }
        out
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs_diff(&self, other: &ComplexAdjoint) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| {
                let d = a - b;
                d.re.abs().max(d.im.abs())
            })
            .fold(0.0, f64::max)
    }

    /// Frobenius norm of the departure from the adjoint block symmetry.
    pub fn structure_deviation(&self) -> f64 {
        if self.rows % 2 != 0 || self.cols % 2 != 0 {
            return f64::INFINITY;
        }
        let (m, n) = (self.rows / 2, self.cols / 2);
        let mut acc = 0.0;
        for i in 0..m {
            for j in 0..n {
                acc += (self.get(m + i, n + j) - self.get(i, j).conj()).norm_sqr();
                acc += (self.get(m + i, j) + self.get(i, n + j).conj()).norm_sqr();
            }
        }
        acc.sqrt()
    }
}

/// `χ(A)`.
pub fn to_complex_adjoint(a: &QMatrix) -> ComplexAdjoint {
    let (m, n) = a.shape();
    let mut out = ComplexAdjoint::zeros(2 * m, 2 * n);
    for i in 0..m {
        for j in 0..n {
            let q = a.get(i, j);
            let a1 = Complex64::new(q.w, q.x);
            let a2 = Complex64::new(q.y, q.z);
            out.set(i, j, a1);
            out.set(i, n + j, a2);
            out.set(m + i, j, -a2.conj());
            out.set(m + i, n + j, a1.conj());
        }
    }
    out
}

/// Left inverse of [`to_complex_adjoint`], checking the block symmetry to
/// `1e-10·‖c‖_F`.
pub fn from_complex_adjoint(c: &ComplexAdjoint) -> Result<QMatrix> {
    from_complex_adjoint_tol(c, 1e-10)
}

/// Extraction with a caller-chosen relative symmetry tolerance. The two
/// redundant copies of each block are averaged.
pub(crate) fn from_complex_adjoint_tol(c: &ComplexAdjoint, rel_tol: f64) -> Result<QMatrix> {
    if c.rows % 2 != 0 || c.cols % 2 != 0 {
        return Err(Error::ShapeMismatch(format!(
            "complex adjoint must have even dimensions, got {}x{}",
            c.rows, c.cols
        )));
    }
    let deviation = c.structure_deviation();
    let allowed = rel_tol * c.frobenius_norm();
    if deviation > allowed {
        return Err(Error::StructureViolation { deviation, allowed });
    }
    let (m, n) = (c.rows / 2, c.cols / 2);
    Ok(QMatrix::from_fn(m, n, |i, j| {
        let a1 = (c.get(i, j) + c.get(m + i, n + j).conj()) * 0.5;
        let a2 = (c.get(i, n + j) - c.get(m + i, j).conj()) * 0.5;
        Quaternion::new(a1.re, a1.im, a2.re, a2.im)
    }))
}
