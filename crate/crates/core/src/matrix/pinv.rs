//! Moore–Penrose inverse of quaternion matrices through the complex adjoint.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::adjoint::from_complex_adjoint_tol;
use super::{jacobi_svd, to_complex_adjoint, ComplexAdjoint, QMatrix};
use crate::error::{Error, Result};

/// Default relative cutoff for numerical rank.
pub const DEFAULT_RANK_TOL: f64 = 1e-12;

/// `A†` with singular values `σ ≤ tol_rel·σ_max·max(2·rows, 2·cols)` treated as zero.
pub fn mat_pinv(a: &QMatrix, tol_rel: f64) -> Result<QMatrix> {
    mat_pinv_with_floor(a, tol_rel, 0.0)
}

/// Like [`mat_pinv`], but the cutoff is taken relative to `max(σ_max, floor)`.
///
/// `floor` is the nominal magnitude of the data `a` was derived from. Products
/// such as `R_A·C` that vanish in exact arithmetic come out as rounding noise
/// of size `ε·‖C‖`; measuring the cutoff against `‖C‖` instead of the noise's
/// own `σ_max` makes them rank zero.
pub fn mat_pinv_with_floor(a: &QMatrix, tol_rel: f64, floor: f64) -> Result<QMatrix> {
    Ok(pinv_detail(a, tol_rel, floor, 0.0)?.0)
}

/// Retained spectrum of a pseudoinverse.
#[derive(Debug, Clone, Copy)]
pub(crate) struct PinvSpectrum {
    pub sigma_max: f64,
    /// Smallest retained singular value, zero when nothing is retained.
    pub sigma_min: f64,
}

/// Pseudoinverse whose cutoff is also at least `abs_cutoff`.
pub(crate) fn pinv_detail(a: &QMatrix, tol_rel: f64, floor: f64, abs_cutoff: f64) -> Result<(QMatrix, PinvSpectrum)> {
    if !(tol_rel > 0.0) || !tol_rel.is_finite() {
        return Err(Error::InvalidArgument(format!("rank tolerance must be positive, got {tol_rel}")));
    }
    let (m, n) = a.shape();
    let empty = PinvSpectrum { sigma_max: 0.0, sigma_min: 0.0 };
    if m == 0 || n == 0 || a.is_zero() {
        return Ok((QMatrix::zeros(n, m), empty));
    }
    let chi = to_complex_adjoint(a);
    let svd = jacobi_svd(&chi)?;
    let sigma_max = svd.sigma[0];
    let cutoff = (tol_rel * sigma_max.max(floor) * (2 * m.max(n)) as f64).max(abs_cutoff);
    let rank = paired_rank(&svd.sigma, cutoff);
    if rank == 0 {
        return Ok((QMatrix::zeros(n, m), PinvSpectrum { sigma_max, sigma_min: 0.0 }));
    }

    // A† = Σ_k v_k u_kᴴ / σ_k over the retained triplets.
    let mut p = ComplexAdjoint::zeros(2 * n, 2 * m);
    for k in 0..rank {
        let inv = 1.0 / svd.sigma[k];
        for i in 0..2 * n {
            let vik = svd.v.get(i, k) * inv;
            if vik == Complex64::new(0.0, 0.0) {
                continue;
            }
            for j in 0..2 * m {
                let cur = p.get(i, j);
                p.set(i, j, cur + vik * svd.u.get(j, k).conj());
            }
        }
    }
    let sigma_min = svd.sigma[rank - 1];
    let kappa = sigma_max / sigma_min;
    Ok((from_complex_adjoint_tol(&p, 1e-10 * kappa.max(1.0))?, PinvSpectrum { sigma_max, sigma_min }))
}

/// Number of retained singular values, rounded so that the equal pairs produced
/// by the complex adjoint are kept or dropped together.
fn paired_rank(sigma: &[f64], cutoff: f64) -> usize {
    let mut r = 0;
    while r + 1 < sigma.len() {
        let mean = 0.5 * (sigma[r] + sigma[r + 1]);
        if mean > cutoff {
            r += 2;
        } else {
            break;
        }
    }
    r
}

/// Frobenius norms of the four Penrose residuals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PenroseResiduals {
    /// `‖AXA − A‖`
    pub axa: f64,
    /// `‖XAX − X‖`
    pub xax: f64,
    /// `‖(AX)* − AX‖`
    pub ax_hermitian: f64,
    /// `‖(XA)* − XA‖`
    pub xa_hermitian: f64,
}

impl PenroseResiduals {
    pub fn max(&self) -> f64 {
        self.axa.max(self.xax).max(self.ax_hermitian).max(self.xa_hermitian)
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.axa, self.xax, self.ax_hermitian, self.xa_hermitian]
    }
}

pub fn penrose_check(a: &QMatrix, x: &QMatrix) -> Result<PenroseResiduals> {
    if x.rows() != a.cols() || x.cols() != a.rows() {
        return Err(Error::ShapeMismatch(format!(
            "candidate inverse of a {}x{} matrix must be {}x{}, got {}x{}",
            a.rows(),
            a.cols(),
            a.cols(),
            a.rows(),
            x.rows(),
            x.cols()
        )));
    }
    let ax = a.matmul(x)?;
    let xa = x.matmul(a)?;
    Ok(PenroseResiduals {
        axa: ax.matmul(a)?.sub(a)?.frobenius_norm(),
        xax: xa.matmul(x)?.sub(x)?.frobenius_norm(),
        ax_hermitian: ax.conj_transpose().sub(&ax)?.frobenius_norm(),
        xa_hermitian: xa.conj_transpose().sub(&xa)?.frobenius_norm(),
    })
}
