//! Tensor Moore–Penrose inverse, the projectors `L_A`, `R_A`, and the inverse
//! of nonsingular square tensors.

use crate::error::{Error, Result};
use crate::matrix::{mat_pinv, penrose_check, PenroseResiduals, QMatrix};
use crate::tensor::{dematricize, einstein_product, identity_tensor, QTensor, TensorShape};

/// `A†`, computed on the matricized form.
pub fn tensor_pinv(a: &QTensor, tol_rel: f64) -> Result<QTensor> {
    let p = mat_pinv(&a.matricize(), tol_rel)?;
    dematricize(&p, &a.shape().swapped())
}

/// Residuals of the four Penrose equations for a candidate `X = A†`.
pub fn tensor_penrose(a: &QTensor, x: &QTensor) -> Result<PenroseResiduals> {
    if x.row_modes() != a.col_modes() || x.col_modes() != a.row_modes() {
        return Err(Error::ShapeMismatch(format!("candidate inverse of a {} tensor has shape {}", a.shape(), x.shape())));
    }
    penrose_check(&a.matricize(), &x.matricize())
}

/// `L_A = I − A†⋆A` over A's column modes.
pub fn projector_l(a: &QTensor, tol_rel: f64) -> Result<QTensor> {
    let m = a.matricize();
    let p = mat_pinv(&m, tol_rel)?;
    let l = QMatrix::identity(m.cols()).sub(&p.matmul(&m)?)?;
    dematricize(&l, &TensorShape::square(a.col_modes())?)
}

/// `R_A = I − A⋆A†` over A's row modes.
pub fn projector_r(a: &QTensor, tol_rel: f64) -> Result<QTensor> {
    let m = a.matricize();
    let p = mat_pinv(&m, tol_rel)?;
    let r = QMatrix::identity(m.rows()).sub(&m.matmul(&p)?)?;
    dematricize(&r, &TensorShape::square(a.row_modes())?)
}

/// `A⁻¹` for a square tensor, or [`Error::Singular`] when `‖A⋆A† − I‖_F ≥ 1e-8`.
pub fn tensor_inverse(a: &QTensor, tol_rel: f64) -> Result<QTensor> {
    if a.row_modes() != a.col_modes() {
        return Err(Error::ShapeMismatch(format!("inverse needs a square tensor, got {}", a.shape())));
    }
    let p = tensor_pinv(a, tol_rel)?;
    let id = identity_tensor(a.row_modes())?;
    let dev = einstein_product(a, &p)?.sub(&id)?.frobenius_norm();
    if dev >= 1e-8 {
        return Err(Error::Singular(dev));
    }
    Ok(p)
}
