//! Solvability by brute force over the real linearization.
//!
//! Every quaternion entry of every unknown contributes four real columns, one
//! per basis direction; each column is the system evaluated on that
//! direction. The verdict comes from a dense least-squares solve of the
//! resulting real system, independent of the projector conditions.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::System;
use crate::error::{Error, Result};
use crate::quaternion::Quaternion;
use crate::tensor::QTensor;

/// Largest number of real unknowns the oracle accepts.
pub const ORACLE_MAX_UNKNOWNS: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleResult {
    pub consistent: bool,
    /// `min ‖Mx − e‖₂`
    pub residual: f64,
    /// `‖e‖₂`
    pub rhs_norm: f64,
    pub real_unknowns: usize,
}

fn flatten(ts: &[QTensor]) -> Vec<f64> {
    ts.iter().flat_map(|t| t.data().iter().flat_map(|q| q.to_array())).collect()
}

/// `min ‖Mx − b‖₂` with singular values below `1e−10·σ_max` treated as zero.
///
/// The nalgebra SVD occasionally returns factors that do not reproduce the
/// matrix, so every decomposition is verified. When the SVD of `M` and of `Mᵀ`
/// both fail, the range of `M` is read off the symmetric eigendecomposition of
/// `[0 M; Mᵀ 0]`, whose eigenpairs are `±σ` with vectors `(u, ±v)/√2`.
fn least_squares_residual(mat: &DMatrix<f64>, b: &DVector<f64>) -> Result<f64> {
    let tol = 1e-10 * (1.0 + mat.norm());
    let svd_basis = |a: &DMatrix<f64>, left: bool| -> Option<(DMatrix<f64>, DVector<f64>)> {
        let svd = a.clone().try_svd(true, true, f64::EPSILON, 0)?;
        if (svd.clone().recompose().ok()? - a).norm() > tol {
            return None;
        }
        let basis = if left { svd.u? } else { svd.v_t?.transpose() };
        Some((basis, svd.singular_values))
    };
    let (u, s) = match svd_basis(mat, true).or_else(|| svd_basis(&mat.transpose(), false)) {
        Some(f) => f,
        None => range_from_eigen(mat, tol)?,
    };
    let smax = s.max();
    if smax == 0.0 {
        return Ok(b.norm());
    }
    let mut proj = DVector::zeros(b.len());
    for (k, &sk) in s.iter().enumerate() {
        if sk > 1e-10 * smax {
            let col = u.column(k);
            proj += col * col.dot(b);
        }
    }
    Ok((b - proj).norm())
}

fn range_from_eigen(mat: &DMatrix<f64>, tol: f64) -> Result<(DMatrix<f64>, DVector<f64>)> {
    let (m, n) = mat.shape();
    let mut h = DMatrix::zeros(m + n, m + n);
    h.view_mut((0, m), (m, n)).copy_from(mat);
    h.view_mut((m, 0), (n, m)).copy_from(&mat.transpose());
    let eig = h.clone().symmetric_eigen();
    if (eig.clone().recompose() - &h).norm() > tol {
        return Err(Error::InvalidArgument("oracle decomposition did not converge".into()));
    }
    let keep: Vec<usize> = (0..m + n).filter(|&k| eig.eigenvalues[k] > 0.0).collect();
    let mut u = DMatrix::zeros(m, keep.len());
    for (j, &k) in keep.iter().enumerate() {
        let top = eig.eigenvectors.view((0, k), (m, 1));
        let norm = top.norm();
        if norm > 0.0 {
            u.column_mut(j).copy_from(&(top / norm));
        }
    }
    Ok((u, DVector::from_iterator(keep.len(), keep.iter().map(|&k| eig.eigenvalues[k]))))
}

pub fn oracle_solve(system: &System) -> Result<OracleResult> {
    let n: usize = system.unknowns().values().map(|s| 4 * s.len()).sum();
    if n > ORACLE_MAX_UNKNOWNS {
        return Err(Error::SizeExceeded { actual: n, limit: ORACLE_MAX_UNKNOWNS });
    }
    let e = flatten(system.rhs());
    let m = e.len();
    let rhs_norm = e.iter().map(|v| v * v).sum::<f64>().sqrt();

    let zeros: BTreeMap<String, QTensor> =
        system.unknowns().iter().map(|(k, s)| (k.clone(), QTensor::zeros(s.clone()))).collect();
    let basis = [Quaternion::ONE, Quaternion::I, Quaternion::J, Quaternion::K];
    let mut cols = Vec::with_capacity(n * m);
    for (name, shape) in system.unknowns() {
        for idx in 0..shape.len() {
            for q in basis {
                let mut data = vec![Quaternion::ZERO; shape.len()];
                data[idx] = q;
                let mut values = zeros.clone();
                values.insert(name.clone(), QTensor::from_vec(shape.clone(), data)?);
                cols.extend(flatten(&system.apply(&values)?));
            }
        }
    }
    let residual = if n == 0 || m == 0 {
        rhs_norm
    } else {
        let mat = DMatrix::from_column_slice(m, n, &cols);
        let b = DVector::from_column_slice(&e);
        least_squares_residual(&mat, &b)?
    };
    Ok(OracleResult { consistent: residual < 1e-6 * (1.0 + rhs_norm), residual, rhs_norm, real_unknowns: n })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::{identity_tensor, TensorShape};
    use crate::toolkit::SystemKind;

    fn axb(a: QTensor, b: QTensor, c: QTensor) -> System {
        System::new(SystemKind::Axb, [("A".to_string(), a), ("B".to_string(), b)].into(), vec![c]).unwrap()
    }

    #[test]
    fn zero_map() {
        let z = QTensor::zeros(TensorShape::square(&[2]).unwrap());
        let r = oracle_solve(&axb(z.clone(), z.clone(), z.clone())).unwrap();
        assert!(r.consistent);
        assert_eq!(r.residual, 0.0);
        let c = identity_tensor(&[2]).unwrap();
        let r = oracle_solve(&axb(z.clone(), z, c)).unwrap();
        assert!(!r.consistent);
        assert_eq!(r.residual, r.rhs_norm);
        assert!((r.residual - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn identity_map() {
        let id = identity_tensor(&[2]).unwrap();
        let c = QTensor::from_fn(TensorShape::square(&[2]).unwrap(), |i, j| Quaternion::new(1.0, i[0] as f64, j[0] as f64, -2.0));
        let r = oracle_solve(&axb(id.clone(), id, c)).unwrap();
        assert!(r.consistent);
        assert!(r.residual < 1e-12);
        assert_eq!(r.real_unknowns, 16);
    }

    #[test]
    fn size_guard() {
        let a = QTensor::zeros(TensorShape::new(vec![1], vec![40]).unwrap());
        let b = QTensor::zeros(TensorShape::new(vec![40], vec![1]).unwrap());
        let c = QTensor::zeros(TensorShape::square(&[1]).unwrap());
        assert!(matches!(oracle_solve(&axb(a, b, c)), Err(Error::SizeExceeded { actual: 6400, limit: 4096 })));
    }

    #[test]
    fn svd_is_checked() {
        // The unchecked nalgebra SVD of this instance's linearization does not reproduce it.
        let spec = crate::toolkit::InstanceSpec::new(SystemKind::Axb, 3).with_conditioning(10.0);
        let g = crate::toolkit::gen_consistent(&spec).unwrap();
        let r = oracle_solve(&g.system).unwrap();
        assert!(r.consistent);
        assert!(r.residual < 1e-9 * r.rhs_norm, "{r:?}");
    }

    #[test]
    fn eigen_range_matches_svd_range() {
        // rank 2, 6x5, with a repeated singular value
        let a = DMatrix::from_fn(6, 2, |i, j| ((i * 7 + j * 3) % 5) as f64 - 2.0);
        let b = DMatrix::from_fn(2, 5, |i, j| if (i + j) % 2 == 0 { 1.0 } else { -0.5 });
        let m = &a * &b;
        let mut padded = m.clone();
        padded.column_mut(4).copy_from(&m.column(0));
        let rhs = DVector::from_fn(6, |i, _| i as f64 - 1.5);
        for mat in [m, padded] {
            let (u, s) = range_from_eigen(&mat, 1e-10).unwrap();
            let mut proj = DVector::zeros(6);
            for k in 0..s.len() {
                if s[k] > 1e-10 * s.max() {
                    proj += u.column(k) * u.column(k).dot(&rhs);
                }
            }
            let direct = (&rhs - &proj).norm();
            let svd = mat.clone().svd(true, true);
            let x = svd.solve(&rhs, 1e-10 * svd.singular_values.max()).unwrap();
            assert!((direct - (&mat * x - &rhs).norm()).abs() < 1e-10);
            assert!((least_squares_residual(&mat, &rhs).unwrap() - direct).abs() < 1e-10);
        }
    }
}

