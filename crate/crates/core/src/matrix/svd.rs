//! One-sided (Hestenes) Jacobi SVD for dense complex matrices.

use num_complex::Complex64;

use super::ComplexAdjoint;
use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 80;

/// Thin SVD `G = U diag(σ) Vᴴ` with σ sorted in decreasing order.
///
/// `u` is m×k and `v` is n×k with `k = min(m, n)`.
#[derive(Debug, Clone)]
pub struct ComplexSvd {
    pub u: ComplexAdjoint,
    pub sigma: Vec<f64>,
    pub v: ComplexAdjoint,
}

/// Column-oriented working copy.
struct Columns {
    len: usize,
    cols: Vec<Vec<Complex64>>,
}

impl Columns {
    fn of(m: &ComplexAdjoint) -> Self {
        let cols = (0..m.cols()).map(|j| (0..m.rows()).map(|i| m.get(i, j)).collect()).collect();
        Columns { len: m.rows(), cols }
    }

    fn identity(n: usize) -> Self {
        let cols = (0..n)
            .map(|j| {
                let mut c = vec![Complex64::new(0.0, 0.0); n];
                c[j] = Complex64::new(1.0, 0.0);
                c
            })
            .collect();
        Columns { len: n, cols }
    }

    /// `[g_p g_q] <- [g_p g_q] · [[c, s·φ], [-s·conj(φ), c]]`
    fn rotate(&mut self, p: usize, q: usize, c: f64, s: f64, phase: Complex64) {
        let (lo, hi) = self.cols.split_at_mut(q);
        let gp = &mut lo[p];
        let gq = &mut hi[0];
        let sp = phase * s;
        let spc = phase.conj() * s;
        for (a, b) in gp.iter_mut().zip(gq.iter_mut()) {
            let (x, y) = (*a, *b);
            *a = x * c - spc * y;
            *b = sp * x + y * c;
        }
    }

    fn into_matrix(self, order: &[usize], scale: Option<&[f64]>) -> ComplexAdjoint {
        let mut out = ComplexAdjoint::zeros(self.len, order.len());
        for (k, &j) in order.iter().enumerate() {
            let inv = match scale {
                Some(s) if s[j] > 0.0 => 1.0 / s[j],
                Some(_) => 0.0,
                None => 1.0,
            };
            for i in 0..self.len {
                out.set(i, k, self.cols[j][i] * inv);
            }
        }
        out
    }
}

/// Orthogonalizes the columns of `g` (requires rows ≥ cols).
fn hestenes(g: &ComplexAdjoint) -> Result<(Columns, Columns)> {
    let n = g.cols();
    let mut a = Columns::of(g);
    let mut v = Columns::identity(n);
    let tol = f64::EPSILON * (g.rows().max(1) as f64);

    for _sweep in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let (mut alpha, mut beta) = (0.0, 0.0);
                let mut gamma = Complex64::new(0.0, 0.0);
                for (x, y) in a.cols[p].iter().zip(&a.cols[q]) {
                    alpha += x.norm_sqr();
                    beta += y.norm_sqr();
                    gamma += x.conj() * y;
                }
                let g_abs = gamma.norm();
                if g_abs == 0.0 || g_abs <= tol * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let phase = gamma / g_abs;
                let zeta = (beta - alpha) / (2.0 * g_abs);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                a.rotate(p, q, c, s, phase);
                v.rotate(p, q, c, s, phase);
            }
        }
        if !rotated {
            return Ok((a, v));
        }
    }

    let mut off: f64 = 0.0;
    for p in 0..n {
        for q in (p + 1)..n {
            let (mut alpha, mut beta) = (0.0, 0.0);
            let mut gamma = Complex64::new(0.0, 0.0);
            for (x, y) in a.cols[p].iter().zip(&a.cols[q]) {
                alpha += x.norm_sqr();
                beta += y.norm_sqr();
                gamma += x.conj() * y;
            }
            if alpha > 0.0 && beta > 0.0 {
                off = off.max(gamma.norm() / (alpha * beta).sqrt());
            }
        }
    }
    Err(Error::ConvergenceFailure { sweeps: MAX_SWEEPS, off })
}

/// Thin SVD by one-sided Jacobi rotations.
pub fn jacobi_svd(g: &ComplexAdjoint) -> Result<ComplexSvd> {
    if g.rows() < g.cols() {
        let t = jacobi_svd(&g.adjoint())?;
        return Ok(ComplexSvd { u: t.v, sigma: t.sigma, v: t.u });
    }
    let (a, v) = hestenes(g)?;
    let norms: Vec<f64> = a.cols.iter().map(|c| c.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()).collect();
    let mut order: Vec<usize> = (0..norms.len()).collect();
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]).then(i.cmp(&j)));
    let sigma = order.iter().map(|&j| norms[j]).collect();
    let u = a.into_matrix(&order, Some(&norms));
    let v = v.into_matrix(&order, None);
    Ok(ComplexSvd { u, sigma, v })
}
