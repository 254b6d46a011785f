//! Single-equation solvers on matricized operands.

use super::affine::{Affine, SlotId};
use super::{ConditionResidual, SolverConfig};
use crate::error::Result;
use crate::matrix::{pinv_detail, QMatrix};

/// Pinv cutoffs stay this many times above an operand's estimated error.
const NOISE_MARGIN: f64 = 10.0;

/// A matricized coefficient with the nominal magnitude of the data it came
/// from and an estimate of its absolute rounding error.
#[derive(Debug, Clone)]
pub(crate) struct Op {
    pub m: QMatrix,
    pub scale: f64,
    pub err: f64,
}

impl Op {
    pub fn new(m: QMatrix, scale: f64, err: f64) -> Op {
        Op { m, scale, err }
    }

    pub fn input(m: QMatrix) -> Op {
        let scale = m.frobenius_norm();
        Op { m, scale, err: f64::EPSILON * scale }
    }

    pub fn projector(m: QMatrix, err: f64) -> Op {
        Op { m, scale: 1.0, err }
    }
}

/// `A†`, `L_A` and `R_A` of one operand, with error estimates for the
/// projectors and for `A†`.
pub(crate) struct Ginv {
    pub p: QMatrix,
    pub l: QMatrix,
    pub r: QMatrix,
    pub p_norm: f64,
    pub proj_err: f64,
    pub p_err: f64,
}

pub(crate) fn ginv(op: &Op, cfg: &SolverConfig) -> Result<Ginv> {
    let (p, spec) = pinv_detail(&op.m, cfg.rank_tol, op.scale, NOISE_MARGIN * op.err)?;
    let l = QMatrix::identity(op.m.cols()).sub(&p.matmul(&op.m)?)?;
    let r = QMatrix::identity(op.m.rows()).sub(&op.m.matmul(&p)?)?;
    // Perturbing A by δ moves its singular subspaces by about δ/σ_min and A† by δ/σ_min².
    let (proj_err, p_err) = if spec.sigma_min > 0.0 {
        let delta = op.err + f64::EPSILON * spec.sigma_max;
        ((delta / spec.sigma_min).min(1.0), delta / (spec.sigma_min * spec.sigma_min))
    } else {
        (f64::EPSILON, 0.0)
    };
    Ok(Ginv { p_norm: p.frobenius_norm(), p, l, r, proj_err, p_err })
}

/// `R_A·op`
fn r_times(g: &Ginv, op: &Op) -> Result<Op> {
    Ok(Op::new(g.r.matmul(&op.m)?, op.scale, op.err + (g.proj_err + f64::EPSILON) * op.scale))
}

/// `op·L_B`
fn times_l(op: &Op, g: &Ginv) -> Result<Op> {
    Ok(Op::new(op.m.matmul(&g.l)?, op.scale, op.err + (g.proj_err + f64::EPSILON) * op.scale))
}

pub(crate) fn condition(label: String, t: &QMatrix, scale: f64, cfg: &SolverConfig) -> ConditionResidual {
    let residual = t.frobenius_norm();
    ConditionResidual { label, residual, scale, passed: residual <= cfg.tol_res * (1.0 + scale) }
}

/// Solution of `A⋆X⋆B = C`.
pub(crate) struct AxbParts {
    pub x: Affine,
    pub conds: Vec<ConditionResidual>,
}

pub(crate) fn axb(a: &Op, b: &Op, c: &Op, slots: [SlotId; 2], cfg: &SolverConfig) -> Result<AxbParts> {
    let ga = ginv(a, cfg)?;
    let gb = ginv(b, cfg)?;
    let conds = vec![
        condition("R_A*C".into(), &ga.r.matmul(&c.m)?, c.scale, cfg),
        condition("C*L_B".into(), &c.m.matmul(&gb.l)?, c.scale, cfg),
    ];
    let x0 = ga.p.matmul(&c.m)?.matmul(&gb.p)?;
    let (k, l) = (a.m.cols(), b.m.rows());
    let x = Affine::constant(x0)
        .add(&Affine::term(slots[0], ga.l, QMatrix::identity(l)))?
        .add(&Affine::term(slots[1], QMatrix::identity(k), gb.r))?;
    Ok(AxbParts { x, conds })
}

/// Symbol names used in the condition labels of a two-term equation.
pub(crate) struct Symbols {
    pub a: String,
    pub b: String,
    pub c: String,
    pub d: String,
    pub e: String,
    pub p: String,
    pub q: String,
}

impl Symbols {
    pub fn plain() -> Symbols {
        Symbols::new("A", "B", "C", "D", "E", "P", "Q", "")
    }

    /// `A{tag}`, `B{tag}`, ... with `M`/`N` for the two derived products.
    pub fn tagged(tag: &str) -> Symbols {
        Symbols::new("A", "B", "C", "D", "E", "M", "N", tag)
    }

    #[allow(clippy::too_many_arguments)]
    fn new(a: &str, b: &str, c: &str, d: &str, e: &str, p: &str, q: &str, tag: &str) -> Symbols {
        let f = |s: &str| format!("{s}{tag}");
        Symbols { a: f(a), b: f(b), c: f(c), d: f(d), e: f(e), p: f(p), q: f(q) }
    }
}

/// Solution of `A⋆X⋆B + C⋆Y⋆D = E` together with the pieces needed to couple
/// it with a neighbouring equation.
///
/// With slots `U1..U5`:
///
/// ```text
/// X = X0 − F·U2·G + L_A·U4 + U5·R_B        F = A†S, G = R_Q·D·B†
/// Y = Y0 + L_P·L_S·U1 + L_P·U2·R_Q + U3·R_D
/// ```
pub(crate) struct TwoTermParts {
    pub x: Affine,
    pub y: Affine,
    pub f: Op,
    pub g: Op,
    pub l_a: Op,
    pub r_b: Op,
    pub lp_ls: Op,
    pub l_p: Op,
    pub r_q: Op,
    pub r_d: Op,
    /// Cancellation-free magnitudes of the constant parts of `x` and `y`.
    pub x_mag: f64,
    pub y_mag: f64,
    pub slots: [SlotId; 5],
    pub conds: Vec<ConditionResidual>,
}

pub(crate) fn two_term(
    a: &Op,
    b: &Op,
    c: &Op,
    d: &Op,
    e: &Op,
    sym: &Symbols,
    slots: [SlotId; 5],
    cfg: &SolverConfig,
) -> Result<TwoTermParts> {
    let ga = ginv(a, cfg)?;
    let gb = ginv(b, cfg)?;
    let gc = ginv(c, cfg)?;
    let gd = ginv(d, cfg)?;
    let p = r_times(&ga, c)?;
    let q = times_l(d, &gb)?;
    let gp = ginv(&p, cfg)?;
    let gq = ginv(&q, cfg)?;
    let s = times_l(c, &gp)?;
    let gs = ginv(&s, cfg)?;

    let ra_e = ga.r.matmul(&e.m)?;
    let e_lb = e.m.matmul(&gb.l)?;
    let Symbols { a: sa, b: sb, c: sc, d: sd, e: se, p: sp, q: sq } = sym;
    let conds = vec![
        condition(format!("R_{sp}*R_{sa}*{se}"), &gp.r.matmul(&ra_e)?, e.scale, cfg),
        condition(format!("{se}*L_{sb}*L_{sq}"), &e_lb.matmul(&gq.l)?, e.scale, cfg),
        condition(format!("R_{sa}*{se}*L_{sd}"), &ra_e.matmul(&gd.l)?, e.scale, cfg),
        condition(format!("R_{sc}*{se}*L_{sb}"), &gc.r.matmul(&e_lb)?, e.scale, cfg),
    ];

    let e_bp = e.m.matmul(&gb.p)?;
    let a_s = ga.p.matmul(&s.m)?;
    let c_e_q = gc.p.matmul(&e.m)?.matmul(&gq.p)?;
    let x0 = ga
        .p
        .matmul(&e_bp)?
        .sub(&ga.p.matmul(&c.m)?.matmul(&gp.p)?.matmul(&e_bp)?)?
        .sub(&a_s.matmul(&c_e_q)?.matmul(&d.m)?.matmul(&gb.p)?)?;
    let y0 = gp.p.matmul(&e.m)?.matmul(&gd.p)?.add(&gs.p.matmul(&s.m)?.matmul(&c_e_q)?)?;

    let (na, nb, nc, nd) = (ga.p_norm, gb.p_norm, gc.p_norm, gd.p_norm);
    let (np, nq, ns) = (gp.p_norm, gq.p_norm, gs.p_norm);
    let x_mag = na * e.scale * nb * (1.0 + c.scale * np + c.scale * nc * nq * d.scale);
    let y_mag = np * e.scale * nd + ns * c.scale * nc * e.scale * nq;

    let f_scale = na * c.scale;
    let f = Op::new(a_s, f_scale, ga.p_err * c.scale + na * s.err + f64::EPSILON * f_scale);
    let g_scale = d.scale * nb;
    let g_err = (gq.proj_err * d.scale + d.err) * nb + d.scale * gb.p_err + f64::EPSILON * g_scale;
    let g = Op::new(gq.r.matmul(&d.m)?.matmul(&gb.p)?, g_scale, g_err);
    let lp_ls = Op::projector(gp.l.matmul(&gs.l)?, gp.proj_err + gs.proj_err + f64::EPSILON);

    let (xr, xc) = (a.m.cols(), b.m.rows());
    let (yr, yc) = (c.m.cols(), d.m.rows());
    let [u1, u2, u3, u4, u5] = slots;
    let x = Affine::constant(x0)
        .add(&Affine::term(u2, f.m.neg(), g.m.clone()))?
        .add(&Affine::term(u4, ga.l.clone(), QMatrix::identity(xc)))?
        .add(&Affine::term(u5, QMatrix::identity(xr), gb.r.clone()))?;
    let y = Affine::constant(y0)
        .add(&Affine::term(u1, lp_ls.m.clone(), QMatrix::identity(yc)))?
        .add(&Affine::term(u2, gp.l.clone(), gq.r.clone()))?
        .add(&Affine::term(u3, QMatrix::identity(yr), gd.r.clone()))?;

    Ok(TwoTermParts {
        x,
        y,
        f,
        g,
        l_a: Op::projector(ga.l, ga.proj_err),
        r_b: Op::projector(gb.r, gb.proj_err),
        lp_ls,
        l_p: Op::projector(gp.l, gp.proj_err),
        r_q: Op::projector(gq.r, gq.proj_err),
        r_d: Op::projector(gd.r, gd.proj_err),
        x_mag,
        y_mag,
        slots,
        conds,
    })
}

/// Coefficients of `A⋆X + Y⋆B + C⋆Z1⋆D + F⋆Z2⋆G = E`.
#[derive(Debug, Clone)]
pub(crate) struct MixedOps {
    pub a: Op,
    pub b: Op,
    pub c: Op,
    pub d: Op,
    pub f: Op,
    pub g: Op,
    pub e: Op,
}

pub(crate) struct MixedParts {
    pub x: Affine,
    pub y: Affine,
    /// Z1 and Z2 are `inner.x` and `inner.y`.
    pub inner: TwoTermParts,
    pub conds: Vec<ConditionResidual>,
}

/// Slots are `T1..T8` in order.
pub(crate) fn mixed(eq: &MixedOps, tag: &str, slots: [SlotId; 8], cfg: &SolverConfig) -> Result<MixedParts> {
    let MixedOps { a, b, c, d, f, g, e } = eq;
    let ga = ginv(a, cfg)?;
    let gb = ginv(b, cfg)?;
    let a11 = r_times(&ga, c)?;
    let b11 = times_l(d, &gb)?;
    let c11 = r_times(&ga, f)?;
    let d11 = times_l(g, &gb)?;
    let e11 = times_l(&r_times(&ga, e)?, &gb)?;
    let [t1, t2, t3, t4, t5, t6, t7, t8] = slots;
    let inner = two_term(&a11, &b11, &c11, &d11, &e11, &Symbols::tagged(tag), [t7, t4, t8, t5, t6], cfg)?;

    let e_prime = Affine::constant(e.m.clone())
        .sub(&inner.x.sandwich(&c.m, &d.m)?)?
        .sub(&inner.y.sandwich(&f.m, &g.m)?)?;
    let (k, j) = (a.m.cols(), b.m.cols());
    let (i, o) = (a.m.rows(), b.m.rows());
    let x = e_prime
        .lmul(&ga.p)?
        .add(&Affine::term(t1, QMatrix::identity(k).neg(), b.m.clone()))?
        .add(&Affine::term(t2, ga.l.clone(), QMatrix::identity(j)))?;
    let y = e_prime
        .sandwich(&ga.r, &gb.p)?
        .add(&Affine::term(t1, a.m.clone(), QMatrix::identity(o)))?
        .add(&Affine::term(t3, QMatrix::identity(i), gb.r.clone()))?;
    let conds = inner.conds.clone();
    Ok(MixedParts { x, y, inner, conds })
}
