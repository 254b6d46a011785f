//! Coupled systems: equations sharing one unknown with each neighbour are
//! solved one by one, the two expressions of every shared unknown are equated,
//! and the resulting equations in the free parameters are solved recursively.

use std::collections::HashMap;

use super::affine::{Affine, SlotId, SlotTable};
use super::stages::{mixed, MixedOps, Op, TwoTermParts};
use super::{ConditionResidual, SolverConfig};
use crate::error::Result;
use crate::tensor::TensorShape;

/// A mixed equation with the shapes of its four unknowns.
#[derive(Debug, Clone)]
pub(crate) struct MixedEq {
    pub ops: MixedOps,
    pub x: TensorShape,
    pub y: TensorShape,
    pub z1: TensorShape,
    pub z2: TensorShape,
}

pub(crate) struct ChainSolved {
    pub x: Vec<Affine>,
    pub y: Vec<Affine>,
    /// `z[0]` is the first equation's Z1, `z[i]` the i-th equation's Z2.
    pub z: Vec<Affine>,
    pub conds: Vec<ConditionResidual>,
}

fn vcat(a: &TensorShape, b: &TensorShape) -> TensorShape {
    TensorShape { row_modes: vec![a.rows() + b.rows()], col_modes: a.col_modes.clone() }
}

fn hcat(a: &TensorShape, b: &TensorShape) -> TensorShape {
    TensorShape { row_modes: a.row_modes.clone(), col_modes: vec![a.cols() + b.cols()] }
}

fn tag(depth: usize, i: usize, n: usize) -> String {
    match (depth, n) {
        (0, _) => format!("{}{}", i + 1, i + 1),
        (_, 1) => "^".to_string(),
        _ => format!("{}{}{}", "^".repeat(depth), i + 1, i + 2),
    }
}

fn prefix(letter: char, i: usize, n: usize) -> String {
    if n > 1 {
        format!("{letter}{}", i + 1)
    } else {
        letter.to_string()
    }
}

/// Equation in the free parameters obtained by equating `first.y` with `second.x`.
///
/// Unknowns: `[U1; U4']`, `[U3, U5']`, `U2`, `U2'` (primes refer to `second`).
fn couple(first: &TwoTermParts, second: &TwoTermParts, slots: &SlotTable) -> Result<MixedEq> {
    let [u1, u2, u3, _, _] = first.slots;
    let [_, v2, _, v4, v5] = second.slots;
    let e = second.x.constant.sub(&first.y.constant)?;
    let scale = second.x_mag + first.y_mag;
    let ops = MixedOps {
        a: Op::projector(first.lp_ls.m.hstack(&second.l_a.m.neg())?, first.lp_ls.err + second.l_a.err),
        b: Op::projector(first.r_d.m.vstack(&second.r_b.m.neg())?, first.r_d.err + second.r_b.err),
        c: first.l_p.clone(),
        d: first.r_q.clone(),
        f: second.f.clone(),
        g: second.g.clone(),
        e: Op::new(e, scale, f64::EPSILON * scale),
    };
    Ok(MixedEq {
        ops,
        x: vcat(slots.shape(u1), slots.shape(v4)),
        y: hcat(slots.shape(u3), slots.shape(v5)),
        z1: slots.shape(u2).clone(),
        z2: slots.shape(v2).clone(),
    })
}

/// Couples consecutive equations, solves the coupling system, and returns the
/// expressions of the determined parameters.
pub(crate) fn couple_level(
    parts: &[&TwoTermParts],
    depth: usize,
    letters: &[char],
    slots: &mut SlotTable,
    cfg: &SolverConfig,
) -> Result<(HashMap<SlotId, Affine>, Vec<ConditionResidual>)> {
    let eqs = parts.windows(2).map(|w| couple(w[0], w[1], slots)).collect::<Result<Vec<_>>>()?;
    let sub = mixed_chain(&eqs, depth, letters, slots, cfg)?;
    let mut map = HashMap::new();
    for (j, w) in parts.windows(2).enumerate() {
        let [u1, _, u3, _, _] = w[0].slots;
        let [_, _, _, v4, v5] = w[1].slots;
        let r = slots.shape(u1).rows();
        let c = slots.shape(u3).cols();
        let (x, y) = (&sub.x[j], &sub.y[j]);
        map.insert(u1, x.row_block(0..r));
        map.insert(v4, x.row_block(r..x.rows()));
        map.insert(u3, y.col_block(0..c));
        map.insert(v5, y.col_block(c..y.cols()));
    }
    for (p, z) in parts.iter().zip(sub.z) {
        map.insert(p.slots[1], z);
    }
    Ok((map, sub.conds))
}

/// Solves mixed equations where equation i's Z2 is equation i+1's Z1.
pub(crate) fn mixed_chain(
    eqs: &[MixedEq],
    depth: usize,
    letters: &[char],
    slots: &mut SlotTable,
    cfg: &SolverConfig,
) -> Result<ChainSolved> {
    let n = eqs.len();
    let letter = letters[depth.min(letters.len() - 1)];
    let mut parts = Vec::with_capacity(n);
    for (i, eq) in eqs.iter().enumerate() {
        let p = prefix(letter, i, n);
        let t1 = TensorShape { row_modes: eq.x.row_modes.clone(), col_modes: eq.y.col_modes.clone() };
        let shapes = [&t1, &eq.x, &eq.y, &eq.z2, &eq.z1, &eq.z1, &eq.z2, &eq.z2];
        let ids: [SlotId; 8] = std::array::from_fn(|k| slots.add(format!("{p}{}", k + 1), shapes[k].clone()));
        parts.push(mixed(&eq.ops, &tag(depth, i, n), ids, cfg)?);
    }
    let mut conds: Vec<ConditionResidual> = parts.iter().flat_map(|p| p.conds.iter().cloned()).collect();
    let mut z = vec![parts[0].inner.x.clone()];
    z.extend(parts.iter().map(|p| p.inner.y.clone()));
    let mut x: Vec<Affine> = parts.iter().map(|p| p.x.clone()).collect();
    let mut y: Vec<Affine> = parts.iter().map(|p| p.y.clone()).collect();
    if n > 1 {
        let inner: Vec<&TwoTermParts> = parts.iter().map(|p| &p.inner).collect();
        let (map, sub_conds) = couple_level(&inner, depth + 1, letters, slots, cfg)?;
        conds.extend(sub_conds);
        for e in x.iter_mut().chain(y.iter_mut()).chain(z.iter_mut()) {
            *e = e.substitute(&map)?;
        }
    }
    Ok(ChainSolved { x, y, z, conds })
}
