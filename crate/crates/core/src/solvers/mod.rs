//! Solvers for Sylvester-type quaternion tensor equations and systems.
//!
//! Every solver returns a [`SolveOutcome`]: the residual of each solvability
//! condition and, when all of them vanish, a [`GeneralSolution`] per unknown.
//! A general solution is a particular solution plus terms `L·U·R` in named
//! free parameter tensors ("slots"); any assignment of the slots gives a
//! solution.

mod affine;
mod stages;
mod system;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{QMatrix, DEFAULT_RANK_TOL};
use crate::tensor::{dematricize, QTensor, TensorShape};
use affine::{Affine, SlotId, SlotTable};
use stages::{MixedOps, Op, Symbols};
use system::MixedEq;

/// Default tolerance for the solvability conditions.
pub const DEFAULT_TOL_RES: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    /// A condition `T = 0` passes when `‖T‖_F ≤ tol_res·(1 + scale)`.
    pub tol_res: f64,
    /// Relative singular value cutoff of every pseudoinverse.
    pub rank_tol: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig { tol_res: DEFAULT_TOL_RES, rank_tol: DEFAULT_RANK_TOL }
    }
}

impl SolverConfig {
    pub fn with_tol(tol_res: f64) -> Self {
        SolverConfig { tol_res, ..Default::default() }
    }
}

/// Residual of one solvability condition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionResidual {
    pub label: String,
    /// Frobenius norm of the condition tensor.
    pub residual: f64,
    /// Magnitude of the right-hand side the condition is measured against.
    pub scale: f64,
    pub passed: bool,
}

/// Solution set of one unknown.
#[derive(Debug, Clone)]
pub struct GeneralSolution {
    particular: QTensor,
    param_slots: Vec<(String, TensorShape)>,
    terms: Vec<(usize, QMatrix, QMatrix)>,
}

impl GeneralSolution {
    fn from_affine(expr: &Affine, shape: &TensorShape, slots: &SlotTable) -> Result<Self> {
        let ids = expr.slots();
        let param_slots = ids.iter().map(|&id| (slots.name(id).to_string(), slots.shape(id).clone())).collect();
        let index = |s: SlotId| ids.binary_search(&s).expect("slot listed");
        let terms = expr.terms.iter().map(|t| (index(t.slot), t.left.clone(), t.right.clone())).collect();
        Ok(GeneralSolution { particular: dematricize(&expr.constant, shape)?, param_slots, terms })
    }

    /// Value with every slot set to zero.
    pub fn particular(&self) -> &QTensor {
        &self.particular
    }

    /// Free parameters in order of creation.
    pub fn param_slots(&self) -> &[(String, TensorShape)] {
        &self.param_slots
    }

    /// Number of `L·U·R` terms in the solution formula.
    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    /// Evaluates the solution. Slots missing from `assignment` are zero and
    /// entries naming other slots are ignored.
    pub fn evaluate(&self, assignment: &BTreeMap<String, QTensor>) -> Result<QTensor> {
        let mut values = Vec::with_capacity(self.param_slots.len());
        for (name, shape) in &self.param_slots {
            match assignment.get(name) {
                Some(t) if t.shape() != shape => {
                    return Err(Error::ShapeMismatch(format!("slot {name} needs shape {shape}, got {}", t.shape())))
                }
                Some(t) => values.push(Some(t.matricize())),
                None => values.push(None),
            }
        }
        let mut acc = self.particular.matricize();
        for (k, l, r) in &self.terms {
            if let Some(u) = &values[*k] {
                acc = acc.add(&l.matmul(u)?.matmul(r)?)?;
            }
        }
        dematricize(&acc, self.particular.shape())
    }
}

pub fn instantiate_solution(g: &GeneralSolution, assignment: &BTreeMap<String, QTensor>) -> Result<QTensor> {
    g.evaluate(assignment)
}

#[derive(Debug, Clone)]
pub struct SolveOutcome {
    pub consistent: bool,
    pub condition_residuals: Vec<ConditionResidual>,
    /// Present iff `consistent`.
    pub solutions: BTreeMap<String, GeneralSolution>,
    pub tol_res: f64,
}

impl SolveOutcome {
    pub fn violated(&self) -> impl Iterator<Item = &ConditionResidual> {
        self.condition_residuals.iter().filter(|c| !c.passed)
    }

    /// Union of the free slots of all unknowns, ordered by name of first use.
    pub fn all_slots(&self) -> Vec<(String, TensorShape)> {
        let mut out: Vec<(String, TensorShape)> = Vec::new();
        for g in self.solutions.values() {
            for s in &g.param_slots {
                if !out.iter().any(|(n, _)| n == &s.0) {
                    out.push(s.clone());
                }
            }
        }
        out
    }

    /// Evaluates every unknown under one assignment.
    pub fn instantiate(&self, assignment: &BTreeMap<String, QTensor>) -> Result<BTreeMap<String, QTensor>> {
        self.solutions.iter().map(|(k, g)| Ok((k.clone(), g.evaluate(assignment)?))).collect()
    }

    pub fn particulars(&self) -> BTreeMap<String, QTensor> {
        self.solutions.iter().map(|(k, g)| (k.clone(), g.particular.clone())).collect()
    }
}

fn outcome(
    conds: Vec<ConditionResidual>,
    unknowns: Vec<(String, &Affine, TensorShape)>,
    slots: &SlotTable,
    cfg: &SolverConfig,
) -> Result<SolveOutcome> {
    let consistent = conds.iter().all(|c| c.passed);
    let mut solutions = BTreeMap::new();
    if consistent {
        for (name, expr, shape) in unknowns {
            solutions.insert(name, GeneralSolution::from_affine(expr, &shape, slots)?);
        }
    }
    Ok(SolveOutcome { consistent, condition_residuals: conds, solutions, tol_res: cfg.tol_res })
}

fn check_modes(what: &str, a: &[usize], b: &[usize]) -> Result<()> {
    if a != b {
        return Err(Error::ShapeMismatch(format!("{what}: {a:?} vs {b:?}")));
    }
    Ok(())
}

fn shape(rows: &[usize], cols: &[usize]) -> TensorShape {
    TensorShape { row_modes: rows.to_vec(), col_modes: cols.to_vec() }
}

fn check_config(cfg: &SolverConfig) -> Result<()> {
    if !(cfg.tol_res > 0.0 && cfg.tol_res.is_finite()) {
        return Err(Error::InvalidArgument(format!("residual tolerance must be positive, got {}", cfg.tol_res)));
    }
    Ok(())
}

/// `A⋆X⋆B = C`.
pub fn solve_axb(a: &QTensor, b: &QTensor, c: &QTensor, cfg: &SolverConfig) -> Result<SolveOutcome> {
    check_config(cfg)?;
    check_modes("row modes of A and C", a.row_modes(), c.row_modes())?;
    check_modes("column modes of B and C", b.col_modes(), c.col_modes())?;
    let xs = shape(a.col_modes(), b.row_modes());
    let mut slots = SlotTable::default();
    let u = slots.add("U".into(), xs.clone());
    let v = slots.add("V".into(), xs.clone());
    let parts = stages::axb(&Op::input(a.matricize()), &Op::input(b.matricize()), &Op::input(c.matricize()), [u, v], cfg)?;
    outcome(parts.conds, vec![("X".into(), &parts.x, xs)], &slots, cfg)
}

/// Coefficients of `A⋆X⋆B + C⋆Y⋆D = E`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoTermCoeffs {
    pub a: QTensor,
    pub b: QTensor,
    pub c: QTensor,
    pub d: QTensor,
    pub e: QTensor,
}

impl TwoTermCoeffs {
    /// Shapes of X and Y.
    pub fn unknown_shapes(&self) -> Result<(TensorShape, TensorShape)> {
        let e = &self.e;
        check_modes("row modes of A and E", self.a.row_modes(), e.row_modes())?;
        check_modes("row modes of C and E", self.c.row_modes(), e.row_modes())?;
        check_modes("column modes of B and E", self.b.col_modes(), e.col_modes())?;
        check_modes("column modes of D and E", self.d.col_modes(), e.col_modes())?;
        Ok((shape(self.a.col_modes(), self.b.row_modes()), shape(self.c.col_modes(), self.d.row_modes())))
    }

    fn ops(&self) -> [Op; 5] {
        [&self.a, &self.b, &self.c, &self.d, &self.e].map(|t| Op::input(t.matricize()))
    }
}

/// Coefficients of `A⋆X + Y⋆B + C⋆Z1⋆D + F⋆Z2⋆G = E`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixedCoeffs {
    pub a: QTensor,
    pub b: QTensor,
    pub c: QTensor,
    pub d: QTensor,
    pub f: QTensor,
    pub g: QTensor,
    pub e: QTensor,
}

impl MixedCoeffs {
    /// Shapes of X, Y, Z1, Z2.
    pub fn unknown_shapes(&self) -> Result<[TensorShape; 4]> {
        let e = &self.e;
        for (n, t) in [("A", &self.a), ("C", &self.c), ("F", &self.f)] {
            check_modes(&format!("row modes of {n} and E"), t.row_modes(), e.row_modes())?;
        }
        for (n, t) in [("B", &self.b), ("D", &self.d), ("G", &self.g)] {
            check_modes(&format!("column modes of {n} and E"), t.col_modes(), e.col_modes())?;
        }
        Ok([
            shape(self.a.col_modes(), e.col_modes()),
            shape(e.row_modes(), self.b.row_modes()),
            shape(self.c.col_modes(), self.d.row_modes()),
            shape(self.f.col_modes(), self.g.row_modes()),
        ])
    }

    fn ops(&self) -> MixedOps {
        let op = |t: &QTensor| Op::input(t.matricize());
        MixedOps {
            a: op(&self.a),
            b: op(&self.b),
            c: op(&self.c),
            d: op(&self.d),
            f: op(&self.f),
            g: op(&self.g),
            e: op(&self.e),
        }
    }
}

/// `A⋆X⋆B + C⋆Y⋆D = E`.
pub fn solve_two_term(k: &TwoTermCoeffs, cfg: &SolverConfig) -> Result<SolveOutcome> {
    check_config(cfg)?;
    let (xs, ys) = k.unknown_shapes()?;
    let mut slots = SlotTable::default();
    let shapes = [&ys, &ys, &ys, &xs, &xs];
    let ids: [SlotId; 5] = std::array::from_fn(|i| slots.add(format!("U{}", i + 1), shapes[i].clone()));
    let [a, b, c, d, e] = k.ops();
    let parts = stages::two_term(&a, &b, &c, &d, &e, &Symbols::plain(), ids, cfg)?;
    outcome(parts.conds, vec![("X".into(), &parts.x, xs), ("Y".into(), &parts.y, ys)], &slots, cfg)
}

/// `A⋆X + Y⋆B + C⋆Z1⋆D + F⋆Z2⋆G = E`.
pub fn solve_mixed(k: &MixedCoeffs, cfg: &SolverConfig) -> Result<SolveOutcome> {
    check_config(cfg)?;
    let [xs, ys, z1s, z2s] = k.unknown_shapes()?;
    let eq = MixedEq { ops: k.ops(), x: xs.clone(), y: ys.clone(), z1: z1s.clone(), z2: z2s.clone() };
    let mut slots = SlotTable::default();
    let sol = system::mixed_chain(&[eq], 0, &['T'], &mut slots, cfg)?;
    let unknowns = vec![
        ("X".into(), &sol.x[0], xs),
        ("Y".into(), &sol.y[0], ys),
        ("Z1".into(), &sol.z[0], z1s),
        ("Z2".into(), &sol.z[1], z2s),
    ];
    outcome(sol.conds.clone(), unknowns, &slots, cfg)
}

/// Largest `‖LHS − E‖/(1 + ‖E‖)` over the equations, given the particular solutions.
fn internal_check(outcome: &SolveOutcome, residuals: impl Fn(&BTreeMap<String, QTensor>) -> Result<Vec<f64>>) -> Result<()> {
    if !outcome.consistent {
        return Ok(());
    }
    let ratios = residuals(&outcome.particulars())?;
    let worst = ratios.iter().cloned().fold(0.0, f64::max);
    let limit = (100.0 * outcome.tol_res).max(1e-6);
    if worst > limit {
        let table: Vec<String> = outcome.condition_residuals.iter().map(|c| format!("{}={:.3e}", c.label, c.residual)).collect();
        return Err(Error::InternalInconsistency(format!(
            "all conditions pass but the particular solution leaves relative residuals {ratios:?} (limit {limit:.1e}); conditions: {}",
            table.join(", ")
        )));
    }
    Ok(())
}

fn ratio(lhs: QTensor, e: &QTensor) -> Result<f64> {
    Ok(lhs.sub(e)?.frobenius_norm() / (1.0 + e.frobenius_norm()))
}

/// System of three mixed equations
/// `Aᵢ⋆Xᵢ + Yᵢ⋆Bᵢ + Cᵢ⋆Zᵢ⋆Dᵢ + Fᵢ⋆Zᵢ₊₁⋆Gᵢ = Eᵢ`, i = 1..3.
pub fn solve_triple_system(eqs: &[MixedCoeffs; 3], cfg: &SolverConfig) -> Result<SolveOutcome> {
    check_config(cfg)?;
    let shapes = eqs.iter().map(|k| k.unknown_shapes()).collect::<Result<Vec<_>>>()?;
    for i in 0..2 {
        if shapes[i][3] != shapes[i + 1][2] {
            return Err(Error::ShapeMismatch(format!(
                "Z{} is {} in equation {} but {} in equation {}",
                i + 2,
                shapes[i][3],
                i + 1,
                shapes[i + 1][2],
                i + 2
            )));
        }
    }
    let mixed: Vec<MixedEq> = eqs
        .iter()
        .zip(&shapes)
        .map(|(k, s)| MixedEq { ops: k.ops(), x: s[0].clone(), y: s[1].clone(), z1: s[2].clone(), z2: s[3].clone() })
        .collect();
    let mut slots = SlotTable::default();
    let sol = system::mixed_chain(&mixed, 0, &['T', 'U', 'V'], &mut slots, cfg)?;
    let mut unknowns = Vec::new();
    for i in 0..3 {
        unknowns.push((format!("X{}", i + 1), &sol.x[i], shapes[i][0].clone()));
        unknowns.push((format!("Y{}", i + 1), &sol.y[i], shapes[i][1].clone()));
    }
    for (i, z) in sol.z.iter().enumerate() {
        let s = if i == 0 { shapes[0][2].clone() } else { shapes[i - 1][3].clone() };
        unknowns.push((format!("Z{}", i + 1), z, s));
    }
    let out = outcome(sol.conds, unknowns, &slots, cfg)?;
    internal_check(&out, |u| {
        eqs.iter()
            .enumerate()
            .map(|(i, k)| {
                let n = i + 1;
                let lhs = mixed_lhs(k, &u[&format!("X{n}")], &u[&format!("Y{n}")], &u[&format!("Z{n}")], &u[&format!("Z{}", n + 1)])?;
                ratio(lhs, &k.e)
            })
            .collect()
    })?;
    Ok(out)
}

fn mixed_lhs(k: &MixedCoeffs, x: &QTensor, y: &QTensor, z1: &QTensor, z2: &QTensor) -> Result<QTensor> {
    use crate::tensor::einstein_product as ep;
    ep(&k.a, x)?.add(&ep(y, &k.b)?)?.add(&ep(&ep(&k.c, z1)?, &k.d)?)?.add(&ep(&ep(&k.f, z2)?, &k.g)?)
}

fn two_term_lhs(k: &TwoTermCoeffs, x: &QTensor, y: &QTensor) -> Result<QTensor> {
    use crate::tensor::einstein_product as ep;
    ep(&ep(&k.a, x)?, &k.b)?.add(&ep(&ep(&k.c, y)?, &k.d)?)
}

/// System of four two-term equations `Aₖ⋆Zₖ⋆Bₖ + Cₖ⋆Zₖ₊₁⋆Dₖ = Eₖ`, k = 1..4.
pub fn solve_chain_system(eqs: &[TwoTermCoeffs; 4], cfg: &SolverConfig) -> Result<SolveOutcome> {
    check_config(cfg)?;
    let shapes = eqs.iter().map(|k| k.unknown_shapes()).collect::<Result<Vec<_>>>()?;
    for k in 0..3 {
        if shapes[k].1 != shapes[k + 1].0 {
            return Err(Error::ShapeMismatch(format!(
                "Z{} is {} in equation {} but {} in equation {}",
                k + 2,
                shapes[k].1,
                k + 1,
                shapes[k + 1].0,
                k + 2
            )));
        }
    }
    let mut slots = SlotTable::default();
    let mut parts = Vec::with_capacity(4);
    let mut conds = Vec::new();
    for (k, (coeffs, (xs, ys))) in eqs.iter().zip(&shapes).enumerate() {
        let n = k + 1;
        let sh = [ys, ys, ys, xs, xs];
        let ids: [SlotId; 5] = std::array::from_fn(|m| slots.add(format!("W{n}{}", m + 1), sh[m].clone()));
        let [a, b, c, d, e] = coeffs.ops();
        let p = stages::two_term(&a, &b, &c, &d, &e, &Symbols::tagged(&n.to_string()), ids, cfg)?;
        conds.extend(p.conds.iter().cloned());
        parts.push(p);
    }
    let refs: Vec<&stages::TwoTermParts> = parts.iter().collect();
    let (map, sub_conds) = system::couple_level(&refs, 0, &['T', 'U', 'V'], &mut slots, cfg)?;
    conds.extend(sub_conds);
    let mut z = vec![parts[0].x.substitute(&map)?];
    for p in &parts {
        z.push(p.y.substitute(&map)?);
    }
    let mut unknowns = vec![("Z1".to_string(), &z[0], shapes[0].0.clone())];
    for (k, zk) in z.iter().enumerate().skip(1) {
        unknowns.push((format!("Z{}", k + 1), zk, shapes[k - 1].1.clone()));
    }
    let out = outcome(conds, unknowns, &slots, cfg)?;
    internal_check(&out, |u| {
        eqs.iter()
            .enumerate()
            .map(|(k, c)| ratio(two_term_lhs(c, &u[&format!("Z{}", k + 1)], &u[&format!("Z{}", k + 2)])?, &c.e))
            .collect()
    })?;
    Ok(out)
}

#[cfg(test)]
mod tests;
