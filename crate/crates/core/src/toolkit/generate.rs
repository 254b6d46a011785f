//! Seeded random instances, consistent by construction or with a
//! right-hand side pushed outside the reachable range.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{System, SystemKind};
use crate::error::{Error, Result};
use crate::matrix::{mat_pinv, QMatrix, DEFAULT_RANK_TOL};
use crate::quaternion::Quaternion;
use crate::tensor::{dematricize, QTensor, TensorShape};

const MAX_ATTEMPTS: usize = 16;

/// What to generate: a system kind, the sizes of its index spaces, a seed and
/// an optional singular value spread for the coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceSpec {
    pub kind: SystemKind,
    /// Mode list of every index space of the kind (see [`InstanceSpec::spaces`]).
    pub modes: BTreeMap<String, Vec<usize>>,
    pub seed: u64,
    /// `σ_max/σ_min` of every coefficient; `None` draws raw Gaussian entries.
    pub conditioning: Option<f64>,
}

impl InstanceSpec {
    pub fn new(kind: SystemKind, seed: u64) -> InstanceSpec {
        let modes = InstanceSpec::spaces(kind).iter().map(|s| (s.to_string(), vec![default_size(kind, s)])).collect();
        InstanceSpec { kind, modes, seed, conditioning: None }
    }

    /// Index spaces of a kind. Every system has right-hand sides over `I × J`.
    ///
    /// - axb: `A: I×K`, `B: L×J`
    /// - two_term: `A: I×K1`, `B: L1×J`, `C: I×K2`, `D: L2×J`
    /// - mixed: `A: I×K`, `B: O×J`, `C: I×Q`, `D: P×J`, `F: I×L`, `G: S×J`
    /// - triple: as mixed with `F: I×Q`, `G: P×J` so every `Zᵢ` is `Q×P`
    /// - chain: `Aₖ, Cₖ: I×Q`, `Bₖ, Dₖ: P×J`
    pub fn spaces(kind: SystemKind) -> &'static [&'static str] {
        match kind {
            SystemKind::Axb => &["I", "J", "K", "L"],
            SystemKind::TwoTerm => &["I", "J", "K1", "K2", "L1", "L2"],
            SystemKind::Mixed => &["I", "J", "K", "L", "O", "P", "Q", "S"],
            SystemKind::Triple => &["I", "J", "K", "O", "P", "Q"],
            SystemKind::Chain => &["I", "J", "P", "Q"],
        }
    }

    pub fn with_modes(mut self, space: &str, modes: &[usize]) -> InstanceSpec {
        self.modes.insert(space.to_string(), modes.to_vec());
        self
    }

    pub fn with_all_modes(mut self, modes: &[usize]) -> InstanceSpec {
        for v in self.modes.values_mut() {
            *v = modes.to_vec();
        }
        self
    }

    pub fn with_conditioning(mut self, kappa: f64) -> InstanceSpec {
        self.conditioning = Some(kappa);
        self
    }

    pub fn validate(&self) -> Result<()> {
        for s in InstanceSpec::spaces(self.kind) {
            match self.modes.get(*s) {
                None => return Err(Error::InvalidArgument(format!("{} instances need modes for index space {s}", self.kind))),
                Some(m) if m.is_empty() || m.contains(&0) => {
                    return Err(Error::InvalidArgument(format!("index space {s} has invalid modes {m:?}")))
                }
                Some(_) => {}
            }
        }
        if let Some(extra) = self.modes.keys().find(|k| !InstanceSpec::spaces(self.kind).contains(&k.as_str())) {
            return Err(Error::InvalidArgument(format!("{} instances have no index space {extra}", self.kind)));
        }
        if let Some(k) = self.conditioning {
            if !(k >= 1.0 && k.is_finite()) {
                return Err(Error::InvalidArgument(format!("conditioning must be a finite number >= 1, got {k}")));
            }
        }
        Ok(())
    }

    fn shape(&self, rows: &str, cols: &str) -> TensorShape {
        TensorShape { row_modes: self.modes[rows].clone(), col_modes: self.modes[cols].clone() }
    }

    fn coefficient_shapes(&self) -> Vec<(String, TensorShape)> {
        let s = |r, c| self.shape(r, c);
        let named = |pairs: Vec<(&str, TensorShape)>| pairs.into_iter().map(|(n, t)| (n.to_string(), t)).collect::<Vec<_>>();
        match self.kind {
            SystemKind::Axb => named(vec![("A", s("I", "K")), ("B", s("L", "J"))]),
            SystemKind::TwoTerm => named(vec![("A", s("I", "K1")), ("B", s("L1", "J")), ("C", s("I", "K2")), ("D", s("L2", "J"))]),
            SystemKind::Mixed => named(vec![
                ("A", s("I", "K")),
                ("B", s("O", "J")),
                ("C", s("I", "Q")),
                ("D", s("P", "J")),
                ("F", s("I", "L")),
                ("G", s("S", "J")),
            ]),
            SystemKind::Triple => (1..=3)
                .flat_map(|i| {
                    [("A", s("I", "K")), ("B", s("O", "J")), ("C", s("I", "Q")), ("D", s("P", "J")), ("F", s("I", "Q")), ("G", s("P", "J"))]
                        .map(|(n, t)| (format!("{n}{i}"), t))
                })
                .collect(),
            SystemKind::Chain => (1..=4)
                .flat_map(|k| {
                    [("A", s("I", "Q")), ("B", s("P", "J")), ("C", s("I", "Q")), ("D", s("P", "J"))].map(|(n, t)| (format!("{n}{k}"), t))
                })
                .collect(),
        }
    }

    /// Equation that [`gen_inconsistent`] perturbs, the left coefficients
    /// whose ranges must leave room, and the right coefficient whose null
    /// space must be nontrivial.
    fn perturbation_target(&self) -> (usize, Vec<String>, Option<String>) {
        let v = |names: &[&str]| names.iter().map(|s| s.to_string()).collect::<Vec<_>>();
        match self.kind {
            SystemKind::Axb => (0, v(&["A"]), None),
            SystemKind::TwoTerm => (0, v(&["A", "C"]), None),
            SystemKind::Mixed => (0, v(&["A", "C", "F"]), Some("B".into())),
            SystemKind::Triple => (1, v(&["A2", "C2", "F2"]), Some("B2".into())),
            SystemKind::Chain => (1, v(&["A2", "C2"]), None),
        }
    }
}

fn default_size(kind: SystemKind, space: &str) -> usize {
    match (kind, space) {
        (_, "I") | (_, "J") => 3,
        (SystemKind::Triple, "K") | (SystemKind::Triple, "O") => 1,
        _ => 2,
    }
}

/// A generated system with the solution used to build it, if any.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedInstance {
    pub system: System,
    pub witness: Option<BTreeMap<String, QTensor>>,
    pub seed: u64,
}

fn normal_q(rng: &mut impl Rng) -> Quaternion {
    Quaternion::new(rng.sample(StandardNormal), rng.sample(StandardNormal), rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Standard normal quaternion entries for each named shape, drawn in order from `seed`.
pub fn random_assignment(slots: &[(String, TensorShape)], seed: u64) -> BTreeMap<String, QTensor> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    slots.iter().map(|(name, shape)| (name.clone(), random_tensor(&mut rng, shape.clone()))).collect()
}

pub fn random_tensor(rng: &mut impl Rng, shape: TensorShape) -> QTensor {
    let data = (0..shape.len()).map(|_| normal_q(rng)).collect();
    QTensor::from_vec(shape, data).expect("data matches shape")
}

fn gaussian(rng: &mut impl Rng, rows: usize, cols: usize) -> QMatrix {
    QMatrix::from_fn(rows, cols, |_, _| normal_q(rng))
}

/// `n×k` matrix with orthonormal columns (right inner product `u*v`).
fn orthonormal(rng: &mut impl Rng, n: usize, k: usize) -> QMatrix {
    let g = gaussian(rng, n, k);
    let mut cols: Vec<Vec<Quaternion>> = Vec::with_capacity(k);
    for j in 0..k {
        let mut v: Vec<Quaternion> = (0..n).map(|i| g.get(i, j)).collect();
        for u in &cols {
            let mut h = Quaternion::ZERO;
            for (a, b) in u.iter().zip(&v) {
                h += a.conj() * *b;
            }
            for (a, b) in u.iter().zip(v.iter_mut()) {
                *b -= *a * h;
            }
        }
        let norm = v.iter().map(|q| q.norm_sqr()).sum::<f64>().sqrt();
        cols.push(v.into_iter().map(|q| q.scale(1.0 / norm)).collect());
    }
    QMatrix::from_fn(n, k, |i, j| cols[j][i])
}

/// Random coefficient of at most the given rank.
fn coefficient(rng: &mut impl Rng, rows: usize, cols: usize, rank: Option<usize>, kappa: Option<f64>) -> QMatrix {
    let k = rank.unwrap_or(rows.min(cols)).min(rows.min(cols));
    if k == 0 {
        return QMatrix::zeros(rows, cols);
    }
    match (kappa, rank) {
        (None, None) => gaussian(rng, rows, cols),
        (None, Some(_)) => {
            let p = gaussian(rng, rows, k).matmul(&gaussian(rng, k, cols)).expect("inner sizes agree");
            p.scale(0.5 / (k as f64).sqrt())
        }
        (Some(kappa), _) => {
            let u = orthonormal(rng, rows, k);
            let v = orthonormal(rng, cols, k);
            let top = 2.0 * (rows.max(cols) as f64).sqrt();
            let sigma: Vec<Quaternion> = (0..k)
                .map(|i| {
                    let t = if k == 1 { 0.0 } else { i as f64 / (k - 1) as f64 };
                    Quaternion::real(top * kappa.powf(-t))
                })
                .collect();
            u.matmul(&QMatrix::diagonal(&sigma)).and_then(|m| m.matmul(&v.conj_transpose())).expect("factor sizes agree")
        }
    }
}

fn build(spec: &InstanceSpec, rng: &mut ChaCha8Rng, ranks: &BTreeMap<String, usize>) -> Result<(System, BTreeMap<String, QTensor>)> {
    let mut coeffs = BTreeMap::new();
    for (name, shape) in spec.coefficient_shapes() {
        let m = coefficient(rng, shape.rows(), shape.cols(), ranks.get(&name).copied(), spec.conditioning);
        coeffs.insert(name, dematricize(&m, &shape)?);
    }
    let e_shape = spec.shape("I", "J");
    let zero_rhs = vec![QTensor::zeros(e_shape); spec.kind.equation_count()];
    let template = System::new(spec.kind, coeffs, zero_rhs)?;
    let witness: BTreeMap<String, QTensor> = template
        .unknowns()
        .iter()
        .map(|(n, s)| Ok((n.clone(), dematricize(&gaussian(rng, s.rows(), s.cols()), s)?)))
        .collect::<Result<_>>()?;
    let rhs = template.apply(&witness)?;
    Ok((template.with_rhs(rhs)?, witness))
}

/// Coefficients and witness unknowns drawn from the seeded generator; the
/// right-hand sides are the forward evaluation of the witness.
pub fn gen_consistent(spec: &InstanceSpec) -> Result<GeneratedInstance> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let (system, witness) = build(spec, &mut rng, &BTreeMap::new())?;
    Ok(GeneratedInstance { system, witness: Some(witness), seed: spec.seed })
}

/// Like [`gen_consistent`], but one right-hand side receives a unit-norm
/// component orthogonal to everything its equation can reach.
///
/// The left coefficients of that equation are drawn with a combined rank
/// below the number of rows, so the orthogonal complement is nontrivial.
pub fn gen_inconsistent(spec: &InstanceSpec) -> Result<GeneratedInstance> {
    spec.validate()?;
    let (target, left, right) = spec.perturbation_target();
    let shapes: BTreeMap<String, TensorShape> = spec.coefficient_shapes().into_iter().collect();
    let rows = spec.shape("I", "J").rows();
    let cols = spec.shape("I", "J").cols();

    let mut ranks = BTreeMap::new();
    let mut budget = rows - 1;
    for (i, name) in left.iter().enumerate() {
        let share = budget.div_ceil(left.len() - i);
        let r = share.min(shapes[name].cols());
        ranks.insert(name.clone(), r);
        budget -= r;
    }
    if let Some(b) = &right {
        ranks.insert(b.clone(), (cols - 1).min(shapes[b].rows()));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    for _ in 0..MAX_ATTEMPTS {
        let (system, _) = build(spec, &mut rng, &ranks)?;
        let mut span = system.coefficient(&left[0]).matricize();
        for name in &left[1..] {
            span = span.hstack(&system.coefficient(name).matricize())?;
        }
        let n = gaussian(&mut rng, rows, cols);
        let proj = QMatrix::identity(rows).sub(&span.matmul(&mat_pinv(&span, DEFAULT_RANK_TOL)?)?)?;
        let mut delta = proj.matmul(&n)?;
        if let Some(b) = &right {
            let bm = system.coefficient(b).matricize();
            let l_b = QMatrix::identity(cols).sub(&mat_pinv(&bm, DEFAULT_RANK_TOL)?.matmul(&bm)?)?;
            delta = delta.matmul(&l_b)?;
        }
        let norm = delta.frobenius_norm();
        if norm <= 1e-8 * n.frobenius_norm() {
            continue;
        }
        let mut rhs = system.rhs().to_vec();
        let shape = rhs[target].shape().clone();
        rhs[target] = rhs[target].add(&dematricize(&delta.scale(1.0 / norm), &shape)?)?;
        return Ok(GeneratedInstance { system: system.with_rhs(rhs)?, witness: None, seed: spec.seed });
    }
    Err(Error::GenerationFailure(MAX_ATTEMPTS))
}
