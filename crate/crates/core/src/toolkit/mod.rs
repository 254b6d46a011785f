//! Systems as data: evaluation, verification, instance generation, the
//! brute-force oracle, and the JSON bundle formats.

mod bundle;
mod generate;
mod oracle;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::solvers::{self, MixedCoeffs, SolveOutcome, SolverConfig, TwoTermCoeffs};
use crate::tensor::{einstein_product, QTensor, TensorShape};

pub use bundle::{InstanceBundle, SolutionFile};
pub use generate::{gen_consistent, gen_inconsistent, random_assignment, random_tensor, GeneratedInstance, InstanceSpec};
pub use oracle::{oracle_solve, OracleResult, ORACLE_MAX_UNKNOWNS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SystemKind {
    Axb,
    TwoTerm,
    Mixed,
    Triple,
    Chain,
}

impl SystemKind {
    pub const ALL: [SystemKind; 5] = [SystemKind::Axb, SystemKind::TwoTerm, SystemKind::Mixed, SystemKind::Triple, SystemKind::Chain];

    pub fn as_str(self) -> &'static str {
        match self {
            SystemKind::Axb => "axb",
            SystemKind::TwoTerm => "two_term",
            SystemKind::Mixed => "mixed",
            SystemKind::Triple => "triple",
            SystemKind::Chain => "chain",
        }
    }

    /// Equations as lists of `(left coefficient, unknown, right coefficient)`.
    pub fn equations(self) -> Vec<Vec<Term>> {
        let t = |l: Option<&str>, u: &str, r: Option<&str>| Term {
            left: l.map(str::to_string),
            unknown: u.to_string(),
            right: r.map(str::to_string),
        };
        match self {
            SystemKind::Axb => vec![vec![t(Some("A"), "X", Some("B"))]],
            SystemKind::TwoTerm => vec![vec![t(Some("A"), "X", Some("B")), t(Some("C"), "Y", Some("D"))]],
            SystemKind::Mixed => vec![vec![
                t(Some("A"), "X", None),
                t(None, "Y", Some("B")),
                t(Some("C"), "Z1", Some("D")),
                t(Some("F"), "Z2", Some("G")),
            ]],
            SystemKind::Triple => (1..=3)
                .map(|i| {
                    vec![
                        t(Some(&format!("A{i}")), &format!("X{i}"), None),
                        t(None, &format!("Y{i}"), Some(&format!("B{i}"))),
                        t(Some(&format!("C{i}")), &format!("Z{i}"), Some(&format!("D{i}"))),
                        t(Some(&format!("F{i}")), &format!("Z{}", i + 1), Some(&format!("G{i}"))),
                    ]
                })
                .collect(),
            SystemKind::Chain => (1..=4)
                .map(|k| {
                    vec![
                        t(Some(&format!("A{k}")), &format!("Z{k}"), Some(&format!("B{k}"))),
                        t(Some(&format!("C{k}")), &format!("Z{}", k + 1), Some(&format!("D{k}"))),
                    ]
                })
                .collect(),
        }
    }

    /// Coefficient names in canonical order.
    pub fn coefficient_names(self) -> Vec<String> {
        let mut out = Vec::new();
        for eq in self.equations() {
            for term in eq {
                for c in [term.left, term.right].into_iter().flatten() {
                    if !out.contains(&c) {
                        out.push(c);
                    }
                }
            }
        }
        out
    }

    pub fn equation_count(self) -> usize {
        self.equations().len()
    }
}

impl fmt::Display for SystemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SystemKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        SystemKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown system kind {s:?} (expected axb, two_term, mixed, triple or chain)")))
    }
}

/// One summand `left ⋆ unknown ⋆ right` of an equation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Term {
    pub left: Option<String>,
    pub unknown: String,
    pub right: Option<String>,
}

/// A system of one of the supported kinds with concrete coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct System {
    kind: SystemKind,
    coefficients: BTreeMap<String, QTensor>,
    rhs: Vec<QTensor>,
    unknowns: BTreeMap<String, TensorShape>,
}

impl System {
    /// Checks that every coefficient is present and conformable, and infers
    /// the unknown shapes.
    pub fn new(kind: SystemKind, coefficients: BTreeMap<String, QTensor>, rhs: Vec<QTensor>) -> Result<System> {
        let eqs = kind.equations();
        if rhs.len() != eqs.len() {
            return Err(Error::ShapeMismatch(format!("{kind} system needs {} right-hand sides, got {}", eqs.len(), rhs.len())));
        }
        for name in kind.coefficient_names() {
            if !coefficients.contains_key(&name) {
                return Err(Error::InvalidArgument(format!("{kind} system is missing coefficient {name}")));
            }
        }
        if let Some(extra) = coefficients.keys().find(|k| !kind.coefficient_names().contains(k)) {
            return Err(Error::InvalidArgument(format!("{kind} system has no coefficient named {extra}")));
        }
        let mut unknowns: BTreeMap<String, TensorShape> = BTreeMap::new();
        for (n, (eq, e)) in eqs.iter().zip(&rhs).enumerate() {
            for term in eq {
                let rows = match &term.left {
                    Some(l) => {
                        let c = &coefficients[l];
                        if c.row_modes() != e.row_modes() {
                            return Err(Error::ShapeMismatch(format!(
                                "coefficient {l} has row modes {:?} but right-hand side {} has {:?}",
                                c.row_modes(),
                                n + 1,
                                e.row_modes()
                            )));
                        }
                        c.col_modes().to_vec()
                    }
                    None => e.row_modes().to_vec(),
                };
                let cols = match &term.right {
                    Some(r) => {
                        let c = &coefficients[r];
                        if c.col_modes() != e.col_modes() {
                            return Err(Error::ShapeMismatch(format!(
                                "coefficient {r} has column modes {:?} but right-hand side {} has {:?}",
                                c.col_modes(),
                                n + 1,
                                e.col_modes()
                            )));
                        }
                        c.row_modes().to_vec()
                    }
                    None => e.col_modes().to_vec(),
                };
                let shape = TensorShape { row_modes: rows, col_modes: cols };
                match unknowns.get(&term.unknown) {
                    Some(s) if s != &shape => {
                        return Err(Error::ShapeMismatch(format!(
                            "unknown {} is {} in one equation and {} in equation {}",
                            term.unknown,
                            s,
                            shape,
                            n + 1
                        )))
                    }
                    Some(_) => {}
                    None => {
                        unknowns.insert(term.unknown.clone(), shape);
                    }
                }
            }
        }
        Ok(System { kind, coefficients, rhs, unknowns })
    }

    pub fn kind(&self) -> SystemKind {
        self.kind
    }

    pub fn coefficients(&self) -> &BTreeMap<String, QTensor> {
        &self.coefficients
    }

    pub fn coefficient(&self, name: &str) -> &QTensor {
        &self.coefficients[name]
    }

    pub fn rhs(&self) -> &[QTensor] {
        &self.rhs
    }

    /// Unknown names and shapes, sorted by name.
    pub fn unknowns(&self) -> &BTreeMap<String, TensorShape> {
        &self.unknowns
    }

    /// Same coefficients, different right-hand sides.
    pub fn with_rhs(&self, rhs: Vec<QTensor>) -> Result<System> {
        System::new(self.kind, self.coefficients.clone(), rhs)
    }

    fn check_unknowns(&self, values: &BTreeMap<String, QTensor>) -> Result<()> {
        for (name, shape) in &self.unknowns {
            match values.get(name) {
                None => return Err(Error::InvalidArgument(format!("no value for unknown {name}"))),
                Some(v) if v.shape() != shape => {
                    return Err(Error::ShapeMismatch(format!("unknown {name} must be {shape}, got {}", v.shape())))
                }
                Some(_) => {}
            }
        }
        Ok(())
    }

    /// Left-hand side of every equation.
    pub fn apply(&self, values: &BTreeMap<String, QTensor>) -> Result<Vec<QTensor>> {
        self.check_unknowns(values)?;
        self.kind
            .equations()
            .iter()
            .zip(&self.rhs)
            .map(|(eq, e)| {
                let mut acc = QTensor::zeros(e.shape().clone());
                for term in eq {
                    let mut v = values[&term.unknown].clone();
                    if let Some(l) = &term.left {
                        v = einstein_product(&self.coefficients[l], &v)?;
                    }
                    if let Some(r) = &term.right {
                        v = einstein_product(&v, &self.coefficients[r])?;
                    }
                    acc = acc.add(&v)?;
                }
                Ok(acc)
            })
            .collect()
    }

    /// Dispatches to the solver for this kind.
    pub fn solve(&self, cfg: &SolverConfig) -> Result<SolveOutcome> {
        let c = |n: &str| self.coefficients[n].clone();
        let two = |s: &str, e: &QTensor| TwoTermCoeffs {
            a: c(&format!("A{s}")),
            b: c(&format!("B{s}")),
            c: c(&format!("C{s}")),
            d: c(&format!("D{s}")),
            e: e.clone(),
        };
        let mix = |s: &str, e: &QTensor| MixedCoeffs {
            a: c(&format!("A{s}")),
            b: c(&format!("B{s}")),
            c: c(&format!("C{s}")),
            d: c(&format!("D{s}")),
            f: c(&format!("F{s}")),
            g: c(&format!("G{s}")),
            e: e.clone(),
        };
        match self.kind {
            SystemKind::Axb => solvers::solve_axb(&c("A"), &c("B"), &self.rhs[0], cfg),
            SystemKind::TwoTerm => solvers::solve_two_term(&two("", &self.rhs[0]), cfg),
            SystemKind::Mixed => solvers::solve_mixed(&mix("", &self.rhs[0]), cfg),
            SystemKind::Triple => {
                let eqs = [mix("1", &self.rhs[0]), mix("2", &self.rhs[1]), mix("3", &self.rhs[2])];
                solvers::solve_triple_system(&eqs, cfg)
            }
            SystemKind::Chain => {
                let eqs = [two("1", &self.rhs[0]), two("2", &self.rhs[1]), two("3", &self.rhs[2]), two("4", &self.rhs[3])];
                solvers::solve_chain_system(&eqs, cfg)
            }
        }
    }
}

/// Residual of one equation under substitution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquationResidual {
    pub equation: usize,
    /// `‖LHS − E‖_F`
    pub residual: f64,
    pub rhs_norm: f64,
    /// `residual / (1 + ‖E‖_F)`
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub equations: Vec<EquationResidual>,
}

impl VerifyReport {
    pub fn max_ratio(&self) -> f64 {
        self.equations.iter().map(|e| e.ratio).fold(0.0, f64::max)
    }
}

pub fn verify_solution(system: &System, unknowns: &BTreeMap<String, QTensor>) -> Result<VerifyReport> {
    let lhs = system.apply(unknowns)?;
    let equations = lhs
        .iter()
        .zip(system.rhs())
        .enumerate()
        .map(|(i, (l, e))| {
            let residual = l.sub(e)?.frobenius_norm();
            let rhs_norm = e.frobenius_norm();
            Ok(EquationResidual { equation: i + 1, residual, rhs_norm, ratio: residual / (1.0 + rhs_norm) })
        })
        .collect::<Result<_>>()?;
    Ok(VerifyReport { equations })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::identity_tensor;

    #[test]
    fn kinds_round_trip() {
        for k in SystemKind::ALL {
            assert_eq!(k.as_str().parse::<SystemKind>().unwrap(), k);
            assert_eq!(serde_json::to_string(&k).unwrap(), format!("\"{k}\""));
        }
        assert!("abc".parse::<SystemKind>().is_err());
        assert_eq!(SystemKind::Triple.coefficient_names().len(), 18);
        assert_eq!(SystemKind::Chain.coefficient_names().len(), 16);
        assert_eq!(SystemKind::Mixed.coefficient_names(), ["A", "B", "C", "D", "F", "G"]);
    }

    #[test]
    fn shape_inference_and_errors() {
        let id2 = identity_tensor(&[2]).unwrap();
        let id3 = identity_tensor(&[3]).unwrap();
        let e = QTensor::zeros(TensorShape::new(vec![2], vec![3]).unwrap());
        let coeffs: BTreeMap<_, _> = [("A".to_string(), id2.clone()), ("B".to_string(), id3.clone())].into();
        let s = System::new(SystemKind::Axb, coeffs.clone(), vec![e.clone()]).unwrap();
        assert_eq!(s.unknowns()["X"], TensorShape::new(vec![2], vec![3]).unwrap());
        let zero: BTreeMap<_, _> = [("X".to_string(), e.clone())].into();
        assert_eq!(verify_solution(&s, &zero).unwrap().max_ratio(), 0.0);

        let bad: BTreeMap<_, _> = [("A".to_string(), id3.clone()), ("B".to_string(), id3)].into();
        assert!(matches!(System::new(SystemKind::Axb, bad, vec![e.clone()]), Err(Error::ShapeMismatch(_))));
        let missing: BTreeMap<_, _> = [("A".to_string(), id2)].into();
        assert!(System::new(SystemKind::Axb, missing, vec![e.clone()]).is_err());
        let wrong: BTreeMap<_, _> = [("X".to_string(), QTensor::zeros(TensorShape::square(&[2]).unwrap()))].into();
        assert!(matches!(verify_solution(&s, &wrong), Err(Error::ShapeMismatch(_))));
        assert!(System::new(SystemKind::Axb, coeffs, vec![]).is_err());
    }
}
