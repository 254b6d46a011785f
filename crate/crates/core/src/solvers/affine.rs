//! Affine matrix expressions `C + Σ Lₖ·U_{sₖ}·Rₖ` over named parameter slots.

use std::collections::HashMap;

use crate::error::Result;
use crate::matrix::QMatrix;
use crate::tensor::TensorShape;

pub(crate) type SlotId = usize;

/// Registry of free parameters created while solving.
#[derive(Debug, Default, Clone)]
pub(crate) struct SlotTable {
    names: Vec<String>,
    shapes: Vec<TensorShape>,
}

impl SlotTable {
    pub fn add(&mut self, name: String, shape: TensorShape) -> SlotId {
        self.names.push(name);
        self.shapes.push(shape);
        self.names.len() - 1
    }

    pub fn name(&self, id: SlotId) -> &str {
        &self.names[id]
    }

    pub fn shape(&self, id: SlotId) -> &TensorShape {
        &self.shapes[id]
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Term {
    pub slot: SlotId,
    pub left: QMatrix,
    pub right: QMatrix,
}

#[derive(Debug, Clone)]
pub(crate) struct Affine {
    pub constant: QMatrix,
    pub terms: Vec<Term>,
}

impl Affine {
    pub fn constant(c: QMatrix) -> Self {
        Affine { constant: c, terms: Vec::new() }
    }

    /// `left · U · right` with no constant part.
    pub fn term(slot: SlotId, left: QMatrix, right: QMatrix) -> Self {
        let constant = QMatrix::zeros(left.rows(), right.cols());
        Affine { constant, terms: vec![Term { slot, left, right }] }
    }

    pub fn rows(&self) -> usize {
        self.constant.rows()
    }

    pub fn cols(&self) -> usize {
        self.constant.cols()
    }

    pub fn lmul(&self, p: &QMatrix) -> Result<Affine> {
        let terms = self
            .terms
            .iter()
            .map(|t| Ok(Term { slot: t.slot, left: p.matmul(&t.left)?, right: t.right.clone() }))
            .collect::<Result<_>>()?;
        Ok(Affine { constant: p.matmul(&self.constant)?, terms })
    }

    pub fn rmul(&self, q: &QMatrix) -> Result<Affine> {
        let terms = self
            .terms
            .iter()
            .map(|t| Ok(Term { slot: t.slot, left: t.left.clone(), right: t.right.matmul(q)? }))
            .collect::<Result<_>>()?;
        Ok(Affine { constant: self.constant.matmul(q)?, terms })
    }

    pub fn sandwich(&self, p: &QMatrix, q: &QMatrix) -> Result<Affine> {
        self.lmul(p)?.rmul(q)
    }

    pub fn add(&self, other: &Affine) -> Result<Affine> {
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Ok(Affine { constant: self.constant.add(&other.constant)?, terms })
    }

    pub fn neg(&self) -> Affine {
        Affine {
            constant: self.constant.neg(),
            terms: self.terms.iter().map(|t| Term { slot: t.slot, left: t.left.neg(), right: t.right.clone() }).collect(),
        }
    }

    pub fn sub(&self, other: &Affine) -> Result<Affine> {
        self.add(&other.neg())
    }

    pub fn row_block(&self, r: std::ops::Range<usize>) -> Affine {
        Affine {
            constant: self.constant.row_block(r.clone()),
            terms: self
                .terms
                .iter()
                .map(|t| Term { slot: t.slot, left: t.left.row_block(r.clone()), right: t.right.clone() })
                .collect(),
        }
    }

    pub fn col_block(&self, c: std::ops::Range<usize>) -> Affine {
        Affine {
            constant: self.constant.col_block(c.clone()),
            terms: self
                .terms
                .iter()
                .map(|t| Term { slot: t.slot, left: t.left.clone(), right: t.right.col_block(c.clone()) })
                .collect(),
        }
    }

    /// Replaces every occurrence of the mapped slots by their expressions.
    pub fn substitute(&self, map: &HashMap<SlotId, Affine>) -> Result<Affine> {
        let mut constant = self.constant.clone();
        let mut terms = Vec::with_capacity(self.terms.len());
        for t in &self.terms {
            match map.get(&t.slot) {
                None => terms.push(t.clone()),
                Some(e) => {
                    constant = constant.add(&t.left.matmul(&e.constant)?.matmul(&t.right)?)?;
                    for inner in &e.terms {
                        terms.push(Term {
                            slot: inner.slot,
                            left: t.left.matmul(&inner.left)?,
                            right: inner.right.matmul(&t.right)?,
                        });
                    }
                }
            }
        }
        Ok(Affine { constant, terms }.compact())
    }

    /// Merges terms sharing a slot and an identical left or right factor.
    pub fn compact(self) -> Affine {
        let mut out: Vec<Term> = Vec::with_capacity(self.terms.len());
        for t in self.terms {
            if let Some(prev) = out.iter_mut().find(|p| p.slot == t.slot && p.left == t.left) {
                prev.right = prev.right.add(&t.right).expect("terms of one expression share sizes");
            } else if let Some(prev) = out.iter_mut().find(|p| p.slot == t.slot && p.right == t.right) {
                prev.left = prev.left.add(&t.left).expect("terms of one expression share sizes");
            } else {
                out.push(t);
            }
        }
        Affine { constant: self.constant, terms: out }
    }

    /// Evaluates with the given slot values; slots without a value are zero.
    #[cfg(test)]
    pub fn eval(&self, value: impl Fn(SlotId) -> Option<QMatrix>) -> Result<QMatrix> {
        let mut acc = self.constant.clone();
        for t in &self.terms {
            if let Some(u) = value(t.slot) {
                if u.rows() != t.left.cols() || u.cols() != t.right.rows() {
                    return Err(crate::error::Error::ShapeMismatch(format!(
                        "slot value is {}x{}, expected {}x{}",
                        u.rows(),
                        u.cols(),
                        t.left.cols(),
                        t.right.rows()
                    )));
                }
                acc = acc.add(&t.left.matmul(&u)?.matmul(&t.right)?)?;
            }
        }
        Ok(acc)
    }

    /// Slots referenced by this expression, in id order.
    pub fn slots(&self) -> Vec<SlotId> {
        let mut s: Vec<SlotId> = self.terms.iter().map(|t| t.slot).collect();
        s.sort_unstable();
        s.dedup();
        s
    }
}
