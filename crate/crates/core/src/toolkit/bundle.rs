//! JSON file formats for instances and solutions.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::generate::GeneratedInstance;
use super::{System, SystemKind};
use crate::error::{Error, Result};
use crate::tensor::QTensor;

/// `{"kind": ..., "coefficients": {name: tensor}, "rhs": [...], "witness": {...}?, "seed": n}`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceBundle {
    pub kind: SystemKind,
    pub coefficients: BTreeMap<String, QTensor>,
    pub rhs: Vec<QTensor>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<BTreeMap<String, QTensor>>,
    #[serde(default)]
    pub seed: u64,
}

impl InstanceBundle {
    pub fn from_json(text: &str) -> Result<InstanceBundle> {
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("instance bundle: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("bundle serializes")
    }

    pub fn system(&self) -> Result<System> {
        System::new(self.kind, self.coefficients.clone(), self.rhs.clone())
    }
}

impl From<&GeneratedInstance> for InstanceBundle {
    fn from(g: &GeneratedInstance) -> Self {
        InstanceBundle {
            kind: g.system.kind(),
            coefficients: g.system.coefficients().clone(),
            rhs: g.system.rhs().to_vec(),
            witness: g.witness.clone(),
            seed: g.seed,
        }
    }
}

/// `{"unknowns": {name: tensor}}`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionFile {
    pub unknowns: BTreeMap<String, QTensor>,
}

impl SolutionFile {
    pub fn from_json(text: &str) -> Result<SolutionFile> {
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("solution file: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("solution serializes")
    }
}
