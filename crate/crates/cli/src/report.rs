//! The JSON report every command prints.

use serde::{Deserialize, Serialize};

use qts_core::matrix::PenroseResiduals;
use qts_core::solvers::ConditionResidual;
use qts_core::toolkit::{EquationResidual, SystemKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    /// `solve`: every condition holds.
    Consistent,
    /// `solve`: at least one condition fails.
    Inconsistent,
    /// `verify`: every normalized residual is below the tolerance.
    Verified,
    /// `verify`: some residual is not.
    Rejected,
    /// `gen`: an instance was written.
    Generated,
    /// `pinv`: the inverse was computed.
    Computed,
}

impl Verdict {
    pub fn exit_code(self) -> i32 {
        match self {
            Verdict::Inconsistent | Verdict::Rejected => 2,
            _ => 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol_res: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rank_tol: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    /// Arguments after the program name.
    pub command: Vec<String>,
    pub tolerances: Tolerances,
    pub verdict: Verdict,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<SystemKind>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub conditions: Vec<ConditionResidual>,
    /// Labels of the failed conditions.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub violated: Vec<String>,
    /// Per-equation substitution residuals of the written or checked solution.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub residuals: Vec<EquationResidual>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub penrose: Option<PenroseResiduals>,
    #[serde(default)]
    pub outputs: Vec<String>,
    /// Wall-clock milliseconds, only with `--timing`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub duration_ms: Option<f64>,
}

impl RunReport {
    pub fn new(command: Vec<String>, tolerances: Tolerances, verdict: Verdict) -> RunReport {
        RunReport {
            command,
            tolerances,
            verdict,
            kind: None,
            conditions: Vec::new(),
            violated: Vec::new(),
            residuals: Vec::new(),
            penrose: None,
            outputs: Vec::new(),
            duration_ms: None,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> serde_json::Result<RunReport> {
        serde_json::from_str(text)
    }
}
