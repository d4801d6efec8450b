use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// The three hypotheses under which jets admit a horizontal extension.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Condition {
    /// F, G, H are Whitney fields of class C^{m,ω}.
    WhitneyField,
    /// H^k agrees with the Leibniz expansion of the horizontal bracket.
    Leibniz,
    /// |A| ≤ Ĉ V on every pair of K.
    AreaVelocity,
}

impl Condition {
    pub fn number(self) -> u8 {
        match self {
            Condition::WhitneyField => 1,
            Condition::Leibniz => 2,
            Condition::AreaVelocity => 3,
        }
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Condition::WhitneyField => "Whitney field of class C^{m,w}",
            Condition::Leibniz => "Leibniz vertical jet consistency",
            Condition::AreaVelocity => "area/velocity ratio bound",
        };
        write!(f, "condition ({}) {}", self.number(), name)
    }
}

/// One failed hypothesis together with the measured quantity that failed it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionFailure {
    pub condition: Condition,
    pub measured: f64,
    pub limit: f64,
    pub detail: String,
}

impl fmt::Display for ConditionFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} failed: measured {:.6e} exceeds limit {:.6e} ({})",
            self.condition, self.measured, self.limit, self.detail
        )
    }
}

fn join_failures(failures: &[ConditionFailure]) -> String {
    failures
        .iter()
        .map(|c| c.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("inconsistent data: {0}")]
    InconsistentData(String),

    #[error("validation failed: {}", join_failures(.failures))]
    Validation { failures: Vec<ConditionFailure> },

    #[error(
        "gap [{a}, {b}] is not admissible: perturbation sup-norm {sup_norm:.6e} exceeds sqrt(gap) = {bound:.6e}; \
         data implies an area/velocity constant of at least {implied_constant:.6e}"
    )]
    Admissibility {
        a: f64,
        b: f64,
        sup_norm: f64,
        bound: f64,
        implied_constant: f64,
    },

    #[error("insufficient resolution: {0}")]
    Resolution(String),

    #[error("coverage target not reached: best discarded measure {achieved:.6e} >= target {target:.6e}")]
    Coverage { achieved: f64, target: f64 },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("schema error: {0}")]
    Schema(String),
}

impl From<serde_json::Error> for Error {
    fn from(err: serde_json::Error) -> Self {
        Error::Schema(err.to_string())
    }
}

impl Error {
    /// Conditions named by a validation failure, empty for every other error.
    pub fn failed_conditions(&self) -> Vec<Condition> {
        match self {
            Error::Validation { failures } => failures.iter().map(|f| f.condition).collect(),
            _ => Vec::new(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
