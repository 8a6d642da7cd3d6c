use thiserror::Error;

use crate::model::Violation;

#[derive(Debug, Error)]
pub enum Error {
    #[error("spec error at {locus}: {message}")]
    Spec { locus: String, message: String },

    #[error("unknown {kind} `{name}`")]
    Unknown { kind: &'static str, name: String },

    #[error("invalid instance: {}", render_violations(.0))]
    Invalid(Vec<Violation>),

    #[error("policy enumeration would visit {needed} policies, above the cap of {cap}; use the reduction solver")]
    PolicyCap { needed: String, cap: u64 },

    #[error("trajectory support exceeds the cap of {cap}")]
    TrajectoryCap { cap: usize },

    #[error("history graph exceeds the cap of {cap} augmented states")]
    HistoryCap { cap: usize },

    #[error("the history-dependent optimum is not attained by any Markov policy")]
    NotMarkovAttainable,

    #[error("operation requires a deterministic instance")]
    NonDeterministic,

    #[error("instance is not 2-reward: {0}")]
    NotTwoReward(String),

    #[error("{0}")]
    Unsupported(String),

    #[error("policy has no action for {0}")]
    PolicyIncomplete(String),

    #[error("horizon must be at least 1")]
    ZeroHorizon,

    #[error("constraint `{label}` failed: {detail}")]
    Constraint { label: String, detail: String },
}

impl Error {
    pub fn spec(locus: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Spec {
            locus: locus.into(),
            message: message.into(),
        }
    }

    /// Resource guards are refusals rather than input errors.
    pub fn is_guard(&self) -> bool {
        matches!(
            self,
            Error::PolicyCap { .. } | Error::TrajectoryCap { .. } | Error::HistoryCap { .. }
        )
    }
}

fn render_violations(v: &[Violation]) -> String {
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

pub type Result<T> = std::result::Result<T, Error>;
