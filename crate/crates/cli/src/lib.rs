//! Library side of the `boundedflow` command: configuration, the four
//! pipelines and their artifacts.
//!
//! Exit statuses: 0 success, 2 configuration error, 3 hypothesis or
//! condition violation, 4 non-convergence.

pub mod commands;
pub mod config;
pub mod hypotheses;
pub mod output;
pub mod verify;

use std::fmt;

pub use commands::{cmd_attract, cmd_hypotheses, cmd_solve, cmd_verify, Outcome, RunManifest};
pub use config::{AttractConfig, ProblemSpec, RunConfig};

#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    Config(String),
    Hypothesis(String),
    Numerical(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) | Self::Io(_) => 2,
            Self::Hypothesis(_) => 3,
            Self::Numerical(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Config(m) => write!(f, "configuration error: {m}"),
            Self::Hypothesis(m) => write!(f, "hypothesis violation: {m}"),
            Self::Numerical(m) => write!(f, "numerical failure: {m}"),
            Self::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<boundedflow::Error> for CliError {
    fn from(e: boundedflow::Error) -> Self {
        use boundedflow::Error as E;
        let msg = e.to_string();
        match e {
            E::InvalidArgument(_) | E::UnknownName { .. } | E::Unsupported(_) => Self::Config(msg),
            E::HypothesisViolation(_) | E::ConditionViolation { .. } | E::Precondition { .. } => {
                Self::Hypothesis(msg)
            }
            E::Evaluation { .. } | E::Tolerance { .. } => Self::Numerical(msg),
        }
    }
}
