use thiserror::Error;

use crate::instance::{Diagnostic, LineId, ScenarioId};
use crate::lp::{LpError, LpStatus};

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },

    #[error("instance failed validation ({} problem(s)): {}", .0.len(), join_diagnostics(.0))]
    Validation(Vec<Diagnostic>),

    #[error("case file line {line}: {message}")]
    CaseFormat { line: usize, message: String },

    #[error("unknown candidate line {0}")]
    UnknownCandidate(LineId),

    #[error("unknown scenario {0}")]
    UnknownScenario(ScenarioId),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("start plan is not feasible (violation {0:.6})")]
    InfeasibleStart(f64),

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("LP solve stopped with status {0:?}")]
    LpStatus(LpStatus),

    #[error(transparent)]
    Lp(#[from] LpError),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn join_diagnostics(diags: &[Diagnostic]) -> String {
    diags.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("; ")
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
