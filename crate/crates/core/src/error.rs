use thiserror::Error;

use crate::pattern::Diagnostic;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid colored pattern matrix: {}", render_diagnostics(.0))]
    Invalid(Vec<Diagnostic>),

    #[error("expected a square matrix, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix has more rows than columns ({rows}x{cols})")]
    TooManyRows { rows: usize, cols: usize },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("no state dimension: pass --n or use a `dims p q n` header")]
    MissingStateDim,

    #[error("assignment has no value for color {0}")]
    MissingColor(String),

    #[error("color {0} is a nonzero color but was assigned zero")]
    ZeroStar(String),

    #[error("trace step {step} does not replay: {reason}")]
    InvalidTrace { step: usize, reason: String },

    #[error("unknown command `{0}`")]
    UnknownCommand(String),

    #[error("{what} budget exceeded (limit {limit})")]
    BudgetExceeded { what: &'static str, limit: usize },
}

fn render_diagnostics(diags: &[Diagnostic]) -> String {
    diags
        .iter()
        .map(|d| d.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}
