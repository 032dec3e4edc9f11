use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid input field `{field}`: {reason}")]
    Validation { field: &'static str, reason: String },
    #[error("Bi overflows at x = {0}; use airy_eval_scaled")]
    Overflow(f64),
    #[error("degenerate factor: {0}")]
    DegenerateFactor(String),
    #[error("lambda = 0 is the square-well limit; use the swlimit module")]
    SquareWellLimit,
    #[error("g factor at a pole (asymptote) for beta = {0}")]
    Asymptote(f64),
    #[error("degenerate coefficient: {0}")]
    DegenerateCoefficient(String),
    #[error("quadrature did not converge: {0}")]
    Integration(String),
    #[error("normalization failed: {0}")]
    Normalization(String),
    #[error("basis is not orthonormal: {0}")]
    Basis(String),
    #[error("jump prescription is infeasible: {0}")]
    InfeasibleJump(String),
    #[error("undefined ratio: {0}")]
    UndefinedRatio(String),
    #[error("factorization breakdown: {0}")]
    Factorization(String),
    #[error("root search failed: {0}")]
    RootFinding(String),
}

impl Error {
    /// True for errors caused by the caller's input rather than by the numerics.
    pub fn is_input_error(&self) -> bool {
        matches!(self, Error::Domain(_) | Error::Validation { .. } | Error::SquareWellLimit | Error::UndefinedRatio(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
