//! Error type shared by every module of the crate.

use thiserror::Error;

/// Errors raised by the (s,t)-calculus library.
///
/// Variant names are stable and machine-readable; the CLI maps them to
/// exit codes (2 for domain errors, 3 for non-convergence).
#[derive(Debug, Clone, PartialEq, Error)]
pub enum StError {
    /// Parameter pair (s,t) outside the admissible region (s = 0, a negative
    /// discriminant s^2+4t, or a vanishing Fibonacci constant).
    #[error("degenerate parameters: {0}")]
    DegenerateParams(String),

    /// Operation requires q != 1 but the parameters have a zero discriminant.
    #[error("degenerate q (|q| = 1): {0}")]
    DegenerateQ(String),

    /// A sequence factor {k} vanished inside a fibotorial/fibonomial product.
    #[error("zero factor: {{{k}}} = 0 in product up to n = {n}")]
    ZeroFactor { k: u32, n: u32 },

    /// Two series built over different (s,t) parameters were combined.
    #[error("parameter mismatch between series operands")]
    ParamMismatch,

    /// Evaluation point lies outside the classified convergence domain.
    #[error("outside convergence domain: {0}")]
    OutsideDomain(String),

    /// Argument outside the domain of the function (e.g. x <= 0 for log_q).
    #[error("domain error: {0}")]
    DomainError(String),

    /// Feature deliberately not supported (e.g. q < 0 periodic functions,
    /// which need a complex logarithm branch).
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// An infinite-product factor denominator vanished.
    #[error("pole hit in product factor k = {k}")]
    PoleHit { k: usize },

    /// Lattice sum failed to meet the tolerance within the term cap.
    #[error("non-convergent sum: {0}")]
    NonConvergentSum(String),

    /// Successive-approximation differences grew for 3 consecutive iterations.
    #[error("non-convergent iteration: {0}")]
    NonConvergentIteration(String),

    /// Parameter combination matched by none of the S/T classification sets.
    #[error("unclassified parameter combination: {0}")]
    Unclassified(String),

    /// Expression syntax error with byte position and the expected token set.
    #[error("syntax error at byte {pos}: expected {expected}")]
    Syntax { pos: usize, expected: String },

    /// Malformed argument (bad rational literal, inconsistent lengths, ...).
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl StError {
    /// Stable machine-readable code, used in CLI JSON error output.
    pub fn code(&self) -> &'static str {
        match self {
            StError::DegenerateParams(_) => "DegenerateParams",
            StError::DegenerateQ(_) => "DegenerateQ",
            StError::ZeroFactor { .. } => "ZeroFactor",
            StError::ParamMismatch => "ParamMismatch",
            StError::OutsideDomain(_) => "OutsideDomain",
            StError::DomainError(_) => "DomainError",
            StError::Unsupported(_) => "Unsupported",
            StError::PoleHit { .. } => "PoleHit",
            StError::NonConvergentSum(_) => "NonConvergentSum",
            StError::NonConvergentIteration(_) => "NonConvergentIteration",
            StError::Unclassified(_) => "Unclassified",
            StError::Syntax { .. } => "SyntaxError",
            StError::InvalidArgument(_) => "InvalidArgument",
        }
    }

    /// True for errors that signal a failed numeric process rather than a
    /// rejected input.
    pub fn is_non_convergence(&self) -> bool {
        matches!(
            self,
            StError::NonConvergentSum(_) | StError::NonConvergentIteration(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, StError>;
