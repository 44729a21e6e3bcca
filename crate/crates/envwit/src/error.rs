//! Error type shared across the crate.

use thiserror::Error;

/// Errors produced by protocol validation, relaxation construction, solving
/// and file I/O.
#[derive(Debug, Error)]
pub enum Error {
    /// Two operands (or an operand and a declared dimension) disagree.
    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    /// A matrix that must be unitary is not, within tolerance.
    #[error("matrix is not unitary (max |U†U - 1| = {deviation:.3e})")]
    NotUnitary { deviation: f64 },

    /// Kraus operators that fail the completeness relation Σ K†K = 1.
    #[error("kraus operators do not form an instrument (max |ΣK†K - 1| = {deviation:.3e})")]
    NotAnInstrument { deviation: f64 },

    /// An instrument with more branches than the probe system can record.
    #[error("{outcomes} kraus operators cannot be recorded in a dimension-{d_s} probe")]
    TooManyOutcomes { outcomes: usize, d_s: usize },

    /// A protocol failed one or more structural checks.
    #[error("invalid protocol: {}", issues.join("; "))]
    InvalidProtocol { issues: Vec<String> },

    /// An SDP failed structural validation before solving or export.
    #[error("invalid sdp: {}", issues.join("; "))]
    InvalidProblem { issues: Vec<String> },

    /// An outcome sequence refers to symbols outside the protocol alphabet,
    /// or is empty.
    #[error("invalid outcome sequence: {0}")]
    InvalidSequence(String),

    /// A requested relaxation would exceed the configured size budget.
    #[error("problem size {estimate} exceeds budget {budget} ({context})")]
    IntractableSize {
        context: &'static str,
        estimate: u128,
        budget: u128,
    },

    /// A problem with non-negligible imaginary parts reached a stage that
    /// requires real data (export or the numerical solver).
    #[error("problem has complex entries (max |Im| = {max_imag:.3e}); realify it first")]
    ComplexNotRealified { max_imag: f64 },

    /// The solver terminated without a usable bound.
    #[error("solver failed: {status}")]
    SolverFailure { status: String },

    /// An unknown solver backend was requested.
    #[error("solver backend '{name}' is not available")]
    SolverUnavailable { name: String },

    /// Sparsity analysis found a single dense block, so block reduction
    /// cannot help; callers should solve the original problem.
    #[error("no sparsity reduction possible: the coupling graph is a single dense component")]
    NoReduction,

    /// A structured input file could not be parsed.
    #[error("parse error ({format}): {message}")]
    Parse { format: &'static str, message: String },

    /// Exact integer arithmetic overflowed the supported range.
    #[error("integer overflow computing {context}")]
    Overflow { context: &'static str },

    /// Single-party decomposition of a type with no copies.
    #[error("cannot decompose the empty type (zero copies)")]
    EmptyType,

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn parse(format: &'static str, message: impl Into<String>) -> Self {
        Error::Parse { format, message: message.into() }
    }
}
