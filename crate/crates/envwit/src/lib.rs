//! Certified upper bounds on outcome-sequence probabilities for repeated
//! measure-and-prepare probes of an open quantum system, as witnesses of the
//! environment (memory) dimension.
//!
//! A probe system S is measured and re-prepared after each interaction with an
//! unknown environment E of dimension `d_E`; the joint evolution is an unknown
//! unitary on E ⊗ S repeated between probes. The maximal probability of any
//! fixed outcome sequence, optimized over all unitaries and environment states,
//! is a function `ω(ā | d_E)` of the sequence and the environment dimension.
//! Observing a sequence more often than `ω(ā | d)` certifies `d_E > d`.
//!
//! The crate computes:
//!
//! - exact memoryless (`d_E = 1`) bounds by convex analysis ([`analytic`]),
//! - a convergent hierarchy of semidefinite upper bounds for any `d_E`,
//!   built from a de Finetti relaxation over N exchangeable copies of the
//!   normalized Choi matrix of the unknown unitary ([`relaxation`]),
//! - a symmetric-subspace compression of that hierarchy and a further
//!   combinatorial sparsity reduction to block-diagonal form ([`symmetric`],
//!   [`sparse`]),
//! - heuristic lower bounds by gradient ascent over the unitary group
//!   ([`search`]),
//! - solver-independent SDP modelling, SDPA sparse-format export/import, and a
//!   bundled interior-point backend ([`sdp`]).
//!
//! Upper and lower bounds sandwich the true optimum; together with the exact
//! `d_E = 1` values they make the reported violations operationally meaningful.

pub mod analytic;
pub mod error;
pub(crate) mod linalg;
pub mod quantum;
pub mod relaxation;
pub mod sdp;
pub mod search;
pub mod sparse;
pub mod symmetric;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Numerical tolerance below which structurally-zero entries are dropped.
///
/// Used consistently by objective assembly, realification checks and the
/// sparsity analysis, so that "zero" means the same thing everywhere.
pub const ZERO_TOL: f64 = 1e-12;
