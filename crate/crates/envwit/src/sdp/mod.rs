//! Solver-neutral semidefinite-program model, solving, and interchange.
//!
//! A problem is `maximize Tr[F·X]` over a block-diagonal PSD variable `X`,
//! subject to affine trace constraints `Tr[C_k·X] = b_k`. Everything is
//! stored sparsely; matrices are Hermitian (problems with genuinely complex
//! data must be realified before solving or export, see
//! [`realify`](crate::relaxation::realify)).
//!
//! Solving is delegated to a bundled interior-point backend behind a small
//! adapter ([`solve`]). Because every problem built by this crate is itself
//! an upper-bound relaxation, the adapter reports both the raw solver value
//! and a `safe_value` inflated by the duality gap, so that solver
//! under-convergence can never under-report a certified bound. Problems can
//! also be exported to (and re-imported from) the sparse SDPA `.dat-s` format
//! for use with external solvers.

mod problem;
mod sdpa;
mod solve;

pub use problem::{
    ProblemMetadata, RealifyMode, SdpConstraint, SdpProblem, SparseHermitian,
};
pub use sdpa::{export_sdpa, import_sdpa, write_sdpa};
pub use solve::{solve, BoundResult, Residuals, SolveStatus, SolverConfig};
