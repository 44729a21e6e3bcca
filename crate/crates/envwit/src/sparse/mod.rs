//! Sparsity exploitation for trace-constrained SDPs.
//!
//! When the objective touches only a few matrix entries, the optimizer can
//! often be restricted to a block-diagonal support without changing the
//! optimum. The algorithm: seed a sparsity pattern from the objective's
//! support plus the diagonal, repeatedly (a) merge in the support of every
//! constraint that touches the pattern and (b) complete the connected
//! components of the pattern's adjacency graph, until stable. The stable
//! pattern's components become PSD blocks of a reduced problem containing
//! only the touching constraints.
//!
//! Dropping the untouched constraints makes the reduced problem an outer
//! approximation (its optimum can only be larger, preserving upper-bound
//! semantics); when every dropped constraint is homogeneous (`rhs = 0`) the
//! reduction is *exact*: block-diagonal restriction of any feasible point is
//! again feasible (a pinching), so the optima coincide.
//!
//! Constraints are consumed through the [`ConstraintSource`] abstraction so
//! that very large constraint families can be scanned lazily by reverse
//! lookup instead of being materialized; [`reduce_problem`] is the eager
//! convenience wrapper for problems that already exist in memory.

mod pattern;
mod reduce;

pub use pattern::{
    base_sparsity, complete_components, effective_sparsity, extend_sparsity, SparsityPattern,
};
pub(crate) use pattern::UnionFind;
pub use reduce::{
    reduce_problem, reduce_with_source, ConstraintSource, MaterializedConstraints,
    ReductionReport, ReductionResult,
};
