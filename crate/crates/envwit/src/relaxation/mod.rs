//! The convergent hierarchy of semidefinite relaxations.
//!
//! Level `N` replaces the intractable optimization over unitaries with an
//! SDP over an `N`-copy exchangeable extension of the channel's normalized
//! Choi matrix. Every admissible environment yields a feasible point whose
//! objective value is its exact sequence probability, so each level's
//! optimum is a certified upper bound; the levels decrease (up to the
//! explicit de Finetti error term) and converge to the true supremum as
//! `N → ∞`.
//!
//! Two encodings of the same feasible set are offered: a
//! [`Representation::Symmetric`] form on the type (occupation-number) basis,
//! whose dimension grows polynomially in `N`, and a
//! [`Representation::FullSpace`] form on the raw tensor power, exponentially
//! large but able to carry partial-transpose blocks that tighten low levels.

mod builder;
mod error_bound;
mod grid;
mod realify;
mod spec;

pub use builder::{build_reduced_relaxation, build_relaxation};
pub use error_bound::definetti_error_bound;
pub use grid::QuadrupleGrid;
pub use realify::{realify, realify_embedded};
pub use spec::{RelaxationSpec, Representation, DEFAULT_SCALAR_BUDGET};
