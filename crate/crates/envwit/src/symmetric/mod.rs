//! The symmetric subspace of `(C^d)^{⊗n}` indexed by occupation types.
//!
//! A *type* records how many of the `n` tensor factors carry each of the `d`
//! local basis labels; the symmetric subspace has one orthonormal basis
//! vector per type,
//!
//! ```text
//! |sym(t)⟩ = multinomial(t)^{-1/2} · Σ_{words w of type t} |w⟩,
//! ```
//!
//! so its dimension is `binomial(n + d - 1, n)` instead of `d^n`. Operators
//! that commute with permutations are fully described by their compression
//! `x = V (X ⊗ 1) V†` onto this basis, which is what makes the exchangeable
//! relaxation of the bound hierarchy tractable.
//!
//! This module enumerates types in a fixed (colexicographic) order, computes
//! exact multinomial normalizations, splits types across subsets of tensor
//! factors, and compresses factored objective operators without ever
//! materializing the `d^n`-dimensional space.

mod project;
mod space;
mod types;

pub use project::{project_objective, project_paths, project_paths_scaled};
pub use space::{enumerate_types, symmetric_dimension, SymSpace};
pub use types::{
    multinomial, multinomial_f64, single_party_decompose, split_type, word_type,
    DecompositionTerm, TypeVector,
};
