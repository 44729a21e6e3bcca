//! Compression of factored objective operators onto the symmetric basis.

use std::collections::HashMap;

use num_complex::Complex64;

use crate::linalg::{c, CMatrix};
use crate::quantum::{ObjectiveOperator, ObjectivePath};
use crate::symmetric::{enumerate_types, multinomial_f64, word_type, SymSpace};
use crate::{Error, Result};

/// Compress the objective operator onto the symmetric basis of
/// `space.copies()` copies:
///
/// ```text
/// x[t, t'] = ⟨sym(t)| (X^T ⊗ 1) |sym(t')⟩,
/// ```
///
/// with `X^T` acting on the first `L` copies and the identity on the rest.
/// The full `d^N`-dimensional space is never materialized: each nonzero path
/// `(u⃗, v⃗)` of `X` contributes to exactly one entry per tail type `s`,
/// namely `(t, t') = (T(v⃗)+s, T(u⃗)+s)` with weight `multinomial(s)`, and
/// the final normalization is `(multinomial(t)·multinomial(t'))^{-1/2}`.
pub fn project_objective(objective: &ObjectiveOperator, space: &SymSpace) -> Result<CMatrix> {
    let local = objective.d_es() * objective.d_es();
    if space.local_dim() != local {
        return Err(Error::DimensionMismatch {
            context: "objective projection",
            expected: local,
            got: space.local_dim(),
        });
    }
    if space.copies() < objective.seq_len() {
        return Err(Error::DimensionMismatch {
            context: "objective projection (copies < sequence length)",
            expected: objective.seq_len(),
            got: space.copies(),
        });
    }
    project_paths(&objective.nonzero_paths(crate::ZERO_TOL), objective.seq_len(), space)
}

/// Path-level version of [`project_objective`], for operators given directly
/// by their nonzero entries on the first `seq_len` copies.
pub fn project_paths(
    paths: &[ObjectivePath],
    seq_len: usize,
    space: &SymSpace,
) -> Result<CMatrix> {
    let dim = space.dim();
    let mut x = CMatrix::zeros(dim, dim);
    for (r, cc, v) in project_paths_scaled(paths, seq_len, space)? {
        x[(r, cc)] += v;
    }
    let norms: Vec<f64> = space
        .types()
        .iter()
        .map(|t| multinomial_f64(t).sqrt())
        .collect();
    for r in 0..dim {
        for cc in 0..dim {
            let scale = 1.0 / (norms[r] * norms[cc]);
            x[(r, cc)] *= c(scale, 0.0);
        }
    }
    Ok(x)
}

/// Sparse projection in the *scaled* type basis: returns the entries of
/// `x̂[t,t'] = √(mult(t)·mult(t'))·x[t,t']`, i.e. the bare accumulated sums
/// `Σ_paths Σ_tails value·multinomial(tail)` with no inverse-square-root
/// normalization. This is the objective paired with the diagonally rescaled
/// variable `φ̂ = D⁻¹φD⁻¹`, `D = diag(√mult)`; entries stay exact rationals
/// whenever the path values are, and the full type-space matrix is never
/// allocated.
pub fn project_paths_scaled(
    paths: &[ObjectivePath],
    seq_len: usize,
    space: &SymSpace,
) -> Result<Vec<(usize, usize, Complex64)>> {
    let d = space.local_dim();
    let n = space.copies();
    if n < seq_len {
        return Err(Error::DimensionMismatch {
            context: "path projection (copies < sequence length)",
            expected: seq_len,
            got: n,
        });
    }
    let tails = enumerate_types(d, n - seq_len)?;
    let tail_weights: Vec<f64> = tails.types().iter().map(multinomial_f64).collect();

    let mut acc: HashMap<(usize, usize), Complex64> = HashMap::new();
    for path in paths {
        debug_assert_eq!(path.rows.len(), seq_len);
        let row_base = word_type(&path.cols, d);
        let col_base = word_type(&path.rows, d);
        for (tail, &weight) in tails.types().iter().zip(&tail_weights) {
            let t_row = row_base.plus(tail);
            let t_col = col_base.plus(tail);
            let r = space.index_of(&t_row).expect("type in enumeration");
            let cc = space.index_of(&t_col).expect("type in enumeration");
            *acc.entry((r, cc)).or_insert_with(|| c(0.0, 0.0)) += path.value * c(weight, 0.0);
        }
    }
    let mut entries: Vec<(usize, usize, Complex64)> =
        acc.into_iter().map(|((r, cc), v)| (r, cc, v)).collect();
    entries.sort_by_key(|&(r, cc, _)| (r, cc));
    Ok(entries)
}
