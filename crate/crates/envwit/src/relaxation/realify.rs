//! Mapping complex-data SDPs to real arithmetic for the solver.
//!
//! A complex Hermitian block `H` embeds as the real symmetric block
//!
//! ```text
//!   T(H) = [ Re H   −Im H ]
//!          [ Im H    Re H ]
//! ```
//!
//! `T` is a *-homomorphism (`T(AB) = T(A)T(B)`, `T(A†) = T(A)ᵀ`) and
//! `Tr[T(A)] = 2·Tr[A]` for Hermitian `A`, so scaling all data matrices by
//! `1/2` preserves every constraint value and the objective. `T(H) ⪰ 0` iff
//! `H ⪰ 0`, and any real feasible point can be replaced by its average with
//! the conjugation by `J = T(i·1)` — which commutes with every data matrix —
//! to land back on the image of `T` without changing the objective. The real
//! problem therefore has exactly the complex optimum.

use num_complex::Complex64;

use crate::linalg::c;
use crate::sdp::{RealifyMode, SdpConstraint, SdpProblem, SparseHermitian};

/// Produces a real-data copy of the problem, choosing the cheapest sound
/// route: data that is already real to within [`crate::ZERO_TOL`] merely has its
/// (noise-level) imaginary parts dropped, anything else goes through the
/// doubled embedding of [`realify_embedded`]. The route taken is recorded in
/// `metadata.realify_mode`.
pub fn realify(problem: &SdpProblem) -> SdpProblem {
    if problem.is_real() {
        let strip = |m: &SparseHermitian| {
            SparseHermitian::from_entries(
                m.dim(),
                m.entries().iter().map(|&(r, col, v)| (r, col, c(v.re, 0.0))).collect(),
            )
        };
        let mut real = SdpProblem::new(
            problem.blocks.clone(),
            strip(&problem.objective),
            problem
                .constraints
                .iter()
                .map(|cst| SdpConstraint { matrix: strip(&cst.matrix), rhs: cst.rhs })
                .collect(),
        );
        real.metadata = problem.metadata.clone();
        real.metadata.realify_mode = Some(RealifyMode::AlreadyReal);
        return real;
    }
    realify_embedded(problem)
}

/// Unconditionally applies the doubled embedding: every block of size `m`
/// becomes a real block of size `2m`, every data matrix `M` becomes
/// `T(M)/2`, right-hand sides and the optimum are unchanged.
pub fn realify_embedded(problem: &SdpProblem) -> SdpProblem {
    let layout = problem.layout();
    let blocks: Vec<usize> = problem.blocks.iter().map(|&b| 2 * b).collect();
    let new_offsets: Vec<usize> = {
        let mut acc = 0;
        problem
            .blocks
            .iter()
            .map(|&b| {
                let off = acc;
                acc += 2 * b;
                off
            })
            .collect()
    };

    let embed = |m: &SparseHermitian| {
        let mut out: Vec<(usize, usize, Complex64)> = Vec::with_capacity(4 * m.len());
        for &(r, col, v) in m.entries() {
            let (b, lr) = layout.locate(r);
            let (bc, lc) = layout.locate(col);
            debug_assert_eq!(b, bc, "entry ({r},{col}) straddles blocks");
            let off = new_offsets[b];
            let size = layout.block_dim(b);
            out.push((off + lr, off + lc, c(0.5 * v.re, 0.0)));
            out.push((off + size + lr, off + size + lc, c(0.5 * v.re, 0.0)));
            out.push((off + size + lr, off + lc, c(0.5 * v.im, 0.0)));
            out.push((off + lr, off + size + lc, c(-0.5 * v.im, 0.0)));
        }
        SparseHermitian::from_entries(2 * m.dim(), out)
    };

    let mut real = SdpProblem::new(
        blocks,
        embed(&problem.objective),
        problem
            .constraints
            .iter()
            .map(|cst| SdpConstraint { matrix: embed(&cst.matrix), rhs: cst.rhs })
            .collect(),
    );
    real.metadata = problem.metadata.clone();
    real.metadata.realify_mode = Some(RealifyMode::Embedded);
    real
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sdp::{solve, SolverConfig};
    use crate::Error;

    fn trace_constraint(dim: usize) -> SdpConstraint {
        SdpConstraint {
            matrix: SparseHermitian::from_entries(
                dim,
                (0..dim).map(|k| (k, k, c(1.0, 0.0))).collect(),
            ),
            rhs: 1.0,
        }
    }

    /// max Tr[F X], Tr X = 1, X ⪰ 0 — the answer is λ_max(F).
    fn real_toy() -> SdpProblem {
        let objective = SparseHermitian::from_entries(
            2,
            vec![
                (0, 0, c(1.0, 0.0)),
                (0, 1, c(2.0, 0.0)),
                (1, 0, c(2.0, 0.0)),
                (1, 1, c(1.0, 0.0)),
            ],
        );
        SdpProblem::new(vec![2], objective, vec![trace_constraint(2)])
    }

    fn complex_toy() -> SdpProblem {
        let objective = SparseHermitian::from_entries(
            2,
            vec![(0, 1, c(0.0, -1.0)), (1, 0, c(0.0, 1.0))],
        );
        SdpProblem::new(vec![2], objective, vec![trace_constraint(2)])
    }

    #[test]
    fn real_data_is_stripped_not_doubled() {
        let problem = real_toy();
        let real = realify(&problem);
        assert_eq!(real.blocks, vec![2]);
        assert_eq!(real.metadata.realify_mode, Some(RealifyMode::AlreadyReal));
        let value = solve(&real, &SolverConfig::default()).unwrap().value.unwrap();
        assert!((value - 3.0).abs() < 1e-6, "largest eigenvalue is 3, got {value}");
    }

    #[test]
    fn complex_data_requires_realification_and_embeds_correctly() {
        let problem = complex_toy();
        assert!(matches!(
            solve(&problem, &SolverConfig::default()),
            Err(Error::ComplexNotRealified { .. })
        ));

        let real = realify(&problem);
        assert_eq!(real.blocks, vec![4]);
        assert_eq!(real.metadata.realify_mode, Some(RealifyMode::Embedded));
        assert!(real.is_real());
        assert!(real.validate().is_empty());
        let value = solve(&real, &SolverConfig::default()).unwrap().value.unwrap();
        assert!((value - 1.0).abs() < 1e-6, "largest eigenvalue is 1, got {value}");
    }

    #[test]
    fn both_routes_agree_on_real_data() {
        let problem = real_toy();
        let stripped = solve(&realify(&problem), &SolverConfig::default()).unwrap();
        let embedded = solve(&realify_embedded(&problem), &SolverConfig::default()).unwrap();
        let (a, b) = (stripped.value.unwrap(), embedded.value.unwrap());
        assert!((a - b).abs() < 1e-6, "stripped {a} vs embedded {b}");
    }

    #[test]
    fn embedding_maps_entries_blockwise() {
        // Two blocks, complex entry in the second: the image must land at
        // the second doubled block's offset with the (Re, ±Im) layout.
        let objective = SparseHermitian::from_entries(
            5,
            vec![
                (0, 0, c(2.0, 0.0)),
                (2, 3, c(1.0, 4.0)),
                (3, 2, c(1.0, -4.0)),
            ],
        );
        let problem = SdpProblem::new(vec![2, 3], objective, vec![]);
        let real = realify_embedded(&problem);
        assert_eq!(real.blocks, vec![4, 6]);

        let dense = real.objective.dense();
        // Block 0 (offset 0, size 2): entry (0,0) duplicated on the diagonal.
        assert_eq!(dense[(0, 0)], c(1.0, 0.0));
        assert_eq!(dense[(2, 2)], c(1.0, 0.0));
        // Block 1 (new offset 4, size 3): local (0,1) ↦ Re/2 at (4,5) and
        // (7,8), +Im/2 at (7,5), −Im/2 at (4,8); the mirrored source entry
        // lands transposed.
        assert_eq!(dense[(4, 5)], c(0.5, 0.0));
        assert_eq!(dense[(7, 8)], c(0.5, 0.0));
        assert_eq!(dense[(7, 5)], c(2.0, 0.0));
        assert_eq!(dense[(4, 8)], c(-2.0, 0.0));
        assert_eq!(dense[(5, 4)], c(0.5, 0.0));
        assert_eq!(dense[(8, 7)], c(0.5, 0.0));
        assert_eq!(dense[(5, 7)], c(2.0, 0.0));
        assert_eq!(dense[(8, 4)], c(-2.0, 0.0));

        assert!(real.validate().is_empty());
    }
}
