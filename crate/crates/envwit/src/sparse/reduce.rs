//! The reduction engine: runs the sparsity closure against a constraint
//! family, splits the variable into the resulting blocks, and reassembles a
//! smaller problem over the permuted coordinates.
//!
//! Constraints are consumed through [`ConstraintSource`] so that large
//! families (whose matrices follow a formula) never have to exist in memory
//! at once; an in-memory slice of constraints adapts via
//! [`MaterializedConstraints`].

use std::collections::{BTreeMap, HashMap, VecDeque};

use serde::Serialize;

use crate::error::Error;
use crate::sdp::{ProblemMetadata, SdpConstraint, SdpProblem, SparseHermitian};
use crate::Result;

use super::pattern::{base_sparsity, complete_components};

/// Streaming access to an indexed constraint family `Tr[C_k X] = b_k`.
///
/// The engine only ever asks for matrices of constraints it is about to
/// activate, plus a reverse lookup from a matrix coordinate to the ids of
/// the constraints structurally supported there. Implementations may answer
/// `touching` with duplicates or with ids whose entry at `(r, c)` is exactly
/// zero by coincidence of the formula; the engine tolerates both.
pub trait ConstraintSource {
    /// Side length of the (single-block) variable the constraints act on.
    fn dim(&self) -> usize;

    /// Number of constraints; valid ids are `0..len()`.
    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Right-hand side of constraint `id`.
    fn rhs(&self, id: usize) -> f64;

    /// Coefficient matrix of constraint `id`.
    fn matrix(&self, id: usize) -> SparseHermitian;

    /// Appends the ids of every constraint with a structural entry at
    /// `(r, c)` or `(c, r)`.
    fn touching(&self, r: usize, c: usize, out: &mut Vec<usize>);
}

/// [`ConstraintSource`] over a slice of already-materialized constraints,
/// backed by an inverted index from coordinates to constraint ids.
pub struct MaterializedConstraints<'a> {
    constraints: &'a [SdpConstraint],
    dim: usize,
    by_coord: HashMap<(usize, usize), Vec<usize>>,
}

impl<'a> MaterializedConstraints<'a> {
    /// Indexes `constraints` over a `dim × dim` variable. Entries at or
    /// below `zero_tol` in magnitude are structural zeros and not indexed.
    pub fn new(dim: usize, constraints: &'a [SdpConstraint], zero_tol: f64) -> Self {
        let mut by_coord: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
        for (id, cst) in constraints.iter().enumerate() {
            for &(r, c, v) in cst.matrix.entries() {
                if v.norm() > zero_tol {
                    let ids = by_coord.entry((r.min(c), r.max(c))).or_default();
                    if ids.last() != Some(&id) {
                        ids.push(id);
                    }
                }
            }
        }
        Self { constraints, dim, by_coord }
    }
}

impl ConstraintSource for MaterializedConstraints<'_> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn len(&self) -> usize {
        self.constraints.len()
    }

    fn rhs(&self, id: usize) -> f64 {
        self.constraints[id].rhs
    }

    fn matrix(&self, id: usize) -> SparseHermitian {
        self.constraints[id].matrix.clone()
    }

    fn touching(&self, r: usize, c: usize, out: &mut Vec<usize>) {
        if let Some(ids) = self.by_coord.get(&(r.min(c), r.max(c))) {
            out.extend_from_slice(ids);
        }
    }
}

/// Outcome of a reduction: the reassembled block-diagonal problem plus
/// everything needed to interpret it against the original coordinates.
#[derive(Debug, Clone)]
pub struct ReductionResult {
    /// The reduced problem; block `b` has size `blocks[b].len()` and its
    /// rows/columns are the original indices `blocks[b]` in order.
    pub reduced: SdpProblem,
    /// `permutation[original index] = index in the reduced problem`.
    pub permutation: Vec<usize>,
    /// Connected components of the effective sparsity pattern, each sorted,
    /// ordered by smallest member.
    pub blocks: Vec<Vec<usize>>,
    /// Ids of constraints that touched the pattern and were carried over
    /// (ascending).
    pub kept_constraints: Vec<usize>,
    /// Ids of constraints whose support never met the pattern (ascending).
    pub discarded_constraints: Vec<usize>,
    /// True when every discarded constraint was homogeneous (`b_k = 0`), in
    /// which case the reduced optimum equals the original one. Otherwise the
    /// reduction is an outer approximation: reduced ≥ original.
    pub exact: bool,
    /// Completion passes the closure needed, final confirming pass included.
    pub iterations: usize,
}

impl ReductionResult {
    pub fn report(&self) -> ReductionReport {
        let mut block_size_histogram = BTreeMap::new();
        for block in &self.blocks {
            *block_size_histogram.entry(block.len()).or_insert(0usize) += 1;
        }
        ReductionReport {
            iterations: self.iterations,
            block_size_histogram,
            kept_constraints: self.kept_constraints.len(),
            discarded_constraints: self.discarded_constraints.len(),
            scalar_variables: self.reduced.scalar_variable_count().min(u64::MAX as u128) as u64,
            exact: self.exact,
        }
    }
}

/// Summary of a reduction, in a shape meant for logs and JSON output.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ReductionReport {
    pub iterations: usize,
    /// Block size → number of blocks of that size.
    pub block_size_histogram: BTreeMap<usize, usize>,
    pub kept_constraints: usize,
    pub discarded_constraints: usize,
    pub scalar_variables: u64,
    pub exact: bool,
}

/// Runs the sparsity closure over `source` and reassembles the reduced
/// problem. Fails with [`Error::NoReduction`] when the pattern grows into a
/// single block spanning the whole variable.
///
/// The closure alternates two phases until neither adds a coordinate:
/// a worklist drain that activates every constraint with an entry at a newly
/// admitted coordinate (absorbing its whole support), and a completion pass
/// that fills each connected component of the pattern into a full block.
/// Both phases only add coordinates forced by the fixed-point equations, so
/// the result is the least pattern that is simultaneously
/// constraint-closed and component-complete — independent of visit order.
pub fn reduce_with_source<S: ConstraintSource + ?Sized>(
    source: &S,
    objective: &SparseHermitian,
    metadata: &ProblemMetadata,
    zero_tol: f64,
) -> Result<ReductionResult> {
    let dim = source.dim();
    if objective.dim() != dim {
        return Err(Error::DimensionMismatch {
            context: "sparsity reduction objective",
            expected: dim,
            got: objective.dim(),
        });
    }

    let mut theta = base_sparsity(objective, zero_tol);
    let mut queue: VecDeque<(usize, usize)> =
        theta.iter().filter(|&(r, c)| r <= c).collect();
    let mut active = vec![false; source.len()];
    let mut candidates = Vec::new();
    let mut iterations = 0usize;

    let (blocks, permutation) = loop {
        while let Some((r, c)) = queue.pop_front() {
            candidates.clear();
            source.touching(r, c, &mut candidates);
            for &id in &candidates {
                if active[id] {
                    continue;
                }
                active[id] = true;
                for &(er, ec, v) in source.matrix(id).entries() {
                    if v.norm() > zero_tol && theta.insert(er, ec) {
                        queue.push_back((er.min(ec), er.max(ec)));
                    }
                }
            }
        }

        iterations += 1;
        let (completed, blocks, permutation) = complete_components(&theta);
        if blocks.len() == 1 && blocks[0].len() == dim {
            return Err(Error::NoReduction);
        }
        if completed == theta {
            break (blocks, permutation);
        }
        for (r, c) in completed.iter() {
            if r <= c && theta.insert(r, c) {
                queue.push_back((r, c));
            }
        }
    };

    let kept_constraints: Vec<usize> = (0..source.len()).filter(|&id| active[id]).collect();
    let discarded_constraints: Vec<usize> =
        (0..source.len()).filter(|&id| !active[id]).collect();
    let exact = discarded_constraints.iter().all(|&id| source.rhs(id).abs() <= zero_tol);

    let remap = |m: &SparseHermitian| -> SparseHermitian {
        let entries = m
            .entries()
            .iter()
            .map(|&(r, c, v)| (permutation[r], permutation[c], v))
            .collect();
        SparseHermitian::from_entries(dim, entries)
    };

    let mut constraints = Vec::with_capacity(kept_constraints.len());
    for &id in &kept_constraints {
        let matrix = source.matrix(id);
        debug_assert!(
            matrix
                .entries()
                .iter()
                .all(|&(r, c, v)| v.norm() <= zero_tol || theta.contains(r, c)),
            "kept constraint {id} escapes the effective sparsity pattern"
        );
        constraints.push(SdpConstraint { matrix: remap(&matrix), rhs: source.rhs(id) });
    }

    let block_dims: Vec<usize> = blocks.iter().map(Vec::len).collect();
    let mut reduced = SdpProblem::new(block_dims, remap(objective), constraints);
    reduced.metadata = metadata.clone();
    let note = format!(
        "sparsity-reduced into {} blocks ({})",
        blocks.len(),
        if exact { "exact" } else { "outer approximation" },
    );
    reduced.metadata.description = if reduced.metadata.description.is_empty() {
        note
    } else {
        format!("{}; {note}", reduced.metadata.description)
    };

    Ok(ReductionResult {
        reduced,
        permutation,
        blocks,
        kept_constraints,
        discarded_constraints,
        exact,
        iterations,
    })
}

/// Reduces a single-block problem held in memory. See [`reduce_with_source`]
/// for the semantics; multi-block input is rejected because the closure is
/// defined over one matrix variable (re-running it on an already split
/// problem would have to be done per block).
pub fn reduce_problem(problem: &SdpProblem, zero_tol: f64) -> Result<ReductionResult> {
    if problem.blocks.len() != 1 {
        return Err(Error::InvalidProblem {
            issues: vec![format!(
                "sparsity reduction expects a single-block problem, got {} blocks",
                problem.blocks.len()
            )],
        });
    }
    let issues = problem.validate();
    if !issues.is_empty() {
        return Err(Error::InvalidProblem { issues });
    }
    let source =
        MaterializedConstraints::new(problem.total_dim(), &problem.constraints, zero_tol);
    reduce_with_source(&source, &problem.objective, &problem.metadata, zero_tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;
    use crate::sdp::{solve, SolverConfig};
    use crate::sparse::{complete_components, effective_sparsity};
    use crate::ZERO_TOL;

    fn herm(dim: usize, entries: Vec<(usize, usize, f64)>) -> SparseHermitian {
        SparseHermitian::from_entries(
            dim,
            entries.into_iter().map(|(r, c2, v)| (r, c2, c(v, 0.0))).collect(),
        )
    }

    fn cst(dim: usize, entries: Vec<(usize, usize, f64)>, rhs: f64) -> SdpConstraint {
        SdpConstraint { matrix: herm(dim, entries), rhs }
    }

    fn trace_one(dim: usize) -> SdpConstraint {
        cst(dim, (0..dim).map(|i| (i, i, 1.0)).collect(), 1.0)
    }

    /// Two interleaved components: the objective couples {0,2} and {1,3}, a
    /// constraint pins the {0,2} coupling to 0.6. Splitting must not change
    /// the optimum, and the permutation must interleave the indices.
    fn interleaved_toy() -> SdpProblem {
        let dim = 4;
        SdpProblem::new(
            vec![dim],
            herm(dim, vec![(0, 2, 1.0), (2, 0, 1.0), (1, 3, 0.5), (3, 1, 0.5)]),
            vec![
                trace_one(dim),
                cst(dim, vec![(0, 2, 1.0), (2, 0, 1.0)], 0.6),
            ],
        )
    }

    #[test]
    fn dense_coupling_reports_no_reduction() {
        // A chain 0–1–2 completes into one spanning block even though the
        // seed pattern is not full.
        let dim = 3;
        let problem = SdpProblem::new(
            vec![dim],
            herm(dim, vec![(0, 1, 1.0), (1, 0, 1.0), (1, 2, 1.0), (2, 1, 1.0)]),
            vec![trace_one(dim)],
        );
        assert!(matches!(reduce_problem(&problem, ZERO_TOL), Err(Error::NoReduction)));
    }

    #[test]
    fn split_problem_solves_to_the_same_value() {
        let problem = interleaved_toy();
        let config = SolverConfig::default();

        let dense = solve(&problem, &config).unwrap();
        let reduction = reduce_problem(&problem, ZERO_TOL).unwrap();
        assert!(reduction.reduced.validate().is_empty());
        let split = solve(&reduction.reduced, &config).unwrap();

        // Pinning the {0,2} coupling to 0.6 costs 0.6 of trace; the leftover
        // 0.4 is worth 0.5 · 0.4 on the other component.
        let expected = 0.6 + 0.5 * 0.4;
        assert!((dense.value.unwrap() - expected).abs() < 1e-6);
        assert!((split.value.unwrap() - dense.value.unwrap()).abs() < 1e-6);

        assert_eq!(reduction.blocks, vec![vec![0, 2], vec![1, 3]]);
        assert_eq!(reduction.permutation, vec![0, 2, 1, 3]);
        assert_eq!(reduction.reduced.blocks, vec![2, 2]);
        assert_eq!(reduction.kept_constraints, vec![0, 1]);
        assert!(reduction.discarded_constraints.is_empty());
        assert!(reduction.exact);
    }

    #[test]
    fn discarded_inhomogeneous_constraint_is_an_outer_approximation() {
        // maximize X00 with Tr X = 1 and X12 + X21 = 1. The dense optimum is
        // 0 (the off-diagonal pin forces all trace onto indices 1 and 2);
        // dropping the pin relaxes the optimum to 1.
        let dim = 3;
        let problem = SdpProblem::new(
            vec![dim],
            herm(dim, vec![(0, 0, 1.0)]),
            vec![trace_one(dim), cst(dim, vec![(1, 2, 1.0), (2, 1, 1.0)], 1.0)],
        );
        let config = SolverConfig::default();

        let dense = solve(&problem, &config).unwrap();
        let reduction = reduce_problem(&problem, ZERO_TOL).unwrap();
        let relaxed = solve(&reduction.reduced, &config).unwrap();

        assert!(!reduction.exact);
        assert_eq!(reduction.discarded_constraints, vec![1]);
        assert_eq!(reduction.blocks.len(), 3);
        assert!(dense.value.unwrap().abs() < 1e-6);
        assert!((relaxed.value.unwrap() - 1.0).abs() < 1e-6);
        assert!(relaxed.value.unwrap() > dense.value.unwrap() + 0.5);
    }

    #[test]
    fn streaming_engine_matches_the_literal_fixed_point() {
        // Cascade toy: activation chains through two passes, one constraint
        // never activates. The worklist engine must land on the same pattern
        // as the extend-then-complete loop.
        let dim = 9;
        let objective = herm(dim, vec![(0, 3, 0.5), (3, 0, 0.5)]);
        let constraints = vec![
            cst(dim, vec![(1, 1, 1.0), (1, 4, 2.0), (4, 1, 2.0)], 0.0),
            cst(dim, vec![(1, 4, 1.0), (4, 1, 1.0), (4, 5, 1.0), (5, 4, 1.0)], 0.0),
            cst(dim, vec![(0, 3, 1.0), (3, 0, 1.0), (3, 6, 1.0), (6, 3, 1.0)], 0.0),
            cst(dim, vec![(2, 7, 1.0), (7, 2, 1.0), (7, 8, 1.0), (8, 7, 1.0)], 1.0),
        ];
        let problem =
            SdpProblem::new(vec![dim], objective.clone(), constraints.clone());

        let reduction = reduce_problem(&problem, ZERO_TOL).unwrap();
        let (star, _) = effective_sparsity(&objective, &constraints, ZERO_TOL);
        let (_, literal_blocks, literal_permutation) = complete_components(&star);

        assert_eq!(reduction.blocks, literal_blocks);
        assert_eq!(reduction.permutation, literal_permutation);
        assert_eq!(reduction.kept_constraints, vec![0, 1, 2]);
        assert_eq!(reduction.discarded_constraints, vec![3]);
        assert!(!reduction.exact);
        assert!(reduction.iterations >= 2, "cascade needs a second completion pass");
    }

    #[test]
    fn multi_block_input_is_rejected() {
        let problem =
            SdpProblem::new(vec![1, 1], herm(2, vec![(0, 0, 1.0)]), vec![trace_one(2)]);
        assert!(matches!(
            reduce_problem(&problem, ZERO_TOL),
            Err(Error::InvalidProblem { .. })
        ));
    }

    #[test]
    fn reduction_is_deterministic() {
        let problem = interleaved_toy();
        let a = reduce_problem(&problem, ZERO_TOL).unwrap();
        let b = reduce_problem(&problem, ZERO_TOL).unwrap();
        assert_eq!(a.permutation, b.permutation);
        assert_eq!(a.blocks, b.blocks);
        assert_eq!(a.kept_constraints, b.kept_constraints);
        assert_eq!(a.reduced.objective.entries(), b.reduced.objective.entries());
        assert_eq!(a.report(), b.report());
    }

    #[test]
    fn report_serializes_block_histogram() {
        let reduction = reduce_problem(&interleaved_toy(), ZERO_TOL).unwrap();
        let report = reduction.report();
        assert_eq!(report.block_size_histogram.get(&2), Some(&2));
        assert_eq!(report.kept_constraints, 2);
        assert_eq!(report.scalar_variables, 8);
        assert!(report.exact);

        let json = serde_json::to_value(&report).unwrap();
        assert_eq!(json["block_size_histogram"]["2"], 2);
        assert_eq!(json["exact"], true);
    }

    #[test]
    fn inverted_index_answers_both_orientations() {
        let constraints =
            vec![cst(6, vec![(2, 5, 1.0), (5, 2, 1.0)], 0.0), trace_one(6)];
        let source = MaterializedConstraints::new(6, &constraints, ZERO_TOL);
        let mut out = Vec::new();
        source.touching(5, 2, &mut out);
        assert_eq!(out, vec![0]);
        out.clear();
        source.touching(0, 1, &mut out);
        assert!(out.is_empty());
        out.clear();
        source.touching(3, 3, &mut out);
        assert_eq!(out, vec![1]);
        assert_eq!(source.len(), 2);
        assert_eq!(source.rhs(1), 1.0);
    }
}
