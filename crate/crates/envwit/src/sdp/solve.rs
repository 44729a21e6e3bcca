//! Conic-solver adapter: standard-form SDP in, certified bound out.
//!
//! The variable `X = diag(X_1, …, X_B)` is vectorized block-by-block into
//! scaled upper triangles (`svec`: column-major, off-diagonal entries
//! multiplied by √2 so that `svec(A)·svec(B) = Tr[A·B]`). The solver's
//! minimization form receives `q = −svec(F)`, one zero-cone row per trace
//! constraint, and an identity-coupled PSD-triangle cone per block.

use std::time::Instant;

use nalgebra::DMatrix;
use serde::Serialize;

use clarabel::algebra::CscMatrix;
use clarabel::solver::{
    DefaultSettings, DefaultSolver, IPSolver, SolverStatus, SupportedConeT,
};

use super::problem::SdpProblem;
use crate::{Error, Result, ZERO_TOL};

/// Solver knobs; `backend` names the conic solver binding (only the bundled
/// `"clarabel"` binding ships; anything else fails with `SolverUnavailable`).
#[derive(Debug, Clone)]
pub struct SolverConfig {
    /// Interior-point iteration cap.
    pub max_iters: u32,
    /// Absolute tolerance on duality gap and feasibility residuals.
    pub eps_abs: f64,
    /// Relative duality-gap tolerance.
    pub eps_rel: f64,
    /// Wall-clock cap in seconds; `None` means unlimited.
    pub time_limit: Option<f64>,
    /// Stream solver progress to stdout.
    pub verbose: bool,
    /// Conic solver binding to use.
    pub backend: String,
    /// Reconstruct and return the primal blocks (costs memory on big solves).
    pub return_primal: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            max_iters: 200,
            eps_abs: 1e-8,
            eps_rel: 1e-8,
            time_limit: None,
            verbose: false,
            backend: "clarabel".to_string(),
            return_primal: false,
        }
    }
}

/// Terminal state of a solve, from the caller's perspective.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Optimal,
    NearOptimal,
    Infeasible,
    Unbounded,
    Timeout,
    NumericalError,
}

impl std::fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::NearOptimal => "near_optimal",
            SolveStatus::Infeasible => "infeasible",
            SolveStatus::Unbounded => "unbounded",
            SolveStatus::Timeout => "timeout",
            SolveStatus::NumericalError => "numerical_error",
        };
        f.write_str(name)
    }
}

impl SolveStatus {
    /// True when the solver produced a usable objective value.
    pub fn has_value(self) -> bool {
        matches!(self, SolveStatus::Optimal | SolveStatus::NearOptimal)
    }
}

/// Solver-reported convergence residuals.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Residuals {
    pub primal: f64,
    pub dual: f64,
    pub gap: f64,
}

/// Outcome of solving one bound relaxation.
///
/// `value` is the raw solver objective; `safe_value` inflates it by
/// `max(gap, eps_abs)` so that an under-converged solve can never report a
/// number below the true relaxation optimum. Both are present only when the
/// status carries a value.
#[derive(Debug, Clone, Serialize)]
pub struct BoundResult {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub safe_value: Option<f64>,
    /// Extension level the relaxation was built at, when known.
    #[serde(rename = "N")]
    pub n: Option<usize>,
    /// Whether partial-transpose constraints were part of the problem.
    pub ppt: Option<bool>,
    pub status: SolveStatus,
    pub residuals: Residuals,
    pub wall_time_s: f64,
    pub iterations: u32,
    /// Primal blocks, reconstructed on request; never serialized.
    #[serde(skip)]
    pub primal: Option<Vec<DMatrix<f64>>>,
}

/// Index of `(r, c)` with `r ≤ c` inside a column-major upper triangle.
#[inline]
pub(crate) fn triangle_index(r: usize, c: usize) -> usize {
    debug_assert!(r <= c);
    c * (c + 1) / 2 + r
}

/// Largest svec variable count at which the presolve keeps a dense
/// orthogonal basis to drop linearly dependent equality rows. Beyond this,
/// only bit-exact duplicate rows are removed.
const RANK_FILTER_MAX_VARS: usize = 4096;

/// Residual threshold below which a row counts as dependent on earlier ones.
const RANK_TOL: f64 = 1e-10;

/// Tolerated inconsistency in the right-hand side of a dependent row; larger
/// residuals keep the row so infeasibility stays visible to the solver.
const RHS_CONSISTENCY_TOL: f64 = 1e-8;

/// `(static_regularization_constant, max_step_fraction)` per solve attempt,
/// mildest first. A stall (vanishing step) moves to the next rung.
const RESTART_LADDER: &[(f64, f64)] = &[(1e-8, 0.99), (1e-7, 0.9), (1e-6, 0.9)];

/// Drops equality rows the interior-point method cannot tolerate: exact
/// duplicates first (conjugate constraint pairs collapse onto the same real
/// row), then — when the variable count permits an orthogonal basis — rows
/// that are linear combinations of earlier ones. The right-hand side rides
/// along through the orthogonalization, so a dependent row is only dropped
/// when its rhs is implied by the kept rows; an inconsistent rhs keeps the
/// row and lets the solver certify infeasibility.
fn presolve_rows(rows: Vec<(Vec<(usize, f64)>, f64)>, n_vars: usize) -> Vec<(Vec<(usize, f64)>, f64)> {
    let mut seen: std::collections::HashSet<Vec<(usize, u64)>> = Default::default();
    let mut kept = Vec::with_capacity(rows.len());
    for (row, rhs) in rows {
        if row.is_empty() && rhs.abs() <= ZERO_TOL {
            continue;
        }
        let mut key: Vec<(usize, u64)> =
            row.iter().map(|&(j, v)| (j, v.to_bits())).collect();
        key.push((usize::MAX, rhs.to_bits()));
        if seen.insert(key) {
            kept.push((row, rhs));
        }
    }
    if n_vars > RANK_FILTER_MAX_VARS {
        return kept;
    }

    // Modified Gram–Schmidt with one re-orthogonalization pass; `passenger`
    // carries each basis vector's rhs image.
    let mut basis: Vec<(Vec<f64>, f64)> = Vec::new();
    let mut independent = Vec::with_capacity(kept.len());
    for (row, rhs) in kept {
        let mut dense = vec![0.0f64; n_vars];
        for &(j, v) in &row {
            dense[j] += v;
        }
        let norm0 = dense.iter().map(|x| x * x).sum::<f64>().sqrt();
        let mut rb = rhs;
        for _ in 0..2 {
            for (u, beta) in &basis {
                let dot: f64 = dense.iter().zip(u).map(|(a, b)| a * b).sum();
                for (x, y) in dense.iter_mut().zip(u) {
                    *x -= dot * y;
                }
                rb -= dot * beta;
            }
        }
        let norm = dense.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > RANK_TOL * norm0.max(1.0) {
            let inv = 1.0 / norm;
            for x in dense.iter_mut() {
                *x *= inv;
            }
            basis.push((dense, rb * inv));
            independent.push((row, rhs));
        } else if rb.abs() > RHS_CONSISTENCY_TOL * rhs.abs().max(1.0) {
            independent.push((row, rhs));
        }
    }
    independent
}

const SQRT2: f64 = std::f64::consts::SQRT_2;

/// Scaled-triangle coefficient carried by an entry at `(r, c)`, `r ≤ c`.
#[inline]
fn svec_coeff(r: usize, c: usize, v: f64) -> f64 {
    if r == c {
        v
    } else {
        SQRT2 * v
    }
}

/// Solves `maximize Tr[F·X] s.t. Tr[C_k·X] = b_k, X ⪰ 0 (block-diagonal)`.
///
/// Fails fast on structurally invalid problems, on data with imaginary parts
/// above tolerance (realify first), and on unknown backends. Timeouts and
/// infeasibility are reported through [`BoundResult::status`], not errors.
pub fn solve(problem: &SdpProblem, config: &SolverConfig) -> Result<BoundResult> {
    if config.backend != "clarabel" {
        return Err(Error::SolverUnavailable { name: config.backend.clone() });
    }
    let issues = problem.validate();
    if !issues.is_empty() {
        return Err(Error::InvalidProblem { issues });
    }
    let max_imag = problem.max_imag();
    if max_imag > ZERO_TOL {
        return Err(Error::ComplexNotRealified { max_imag });
    }

    let layout = problem.layout();
    let blocks = &problem.blocks;

    // Per-block offsets into the svec variable vector.
    let mut var_offsets = Vec::with_capacity(blocks.len());
    let mut n_vars = 0usize;
    for &m in blocks {
        var_offsets.push(n_vars);
        n_vars += m * (m + 1) / 2;
    }

    let svec_index = |r: usize, c: usize| -> usize {
        let (br, lr) = layout.locate(r);
        let (bc, lc) = layout.locate(c);
        debug_assert_eq!(br, bc, "validated problems cannot straddle blocks");
        let (lo, hi) = if lr <= lc { (lr, lc) } else { (lc, lr) };
        var_offsets[br] + triangle_index(lo, hi)
    };

    // Objective: minimize qᵀx with q = −svec(F).
    let mut q = vec![0.0f64; n_vars];
    for (r, c, v) in problem.objective.upper_triangle() {
        q[svec_index(r, c)] -= svec_coeff(r, c, v.re);
    }

    // Constraint rows in svec coordinates, presolved down to a set the
    // factorization can handle, then −I rows pinning each block's svec slice
    // into its PSD-triangle (or nonnegative) cone.
    let svec_rows: Vec<(Vec<(usize, f64)>, f64)> = problem
        .constraints
        .iter()
        .map(|cst| {
            let row: Vec<(usize, f64)> = cst
                .matrix
                .upper_triangle()
                .into_iter()
                .map(|(r, c, v)| (svec_index(r, c), svec_coeff(r, c, v.re)))
                .collect();
            debug_assert!(row.windows(2).all(|w| w[0].0 < w[1].0));
            (row, cst.rhs)
        })
        .collect();
    let svec_rows = presolve_rows(svec_rows, n_vars);

    let m_eq = svec_rows.len();
    let m_rows = m_eq + n_vars;
    let mut rows = Vec::new();
    let mut cols = Vec::new();
    let mut vals = Vec::new();
    let mut b = vec![0.0f64; m_rows];

    for (k, (row, rhs)) in svec_rows.iter().enumerate() {
        b[k] = *rhs;
        for &(j, v) in row {
            rows.push(k);
            cols.push(j);
            vals.push(v);
        }
    }
    for j in 0..n_vars {
        rows.push(m_eq + j);
        cols.push(j);
        vals.push(-1.0);
    }

    let mut cones: Vec<SupportedConeT<f64>> = Vec::with_capacity(blocks.len() + 1);
    cones.push(SupportedConeT::ZeroConeT(m_eq));
    for &m in blocks {
        if m == 1 {
            cones.push(SupportedConeT::NonnegativeConeT(1));
        } else {
            cones.push(SupportedConeT::PSDTriangleConeT(m));
        }
    }

    let p_mat = CscMatrix::zeros((n_vars, n_vars));
    let a_mat = CscMatrix::new_from_triplets(m_rows, n_vars, rows, cols, vals);

    // Degenerate instances (heavily redundant equality families) can stall
    // the interior-point method with a vanishing step size. Restart with
    // progressively stronger static KKT regularization and a shorter
    // maximum step; residuals and the duality gap are still measured on the
    // unperturbed data, so certified values stay honest.
    let started = Instant::now();
    let mut last = None;
    for &(static_reg, max_step) in RESTART_LADDER {
        let settings = DefaultSettings {
            verbose: config.verbose,
            max_iter: config.max_iters,
            time_limit: config.time_limit.unwrap_or(f64::INFINITY),
            tol_gap_abs: config.eps_abs,
            tol_gap_rel: config.eps_rel,
            tol_feas: config.eps_abs,
            static_regularization_constant: static_reg,
            max_step_fraction: max_step,
            ..DefaultSettings::default()
        };
        let mut solver = DefaultSolver::new(&p_mat, &q, &a_mat, &b, &cones, settings);
        solver.solve();
        let stalled = matches!(
            solver.solution.status,
            SolverStatus::NumericalError | SolverStatus::InsufficientProgress
        );
        last = Some(solver);
        if !stalled {
            break;
        }
    }
    let solver = last.expect("restart ladder is non-empty");
    let wall_time_s = started.elapsed().as_secs_f64();
    let sol = &solver.solution;

    let status = match sol.status {
        SolverStatus::Solved => SolveStatus::Optimal,
        SolverStatus::AlmostSolved => SolveStatus::NearOptimal,
        SolverStatus::PrimalInfeasible | SolverStatus::AlmostPrimalInfeasible => {
            SolveStatus::Infeasible
        }
        SolverStatus::DualInfeasible | SolverStatus::AlmostDualInfeasible => {
            SolveStatus::Unbounded
        }
        SolverStatus::MaxTime => SolveStatus::Timeout,
        _ => SolveStatus::NumericalError,
    };

    let gap = (sol.obj_val - sol.obj_val_dual).abs();
    let (value, safe_value) = if status.has_value() {
        let value = -sol.obj_val;
        (Some(value), Some(value + gap.max(config.eps_abs)))
    } else {
        (None, None)
    };

    let primal = if config.return_primal && status.has_value() {
        Some(unpack_primal(blocks, &var_offsets, &sol.x))
    } else {
        None
    };

    Ok(BoundResult {
        value,
        safe_value,
        n: problem.metadata.copies,
        ppt: problem.metadata.ppt,
        status,
        residuals: Residuals { primal: sol.r_prim, dual: sol.r_dual, gap },
        wall_time_s,
        iterations: sol.iterations,
        primal,
    })
}

/// Rebuilds dense symmetric blocks from the concatenated svec solution.
fn unpack_primal(blocks: &[usize], offsets: &[usize], x: &[f64]) -> Vec<DMatrix<f64>> {
    blocks
        .iter()
        .zip(offsets)
        .map(|(&m, &off)| {
            DMatrix::from_fn(m, m, |r, c| {
                let (lo, hi) = if r <= c { (r, c) } else { (c, r) };
                let v = x[off + triangle_index(lo, hi)];
                if lo == hi {
                    v
                } else {
                    v / SQRT2
                }
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;
    use crate::sdp::problem::{SdpConstraint, SparseHermitian};
    use approx::assert_abs_diff_eq;
    use num_complex::Complex64;

    fn real(entries: Vec<(usize, usize, f64)>, dim: usize) -> SparseHermitian {
        SparseHermitian::from_entries(
            dim,
            entries.into_iter().map(|(r, c_, v)| (r, c_, Complex64::new(v, 0.0))).collect(),
        )
    }

    fn trace(dim: usize) -> SparseHermitian {
        real((0..dim).map(|i| (i, i, 1.0)).collect(), dim)
    }

    fn toy_trace_one(objective: SparseHermitian, blocks: Vec<usize>) -> SdpProblem {
        let dim = objective.dim();
        SdpProblem::new(blocks, objective, vec![SdpConstraint { matrix: trace(dim), rhs: 1.0 }])
    }

    #[test]
    fn diagonal_toy_reaches_its_analytic_optimum() {
        let p = toy_trace_one(real(vec![(0, 0, 1.0)], 2), vec![2]);
        let r = solve(&p, &SolverConfig::default()).unwrap();
        assert_eq!(r.status, SolveStatus::Optimal);
        assert_abs_diff_eq!(r.value.unwrap(), 1.0, epsilon = 1e-6);
        assert!(r.safe_value.unwrap() >= r.value.unwrap());
        assert!(r.residuals.gap < 1e-6);
        assert!(r.iterations > 0);
    }

    #[test]
    fn off_diagonal_objective_is_scaled_correctly() {
        // max Tr[A·X] over Tr X = 1, X ⪰ 0 equals λ_max(A); for
        // A = [[1,2],[2,1]] that is 3. A wrong √2 convention in the svec
        // mapping would shift the off-diagonal contribution visibly.
        let p = toy_trace_one(real(vec![(0, 0, 1.0), (1, 1, 1.0), (0, 1, 2.0), (1, 0, 2.0)], 2), vec![2]);
        let r = solve(&p, &SolverConfig::default()).unwrap();
        assert_abs_diff_eq!(r.value.unwrap(), 3.0, epsilon = 1e-6);
    }

    #[test]
    fn off_diagonal_constraint_is_scaled_correctly() {
        // Same objective, but forcing X₀₁ = 0 collapses the optimum to the
        // diagonal maximum 1.
        let obj = real(vec![(0, 0, 1.0), (1, 1, 1.0), (0, 1, 2.0), (1, 0, 2.0)], 2);
        let pin = real(vec![(0, 1, 1.0), (1, 0, 1.0)], 2);
        let p = SdpProblem::new(
            vec![2],
            obj,
            vec![
                SdpConstraint { matrix: trace(2), rhs: 1.0 },
                SdpConstraint { matrix: pin, rhs: 0.0 },
            ],
        );
        let r = solve(&p, &SolverConfig::default()).unwrap();
        assert_abs_diff_eq!(r.value.unwrap(), 1.0, epsilon = 1e-6);
    }

    #[test]
    fn scalar_blocks_ride_the_nonnegative_cone() {
        // blocks [2, 1]; all objective mass sits on the scalar block, so the
        // optimum parks the whole unit trace there.
        let obj = real(vec![(0, 0, 1.0), (2, 2, 2.0)], 3);
        let p = toy_trace_one(obj, vec![2, 1]);
        let r = solve(&p, &SolverConfig::default()).unwrap();
        assert_abs_diff_eq!(r.value.unwrap(), 2.0, epsilon = 1e-6);
    }

    #[test]
    fn returned_primal_reproduces_objective_and_constraints() {
        let obj = real(vec![(0, 0, 1.0), (1, 1, 1.0), (0, 1, 2.0), (1, 0, 2.0), (2, 2, 0.5)], 3);
        let p = toy_trace_one(obj.clone(), vec![2, 1]);
        let config = SolverConfig { return_primal: true, ..SolverConfig::default() };
        let r = solve(&p, &config).unwrap();
        let xs = r.primal.as_ref().unwrap();
        assert_eq!(xs.len(), 2);

        // Recompute Tr[F·X] and Tr[X] from the reconstructed blocks; this
        // cross-checks the whole svec round trip independently of the solver.
        let full = {
            let mut m = DMatrix::<f64>::zeros(3, 3);
            m.view_mut((0, 0), (2, 2)).copy_from(&xs[0]);
            m[(2, 2)] = xs[1][(0, 0)];
            m
        };
        let mut obj_value = 0.0;
        for &(r_, c_, v) in obj.entries() {
            obj_value += v.re * full[(c_, r_)];
        }
        assert_abs_diff_eq!(obj_value, r.value.unwrap(), epsilon = 1e-6);
        assert_abs_diff_eq!(full.trace(), 1.0, epsilon = 1e-6);
    }

    #[test]
    fn contradictory_traces_are_infeasible() {
        let obj = real(vec![(0, 0, 1.0)], 2);
        let p = SdpProblem::new(
            vec![2],
            obj,
            vec![
                SdpConstraint { matrix: trace(2), rhs: 1.0 },
                SdpConstraint { matrix: trace(2), rhs: 2.0 },
            ],
        );
        let r = solve(&p, &SolverConfig::default()).unwrap();
        assert_eq!(r.status, SolveStatus::Infeasible);
        assert!(r.value.is_none());
        assert!(r.safe_value.is_none());
    }

    #[test]
    fn unconstrained_direction_is_reported_unbounded() {
        // Tr[diag(1,−1)·X] = 0 admits X = t·I with objective 2t → ∞.
        let obj = real(vec![(0, 0, 1.0), (1, 1, 1.0)], 2);
        let balance = real(vec![(0, 0, 1.0), (1, 1, -1.0)], 2);
        let p = SdpProblem::new(vec![2], obj, vec![SdpConstraint { matrix: balance, rhs: 0.0 }]);
        let r = solve(&p, &SolverConfig::default()).unwrap();
        assert_eq!(r.status, SolveStatus::Unbounded);
    }

    #[test]
    fn repeated_solves_are_deterministic() {
        let p = toy_trace_one(real(vec![(0, 0, 1.0), (0, 1, 2.0), (1, 0, 2.0), (1, 1, 1.0)], 2), vec![2]);
        let a = solve(&p, &SolverConfig::default()).unwrap();
        let b = solve(&p, &SolverConfig::default()).unwrap();
        assert_eq!(a.status, b.status);
        assert_abs_diff_eq!(a.value.unwrap(), b.value.unwrap(), epsilon = 1e-9);
    }

    #[test]
    fn complex_data_must_be_realified_first() {
        let obj = SparseHermitian::from_entries(2, vec![(0, 1, c(0.0, 1.0)), (1, 0, c(0.0, -1.0))]);
        let p = toy_trace_one(obj, vec![2]);
        let err = solve(&p, &SolverConfig::default()).unwrap_err();
        assert!(matches!(err, Error::ComplexNotRealified { .. }), "{err}");
    }

    #[test]
    fn unknown_backends_are_refused() {
        let p = toy_trace_one(real(vec![(0, 0, 1.0)], 2), vec![2]);
        let config = SolverConfig { backend: "scs".to_string(), ..SolverConfig::default() };
        let err = solve(&p, &config).unwrap_err();
        assert!(matches!(err, Error::SolverUnavailable { .. }), "{err}");
    }

    #[test]
    fn malformed_problems_are_rejected_before_solving() {
        let skew = SparseHermitian::from_entries(2, vec![(0, 1, c(1.0, 0.0))]);
        let p = toy_trace_one(skew, vec![2]);
        let err = solve(&p, &SolverConfig::default()).unwrap_err();
        assert!(matches!(err, Error::InvalidProblem { .. }), "{err}");
    }

    #[test]
    fn bound_result_serializes_with_uppercase_n() {
        let mut p = toy_trace_one(real(vec![(0, 0, 1.0)], 2), vec![2]);
        p.metadata.copies = Some(3);
        p.metadata.ppt = Some(false);
        let r = solve(&p, &SolverConfig::default()).unwrap();
        let json = serde_json::to_value(&r).unwrap();
        assert_eq!(json["N"], 3);
        assert_eq!(json["ppt"], false);
        assert_eq!(json["status"], "optimal");
        assert!(json["residuals"]["gap"].is_number());
        assert!(json.get("primal").is_none());
    }
}
