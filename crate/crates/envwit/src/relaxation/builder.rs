//! Assembly of the level-N relaxation in both representations.

use num_complex::Complex64;

use crate::linalg::c;
use crate::quantum::ObjectiveOperator;
use crate::sdp::{ProblemMetadata, SdpConstraint, SdpProblem, SparseHermitian};
use crate::sparse::{reduce_with_source, ConstraintSource, ReductionResult};
use crate::symmetric::{enumerate_types, symmetric_dimension, SymSpace};
use crate::{Error, Result, ZERO_TOL};

use super::grid::QuadrupleGrid;
use super::spec::{RelaxationSpec, Representation};

/// Builds the level-`copies` relaxation as a standard-form SDP.
///
/// The optimum upper-bounds the sequence probability for every environment
/// of the protocol's dimension: any admissible unitary yields a feasible
/// point (the N-fold tensor power of its normalized Choi matrix, compressed
/// into the chosen representation) whose objective value is exactly the
/// sequence probability.
///
/// Fails with [`Error::IntractableSize`] — before allocating anything — when
/// the estimated number of scalar variables plus constraint entries exceeds
/// `spec.scalar_budget`.
pub fn build_relaxation(spec: &RelaxationSpec) -> Result<SdpProblem> {
    spec.validate()?;
    match spec.representation {
        Representation::Symmetric => build_symmetric(spec),
        Representation::FullSpace => build_full_space(spec),
    }
}

/// Builds the symmetric-representation relaxation and immediately reduces it
/// to its effective-sparsity blocks, without ever materializing constraints
/// the reduction discards. This is the only way to reach levels whose dense
/// constraint family is beyond the size budget.
///
/// Only the plain symmetric representation reduces this way; the
/// partial-transpose blocks of the full-space encoding couple everything.
pub fn build_reduced_relaxation(spec: &RelaxationSpec) -> Result<ReductionResult> {
    spec.validate()?;
    if spec.representation != Representation::Symmetric || spec.ppt {
        return Err(Error::InvalidProblem {
            issues: vec![
                "sparsity reduction applies to the symmetric representation without \
                 partial-transpose blocks"
                    .into(),
            ],
        });
    }
    let d_es = spec.protocol.d_es();
    let dim = symmetric_dimension(d_es * d_es, spec.copies)?;
    let estimate = mul(dim, dim, "reduced symmetric relaxation size")?;
    check_budget("reduced symmetric relaxation", estimate, spec.scalar_budget)?;

    let space = enumerate_types(d_es * d_es, spec.copies)?;
    let objective = symmetric_objective(spec, &space)?;
    let grid = QuadrupleGrid::new(d_es, spec.copies, objective.max_imag() > ZERO_TOL)?;
    let metadata = metadata_for(spec);
    reduce_with_source(&grid, &objective, &metadata, ZERO_TOL)
}

fn metadata_for(spec: &RelaxationSpec) -> ProblemMetadata {
    ProblemMetadata {
        copies: Some(spec.copies),
        ppt: Some(spec.ppt),
        realify_mode: None,
        description: format!(
            "level-{} {} relaxation of sequence {} at d_E = {}",
            spec.copies,
            match spec.representation {
                Representation::Symmetric => "symmetric",
                Representation::FullSpace => "full-space",
            },
            spec.seq,
            spec.protocol.d_e(),
        ),
    }
}

/// The objective in the scaled type basis, `x̂ = D·x·D`: entries accumulate
/// path values times tail multiplicities and stay exact whenever the path
/// values are.
fn symmetric_objective(spec: &RelaxationSpec, space: &SymSpace) -> Result<SparseHermitian> {
    let objective = ObjectiveOperator::build(&spec.protocol, &spec.seq)?;
    let entries = crate::symmetric::project_paths_scaled(
        &objective.nonzero_paths(ZERO_TOL),
        spec.seq.len(),
        space,
    )?;
    Ok(SparseHermitian::from_entries(space.dim(), entries))
}

fn build_symmetric(spec: &RelaxationSpec) -> Result<SdpProblem> {
    let d_es = spec.protocol.d_es();
    let estimate = symmetric_estimate(d_es, spec.copies)?;
    check_budget("symmetric relaxation", estimate, spec.scalar_budget)?;

    let space = enumerate_types(d_es * d_es, spec.copies)?;
    let objective = symmetric_objective(spec, &space)?;
    let grid = QuadrupleGrid::new(d_es, spec.copies, objective.max_imag() > ZERO_TOL)?;
    let mut constraints = Vec::with_capacity(grid.len());
    for id in 0..grid.len() {
        constraints.push(SdpConstraint { matrix: grid.matrix(id), rhs: grid.rhs(id) });
    }

    let mut problem = SdpProblem::new(vec![space.dim()], objective, constraints);
    problem.metadata = metadata_for(spec);
    Ok(problem)
}

fn build_full_space(spec: &RelaxationSpec) -> Result<SdpProblem> {
    let d_es = spec.protocol.d_es();
    let d = d_es * d_es;
    let n = spec.copies;
    let cuts = if spec.ppt { n / 2 } else { 0 };
    let estimate = full_space_estimate(d_es, n, cuts)?;
    check_budget("full-space relaxation", estimate, spec.scalar_budget)?;

    let dim = d.pow(n as u32);
    let total = dim * (1 + cuts);

    // Objective (X^T on the first L copies) ⊗ (identity on the rest), living
    // in the first block.
    let objective_op = ObjectiveOperator::build(&spec.protocol, &spec.seq)?;
    let tail_words = d.pow((n - spec.seq.len()) as u32);
    let mut entries = Vec::new();
    for path in objective_op.nonzero_paths(ZERO_TOL) {
        let mut row = 0usize;
        let mut col = 0usize;
        for (&u, &v) in path.rows.iter().zip(&path.cols) {
            row = row * d + v;
            col = col * d + u;
        }
        for s in 0..tail_words {
            entries.push((row * tail_words + s, col * tail_words + s, path.value));
        }
    }
    let objective = SparseHermitian::from_entries(total, entries);
    let complex = objective.max_imag() > ZERO_TOL;

    let mut constraints = Vec::new();

    // Unit trace of the extension.
    constraints.push(SdpConstraint {
        matrix: SparseHermitian::from_entries(
            total,
            (0..dim).map(|w| (w, w, c(1.0, 0.0))).collect(),
        ),
        rhs: 1.0,
    });

    // Exchangeability: (P − 1)Φ = 0 row by row, P the symmetric-group
    // average of the slot permutations. One-sided suffices for Hermitian Φ.
    let averager = slot_average_rows(d, n);
    for (r, row) in averager.iter().enumerate() {
        for col in 0..dim {
            let raw: Vec<(usize, usize, Complex64)> = row
                .iter()
                .map(|&(w, coeff)| {
                    let a = coeff - if w == r { 1.0 } else { 0.0 };
                    (col, w, c(a, 0.0))
                })
                .filter(|&(_, _, v)| v.norm() > ZERO_TOL)
                .collect();
            push_parts(&mut constraints, total, &raw, complex);
        }
    }

    // Reduced-channel condition on the first copy: tracing its output leg
    // leaves a maximally mixed input, i.e. for every (i, w̄, i′, w̄′)
    //   Σ_o Φ[(i·d_ES+o)w̄, (i′·d_ES+o)w̄′] = (δ_{ii′}/d_ES)·Σ_k Φ[k w̄, k w̄′].
    let rest = dim / d;
    for i in 0..d_es {
        for ip in 0..d_es {
            for wb in 0..rest {
                for wbp in 0..rest {
                    let mut raw = Vec::with_capacity(d_es + d);
                    for o in 0..d_es {
                        let a = (i * d_es + o) * rest + wb;
                        let b = (ip * d_es + o) * rest + wbp;
                        raw.push((b, a, c(1.0, 0.0)));
                    }
                    if i == ip {
                        let w = -1.0 / d_es as f64;
                        for k in 0..d {
                            raw.push((k * rest + wbp, k * rest + wb, c(w, 0.0)));
                        }
                    }
                    push_parts(&mut constraints, total, &raw, complex);
                }
            }
        }
    }

    // Partial-transpose blocks: block k holds Φ^{T_α} for the bipartition
    // cutting off the first k copies, linked entry by entry.
    for cut in 1..=cuts {
        let offset = cut * dim;
        for u in 0..dim {
            for v in u..dim {
                let (pr, pc) = swap_leading_letters(u, v, cut, d, n);
                let raw = vec![
                    (offset + v, offset + u, c(1.0, 0.0)),
                    (pc, pr, c(-1.0, 0.0)),
                ];
                push_parts(&mut constraints, total, &raw, complex);
            }
        }
    }

    let mut problem = SdpProblem::new(vec![dim; 1 + cuts], objective, constraints);
    problem.metadata = metadata_for(spec);
    Ok(problem)
}

/// Pushes the Hermitian part of a raw equality row (rhs 0), plus its
/// anti-Hermitian part when the problem is complex; empty parts are content-
/// free on the matching variable class and are dropped.
fn push_parts(
    constraints: &mut Vec<SdpConstraint>,
    dim: usize,
    raw: &[(usize, usize, Complex64)],
    complex: bool,
) {
    if raw.is_empty() {
        return;
    }
    let herm = SparseHermitian::hermitian_part(dim, raw);
    if !herm.is_empty() {
        constraints.push(SdpConstraint { matrix: herm, rhs: 0.0 });
    }
    if complex {
        let anti = SparseHermitian::anti_hermitian_part(dim, raw);
        if !anti.is_empty() {
            constraints.push(SdpConstraint { matrix: anti, rhs: 0.0 });
        }
    }
}

/// Rows of the symmetric-group average `P = (1/N!)·Σ_π W_π` over words,
/// returned sparsely: `rows[r]` lists `(w, P[r,w])`.
fn slot_average_rows(d: usize, n: usize) -> Vec<Vec<(usize, f64)>> {
    let dim = d.pow(n as u32);
    let perms = permutations(n);
    let weight = 1.0 / perms.len() as f64;
    let mut rows: Vec<std::collections::BTreeMap<usize, f64>> = vec![Default::default(); dim];
    let mut letters = vec![0usize; n];
    for w in 0..dim {
        let mut rest = w;
        for slot in (0..n).rev() {
            letters[slot] = rest % d;
            rest /= d;
        }
        for perm in &perms {
            let mut r = 0usize;
            for slot in 0..n {
                r = r * d + letters[perm[slot]];
            }
            *rows[r].entry(w).or_insert(0.0) += weight;
        }
    }
    rows.into_iter().map(|m| m.into_iter().collect()).collect()
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, used: &mut Vec<bool>, out: &mut Vec<Vec<usize>>) {
        let n = used.len();
        if prefix.len() == n {
            out.push(prefix.clone());
            return;
        }
        for k in 0..n {
            if !used[k] {
                used[k] = true;
                prefix.push(k);
                rec(prefix, used, out);
                prefix.pop();
                used[k] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

/// Swaps the first `cut` letters between the row word `u` and column word
/// `v` — the index action of partially transposing those copies.
fn swap_leading_letters(u: usize, v: usize, cut: usize, d: usize, n: usize) -> (usize, usize) {
    let decompose = |mut w: usize| {
        let mut letters = vec![0usize; n];
        for slot in (0..n).rev() {
            letters[slot] = w % d;
            w /= d;
        }
        letters
    };
    let (lu, lv) = (decompose(u), decompose(v));
    let mut pr = 0usize;
    let mut pc = 0usize;
    for slot in 0..n {
        let (ru, cv) = if slot < cut { (lv[slot], lu[slot]) } else { (lu[slot], lv[slot]) };
        pr = pr * d + ru;
        pc = pc * d + cv;
    }
    (pr, pc)
}

fn mul(a: u128, b: u128, context: &'static str) -> Result<u128> {
    a.checked_mul(b).ok_or(Error::Overflow { context })
}

fn add(a: u128, b: u128, context: &'static str) -> Result<u128> {
    a.checked_add(b).ok_or(Error::Overflow { context })
}

fn check_budget(context: &'static str, estimate: u128, budget: u128) -> Result<()> {
    if estimate > budget {
        return Err(Error::IntractableSize { context, estimate, budget });
    }
    Ok(())
}

/// Scalar variables plus a per-quadruple entry estimate for the symmetric
/// representation.
fn symmetric_estimate(d_es: usize, copies: usize) -> Result<u128> {
    let context = "symmetric relaxation size";
    let d2 = d_es * d_es;
    let dim = symmetric_dimension(d2, copies)?;
    let vars = mul(dim, dim, context)?;
    let side = mul(d_es as u128, symmetric_dimension(d2, copies - 1)?, context)?;
    let quadruples = mul(side, side, context)?;
    let entries_per_row = 2 * (d_es + d2) as u128;
    add(vars, mul(quadruples, entries_per_row, context)?, context)
}

/// Scalar variables plus entry estimates for the exchangeability,
/// reduced-channel and partial-transpose-link rows of the full-space
/// representation.
fn full_space_estimate(d_es: usize, copies: usize, cuts: usize) -> Result<u128> {
    let context = "full-space relaxation size";
    let d = (d_es * d_es) as u128;
    let dim = d
        .checked_pow(copies as u32)
        .ok_or(Error::Overflow { context })?;
    let dim2 = mul(dim, dim, context)?;
    let vars = mul(dim2, 1 + cuts as u128, context)?;
    let factorial = (1..=copies as u128)
        .try_fold(1u128, u128::checked_mul)
        .ok_or(Error::Overflow { context })?;
    let symmetry = mul(dim2, factorial + 1, context)?;
    let pt_rows = mul(d_es as u128 * (dim / d), d_es as u128 * (dim / d), context)?;
    let pt = mul(pt_rows, 2 * (d_es as u128 + d), context)?;
    let ppt = mul(cuts as u128, mul(dim, dim + 1, context)? / 2 * 4, context)?;
    add(add(add(vars, symmetry, context)?, pt, context)?, ppt, context)
}
