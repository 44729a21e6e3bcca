//! Data model for block-diagonal trace-constrained SDPs.

use std::collections::HashMap;

use num_complex::Complex64;
use serde::Serialize;

use crate::linalg::c;
use crate::ZERO_TOL;

/// Hermiticity slack tolerated by [`SdpProblem::validate`] before a matrix is
/// flagged as malformed.
const HERMITICITY_TOL: f64 = 1e-12;

/// A sparse Hermitian matrix stored as an explicit entry list.
///
/// Entries are kept exactly as supplied (both triangles may be present);
/// consumers that need a canonical form use [`upper_triangle`], which
/// symmetrizes on the fly. Duplicate coordinates are summed on construction.
///
/// [`upper_triangle`]: SparseHermitian::upper_triangle
#[derive(Debug, Clone)]
pub struct SparseHermitian {
    dim: usize,
    entries: Vec<(usize, usize, Complex64)>,
}

impl SparseHermitian {
    /// Builds a matrix from raw triplets, summing duplicates and dropping
    /// exact zeros. Panics if an index is out of range — entry lists are
    /// always machine-generated here, so a bad index is a programming error.
    pub fn from_entries(dim: usize, entries: Vec<(usize, usize, Complex64)>) -> Self {
        let mut map: HashMap<(usize, usize), Complex64> = HashMap::new();
        for (r, c, v) in entries {
            assert!(r < dim && c < dim, "entry ({r},{c}) outside {dim}x{dim} matrix");
            *map.entry((r, c)).or_insert_with(|| Complex64::new(0.0, 0.0)) += v;
        }
        let mut entries: Vec<_> = map
            .into_iter()
            .filter(|(_, v)| v.norm_sqr() != 0.0)
            .map(|((r, c), v)| (r, c, v))
            .collect();
        entries.sort_by_key(|&(r, c, _)| (r, c));
        Self { dim, entries }
    }

    /// The Hermitian part `(M + M†)/2` of an arbitrary entry list.
    pub fn hermitian_part(dim: usize, entries: &[(usize, usize, Complex64)]) -> Self {
        let mut sym = Vec::with_capacity(2 * entries.len());
        for &(r, c, v) in entries {
            sym.push((r, c, 0.5 * v));
            sym.push((c, r, 0.5 * v.conj()));
        }
        Self::from_entries(dim, sym)
    }

    /// The anti-Hermitian part `(M − M†)/2i`, itself Hermitian; built via the
    /// identity `(M − M†)/2i = M/2i + (M/2i)†`.
    pub fn anti_hermitian_part(dim: usize, entries: &[(usize, usize, Complex64)]) -> Self {
        let half_over_i = c(0.0, -0.5);
        let mut sym = Vec::with_capacity(2 * entries.len());
        for &(r, c, v) in entries {
            sym.push((r, c, half_over_i * v));
            sym.push((c, r, (half_over_i * v).conj()));
        }
        Self::from_entries(dim, sym)
    }

    /// Side length of the (square) matrix.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Raw stored entries, sorted by `(row, col)`.
    pub fn entries(&self) -> &[(usize, usize, Complex64)] {
        &self.entries
    }

    /// Number of stored entries.
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    /// True when no entries are stored.
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Largest deviation `|M[r,c] − conj(M[c,r])|` over stored coordinates.
    pub fn hermiticity_deviation(&self) -> f64 {
        let map: HashMap<(usize, usize), Complex64> =
            self.entries.iter().map(|&(r, c, v)| ((r, c), v)).collect();
        let mut dev: f64 = 0.0;
        for &(r, c, v) in &self.entries {
            let mirror = map.get(&(c, r)).copied().unwrap_or_else(|| c64_zero());
            dev = dev.max((v - mirror.conj()).norm());
        }
        dev
    }

    /// Largest absolute imaginary part over stored entries.
    pub fn max_imag(&self) -> f64 {
        self.entries.iter().fold(0.0f64, |m, &(_, _, v)| m.max(v.im.abs()))
    }

    /// Canonical upper-triangle view: one entry per coordinate with `r ≤ c`,
    /// Hermitized as `(M[r,c] + conj(M[c,r]))/2` so that slightly asymmetric
    /// inputs round to their Hermitian part.
    pub fn upper_triangle(&self) -> Vec<(usize, usize, Complex64)> {
        let map: HashMap<(usize, usize), Complex64> =
            self.entries.iter().map(|&(r, c, v)| ((r, c), v)).collect();
        let mut out = Vec::new();
        for (&(r, c), &v) in &map {
            if r > c {
                continue;
            }
            let mirror = map.get(&(c, r)).copied().unwrap_or_else(c64_zero);
            out.push((r, c, 0.5 * (v + mirror.conj())));
        }
        out.sort_by_key(|&(r, c, _)| (c, r));
        out.retain(|&(_, _, v)| v.norm_sqr() != 0.0);
        out
    }

    /// Dense complex realization, for tests and small-matrix diagnostics.
    pub fn dense(&self) -> crate::linalg::CMatrix {
        let mut m = crate::linalg::CMatrix::zeros(self.dim, self.dim);
        for &(r, col, v) in &self.entries {
            m[(r, col)] += v;
        }
        m
    }
}

fn c64_zero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

/// One affine constraint `Tr[matrix · X] = rhs`.
#[derive(Debug, Clone)]
pub struct SdpConstraint {
    pub matrix: SparseHermitian,
    pub rhs: f64,
}

/// How a complex-data problem was mapped to real arithmetic, recorded so the
/// provenance of solver inputs stays visible in reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RealifyMode {
    /// All imaginary parts were below tolerance and were dropped.
    AlreadyReal,
    /// Each block `H` was embedded as `[[Re H, −Im H], [Im H, Re H]]`.
    Embedded,
}

/// Free-form provenance attached to a problem; everything is optional.
#[derive(Debug, Clone, Default)]
pub struct ProblemMetadata {
    /// Number of exchangeable copies the relaxation was built at, if any.
    pub copies: Option<usize>,
    /// Whether partial-transpose constraints were included.
    pub ppt: Option<bool>,
    /// Realification applied before handing data to a real solver.
    pub realify_mode: Option<RealifyMode>,
    /// Human-readable origin, e.g. a protocol name and sequence.
    pub description: String,
}

/// A block-diagonal SDP in standard trace form:
/// maximize `Tr[objective · X]` s.t. `Tr[C_k · X] = b_k`, `X ⪰ 0`,
/// where `X = diag(X_1, …, X_B)` with `X_b` of size `blocks[b]`.
///
/// Objective and constraint matrices are indexed over the *full* dimension
/// `Σ blocks[b]`; individual entries must not straddle a block boundary
/// (constraints as a whole may touch several blocks, which is how
/// partial-transpose copies are tied to the primary block).
#[derive(Debug, Clone)]
pub struct SdpProblem {
    pub blocks: Vec<usize>,
    pub objective: SparseHermitian,
    pub constraints: Vec<SdpConstraint>,
    pub metadata: ProblemMetadata,
}

impl SdpProblem {
    pub fn new(
        blocks: Vec<usize>,
        objective: SparseHermitian,
        constraints: Vec<SdpConstraint>,
    ) -> Self {
        Self { blocks, objective, constraints, metadata: ProblemMetadata::default() }
    }

    /// Total side length `Σ blocks[b]` of the block-diagonal variable.
    pub fn total_dim(&self) -> usize {
        self.blocks.iter().sum()
    }

    /// Number of scalar variables `Σ blocks[b]²` (full matrices, not
    /// triangles), as a width-proof count.
    pub fn scalar_variable_count(&self) -> u128 {
        self.blocks.iter().map(|&b| (b as u128) * (b as u128)).sum()
    }

    /// Number of affine constraints.
    pub fn constraint_count(&self) -> usize {
        self.constraints.len()
    }

    /// Largest absolute imaginary part over objective and constraint data.
    pub fn max_imag(&self) -> f64 {
        self.constraints
            .iter()
            .map(|cst| cst.matrix.max_imag())
            .fold(self.objective.max_imag(), f64::max)
    }

    /// True when all data are real to within [`ZERO_TOL`], i.e. the problem
    /// can be handed to a real-arithmetic solver as-is.
    pub fn is_real(&self) -> bool {
        self.max_imag() <= ZERO_TOL
    }

    pub(crate) fn layout(&self) -> BlockLayout {
        BlockLayout::new(&self.blocks)
    }

    /// Structural diagnostics: an empty list means the problem is well
    /// formed. Each string names the offending matrix and defect.
    pub fn validate(&self) -> Vec<String> {
        let mut issues = Vec::new();
        if self.blocks.is_empty() {
            issues.push("block list is empty".to_string());
        }
        for (b, &dim) in self.blocks.iter().enumerate() {
            if dim == 0 {
                issues.push(format!("block {b} has size zero"));
            }
        }
        let total = self.total_dim();
        let layout = self.layout();

        let check = |issues: &mut Vec<String>, name: &str, m: &SparseHermitian| {
            if m.dim() != total {
                issues.push(format!(
                    "{name} has dimension {} but the blocks sum to {total}",
                    m.dim()
                ));
                return;
            }
            let dev = m.hermiticity_deviation();
            if dev > HERMITICITY_TOL {
                issues.push(format!("{name} is not Hermitian (deviation {dev:.3e})"));
            }
            for &(r, c, _) in m.entries() {
                let (br, bc) = (layout.block_of(r), layout.block_of(c));
                if br != bc {
                    issues.push(format!(
                        "{name} has entry ({r},{c}) straddling blocks {br} and {bc}"
                    ));
                    break;
                }
            }
        };

        check(&mut issues, "objective", &self.objective);
        for (k, cst) in self.constraints.iter().enumerate() {
            check(&mut issues, &format!("constraint {k}"), &cst.matrix);
            if !cst.rhs.is_finite() {
                issues.push(format!("constraint {k} has non-finite rhs {}", cst.rhs));
            }
        }
        issues
    }
}

/// Maps global matrix indices to (block, local-index) pairs.
#[derive(Debug, Clone)]
pub(crate) struct BlockLayout {
    dims: Vec<usize>,
    offsets: Vec<usize>,
}

impl BlockLayout {
    pub(crate) fn new(dims: &[usize]) -> Self {
        let mut offsets = Vec::with_capacity(dims.len() + 1);
        let mut acc = 0;
        for &d in dims {
            offsets.push(acc);
            acc += d;
        }
        offsets.push(acc);
        Self { dims: dims.to_vec(), offsets }
    }

    pub(crate) fn block_count(&self) -> usize {
        self.dims.len()
    }

    pub(crate) fn block_dim(&self, b: usize) -> usize {
        self.dims[b]
    }

    /// Which block a global index falls in.
    pub(crate) fn block_of(&self, index: usize) -> usize {
        debug_assert!(index < *self.offsets.last().unwrap());
        // offsets is sorted; partition_point gives the first offset > index.
        self.offsets.partition_point(|&o| o <= index) - 1
    }

    /// Global index → (block, index within block).
    pub(crate) fn locate(&self, index: usize) -> (usize, usize) {
        let b = self.block_of(index);
        (b, index - self.offsets[b])
    }
}
