//! The sequence objective operator in tensor-factor form.
//!
//! For a length-L sequence the probability under a unitary with normalized
//! Choi matrix `C_U` is `p = Tr[X^T C_U^{⊗L}]` with
//!
//! ```text
//! X = d_ES^L · ρ0[I_1] ⊗ M_{a_1}[O_1 I_2] ⊗ … ⊗ M_{a_{L-1}}[O_{L-1} I_L] ⊗ M̂_{a_L}[O_L]
//! ```
//!
//! The factors straddle the copy slots `A_ℓ = I_ℓ ⊗ O_ℓ`: the initial state
//! acts on the first input, each instrument Choi connects one output to the
//! next input, and the final (output-traced) instrument closes the chain. `X`
//! is therefore kept in factored form; its nonzero entries are enumerated as
//! paths through the factor chain, which is what the symmetric-subspace
//! projection consumes. Dense materialization is available for small sizes.

use num_complex::Complex64;

use crate::linalg::CMatrix;
use crate::quantum::{measure_prepare_choi, measure_prepare_choi_reduced, MeasurementProtocol, OutcomeSequence};
use crate::{Error, Result};

/// Largest total dimension for which [`ObjectiveOperator::dense`] will
/// materialize the operator.
const DENSE_DIM_LIMIT: u128 = 1 << 12;

/// One nonzero entry of `X`, addressed by per-slot local indices
/// `u_ℓ = i_ℓ·d_ES + o_ℓ`.
#[derive(Debug, Clone)]
pub struct ObjectivePath {
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
    pub value: Complex64,
}

/// The objective operator `X` for one protocol and outcome sequence, stored as
/// its tensor-factor chain.
#[derive(Debug, Clone)]
pub struct ObjectiveOperator {
    d_es: usize,
    scale: f64,
    rho0: CMatrix,
    mids: Vec<CMatrix>,
    last: CMatrix,
}

impl ObjectiveOperator {
    /// Assemble the factor chain for `(protocol, seq)`.
    pub fn build(protocol: &MeasurementProtocol, seq: &OutcomeSequence) -> Result<Self> {
        if seq.symbols().iter().any(|&a| a >= protocol.alphabet_size()) {
            return Err(Error::InvalidSequence(format!(
                "sequence {seq} uses symbols outside the protocol alphabet of size {}",
                protocol.alphabet_size()
            )));
        }
        let d_es = protocol.d_es();
        let symbols = seq.symbols();
        let mids = symbols[..symbols.len() - 1]
            .iter()
            .map(|&a| measure_prepare_choi(protocol, a).matrix().clone())
            .collect();
        Ok(Self {
            d_es,
            scale: (d_es as f64).powi(symbols.len() as i32),
            rho0: protocol.initial_state(),
            mids,
            last: measure_prepare_choi_reduced(protocol, *symbols.last().unwrap()),
        })
    }

    pub fn d_es(&self) -> usize {
        self.d_es
    }

    /// Sequence length L (number of copy slots X acts on).
    pub fn seq_len(&self) -> usize {
        self.mids.len() + 1
    }

    /// Total dimension `(d_ES²)^L` of the operator.
    pub fn dim(&self) -> u128 {
        let local = (self.d_es * self.d_es) as u128;
        (0..self.seq_len()).fold(1u128, |acc, _| acc.saturating_mul(local))
    }

    /// Enumerate the nonzero entries of `X` as paths through the factor chain.
    /// Entries with absolute value at most `zero_tol` in any factor are pruned.
    pub fn nonzero_paths(&self, zero_tol: f64) -> Vec<ObjectivePath> {
        let d = self.d_es;
        let nz_rho: Vec<(usize, usize, Complex64)> = sparse_entries(&self.rho0, zero_tol);
        let nz_mids: Vec<Vec<(usize, usize, Complex64)>> =
            self.mids.iter().map(|m| sparse_entries(m, zero_tol)).collect();
        let nz_last = sparse_entries(&self.last, zero_tol);
        let mut paths = Vec::new();
        // DFS over factor choices; (i_cur, i2_cur) are the pending input
        // indices carried by the previous factor's output legs.
        struct Frame {
            depth: usize,
            i_cur: usize,
            i2_cur: usize,
            rows: Vec<usize>,
            cols: Vec<usize>,
            value: Complex64,
        }
        let mut stack: Vec<Frame> = nz_rho
            .iter()
            .map(|&(i, j, v)| Frame { depth: 0, i_cur: i, i2_cur: j, rows: vec![], cols: vec![], value: v })
            .collect();
        while let Some(f) = stack.pop() {
            if f.depth == self.mids.len() {
                for &(o, o2, v) in &nz_last {
                    let mut rows = f.rows.clone();
                    let mut cols = f.cols.clone();
                    rows.push(f.i_cur * d + o);
                    cols.push(f.i2_cur * d + o2);
                    paths.push(ObjectivePath { rows, cols, value: f.value * v * self.scale });
                }
                continue;
            }
            for &(r, c, v) in &nz_mids[f.depth] {
                // factor index (o, i_next) ↦ o·d + i_next
                let (o, i_next) = (r / d, r % d);
                let (o2, i2_next) = (c / d, c % d);
                let mut rows = f.rows.clone();
                let mut cols = f.cols.clone();
                rows.push(f.i_cur * d + o);
                cols.push(f.i2_cur * d + o2);
                stack.push(Frame {
                    depth: f.depth + 1,
                    i_cur: i_next,
                    i2_cur: i2_next,
                    rows,
                    cols,
                    value: f.value * v,
                });
            }
        }
        paths
    }

    /// Materialize `X` densely (slot-major index order). Fails with
    /// [`Error::IntractableSize`] above [`DENSE_DIM_LIMIT`].
    pub fn dense(&self) -> Result<CMatrix> {
        let dim = self.dim();
        if dim > DENSE_DIM_LIMIT {
            return Err(Error::IntractableSize {
                context: "dense objective",
                estimate: dim,
                budget: DENSE_DIM_LIMIT,
            });
        }
        let dim = dim as usize;
        let local = self.d_es * self.d_es;
        let mut x = CMatrix::zeros(dim, dim);
        for path in self.nonzero_paths(0.0) {
            let (mut r, mut c) = (0usize, 0usize);
            for (&u, &v) in path.rows.iter().zip(&path.cols) {
                r = r * local + u;
                c = c * local + v;
            }
            x[(r, c)] += path.value;
        }
        Ok(x)
    }
}

fn sparse_entries(m: &CMatrix, zero_tol: f64) -> Vec<(usize, usize, Complex64)> {
    let mut out = Vec::new();
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            if m[(r, c)].norm() > zero_tol {
                out.push((r, c, m[(r, c)]));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, hermiticity_deviation, min_eigenvalue};
    use crate::quantum::choi_of_unitary;
    use crate::search::random_unitary;

    fn seq(text: &str) -> OutcomeSequence {
        OutcomeSequence::parse_with_alphabet(text, 2).unwrap()
    }

    #[test]
    fn single_step_objective_matches_closed_form() {
        // L = 1: X = d_ES · ρ0 ⊗ M̂_a, and Tr[X^T C_U] = |⟨0|U|0⟩|² for the
        // built-in memoryless protocol with outcome 0.
        let p = MeasurementProtocol::computational_reset(1);
        let x = ObjectiveOperator::build(&p, &seq("0")).unwrap();
        let dense = x.dense().unwrap();
        let want = p.initial_state().kronecker(&measure_prepare_choi_reduced(&p, 0)) * c(2.0, 0.0);
        assert!((dense.clone() - want).iter().all(|z| z.norm() < 1e-14));
        for seed in 0..10u64 {
            let u = random_unitary(2, seed);
            let cu = choi_of_unitary(&u, true).unwrap();
            let value = (dense.transpose() * cu.matrix()).trace();
            let direct = u[(0, 0)].norm_sqr();
            assert!((value.re - direct).abs() < 1e-12);
        }
    }

    #[test]
    fn dense_and_paths_agree() {
        let p = MeasurementProtocol::computational_reset(1);
        let x = ObjectiveOperator::build(&p, &seq("01")).unwrap();
        let dense = x.dense().unwrap();
        let mut rebuilt = CMatrix::zeros(dense.nrows(), dense.ncols());
        let local = 4;
        for path in x.nonzero_paths(0.0) {
            let (mut r, mut cidx) = (0usize, 0usize);
            for (&u, &v) in path.rows.iter().zip(&path.cols) {
                r = r * local + u;
                cidx = cidx * local + v;
            }
            rebuilt[(r, cidx)] += path.value;
        }
        assert!((dense - rebuilt).iter().all(|z| z.norm() < 1e-13));
    }

    #[test]
    fn objective_is_hermitian_psd() {
        let p = MeasurementProtocol::computational_reset(1);
        let x = ObjectiveOperator::build(&p, &seq("010")).unwrap().dense().unwrap();
        assert!(hermiticity_deviation(&x) < 1e-12);
        assert!(min_eigenvalue(&x) > -1e-10);
    }

    #[test]
    fn factored_size_is_reported_without_materializing() {
        let p = MeasurementProtocol::computational_reset(2);
        let x = ObjectiveOperator::build(&p, &seq("0010")).unwrap();
        assert_eq!(x.dim(), 16u128.pow(4));
        assert!(matches!(x.dense(), Err(Error::IntractableSize { .. })));
        // Sparse paths stay cheap: 1 (pure state) · 4 · 4 · 4 (instrument) · 2 (final marginal).
        assert_eq!(x.nonzero_paths(crate::ZERO_TOL).len(), 128);
    }
}
