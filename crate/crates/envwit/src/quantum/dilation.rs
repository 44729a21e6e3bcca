//! Unitary dilation of an instrument acting on the environment.
//!
//! An instrument with Kraus operators `K_a: C^d → C^d` (satisfying
//! `Σ_a K_a†K_a = 1`) can be realized by a single unitary on the combined
//! environment ⊗ system space: stack the branches into the isometry
//! `Q = Σ_a K_a ⊗ |a⟩_S`, which records the branch label in the probe system,
//! and complete `Q` to a unitary. Probing the completed unitary with the
//! computational-reset protocol then reads the instrument's outcome
//! distribution directly: measuring the system with outcome `a` leaves the
//! environment in `K_a ρ K_a†`.
//!
//! The completion is not unique; here it is fixed deterministically by
//! rank-revealing orthogonalization of the identity columns against `Q`, so
//! repeated calls produce the same unitary.

use crate::linalg::{c, CMatrix};
use crate::quantum::OutcomeSequence;
use crate::{Error, Result};

/// Build a unitary `U` on `C^{d·d_S}` (environment factor first, index
/// `(e, s) ↦ e·d_S + s`) such that for every environment state `ρ`:
///
/// ```text
/// Tr_S[U (ρ ⊗ |0⟩⟨0|_S) U† · (1 ⊗ |a⟩⟨a|_S)] = K_a ρ K_a†
/// ```
///
/// The number of Kraus operators must not exceed `d_s`, since the system
/// records which branch fired.
pub fn dilate_kraus(kraus: &[CMatrix], d_s: usize) -> Result<CMatrix> {
    if kraus.is_empty() || kraus[0].nrows() == 0 {
        return Err(Error::DimensionMismatch { context: "kraus dilation", expected: 1, got: 0 });
    }
    let d = kraus[0].nrows();
    for k in kraus {
        if k.nrows() != d || k.ncols() != d {
            return Err(Error::DimensionMismatch {
                context: "kraus dilation",
                expected: d,
                got: k.nrows().max(k.ncols()),
            });
        }
    }
    if kraus.len() > d_s {
        return Err(Error::TooManyOutcomes { outcomes: kraus.len(), d_s });
    }

    let mut gram = CMatrix::zeros(d, d);
    for k in kraus {
        gram += k.adjoint() * k;
    }
    let deviation = (gram - CMatrix::identity(d, d))
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max);
    if deviation > 1e-10 {
        return Err(Error::NotAnInstrument { deviation });
    }

    // Isometry Q: C^d → C^{d·d_S} with Q[(e', a), e] = K_a[e', e]; its columns
    // are orthonormal exactly because of the completeness relation.
    let dim = d * d_s;
    let mut u = CMatrix::zeros(dim, dim);
    for (a, k) in kraus.iter().enumerate() {
        for e_out in 0..d {
            for e_in in 0..d {
                // Column of U at the reset input (e_in, 0).
                u[(e_out * d_s + a, e_in * d_s)] = k[(e_out, e_in)];
            }
        }
    }

    // Complete the remaining columns (inputs (e, s) with s > 0) by
    // Gram–Schmidt over identity candidates in ascending index order.
    let mut filled: Vec<usize> = (0..d).map(|e| e * d_s).collect();
    let mut candidate = 0usize;
    for e in 0..d {
        for s in 1..d_s {
            let col = e * d_s + s;
            loop {
                assert!(candidate < dim, "identity candidates span the whole space");
                let mut vec: Vec<num_complex::Complex64> = vec![c(0.0, 0.0); dim];
                vec[candidate] = c(1.0, 0.0);
                candidate += 1;
                // Two orthogonalization passes keep the completion stable.
                for _ in 0..2 {
                    for &f in &filled {
                        let overlap: num_complex::Complex64 =
                            (0..dim).map(|r| u[(r, f)].conj() * vec[r]).sum();
                        for r in 0..dim {
                            vec[r] -= overlap * u[(r, f)];
                        }
                    }
                }
                let norm: f64 = vec.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                if norm > 1e-7 {
                    for (r, z) in vec.iter().enumerate() {
                        u[(r, col)] = z / c(norm, 0.0);
                    }
                    filled.push(col);
                    break;
                }
            }
        }
    }
    Ok(u)
}

/// Kraus operators of the deterministic machine that replays `seq`: state
/// `i` of a `len(seq)`-level environment emits symbol `seq[i]` and advances
/// to state `i+1` (cyclically). Started in state 0 the machine reproduces
/// the sequence with probability one.
pub fn sequence_replay_kraus(seq: &OutcomeSequence) -> Vec<CMatrix> {
    let len = seq.len();
    (0..seq.alphabet_size())
        .map(|a| {
            let mut k = CMatrix::zeros(len, len);
            for (i, &ai) in seq.symbols().iter().enumerate() {
                if ai == a {
                    k[((i + 1) % len, i)] = c(1.0, 0.0);
                }
            }
            k
        })
        .collect()
}
