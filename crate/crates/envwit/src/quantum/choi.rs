//! Choi matrices of the unknown unitary and of the measure-and-prepare
//! instrument.

use num_complex::Complex64;

use crate::linalg::{
    hermiticity_deviation, min_eigenvalue, partial_trace_first, partial_trace_second,
    unitarity_deviation, CMatrix,
};
use crate::quantum::MeasurementProtocol;
use crate::{Error, Result};

/// Tolerance accepted on unitarity of user-supplied matrices.
const UNITARY_TOL: f64 = 1e-9;

/// Choi matrix `C(Λ) = Σ_{mn} |m⟩⟨n| ⊗ Λ(|m⟩⟨n|)` of a map `Λ: In → Out`,
/// stored on In ⊗ Out (input factor first, index `(m, x) ↦ m·d_out + x`).
#[derive(Debug, Clone, PartialEq)]
pub struct ChoiMatrix {
    matrix: CMatrix,
    d_in: usize,
    d_out: usize,
    /// Whether the matrix carries the `1/d_in` state normalization.
    normalized: bool,
}

impl ChoiMatrix {
    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn d_in(&self) -> usize {
        self.d_in
    }

    pub fn d_out(&self) -> usize {
        self.d_out
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    /// Partial trace over the output factor, a `d_in × d_in` matrix.
    pub fn trace_out_output(&self) -> CMatrix {
        partial_trace_second(&self.matrix, self.d_in, self.d_out)
    }

    /// Partial trace over the input factor, a `d_out × d_out` matrix.
    pub fn trace_out_input(&self) -> CMatrix {
        partial_trace_first(&self.matrix, self.d_in, self.d_out)
    }

    /// Max deviation from the structural invariants (Hermiticity, positivity,
    /// and for normalized Chois the unit trace and maximally-mixed input
    /// marginal). Useful in tests and validation.
    pub fn invariant_deviation(&self) -> f64 {
        let mut worst = hermiticity_deviation(&self.matrix);
        worst = worst.max((-min_eigenvalue(&self.matrix)).max(0.0));
        if self.normalized {
            let tr: Complex64 = (0..self.matrix.nrows()).map(|i| self.matrix[(i, i)]).sum();
            worst = worst.max((tr - Complex64::ONE).norm());
            let marginal = self.trace_out_output();
            for i in 0..self.d_in {
                for j in 0..self.d_in {
                    let want = if i == j {
                        Complex64::new(1.0 / self.d_in as f64, 0.0)
                    } else {
                        Complex64::ZERO
                    };
                    worst = worst.max((marginal[(i, j)] - want).norm());
                }
            }
        }
        worst
    }
}

/// Choi matrix of the conjugation channel `ρ ↦ U ρ U†`.
///
/// The result is rank one: `C = |ω_U⟩⟨ω_U|` with `|ω_U⟩ = (1 ⊗ U)|Ω⟩`,
/// `|Ω⟩ = Σ_i |ii⟩`. With `normalized = true` the matrix is divided by the
/// dimension, making it a state with unit trace whose input marginal is
/// maximally mixed.
pub fn choi_of_unitary(u: &CMatrix, normalized: bool) -> Result<ChoiMatrix> {
    let d = u.nrows();
    if u.ncols() != d {
        return Err(Error::DimensionMismatch { context: "choi_of_unitary", expected: d, got: u.ncols() });
    }
    let deviation = unitarity_deviation(u);
    if deviation > UNITARY_TOL {
        return Err(Error::NotUnitary { deviation });
    }
    let mut omega = nalgebra::DVector::<Complex64>::zeros(d * d);
    for i in 0..d {
        // (1 ⊗ U)|Ω⟩ : component (i, x) = U[x, i]
        for x in 0..d {
            omega[i * d + x] = u[(x, i)];
        }
    }
    let scale = if normalized { 1.0 / d as f64 } else { 1.0 };
    let matrix = CMatrix::from_fn(d * d, d * d, |r, c| omega[r] * omega[c].conj() * scale);
    Ok(ChoiMatrix { matrix, d_in: d, d_out: d, normalized })
}

/// Choi matrix of the measure-and-prepare instrument branch for outcome `a`:
/// `M_a(ρ) = Tr_S[ρ (1_E ⊗ E_a)] ⊗ ρ_S0` on the joint space E ⊗ S.
///
/// Entries: `M[(e,s)(x_e,x_s), (e',s')(y_e,y_s)] = (E_a)_{s',s} δ_{x_e,e}
/// δ_{y_e,e'} (ρ_S0)_{x_s,y_s}`. Not normalized (it is one branch of a CPTP
/// instrument, not a channel).
pub fn measure_prepare_choi(protocol: &MeasurementProtocol, a: usize) -> ChoiMatrix {
    let d_e = protocol.d_e();
    let d_s = protocol.d_s();
    let d = d_e * d_s;
    let e_a = protocol.povm_element(a);
    let rho_s0 = protocol.rho_s0();
    let mut matrix = CMatrix::zeros(d * d, d * d);
    for e in 0..d_e {
        for s in 0..d_s {
            let m = e * d_s + s;
            for e2 in 0..d_e {
                for s2 in 0..d_s {
                    let n = e2 * d_s + s2;
                    let coef = e_a[(s2, s)];
                    if coef.norm() == 0.0 {
                        continue;
                    }
                    for xs in 0..d_s {
                        let x = e * d_s + xs;
                        for ys in 0..d_s {
                            let y = e2 * d_s + ys;
                            matrix[(m * d + x, n * d + y)] = coef * rho_s0[(xs, ys)];
                        }
                    }
                }
            }
        }
    }
    ChoiMatrix { matrix, d_in: d, d_out: d, normalized: false }
}

/// Output-traced instrument Choi `M̂_a = Tr_O[M_a]`, used for the final step of
/// a sequence where no re-preparation happens.
pub fn measure_prepare_choi_reduced(protocol: &MeasurementProtocol, a: usize) -> CMatrix {
    measure_prepare_choi(protocol, a).trace_out_output()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;

    #[test]
    fn identity_channel_choi_has_corner_ones() {
        let u = CMatrix::identity(2, 2);
        let choi = choi_of_unitary(&u, false).unwrap();
        let m = choi.matrix();
        for r in 0..4 {
            for s in 0..4 {
                let want = if (r == 0 || r == 3) && (s == 0 || s == 3) { 1.0 } else { 0.0 };
                assert!((m[(r, s)] - c(want, 0.0)).norm() < 1e-14);
            }
        }
        let normalized = choi_of_unitary(&u, true).unwrap();
        assert!((normalized.matrix() * c(2.0, 0.0) - m).iter().all(|z| z.norm() < 1e-14));
        assert!(normalized.invariant_deviation() < 1e-12);
    }

    #[test]
    fn non_unitary_is_rejected() {
        let u = CMatrix::identity(2, 2) * c(2.0, 0.0);
        match choi_of_unitary(&u, true) {
            Err(Error::NotUnitary { deviation }) => assert!(deviation > 1.0),
            other => panic!("expected NotUnitary, got {other:?}"),
        }
    }

    #[test]
    fn normalized_choi_is_rank_one_state() {
        // A random-ish unitary from a Givens rotation chain.
        let th = 0.7f64;
        let mut u = CMatrix::identity(3, 3);
        u[(0, 0)] = c(th.cos(), 0.0);
        u[(0, 1)] = c(-th.sin(), 0.0);
        u[(1, 0)] = c(th.sin(), 0.0);
        u[(1, 1)] = c(th.cos(), 0.0);
        let choi = choi_of_unitary(&u, true).unwrap();
        assert!(choi.invariant_deviation() < 1e-12);
        // Rank one: C^2 = Tr[C] C = C.
        let sq = choi.matrix() * choi.matrix();
        assert!((sq - choi.matrix()).iter().all(|z| z.norm() < 1e-12));
    }

    #[test]
    fn instrument_branches_sum_to_trace_preserving() {
        let p = MeasurementProtocol::computational_reset(2);
        let d = p.d_es();
        let mut sum = CMatrix::zeros(d, d);
        for a in 0..p.alphabet_size() {
            let choi = measure_prepare_choi(&p, a);
            assert!(hermiticity_deviation(choi.matrix()) < 1e-12);
            assert!(min_eigenvalue(choi.matrix()) > -1e-10);
            sum += choi.trace_out_output();
        }
        // Σ_a Tr_O[M_a] = 1 expresses that the instrument is trace preserving.
        assert!((sum - CMatrix::identity(d, d)).iter().all(|z| z.norm() < 1e-12));
    }

    #[test]
    fn reduced_choi_of_builtin_is_projector_marginal() {
        let p = MeasurementProtocol::computational_reset(2);
        let m0 = measure_prepare_choi_reduced(&p, 0);
        // 1_E ⊗ |0⟩⟨0| in the (e, s) ↦ e·d_S + s basis.
        let want = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            c(1.0, 0.0),
            c(0.0, 0.0),
            c(1.0, 0.0),
            c(0.0, 0.0),
        ]));
        assert!((m0 - want).iter().all(|z| z.norm() < 1e-14));
    }

    #[test]
    fn trivial_probe_reduces_to_identity_channel() {
        // d_S = 1 with POVM {1}: measuring reveals nothing and re-preparing
        // does nothing, so the instrument is the identity channel on E.
        let p = MeasurementProtocol::new(
            3,
            1,
            CMatrix::from_fn(3, 3, |i, j| if i == 0 && j == 0 { c(1.0, 0.0) } else { c(0.0, 0.0) }),
            CMatrix::identity(1, 1),
            vec![CMatrix::identity(1, 1)],
        )
        .unwrap();
        let m = measure_prepare_choi(&p, 0);
        let id = choi_of_unitary(&CMatrix::identity(3, 3), false).unwrap();
        assert!((m.matrix() - id.matrix()).iter().all(|z| z.norm() < 1e-14));
    }
}
