//! Outcome-sequence probabilities under a known joint unitary.

use num_complex::Complex64;

use crate::linalg::{partial_trace_second, unitarity_deviation, CMatrix};
use crate::quantum::{choi_of_unitary, MeasurementProtocol, ObjectiveOperator, OutcomeSequence};
use crate::{Error, Result};

fn check_inputs(
    protocol: &MeasurementProtocol,
    u: &CMatrix,
    seq: &OutcomeSequence,
) -> Result<()> {
    let d = protocol.d_es();
    if u.nrows() != d || u.ncols() != d {
        return Err(Error::DimensionMismatch { context: "sequence_probability unitary", expected: d, got: u.nrows() });
    }
    let deviation = unitarity_deviation(u);
    if deviation > 1e-9 {
        return Err(Error::NotUnitary { deviation });
    }
    if seq.symbols().iter().any(|&a| a >= protocol.alphabet_size()) {
        return Err(Error::InvalidSequence(format!(
            "sequence {seq} uses symbols outside the protocol alphabet of size {}",
            protocol.alphabet_size()
        )));
    }
    Ok(())
}

/// Probability of observing the outcome sequence `ā` when the protocol is run
/// with joint unitary `U`: alternate `ρ ↦ UρU†` with the instrument branch for
/// each recorded outcome, starting from `ρ_E0 ⊗ ρ_S0`.
pub fn sequence_probability(
    protocol: &MeasurementProtocol,
    u: &CMatrix,
    seq: &OutcomeSequence,
) -> Result<f64> {
    check_inputs(protocol, u, seq)?;
    let d_e = protocol.d_e();
    let d_s = protocol.d_s();
    let mut rho = protocol.initial_state();
    let last = seq.len() - 1;
    for (l, &a) in seq.symbols().iter().enumerate() {
        rho = u * rho * u.adjoint();
        let e_full = CMatrix::identity(d_e, d_e).kronecker(protocol.povm_element(a));
        let selected = &rho * e_full;
        if l == last {
            let tr: Complex64 = (0..rho.nrows()).map(|i| selected[(i, i)]).sum();
            return Ok(tr.re);
        }
        let env = partial_trace_second(&selected, d_e, d_s);
        rho = env.kronecker(protocol.rho_s0());
    }
    unreachable!("sequences are non-empty")
}

/// The same probability computed along the Choi route,
/// `p = Tr[X^T C_U^{⊗L}]`, contracting the sparse tensor-factor paths of the
/// sequence objective against the normalized unitary Choi matrix.
///
/// This never materializes `C_U^{⊗L}`; it is the independent cross-check for
/// [`sequence_probability`] and exercises the exact objective used by the SDP
/// relaxation.
pub fn sequence_probability_choi(
    protocol: &MeasurementProtocol,
    u: &CMatrix,
    seq: &OutcomeSequence,
) -> Result<f64> {
    check_inputs(protocol, u, seq)?;
    let choi = choi_of_unitary(u, true)?;
    let c = choi.matrix();
    let objective = ObjectiveOperator::build(protocol, seq)?;
    let mut total = Complex64::ZERO;
    for path in objective.nonzero_paths(crate::ZERO_TOL) {
        // Tr[X^T M] = Σ_{uv} X[u,v] M[u,v] with M = C^{⊗L} factorizing per slot.
        let mut prod = path.value;
        for (&r, &s) in path.rows.iter().zip(&path.cols) {
            prod *= c[(r, s)];
        }
        total += prod;
    }
    debug_assert!(total.im.abs() < 1e-9, "probability must be real");
    Ok(total.re)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::search::random_unitary;

    #[test]
    fn hadamard_probe_gives_uniform_outcomes() {
        let p = MeasurementProtocol::computational_reset(1);
        let h = 1.0 / 2.0f64.sqrt();
        let u = CMatrix::from_row_slice(2, 2, &[
            Complex64::new(h, 0.0), Complex64::new(h, 0.0),
            Complex64::new(h, 0.0), Complex64::new(-h, 0.0),
        ]);
        for text in ["0", "01", "110", "0101"] {
            let seq = OutcomeSequence::parse_with_alphabet(text, 2).unwrap();
            let prob = sequence_probability(&p, &u, &seq).unwrap();
            let want = 0.5f64.powi(seq.len() as i32);
            assert!((prob - want).abs() < 1e-12, "{text}: {prob} vs {want}");
        }
    }

    #[test]
    fn identity_probe_repeats_first_outcome() {
        let p = MeasurementProtocol::computational_reset(1);
        let u = CMatrix::identity(2, 2);
        let all0 = OutcomeSequence::parse_with_alphabet("000", 2).unwrap();
        assert!((sequence_probability(&p, &u, &all0).unwrap() - 1.0).abs() < 1e-12);
        let with1 = OutcomeSequence::parse_with_alphabet("001", 2).unwrap();
        assert!(sequence_probability(&p, &u, &with1).unwrap().abs() < 1e-12);
    }

    #[test]
    fn probabilities_sum_to_one_over_all_sequences() {
        let p = MeasurementProtocol::computational_reset(2);
        let u = random_unitary(4, 17);
        let len = 3;
        let mut total = 0.0;
        for bits in 0..(1usize << len) {
            let symbols: Vec<usize> = (0..len).map(|k| (bits >> k) & 1).collect();
            let seq = OutcomeSequence::new(symbols, 2).unwrap();
            total += sequence_probability(&p, &u, &seq).unwrap();
        }
        assert!((total - 1.0).abs() < 1e-10);
    }

    #[test]
    fn operational_and_choi_routes_agree() {
        let p2 = MeasurementProtocol::computational_reset(2);
        let seq = OutcomeSequence::parse_with_alphabet("001", 2).unwrap();
        for seed in 0..20u64 {
            let u = random_unitary(4, seed);
            let a = sequence_probability(&p2, &u, &seq).unwrap();
            let b = sequence_probability_choi(&p2, &u, &seq).unwrap();
            assert!((a - b).abs() < 1e-9, "seed {seed}: {a} vs {b}");
        }
    }

    #[test]
    fn rejects_wrong_dimension_and_alphabet() {
        let p = MeasurementProtocol::computational_reset(2);
        let seq = OutcomeSequence::parse_with_alphabet("01", 2).unwrap();
        let small = CMatrix::identity(2, 2);
        assert!(matches!(
            sequence_probability(&p, &small, &seq),
            Err(Error::DimensionMismatch { .. })
        ));
        let bad_seq = OutcomeSequence::new(vec![0, 2], 3).unwrap();
        let u = CMatrix::identity(4, 4);
        assert!(matches!(
            sequence_probability(&p, &u, &bad_seq),
            Err(Error::InvalidSequence(_))
        ));
    }
}
