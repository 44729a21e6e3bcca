//! What to relax: protocol, sequence, hierarchy level and representation.

use crate::quantum::{MeasurementProtocol, ObjectiveOperator, OutcomeSequence};
use crate::{Error, Result};

/// How the exchangeable N-copy variable is encoded.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Representation {
    /// The variable lives on the symmetric subspace of the N copies, indexed
    /// by types; exchangeability is built into the basis and the variable
    /// side is the multiset dimension `binom(N + d_ES² − 1, N)`.
    Symmetric,
    /// The variable lives on the full `(d_ES²)^N`-dimensional tensor space
    /// with explicit symmetrization constraints. Exponentially larger, but
    /// the only encoding on which partial-transpose blocks are available.
    FullSpace,
}

/// Default ceiling on the estimated problem size (scalar variables plus
/// constraint entries) a build is allowed to materialize.
pub const DEFAULT_SCALAR_BUDGET: u128 = 50_000_000;

/// A fully specified relaxation instance: which protocol and outcome
/// sequence to bound, at which extension level `copies = N ≥ L`, in which
/// representation, and whether to add partial-transpose blocks.
#[derive(Debug, Clone)]
pub struct RelaxationSpec {
    pub protocol: MeasurementProtocol,
    pub seq: OutcomeSequence,
    /// Extension level N: number of exchangeable copies of the normalized
    /// channel Choi matrix. Larger N tightens the bound.
    pub copies: usize,
    /// Add `Φ^{T_α} ⪰ 0` blocks for the first-k bipartitions, 1 ≤ k ≤ ⌊N/2⌋.
    pub ppt: bool,
    pub representation: Representation,
    /// Size gate checked before any allocation; see [`DEFAULT_SCALAR_BUDGET`].
    pub scalar_budget: u128,
}

impl RelaxationSpec {
    /// Symmetric-representation spec without partial-transpose blocks, at
    /// the default size budget.
    pub fn new(protocol: MeasurementProtocol, seq: OutcomeSequence, copies: usize) -> Self {
        Self {
            protocol,
            seq,
            copies,
            ppt: false,
            representation: Representation::Symmetric,
            scalar_budget: DEFAULT_SCALAR_BUDGET,
        }
    }

    pub fn with_ppt(mut self) -> Self {
        self.ppt = true;
        self.representation = Representation::FullSpace;
        self
    }

    pub fn with_representation(mut self, representation: Representation) -> Self {
        self.representation = representation;
        self
    }

    /// Checks the cross-field invariants; builders call this first.
    pub fn validate(&self) -> Result<()> {
        if self.copies < self.seq.len() {
            return Err(Error::DimensionMismatch {
                context: "relaxation level (copies < sequence length)",
                expected: self.seq.len(),
                got: self.copies,
            });
        }
        if self.ppt && self.representation != Representation::FullSpace {
            return Err(Error::InvalidProblem {
                issues: vec![
                    "partial-transpose blocks require the full-space representation".into(),
                ],
            });
        }
        // Surfaces alphabet mismatches with the protocol eagerly.
        ObjectiveOperator::build(&self.protocol, &self.seq)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(copies: usize) -> RelaxationSpec {
        let protocol = MeasurementProtocol::computational_reset(1);
        let seq = OutcomeSequence::parse("001").unwrap();
        RelaxationSpec::new(protocol, seq, copies)
    }

    #[test]
    fn level_below_sequence_length_is_rejected() {
        assert!(spec(2).validate().is_err());
        assert!(spec(3).validate().is_ok());
    }

    #[test]
    fn ppt_outside_full_space_is_rejected() {
        let mut s = spec(3);
        s.ppt = true;
        assert!(matches!(s.validate(), Err(Error::InvalidProblem { .. })));
        assert!(spec(3).with_ppt().validate().is_ok());
    }

    #[test]
    fn alphabet_mismatch_is_rejected() {
        let protocol = MeasurementProtocol::computational_reset(1);
        let seq = OutcomeSequence::parse_with_alphabet("012", 3).unwrap();
        let s = RelaxationSpec::new(protocol, seq, 3);
        assert!(matches!(s.validate(), Err(Error::InvalidSequence(_))));
    }
}
