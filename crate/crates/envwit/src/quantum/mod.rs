//! Protocols, Choi matrices, sequence probabilities and objective assembly.
//!
//! Index conventions used throughout the crate:
//!
//! - The joint probe space is E ⊗ S with basis index `(e, s) ↦ e·d_S + s`
//!   (environment factor first).
//! - The Choi matrix of a map `Λ: In → Out` is `C(Λ) = Σ_{mn} |m⟩⟨n| ⊗ Λ(|m⟩⟨n|)`
//!   on In ⊗ Out, i.e. input-space factor first, entry index `(m, x) ↦ m·d_out + x`.
//! - One "copy" slot of the relaxation is `A = I ⊗ O` (input and output space of
//!   one application of the unknown unitary), with local index `u = i·d_ES + o`.

mod choi;
mod dilation;
mod objective;
mod probability;
mod protocol;

pub use choi::{choi_of_unitary, measure_prepare_choi, measure_prepare_choi_reduced, ChoiMatrix};
pub use dilation::{dilate_kraus, sequence_replay_kraus};
pub use objective::{ObjectiveOperator, ObjectivePath};
pub use probability::{sequence_probability, sequence_probability_choi};
pub use protocol::{MeasurementProtocol, OutcomeSequence};
