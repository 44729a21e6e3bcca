//! Enumeration and indexing of the symmetric basis.

use std::collections::HashMap;

use crate::symmetric::TypeVector;
use crate::{Error, Result};

/// The symmetric subspace of `(C^d)^{⊗n}`, represented by its complete list
/// of types in colexicographic order plus a reverse index.
#[derive(Debug, Clone)]
pub struct SymSpace {
    local_dim: usize,
    copies: usize,
    types: Vec<TypeVector>,
    index: HashMap<TypeVector, usize>,
}

impl SymSpace {
    pub fn local_dim(&self) -> usize {
        self.local_dim
    }

    pub fn copies(&self) -> usize {
        self.copies
    }

    /// Basis size `D_S = binomial(n + d − 1, n)`.
    pub fn dim(&self) -> usize {
        self.types.len()
    }

    /// All types in colexicographic order.
    pub fn types(&self) -> &[TypeVector] {
        &self.types
    }

    pub fn type_at(&self, i: usize) -> &TypeVector {
        &self.types[i]
    }

    /// Position of a type in the canonical order.
    pub fn index_of(&self, t: &TypeVector) -> Option<usize> {
        self.index.get(t).copied()
    }
}

/// Dimension of the symmetric subspace, `binomial(n + d − 1, n)`, computed
/// exactly with overflow detection.
pub fn symmetric_dimension(d: usize, n: usize) -> Result<u128> {
    binomial(n as u128 + d as u128 - 1, n as u128)
        .ok_or(Error::Overflow { context: "symmetric-subspace dimension" })
}

fn binomial(n: u128, mut k: u128) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    k = k.min(n - k);
    let mut result: u128 = 1;
    for i in 1..=k {
        result = result.checked_mul(n - k + i)? / i;
    }
    Some(result)
}

/// Enumerate all types of `n` copies over `d` labels in colexicographic
/// order and build the indexed space.
pub fn enumerate_types(d: usize, n: usize) -> Result<SymSpace> {
    assert!(d >= 1, "local dimension must be at least 1");
    let expected = symmetric_dimension(d, n)?;
    let expected: usize = expected
        .try_into()
        .map_err(|_| Error::Overflow { context: "symmetric-subspace dimension" })?;
    let mut types = Vec::with_capacity(expected);
    let mut scratch = vec![0usize; d];
    push_types(d, n, &mut scratch, &mut types);
    debug_assert_eq!(types.len(), expected);
    let index = types
        .iter()
        .enumerate()
        .map(|(i, t)| (t.clone(), i))
        .collect();
    Ok(SymSpace { local_dim: d, copies: n, types, index })
}

/// Recursive colex enumeration: the last coordinate varies slowest
/// (ascending), the prefix is enumerated recursively for the remainder.
fn push_types(d: usize, n: usize, scratch: &mut Vec<usize>, out: &mut Vec<TypeVector>) {
    fn rec(pos: usize, remaining: usize, scratch: &mut Vec<usize>, out: &mut Vec<TypeVector>) {
        if pos == 0 {
            scratch[0] = remaining;
            out.push(TypeVector::new(scratch.clone()));
            return;
        }
        for last in 0..=remaining {
            scratch[pos] = last;
            rec(pos - 1, remaining - last, scratch, out);
        }
    }
    rec(d - 1, n, scratch, out);
}
