//! Occupation types (weak compositions) and their combinatorics.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};

use crate::{Error, Result};

/// Occupation counts of `n` tensor factors over `d` local basis labels.
///
/// Types are ordered colexicographically (the last differing coordinate
/// decides), which matches the enumeration order of
/// [`enumerate_types`](crate::symmetric::enumerate_types) and fixes a
/// deterministic basis layout for everything downstream.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TypeVector {
    counts: Vec<usize>,
}

impl TypeVector {
    pub fn new(counts: Vec<usize>) -> Self {
        Self { counts }
    }

    /// The all-zero type on `d` labels (the single type with no copies).
    pub fn zero(d: usize) -> Self {
        Self { counts: vec![0; d] }
    }

    /// The unit type `e_k`: one copy carrying label `k`.
    pub fn unit(d: usize, k: usize) -> Self {
        let mut counts = vec![0; d];
        counts[k] = 1;
        Self { counts }
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    /// Number of distinct local labels `d`.
    pub fn dim(&self) -> usize {
        self.counts.len()
    }

    /// Number of copies `n = Σ tᵢ`.
    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }

    /// Componentwise sum.
    pub fn plus(&self, other: &TypeVector) -> TypeVector {
        debug_assert_eq!(self.dim(), other.dim());
        TypeVector::new(
            self.counts.iter().zip(&other.counts).map(|(a, b)| a + b).collect(),
        )
    }

    /// Add one copy of label `k`.
    pub fn bump(&self, k: usize) -> TypeVector {
        let mut counts = self.counts.clone();
        counts[k] += 1;
        TypeVector::new(counts)
    }

    /// Componentwise difference, or `None` if any coordinate would go
    /// negative.
    pub fn checked_sub(&self, other: &TypeVector) -> Option<TypeVector> {
        debug_assert_eq!(self.dim(), other.dim());
        self.counts
            .iter()
            .zip(&other.counts)
            .map(|(a, b)| a.checked_sub(*b))
            .collect::<Option<Vec<_>>>()
            .map(TypeVector::new)
    }
}

impl PartialOrd for TypeVector {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for TypeVector {
    /// Colexicographic order: the last coordinate in which two types differ
    /// decides. Types of different lengths are ordered by length first.
    fn cmp(&self, other: &Self) -> Ordering {
        self.counts
            .len()
            .cmp(&other.counts.len())
            .then_with(|| {
                for (a, b) in self.counts.iter().rev().zip(other.counts.iter().rev()) {
                    match a.cmp(b) {
                        Ordering::Equal => continue,
                        ord => return ord,
                    }
                }
                Ordering::Equal
            })
    }
}

impl fmt::Display for TypeVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.counts.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// Type of a word: occupation counts of its letters.
pub fn word_type(word: &[usize], d: usize) -> TypeVector {
    let mut counts = vec![0; d];
    for &w in word {
        counts[w] += 1;
    }
    TypeVector::new(counts)
}

/// Exact multinomial coefficient `(Σtᵢ)! / Π tᵢ!`, the number of words of
/// type `t` (and the squared norm of the unnormalized symmetric vector).
pub fn multinomial(t: &TypeVector) -> BigUint {
    let mut result = factorial(t.total());
    for &c in t.counts() {
        result /= factorial(c);
    }
    result
}

/// [`multinomial`] converted to floating point (infinite on overflow, which
/// cannot occur for the copy counts used by the hierarchy).
pub fn multinomial_f64(t: &TypeVector) -> f64 {
    multinomial(t).to_f64().unwrap_or(f64::INFINITY)
}

fn factorial(n: usize) -> BigUint {
    (1..=n).fold(BigUint::one(), |acc, k| acc * k)
}

/// All ways to write `t` as a componentwise sum `r₁ + … + r_m` with
/// prescribed copy counts `rᵢ.total() = part_sizes[i]`; complete and
/// duplicate-free. This is how a symmetric basis vector splits across a
/// partition of its tensor factors.
pub fn split_type(t: &TypeVector, part_sizes: &[usize]) -> Result<Vec<Vec<TypeVector>>> {
    let sum: usize = part_sizes.iter().sum();
    if sum != t.total() {
        return Err(Error::DimensionMismatch {
            context: "type split",
            expected: t.total(),
            got: sum,
        });
    }
    if part_sizes.len() == 1 {
        return Ok(vec![vec![t.clone()]]);
    }
    let mut out = Vec::new();
    for head in bounded_compositions(t, part_sizes[0]) {
        let rest = t.checked_sub(&head).expect("head bounded by t");
        for mut tail in split_type(&rest, &part_sizes[1..])? {
            let mut tuple = Vec::with_capacity(part_sizes.len());
            tuple.push(head.clone());
            tuple.append(&mut tail);
            out.push(tuple);
        }
    }
    Ok(out)
}

/// All types `r ≤ t` (componentwise) with `r.total() = m`, in colex order.
fn bounded_compositions(t: &TypeVector, m: usize) -> Vec<TypeVector> {
    fn rec(bounds: &[usize], m: usize, out: &mut Vec<Vec<usize>>) {
        if bounds.len() == 1 {
            if m <= bounds[0] {
                out.push(vec![m]);
            }
            return;
        }
        let last = *bounds.last().unwrap();
        for take in 0..=last.min(m) {
            let mut inner = Vec::new();
            rec(&bounds[..bounds.len() - 1], m - take, &mut inner);
            for mut pre in inner {
                pre.push(take);
                out.push(pre);
            }
        }
    }
    let mut raw = Vec::new();
    rec(t.counts(), m, &mut raw);
    raw.into_iter().map(TypeVector::new).collect()
}

/// One term of the single-party decomposition of a symmetric basis vector:
/// the split-off copy carries local label `input·d_ES + output`, the
/// remaining `n − 1` copies carry type `tail`.
#[derive(Debug, Clone, PartialEq)]
pub struct DecompositionTerm {
    /// Input-leg index of the split-off copy (`0 ≤ input < d_ES`).
    pub input: usize,
    /// Output-leg index of the split-off copy (`0 ≤ output < d_ES`).
    pub output: usize,
    /// Type of the remaining copies (`total = t.total() − 1`).
    pub tail: TypeVector,
    /// Combinatorial weight of the term. In the rescaled variables `φ̂` used
    /// by constraint generation all weights are exactly 1; the field keeps
    /// the decomposition self-describing.
    pub weight: f64,
}

/// Split one copy off a symmetric basis vector over the local space
/// `C^{d_ES} ⊗ C^{d_ES}`: one term per label `k` with `t_k ≥ 1`, decoding
/// `k = input·d_ES + output`.
pub fn single_party_decompose(t: &TypeVector, d_es: usize) -> Result<Vec<DecompositionTerm>> {
    if t.total() == 0 {
        return Err(Error::EmptyType);
    }
    if t.dim() != d_es * d_es {
        return Err(Error::DimensionMismatch {
            context: "single-party decomposition",
            expected: d_es * d_es,
            got: t.dim(),
        });
    }
    Ok(t.counts()
        .iter()
        .enumerate()
        .filter(|&(_, &c)| c >= 1)
        .map(|(k, _)| DecompositionTerm {
            input: k / d_es,
            output: k % d_es,
            tail: t.checked_sub(&TypeVector::unit(t.dim(), k)).unwrap(),
            weight: 1.0,
        })
        .collect())
}
