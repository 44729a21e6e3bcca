//! Sparsity patterns over symmetric matrices and the closure operations
//! (constraint extension, component completion) whose fixed point defines
//! the effective sparsity.

use std::collections::HashSet;

use crate::sdp::{SdpConstraint, SparseHermitian};

/// A symmetric set of matrix coordinates, always containing the diagonal
/// once seeded. Stored as an explicit relation: `(i,j)` present iff `(j,i)`
/// is, and [`len`](SparsityPattern::len) counts both orientations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparsityPattern {
    dim: usize,
    pairs: HashSet<(usize, usize)>,
}

impl SparsityPattern {
    /// The diagonal-only pattern (the closure seed for a zero objective).
    pub fn diagonal(dim: usize) -> Self {
        let pairs = (0..dim).map(|i| (i, i)).collect();
        Self { dim, pairs }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of stored coordinates, counting `(i,j)` and `(j,i)` separately.
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// True when every coordinate is present (no reduction possible).
    pub fn is_full(&self) -> bool {
        self.pairs.len() == self.dim * self.dim
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        self.pairs.contains(&(i, j))
    }

    /// Inserts `(i,j)` and its mirror; true if either was new.
    pub fn insert(&mut self, i: usize, j: usize) -> bool {
        assert!(i < self.dim && j < self.dim, "pair ({i},{j}) outside dimension {dim}", dim = self.dim);
        let a = self.pairs.insert((i, j));
        let b = self.pairs.insert((j, i));
        a || b
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.pairs.iter().copied()
    }

    /// True when some stored coordinate of `m` (above `zero_tol`) is in the
    /// pattern.
    pub fn touches(&self, m: &SparseHermitian, zero_tol: f64) -> bool {
        m.entries()
            .iter()
            .any(|&(r, c, v)| v.norm() > zero_tol && self.contains(r, c))
    }

    /// Merges every supported coordinate of `m` into the pattern.
    pub fn absorb(&mut self, m: &SparseHermitian, zero_tol: f64) {
        for &(r, c, v) in m.entries() {
            if v.norm() > zero_tol {
                self.insert(r, c);
            }
        }
    }
}

/// Union-find with path halving and union by size.
#[derive(Debug, Clone)]
pub(crate) struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    pub(crate) fn new(n: usize) -> Self {
        Self { parent: (0..n).collect(), size: vec![1; n] }
    }

    pub(crate) fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Unites the sets of `a` and `b`; true if they were distinct.
    pub(crate) fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
        true
    }

    /// Components as sorted index lists, ordered by smallest member.
    pub(crate) fn components(&mut self) -> Vec<Vec<usize>> {
        let n = self.parent.len();
        let mut by_root: Vec<Vec<usize>> = vec![Vec::new(); n];
        let mut order = Vec::new();
        for v in 0..n {
            let r = self.find(v);
            if by_root[r].is_empty() {
                order.push(r);
            }
            by_root[r].push(v);
        }
        order.into_iter().map(|r| std::mem::take(&mut by_root[r])).collect()
    }
}

/// Support of the objective (entries above `zero_tol`) plus the diagonal —
/// the closure seed.
pub fn base_sparsity(objective: &SparseHermitian, zero_tol: f64) -> SparsityPattern {
    let mut theta = SparsityPattern::diagonal(objective.dim());
    theta.absorb(objective, zero_tol);
    theta
}

/// One extension step: merges the support of every constraint touching
/// `theta` and reports which constraints those were (ascending indices).
/// Deliberately not a closure — constraints newly reachable through merged
/// entries are picked up by the next iteration of the fixed-point loop.
pub fn extend_sparsity(
    theta: &SparsityPattern,
    constraints: &[SdpConstraint],
    zero_tol: f64,
) -> (SparsityPattern, Vec<usize>) {
    let mut out = theta.clone();
    let mut touched = Vec::new();
    for (k, cst) in constraints.iter().enumerate() {
        if theta.touches(&cst.matrix, zero_tol) {
            touched.push(k);
            out.absorb(&cst.matrix, zero_tol);
        }
    }
    (out, touched)
}

/// Completes each connected component of the pattern's adjacency graph into
/// a full block. Returns the completed pattern, the components (sorted
/// internally, ordered by smallest member), and the permutation with
/// `permutation[original] = block-ordered position`.
pub fn complete_components(
    theta: &SparsityPattern,
) -> (SparsityPattern, Vec<Vec<usize>>, Vec<usize>) {
    let dim = theta.dim();
    let mut uf = UnionFind::new(dim);
    for (i, j) in theta.iter() {
        uf.union(i, j);
    }
    let blocks = uf.components();

    let mut completed = SparsityPattern::diagonal(dim);
    let mut permutation = vec![0usize; dim];
    let mut position = 0;
    for block in &blocks {
        for &i in block {
            permutation[i] = position;
            position += 1;
            for &j in block {
                completed.insert(i, j);
            }
        }
    }
    (completed, blocks, permutation)
}

/// Fixed point of extend ∘ complete starting from [`base_sparsity`]; the
/// second value counts the passes executed (the final pass confirms
/// stability). The pattern grows monotonically in a finite lattice, so this
/// always terminates.
pub fn effective_sparsity(
    objective: &SparseHermitian,
    constraints: &[SdpConstraint],
    zero_tol: f64,
) -> (SparsityPattern, usize) {
    let mut theta = base_sparsity(objective, zero_tol);
    let mut iterations = 0;
    loop {
        iterations += 1;
        let (extended, _) = extend_sparsity(&theta, constraints, zero_tol);
        let (completed, _, _) = complete_components(&extended);
        if completed == theta {
            return (theta, iterations);
        }
        theta = completed;
    }
}
