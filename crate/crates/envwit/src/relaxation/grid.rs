//! The symmetric-representation constraint family, indexed instead of
//! materialized.
//!
//! In the scaled type basis the variable is `φ̂ = D⁻¹φD⁻¹` with
//! `D = diag(√multiplicity)`; positivity is preserved (diagonal congruence)
//! and two things become exact: the unit-trace condition turns into
//! `Σ_t mult(t)·φ̂[t,t] = 1`, and every reduced-channel condition ("tracing
//! the output of one copy leaves a maximally mixed input") becomes one
//! equation per matched quadruple `(i, s̄, i′, s̄′)` — `i, i′` input labels of
//! the split-off copy, `s̄, s̄′` types of the remaining copies — with
//! coefficients exactly `+1` and `−1/d_ES`:
//!
//! ```text
//! Σ_o φ̂[s̄⊕(i·d_ES+o), s̄′⊕(i′·d_ES+o)]  =  (δ_{ii′}/d_ES)·Σ_k φ̂[s̄⊕k, s̄′⊕k],
//! ```
//!
//! where `⊕` bumps a type by one letter. The family is therefore fully
//! described by an id scheme plus a formula, which is what [`QuadrupleGrid`]
//! exposes through [`ConstraintSource`]: the sparsity reduction can walk
//! millions of constraints while only ever materializing the ones it keeps.

use num_complex::Complex64;

use crate::linalg::c;
use crate::sdp::SparseHermitian;
use crate::sparse::ConstraintSource;
use crate::symmetric::{
    enumerate_types, multinomial_f64, single_party_decompose, SymSpace, TypeVector,
};
use crate::Result;

/// Constraint ids: `0` is the unit-trace row; `1 + lex(i, s̄, i′, s̄′)` are
/// the quadruple rows, ordered lexicographically.
pub struct QuadrupleGrid {
    space: SymSpace,
    tails: SymSpace,
    d_es: usize,
    complex: bool,
}

impl QuadrupleGrid {
    /// Index the family for `copies ≥ 1` copies of the `d_ES²`-dimensional
    /// local space. `complex` selects the emission policy for conjugate
    /// quadruple pairs (see [`matrix`](Self::matrix)); pass the objective's
    /// complexity.
    pub fn new(d_es: usize, copies: usize, complex: bool) -> Result<Self> {
        let d = d_es * d_es;
        Ok(Self {
            space: enumerate_types(d, copies)?,
            tails: enumerate_types(d, copies - 1)?,
            d_es,
            complex,
        })
    }

    /// The N-copy symmetric space the constraints act on.
    pub fn space(&self) -> &SymSpace {
        &self.space
    }

    /// Number of quadruple rows, `(d_ES · |types(d_ES², N−1)|)²`.
    pub fn quadruple_count(&self) -> usize {
        let side = self.d_es * self.tails.dim();
        side * side
    }

    fn encode(&self, i: usize, s: usize, ip: usize, sp: usize) -> usize {
        let d1 = self.tails.dim();
        1 + ((i * d1 + s) * self.d_es + ip) * d1 + sp
    }

    fn decode(&self, id: usize) -> (usize, usize, usize, usize) {
        debug_assert!(1 <= id && id <= self.quadruple_count());
        let d1 = self.tails.dim();
        let mut q = id - 1;
        let sp = q % d1;
        q /= d1;
        let ip = q % self.d_es;
        q /= self.d_es;
        let s = q % d1;
        let i = q / d1;
        (i, s, ip, sp)
    }

    fn index(&self, t: &TypeVector) -> usize {
        self.space.index_of(t).expect("bumped tail type is an N-copy type")
    }

    /// Raw coefficient entries of quadruple `(i, s̄, i′, s̄′)`: the
    /// coefficient of `φ̂[t, t′]` sits at matrix position `(t′, t)` so that
    /// the equation reads `Tr[C φ̂] = 0`.
    fn raw_entries(&self, i: usize, s: usize, ip: usize, sp: usize) -> Vec<(usize, usize, Complex64)> {
        let d_es = self.d_es;
        let tail = self.tails.type_at(s);
        let tail_p = self.tails.type_at(sp);
        let mut raw =
            Vec::with_capacity(d_es + if i == ip { d_es * d_es } else { 0 });
        for o in 0..d_es {
            let t = tail.bump(i * d_es + o);
            let tp = tail_p.bump(ip * d_es + o);
            raw.push((self.index(&tp), self.index(&t), c(1.0, 0.0)));
        }
        if i == ip {
            let w = -1.0 / d_es as f64;
            for k in 0..d_es * d_es {
                let t = tail.bump(k);
                let tp = tail_p.bump(k);
                raw.push((self.index(&tp), self.index(&t), c(w, 0.0)));
            }
        }
        raw
    }
}

impl ConstraintSource for QuadrupleGrid {
    fn dim(&self) -> usize {
        self.space.dim()
    }

    fn len(&self) -> usize {
        1 + self.quadruple_count()
    }

    fn rhs(&self, id: usize) -> f64 {
        if id == 0 {
            1.0
        } else {
            0.0
        }
    }

    /// Id 0: `Σ_t mult(t)·φ̂[t,t] = 1`. Ids ≥ 1: the quadruple rows,
    /// Hermitized. The raw coefficient matrix of the conjugate quadruple
    /// `q̄ = (i′, s̄′, i, s̄)` is the transpose of that of `q`, so with real
    /// data the Hermitian parts of a pair coincide and carry the pair's full
    /// content (the duplicates are left to the solver's presolve). With a
    /// complex objective the variable is genuinely Hermitian and both the
    /// real and imaginary parts of each pair matter: the larger id of each
    /// pair emits the anti-Hermitian part instead, keeping one row per id.
    /// Self-conjugate quadruples have symmetric raw coefficients and always
    /// emit the Hermitian part.
    fn matrix(&self, id: usize) -> SparseHermitian {
        if id == 0 {
            let entries = self
                .space
                .types()
                .iter()
                .enumerate()
                .map(|(t, ty)| (t, t, c(multinomial_f64(ty), 0.0)))
                .collect();
            return SparseHermitian::from_entries(self.space.dim(), entries);
        }
        let (i, s, ip, sp) = self.decode(id);
        let raw = self.raw_entries(i, s, ip, sp);
        if self.complex && (i, s) > (ip, sp) {
            SparseHermitian::anti_hermitian_part(self.space.dim(), &raw)
        } else {
            SparseHermitian::hermitian_part(self.space.dim(), &raw)
        }
    }

    /// Inverts the formula: a coordinate `(r, c)` can only be hit by a
    /// quadruple whose two sides split off copies with the same output label
    /// (a left-sum term) or the same full letter (a right-sum term), with
    /// tails read off the two decompositions. Both orientations of each
    /// candidate are reported, matching the Hermitized supports; duplicates
    /// and coincidental zeros are the caller's business.
    fn touching(&self, r: usize, c_: usize, out: &mut Vec<usize>) {
        if r == c_ {
            out.push(0);
        }
        let dec_r = single_party_decompose(self.space.type_at(r), self.d_es)
            .expect("N-copy types are nonempty");
        let dec_c = single_party_decompose(self.space.type_at(c_), self.d_es)
            .expect("N-copy types are nonempty");
        for tr in &dec_r {
            let s = self.tails.index_of(&tr.tail).expect("tail type enumerated");
            for tc in &dec_c {
                let sp = self.tails.index_of(&tc.tail).expect("tail type enumerated");
                if tr.output == tc.output {
                    out.push(self.encode(tr.input, s, tc.input, sp));
                    out.push(self.encode(tc.input, sp, tr.input, s));
                }
                if tr.input == tc.input && tr.output == tc.output {
                    for i in 0..self.d_es {
                        out.push(self.encode(i, s, i, sp));
                        out.push(self.encode(i, sp, i, s));
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identifiers_round_trip() {
        let grid = QuadrupleGrid::new(2, 3, false).unwrap();
        for id in 1..grid.len() {
            let (i, s, ip, sp) = grid.decode(id);
            assert_eq!(grid.encode(i, s, ip, sp), id);
        }
        assert_eq!(grid.len(), 1 + (2 * grid.tails.dim()).pow(2));
    }

    #[test]
    fn touching_covers_every_materialized_coordinate() {
        // Reverse lookup must never miss: for every constraint and every
        // stored coordinate of its matrix, the id must be recoverable from
        // that coordinate. Checked in both emission policies.
        for complex in [false, true] {
            let grid = QuadrupleGrid::new(2, 2, complex).unwrap();
            let mut candidates = Vec::new();
            for id in 0..grid.len() {
                for &(r, c_, _) in grid.matrix(id).entries() {
                    candidates.clear();
                    grid.touching(r, c_, &mut candidates);
                    assert!(
                        candidates.contains(&id),
                        "constraint {id} invisible at ({r},{c_}), complex = {complex}"
                    );
                }
            }
        }
    }

    #[test]
    fn conjugate_quadruples_transpose() {
        let grid = QuadrupleGrid::new(2, 3, false).unwrap();
        for id in 1..grid.len() {
            let (i, s, ip, sp) = grid.decode(id);
            let raw = grid.raw_entries(i, s, ip, sp);
            let mut mirrored: Vec<_> = grid
                .raw_entries(ip, sp, i, s)
                .into_iter()
                .map(|(r, c_, v)| (c_, r, v))
                .collect();
            let mut raw = raw;
            raw.sort_by_key(|&(r, c_, _)| (r, c_));
            mirrored.sort_by_key(|&(r, c_, _)| (r, c_));
            assert_eq!(raw.len(), mirrored.len());
            for (a, b) in raw.iter().zip(&mirrored) {
                assert_eq!((a.0, a.1), (b.0, b.1));
                assert!((a.2 - b.2).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn quadruple_coefficients_are_exact() {
        // Every emitted entry is built from {+1, −1/d_ES} and halving; at
        // d_ES = 2 everything is a multiple of 1/4.
        let grid = QuadrupleGrid::new(2, 3, false).unwrap();
        for id in 1..grid.len() {
            for &(_, _, v) in grid.matrix(id).entries() {
                assert_eq!(v.im, 0.0);
                let quarters = v.re * 4.0;
                assert_eq!(quarters, quarters.round(), "entry {v} not a quarter-integer");
            }
        }
    }
}
