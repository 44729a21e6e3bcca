//! Small dense complex linear-algebra helpers shared across modules.

use nalgebra::DMatrix;
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Maximum absolute deviation from Hermiticity, `max |A - A†|`.
pub fn hermiticity_deviation(a: &CMatrix) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            worst = worst.max((a[(i, j)] - a[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Maximum absolute deviation from unitarity, `max |U†U - 1|`.
pub fn unitarity_deviation(u: &CMatrix) -> f64 {
    let n = u.nrows();
    let g = u.adjoint() * u;
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let want = if i == j { Complex64::ONE } else { Complex64::ZERO };
            worst = worst.max((g[(i, j)] - want).norm());
        }
    }
    worst
}

/// Smallest eigenvalue of a Hermitian matrix (symmetrized before the solve).
pub fn min_eigenvalue(a: &CMatrix) -> f64 {
    let h = (a + a.adjoint()) * c(0.5, 0.0);
    let eig = h.symmetric_eigenvalues();
    eig.iter().cloned().fold(f64::INFINITY, f64::min)
}

/// Partial trace over the second factor of `A ⊗ B` with dims `(da, db)`.
pub fn partial_trace_second(m: &CMatrix, da: usize, db: usize) -> CMatrix {
    debug_assert_eq!(m.nrows(), da * db);
    CMatrix::from_fn(da, da, |i, j| {
        (0..db).map(|s| m[(i * db + s, j * db + s)]).sum()
    })
}

/// Partial trace over the first factor of `A ⊗ B` with dims `(da, db)`.
pub fn partial_trace_first(m: &CMatrix, da: usize, db: usize) -> CMatrix {
    debug_assert_eq!(m.nrows(), da * db);
    CMatrix::from_fn(db, db, |s, t| {
        (0..da).map(|e| m[(e * db + s, e * db + t)]).sum()
    })
}

/// Largest `|Im|` over all entries.
pub fn max_imag(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.im.abs()).fold(0.0, f64::max)
}
