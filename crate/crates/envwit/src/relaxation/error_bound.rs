//! Quantitative convergence rate of the finite-level hierarchy.

/// Trace-norm distance bound between the level-N exchangeable marginal and
/// the closest mixture of product points:
///
/// ```text
/// 2·L·(L + d_ES² + 1) / (N + d_ES²).
/// ```
///
/// The bound decays like `O(1/N)`, so the hierarchy of upper bounds
/// converges to the true optimum; it quantifies how far a level-N bound can
/// sit above the limit. (Some statements of the finite de Finetti theorem
/// carry a `N + d_ES` denominator instead; we use the trace-norm form above
/// consistently.)
pub fn definetti_error_bound(seq_len: usize, d_es: usize, copies: usize) -> f64 {
    assert!(seq_len >= 1 && copies >= seq_len, "need N ≥ L ≥ 1");
    let l = seq_len as f64;
    let d2 = (d_es * d_es) as f64;
    2.0 * l * (l + d2 + 1.0) / (copies as f64 + d2)
}
