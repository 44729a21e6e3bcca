//! Best-effort lower bounds by gradient ascent over probe unitaries.
//!
//! The sequence probability is a smooth function of the system–environment
//! unitary, so ascending it over the unitary group yields achievable values
//! that bracket the certified upper bounds from below. Each iterate is
//! parametrized as `U = U₀·exp(iH)` with `H` Hermitian (`d_ES²` real
//! parameters), which keeps the search unconstrained while every point stays
//! exactly unitary; `U₀` is the identity for random restarts and a warm-start
//! unitary otherwise. Gradients are computed analytically: an adjoint sweep
//! through the measure-and-prepare chain gives `dp = 2 Re Tr[A dU]`, and the
//! spectral Fréchet derivative of the matrix exponential converts that into
//! the gradient with respect to the entries of `H`.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::linalg::{c, partial_trace_second, CMatrix};
use crate::quantum::{MeasurementProtocol, OutcomeSequence};
use crate::{Error, Result};

/// Probability at which a value is treated as having reached the global
/// maximum of 1 and further restarts are skipped.
const SATURATION: f64 = 1.0 - 1e-9;

/// Knobs for [`maximize_probability`]. The step rule is a bold driver:
/// multiply the step by 1.2 after an accepted move and halve it after a
/// rejected one, terminating the restart when the step underflows.
#[derive(Debug, Clone)]
pub struct SearchConfig {
    /// Number of random starting points (warm starts run in addition).
    pub restarts: usize,
    /// Iteration cap per restart.
    pub max_iters: usize,
    /// Seed for the restart initializations; runs are reproducible per seed.
    pub seed: u64,
    /// Initial bold-driver step size.
    pub initial_step: f64,
    /// Unitaries tried before the random restarts (e.g. embeddings of optima
    /// found at a smaller environment dimension).
    pub warm_starts: Vec<CMatrix>,
    /// Record `(iteration, value)` pairs for the winning restart.
    pub record_trajectory: bool,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            restarts: 64,
            max_iters: 1500,
            seed: 1,
            initial_step: 0.5,
            warm_starts: Vec::new(),
            record_trajectory: false,
        }
    }
}

/// Outcome of a gradient-ascent run.
#[derive(Debug, Clone)]
pub struct SearchResult {
    /// Best probability found; a certified-achievable lower bound.
    pub value: f64,
    /// Unitary achieving `value` (reproducible via `sequence_probability`).
    pub unitary: CMatrix,
    /// Starting points actually consumed (including warm starts).
    pub restarts_used: usize,
    /// True if at least one restart terminated at a stationary point or at
    /// probability 1, rather than by exhausting its iteration budget.
    pub converged: bool,
    /// `(iteration, value)` samples of the winning restart, if recorded.
    pub trajectory: Option<Vec<(usize, f64)>>,
}

/// Maximize the probability of `seq` over system–environment unitaries for
/// the given protocol (whose `d_e` fixes the search space) by multi-restart
/// gradient ascent. The result is a lower bound on the true maximum.
pub fn maximize_probability(
    protocol: &MeasurementProtocol,
    seq: &OutcomeSequence,
    config: &SearchConfig,
) -> Result<SearchResult> {
    if seq.symbols().iter().any(|&a| a >= protocol.alphabet_size()) {
        return Err(Error::InvalidSequence(format!(
            "sequence {seq} uses symbols outside the protocol alphabet of size {}",
            protocol.alphabet_size()
        )));
    }
    let d = protocol.d_es();
    for w in &config.warm_starts {
        if w.nrows() != d || w.ncols() != d {
            return Err(Error::DimensionMismatch {
                context: "warm start",
                expected: d,
                got: w.nrows(),
            });
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let eye = CMatrix::identity(d, d);
    let zeros = vec![0.0; d * d];

    let mut best: Option<(f64, CMatrix, Option<Vec<(usize, f64)>>)> = None;
    let mut converged = false;
    let mut used = 0usize;

    let total = config.warm_starts.len() + config.restarts;
    for start in 0..total {
        let (u0, theta0) = if start < config.warm_starts.len() {
            (config.warm_starts[start].clone(), zeros.clone())
        } else {
            let theta: Vec<f64> =
                (0..d * d).map(|_| rng.gen_range(-PI..PI) / d as f64).collect();
            (eye.clone(), theta)
        };
        used += 1;
        let run = ascend(protocol, seq.symbols(), &u0, theta0, config);
        converged |= run.converged;
        if best.as_ref().map_or(true, |(v, _, _)| run.value > *v) {
            best = Some((run.value, run.unitary, run.trajectory));
        }
        if best.as_ref().unwrap().0 >= SATURATION {
            break;
        }
    }

    let (value, unitary, trajectory) = best.expect("at least one restart");
    Ok(SearchResult { value, unitary, restarts_used: used, converged, trajectory })
}

/// Sequence probability at `u` together with its gradient in the Hermitian
/// chart `θ ↦ u·exp(iH(θ))`: the first `d_ES` parameters are the diagonal of
/// `H`, followed by `(re, im)` pairs for the strict upper triangle in
/// row-major order. To first order, moving to `θ` changes the probability by
/// `⟨∇p, θ⟩`. Exposed for custom optimizers and for validating ascent
/// directions against finite differences of [`sequence_probability`].
///
/// [`sequence_probability`]: crate::quantum::sequence_probability
pub fn probability_gradient(
    protocol: &MeasurementProtocol,
    seq: &OutcomeSequence,
    u: &CMatrix,
) -> Result<(f64, Vec<f64>)> {
    if seq.symbols().iter().any(|&a| a >= protocol.alphabet_size()) {
        return Err(Error::InvalidSequence(format!(
            "sequence {seq} uses symbols outside the protocol alphabet of size {}",
            protocol.alphabet_size()
        )));
    }
    let d = protocol.d_es();
    if u.nrows() != d || u.ncols() != d {
        return Err(Error::DimensionMismatch {
            context: "gradient base point",
            expected: d,
            got: u.nrows(),
        });
    }
    let (p, grad, _) = prob_and_grad(protocol, seq.symbols(), u, &vec![0.0; d * d]);
    Ok((p, grad))
}

/// Pad a system–environment unitary with `extra` fresh environment levels on
/// which it acts as the identity. In the combined index `(e, s) ↦ e·d_s + s`
/// the original block occupies the leading environment levels, so probing the
/// padded unitary reproduces every sequence probability of the original one.
pub fn embed_environment(u: &CMatrix, d_s: usize, extra: usize) -> CMatrix {
    let dim = u.nrows();
    let big = dim + extra * d_s;
    let mut out = CMatrix::identity(big, big);
    out.view_mut((0, 0), (dim, dim)).copy_from(u);
    out
}

/// Haar-distributed random unitary: QR of a complex Ginibre matrix with the
/// R-diagonal phases absorbed into Q so the distribution (and the output for
/// a fixed seed) is well defined.
pub fn random_unitary(dim: usize, seed: u64) -> CMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = CMatrix::from_fn(dim, dim, |_, _| {
        c(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let qr = g.qr();
    let q = qr.q();
    let r = qr.r();
    let mut u = q;
    for j in 0..dim {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { c(1.0, 0.0) };
        for i in 0..dim {
            u[(i, j)] *= phase;
        }
    }
    u
}

struct Ascent {
    value: f64,
    unitary: CMatrix,
    converged: bool,
    trajectory: Option<Vec<(usize, f64)>>,
}

fn ascend(
    protocol: &MeasurementProtocol,
    symbols: &[usize],
    u0: &CMatrix,
    mut theta: Vec<f64>,
    config: &SearchConfig,
) -> Ascent {
    let mut trajectory = config.record_trajectory.then(Vec::new);
    let (mut p, mut grad, mut u) = prob_and_grad(protocol, symbols, u0, &theta);
    let mut step = config.initial_step;
    let mut converged = false;
    for iter in 0..config.max_iters {
        if let Some(t) = trajectory.as_mut() {
            t.push((iter, p));
        }
        if p > 1.0 - 1e-12 {
            converged = true;
            break;
        }
        let trial: Vec<f64> =
            theta.iter().zip(&grad).map(|(t, g)| t + step * g).collect();
        let (pt, gt, ut) = prob_and_grad(protocol, symbols, u0, &trial);
        if pt > p {
            theta = trial;
            p = pt;
            grad = gt;
            u = ut;
            step *= 1.2;
        } else {
            step *= 0.5;
            if step < 1e-12 {
                converged = true;
                break;
            }
        }
    }
    Ascent { value: p, unitary: u, converged, trajectory }
}

/// Hermitian matrix from its real parametrization: the first `d` entries are
/// the diagonal, followed by (re, im) pairs for the strict upper triangle in
/// row-major order.
fn unpack_hermitian(theta: &[f64], d: usize) -> CMatrix {
    let mut h = CMatrix::zeros(d, d);
    for k in 0..d {
        h[(k, k)] = c(theta[k], 0.0);
    }
    let mut idx = d;
    for p in 0..d {
        for q in (p + 1)..d {
            let z = c(theta[idx], theta[idx + 1]);
            idx += 2;
            h[(p, q)] = z;
            h[(q, p)] = z.conj();
        }
    }
    h
}

/// Probability of the outcome sequence together with its gradient in the
/// parametrization of [`unpack_hermitian`], evaluated at `U = u0·exp(iH)`.
/// Returns `(p, ∇p, U)`.
fn prob_and_grad(
    protocol: &MeasurementProtocol,
    symbols: &[usize],
    u0: &CMatrix,
    theta: &[f64],
) -> (f64, Vec<f64>, CMatrix) {
    let d = protocol.d_es();
    let d_e = protocol.d_e();
    let d_s = protocol.d_s();
    let len = symbols.len();
    let eye_e = CMatrix::identity(d_e, d_e);

    let h = unpack_hermitian(theta, d);
    let eig = h.symmetric_eigen();
    let v = &eig.eigenvectors;
    let lam = &eig.eigenvalues;
    let mut exp_ih = CMatrix::zeros(d, d);
    for (k, &l) in lam.iter().enumerate() {
        let phase = c(l.cos(), l.sin());
        let col = v.column(k);
        for r in 0..d {
            for s in 0..d {
                exp_ih[(r, s)] += phase * col[r] * col[s].conj();
            }
        }
    }
    let u = u0 * &exp_ih;
    let udag = u.adjoint();

    // Forward sweep: σ_0 = ρ0 and σ_ℓ = ℳ_{a_ℓ}(U σ_{ℓ-1} U†), keeping every
    // intermediate state for the adjoint pass.
    let mut sigmas = Vec::with_capacity(len);
    sigmas.push(protocol.initial_state());
    for &a in &symbols[..len - 1] {
        let omega = &u * sigmas.last().unwrap() * &udag;
        let selected =
            partial_trace_second(&(&omega * eye_e.kronecker(protocol.povm_element(a))), d_e, d_s);
        sigmas.push(selected.kronecker(protocol.rho_s0()));
    }
    let omega_last = &u * sigmas.last().unwrap() * &udag;
    let effect_last = eye_e.kronecker(protocol.povm_element(symbols[len - 1]));
    let p = (&omega_last * &effect_last).trace().re;

    // Adjoint sweep: Y_L = 1 ⊗ E_{a_L} and Y_ℓ = ℳ†_{a_ℓ}(U† Y_{ℓ+1} U) with
    // ℳ†_a(W) = Tr_S[W (1 ⊗ ρ⁰_S)] ⊗ E_a.
    let mut ys = vec![effect_last];
    for &a in symbols[..len - 1].iter().rev() {
        let w = &udag * ys.last().unwrap() * &u;
        let reduced = partial_trace_second(&(&w * eye_e.kronecker(protocol.rho_s0())), d_e, d_s);
        ys.push(reduced.kronecker(protocol.povm_element(a)));
    }
    ys.reverse();

    // dp = 2 Re Tr[A dU] with A = Σ_ℓ σ_{ℓ-1} U† Y_ℓ; pulling the warm start
    // out of dU = u0·d(exp iH) gives the coefficient C = A·u0 for d(exp iH).
    let mut a_mat = CMatrix::zeros(d, d);
    for (sigma, y) in sigmas.iter().zip(&ys) {
        a_mat += sigma * &udag * y;
    }
    let c_mat = &a_mat * u0;

    // Spectral Fréchet derivative of exp(iH): with H = VΛV†, d(exp iH) =
    // V(Φ ∘ V†dHV)V† where Φ_pq is the divided difference of e^{iλ}; the
    // gradient read-out is G = V((V†CV) ∘ Φᵀ)V†, dp/dθ_k = 2 Re Tr[G B_k].
    let mut phi = CMatrix::zeros(d, d);
    for pp in 0..d {
        for qq in 0..d {
            let (lp, lq) = (lam[pp], lam[qq]);
            phi[(pp, qq)] = if (lp - lq).abs() < 1e-10 {
                let m = 0.5 * (lp + lq);
                c(0.0, 1.0) * c(m.cos(), m.sin())
            } else {
                (c(lp.cos(), lp.sin()) - c(lq.cos(), lq.sin())) / c(lp - lq, 0.0)
            };
        }
    }
    let ctil = v.adjoint() * &c_mat * v;
    let mut inner = CMatrix::zeros(d, d);
    for pp in 0..d {
        for qq in 0..d {
            inner[(pp, qq)] = ctil[(pp, qq)] * phi[(qq, pp)];
        }
    }
    let g_mat = v * inner * v.adjoint();

    let mut grad = vec![0.0; d * d];
    for k in 0..d {
        grad[k] = 2.0 * g_mat[(k, k)].re;
    }
    let mut idx = d;
    for pp in 0..d {
        for qq in (pp + 1)..d {
            grad[idx] = 2.0 * (g_mat[(qq, pp)] + g_mat[(pp, qq)]).re;
            grad[idx + 1] = -2.0 * (g_mat[(qq, pp)] - g_mat[(pp, qq)]).im;
            idx += 2;
        }
    }
    (p, grad, u)
}
