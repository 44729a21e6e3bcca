//! Measure-and-prepare protocols and outcome sequences.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::linalg::{hermiticity_deviation, min_eigenvalue, CMatrix};
use crate::{Error, Result};

/// Tolerance for structural protocol checks (Hermiticity, positivity,
/// normalization). Looser than [`crate::ZERO_TOL`] because protocol data often
/// comes from text files.
const PROTOCOL_TOL: f64 = 1e-10;

/// A repeated measure-and-prepare probe: after each joint unitary on E ⊗ S the
/// probe S is measured with a fixed POVM and re-prepared in a fixed state.
///
/// The instrument acting on the joint state for outcome `a` is
/// `ρ ↦ Tr_S[ρ (1_E ⊗ E_a)] ⊗ ρ_S0`.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementProtocol {
    d_e: usize,
    d_s: usize,
    rho_e0: CMatrix,
    rho_s0: CMatrix,
    povm: Vec<CMatrix>,
}

impl MeasurementProtocol {
    /// Validate and construct a protocol. All structural problems are
    /// collected into a single [`Error::InvalidProtocol`].
    pub fn new(
        d_e: usize,
        d_s: usize,
        rho_e0: CMatrix,
        rho_s0: CMatrix,
        povm: Vec<CMatrix>,
    ) -> Result<Self> {
        let mut issues = Vec::new();
        if d_e == 0 || d_s == 0 {
            issues.push("dimensions must be at least 1".to_string());
        }
        check_state(&rho_e0, d_e, "rho_e0", &mut issues);
        check_state(&rho_s0, d_s, "rho_s0", &mut issues);
        if povm.is_empty() {
            issues.push("POVM must have at least one element".to_string());
        }
        let mut sum = CMatrix::zeros(d_s, d_s);
        for (a, e) in povm.iter().enumerate() {
            if e.nrows() != d_s || e.ncols() != d_s {
                issues.push(format!("POVM element {a} is not {d_s}x{d_s}"));
                continue;
            }
            if hermiticity_deviation(e) > PROTOCOL_TOL {
                issues.push(format!("POVM element {a} is not Hermitian"));
            } else if min_eigenvalue(e) < -PROTOCOL_TOL {
                issues.push(format!("POVM element {a} is not positive semidefinite"));
            }
            sum += e;
        }
        if issues.is_empty() {
            let dev = (0..d_s)
                .flat_map(|i| (0..d_s).map(move |j| (i, j)))
                .map(|(i, j)| {
                    let want = if i == j { Complex64::ONE } else { Complex64::ZERO };
                    (sum[(i, j)] - want).norm()
                })
                .fold(0.0f64, f64::max);
            if dev > PROTOCOL_TOL {
                issues.push(format!("POVM does not sum to identity (deviation {dev:.3e})"));
            }
        }
        if issues.is_empty() {
            Ok(Self { d_e, d_s, rho_e0, rho_s0, povm })
        } else {
            Err(Error::InvalidProtocol { issues })
        }
    }

    /// The built-in qubit-probe protocol (CLI name `eq16`): `d_S = 2`,
    /// computational-basis projective measurement, probe reset to `|0⟩⟨0|`,
    /// environment started in `|0⟩⟨0|`.
    ///
    /// Starting the environment pure is without loss of generality: the
    /// sequence probability is linear in `ρ_E0`, so its maximum over states is
    /// attained at a pure state, and any pure state can be absorbed into the
    /// unknown unitary.
    pub fn computational_reset(d_e: usize) -> Self {
        let mut rho_e0 = CMatrix::zeros(d_e, d_e);
        rho_e0[(0, 0)] = Complex64::ONE;
        let mut rho_s0 = CMatrix::zeros(2, 2);
        rho_s0[(0, 0)] = Complex64::ONE;
        let povm = (0..2)
            .map(|a| {
                let mut p = CMatrix::zeros(2, 2);
                p[(a, a)] = Complex64::ONE;
                p
            })
            .collect();
        Self::new(d_e, 2, rho_e0, rho_s0, povm).expect("built-in protocol is valid")
    }

    pub fn d_e(&self) -> usize {
        self.d_e
    }

    pub fn d_s(&self) -> usize {
        self.d_s
    }

    /// Joint dimension `d_E · d_S`.
    pub fn d_es(&self) -> usize {
        self.d_e * self.d_s
    }

    pub fn alphabet_size(&self) -> usize {
        self.povm.len()
    }

    pub fn rho_e0(&self) -> &CMatrix {
        &self.rho_e0
    }

    pub fn rho_s0(&self) -> &CMatrix {
        &self.rho_s0
    }

    pub fn povm_element(&self, a: usize) -> &CMatrix {
        &self.povm[a]
    }

    /// Initial joint state `ρ_E0 ⊗ ρ_S0`.
    pub fn initial_state(&self) -> CMatrix {
        self.rho_e0.kronecker(&self.rho_s0)
    }

    /// A copy of this protocol with the environment dimension replaced, keeping
    /// the probe side unchanged. The environment starts in `|0⟩⟨0|` (as in the
    /// built-in protocol); intended for sweeps over `d_E`.
    pub fn with_environment_dim(&self, d_e: usize) -> Self {
        let mut rho_e0 = CMatrix::zeros(d_e, d_e);
        rho_e0[(0, 0)] = Complex64::ONE;
        Self::new(d_e, self.d_s, rho_e0, self.rho_s0.clone(), self.povm.clone())
            .expect("resizing the environment preserves validity")
    }

    /// Parse a protocol from TOML text. See [`MeasurementProtocol::to_toml`]
    /// for the schema.
    pub fn from_toml(text: &str) -> Result<Self> {
        let file: ProtocolFile =
            toml::from_str(text).map_err(|e| Error::parse("protocol TOML", e.to_string()))?;
        let rho_e0 = matrix_from_repr(&file.rho_e0, "rho_e0")?;
        let rho_s0 = matrix_from_repr(&file.rho_s0, "rho_s0")?;
        let povm = file
            .povm
            .iter()
            .map(|m| matrix_from_repr(m, "povm element"))
            .collect::<Result<Vec<_>>>()?;
        Self::new(file.d_e, file.d_s, rho_e0, rho_s0, povm)
    }

    /// Serialize to TOML. Matrices are row-major nested arrays of `[re, im]`
    /// pairs:
    ///
    /// ```toml
    /// d_e = 2
    /// d_s = 2
    /// rho_e0 = [[[1.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [0.0, 0.0]]]
    /// rho_s0 = ...
    /// povm = [matrix, matrix, ...]
    /// ```
    pub fn to_toml(&self) -> String {
        let file = ProtocolFile {
            d_e: self.d_e,
            d_s: self.d_s,
            rho_e0: matrix_to_repr(&self.rho_e0),
            rho_s0: matrix_to_repr(&self.rho_s0),
            povm: self.povm.iter().map(matrix_to_repr).collect(),
        };
        toml::to_string(&file).expect("protocol serializes")
    }

    /// Stable content hash (hex) of the protocol data, used as a cache key.
    pub fn content_hash(&self) -> String {
        // FNV-1a over the canonical TOML rendering; collisions are harmless
        // (the cache key also contains all run parameters).
        let mut h: u64 = 0xcbf29ce484222325;
        for b in self.to_toml().bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x100000001b3);
        }
        format!("{h:016x}")
    }
}

fn check_state(rho: &CMatrix, dim: usize, name: &str, issues: &mut Vec<String>) {
    if rho.nrows() != dim || rho.ncols() != dim {
        issues.push(format!("{name} is not {dim}x{dim}"));
        return;
    }
    if hermiticity_deviation(rho) > PROTOCOL_TOL {
        issues.push(format!("{name} is not Hermitian"));
        return;
    }
    if min_eigenvalue(rho) < -PROTOCOL_TOL {
        issues.push(format!("{name} is not positive semidefinite"));
    }
    let tr: Complex64 = (0..dim).map(|i| rho[(i, i)]).sum();
    if (tr - Complex64::ONE).norm() > PROTOCOL_TOL {
        issues.push(format!("{name} does not have unit trace (Tr = {tr})"));
    }
}

#[derive(Serialize, Deserialize)]
struct ProtocolFile {
    d_e: usize,
    d_s: usize,
    rho_e0: MatrixRepr,
    rho_s0: MatrixRepr,
    povm: Vec<MatrixRepr>,
}

type MatrixRepr = Vec<Vec<[f64; 2]>>;

pub(crate) fn matrix_from_repr(rows: &MatrixRepr, what: &str) -> Result<CMatrix> {
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) {
        return Err(Error::parse("matrix", format!("{what} is not square")));
    }
    Ok(CMatrix::from_fn(n, n, |i, j| {
        Complex64::new(rows[i][j][0], rows[i][j][1])
    }))
}

pub(crate) fn matrix_to_repr(m: &CMatrix) -> MatrixRepr {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

/// A fixed outcome sequence `ā = a_1 … a_L` over a finite alphabet.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct OutcomeSequence {
    symbols: Vec<usize>,
    alphabet_size: usize,
}

impl OutcomeSequence {
    pub fn new(symbols: Vec<usize>, alphabet_size: usize) -> Result<Self> {
        if symbols.is_empty() {
            return Err(Error::InvalidSequence("sequence is empty".into()));
        }
        if let Some(&bad) = symbols.iter().find(|&&s| s >= alphabet_size) {
            return Err(Error::InvalidSequence(format!(
                "symbol {bad} outside alphabet of size {alphabet_size}"
            )));
        }
        Ok(Self { symbols, alphabet_size })
    }

    /// Parse a digit string like `"001"`, inferring the alphabet as
    /// `max symbol + 1` (at least 2).
    pub fn parse(text: &str) -> Result<Self> {
        let symbols: Vec<usize> = text
            .chars()
            .map(|ch| {
                ch.to_digit(10)
                    .map(|d| d as usize)
                    .ok_or_else(|| Error::InvalidSequence(format!("bad symbol '{ch}'")))
            })
            .collect::<Result<_>>()?;
        let alphabet = symbols.iter().max().map_or(2, |&m| (m + 1).max(2));
        Self::new(symbols, alphabet)
    }

    /// Parse a digit string against a known alphabet size.
    pub fn parse_with_alphabet(text: &str, alphabet_size: usize) -> Result<Self> {
        let s = Self::parse(text)?;
        Self::new(s.symbols, alphabet_size)
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn symbols(&self) -> &[usize] {
        &self.symbols
    }

    pub fn alphabet_size(&self) -> usize {
        self.alphabet_size
    }

    /// Occurrence count of each symbol, indexed by symbol.
    pub fn counts(&self) -> Vec<usize> {
        let mut n = vec![0usize; self.alphabet_size];
        for &s in &self.symbols {
            n[s] += 1;
        }
        n
    }

    /// Number of distinct symbols that actually occur.
    pub fn distinct_symbols(&self) -> usize {
        self.counts().iter().filter(|&&c| c > 0).count()
    }
}

impl std::fmt::Display for OutcomeSequence {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for &s in &self.symbols {
            write!(f, "{s}")?;
        }
        Ok(())
    }
}
