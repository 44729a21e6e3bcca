//! Cross-module invariants: randomized properties plus the deterministic
//! consistency checks that tie the analytic, relaxation and search layers
//! together.

use proptest::prelude::*;

use envwit::analytic::{deterministic_complexity, memoryless_maximum};
use envwit::quantum::{sequence_probability, MeasurementProtocol, OutcomeSequence};
use envwit::relaxation::{
    build_relaxation, definetti_error_bound, realify, RelaxationSpec,
};
use envwit::search::{maximize_probability, SearchConfig};
use envwit::sdp::{solve, SolverConfig};

fn certified_bound(seq: &str, d_e: usize, copies: usize) -> f64 {
    let spec = RelaxationSpec::new(
        MeasurementProtocol::computational_reset(d_e),
        OutcomeSequence::parse(seq).unwrap(),
        copies,
    );
    let problem = build_relaxation(&spec).unwrap();
    let result = solve(&realify(&problem), &SolverConfig::default()).unwrap();
    result.safe_value.unwrap_or_else(|| panic!("no value: status {}", result.status))
}

#[test]
fn hierarchy_levels_decrease_within_solver_tolerance() {
    let tol = 2.0 * 1e-8;
    let two = certified_bound("01", 1, 2);
    let three = certified_bound("01", 1, 3);
    assert!(three <= two + tol, "level 3 {three} above level 2 {two}");

    let three = certified_bound("001", 1, 3);
    let four = certified_bound("001", 1, 4);
    assert!(four <= three + tol, "level 4 {four} above level 3 {three}");
}

#[test]
fn search_and_exact_values_never_exceed_the_certified_bound() {
    let protocol = MeasurementProtocol::computational_reset(1);
    let seq = OutcomeSequence::parse("001").unwrap();
    let bound = certified_bound("001", 1, 4);

    let mut config = SearchConfig::default();
    config.restarts = 8;
    config.seed = 41;
    let found = maximize_probability(&protocol, &seq, &config).unwrap();
    assert!(
        found.value <= bound + 1e-7,
        "search reached {} above the certified bound {bound}",
        found.value
    );

    let exact = memoryless_maximum(&seq).value_f64;
    assert!(exact <= bound + 1e-7, "exact maximum {exact} above bound {bound}");
}

#[test]
fn definetti_error_reference_value_and_monotonicity() {
    // L = 3, d_ES = 4 (so d_ES² = 16), N = 3: 2·3·(3+16+1)/(3+16) = 120/19.
    let reference = definetti_error_bound(3, 4, 3);
    assert!((reference - 120.0 / 19.0).abs() < 1e-12);

    let mut previous = f64::INFINITY;
    for copies in 3..40 {
        let eps = definetti_error_bound(3, 4, copies);
        assert!(eps > 0.0);
        assert!(eps < previous, "bound must shrink with the level");
        previous = eps;
    }
}

/// Exhaustive minimum over all set partitions of the positions, enumerated
/// as restricted growth strings.
fn brute_force_complexity(symbols: &[usize]) -> usize {
    let l = symbols.len();
    let mut rgs = vec![0usize; l];
    let mut best = l;
    loop {
        let valid = (0..l).all(|i| {
            ((i + 1)..l).all(|j| {
                rgs[i] != rgs[j]
                    || (symbols[i] == symbols[j]
                        && (i + 1 >= l || j + 1 >= l || rgs[i + 1] == rgs[j + 1]))
            })
        });
        if valid {
            best = best.min(rgs.iter().max().unwrap() + 1);
        }
        let mut advanced = false;
        for i in (1..l).rev() {
            let max_prev = rgs[..i].iter().copied().max().unwrap();
            if rgs[i] <= max_prev {
                rgs[i] += 1;
                rgs[(i + 1)..].fill(0);
                advanced = true;
                break;
            }
        }
        if !advanced {
            return best;
        }
    }
}

proptest! {
    #[test]
    fn complexity_cascade_matches_exhaustive_search(
        symbols in proptest::collection::vec(0usize..3, 1..=8)
    ) {
        let seq = OutcomeSequence::new(symbols.clone(), 3).unwrap();
        prop_assert_eq!(deterministic_complexity(&seq), brute_force_complexity(&symbols));
    }

    #[test]
    fn memoryless_maximum_depends_only_on_counts(
        symbols in proptest::collection::vec(0usize..3, 1..=10),
        shuffle_seed in any::<u64>(),
    ) {
        let original = OutcomeSequence::new(symbols.clone(), 3).unwrap();

        // Deterministic Fisher–Yates driven by the seed.
        let mut shuffled = symbols.clone();
        let mut state = shuffle_seed | 1;
        for k in (1..shuffled.len()).rev() {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            shuffled.swap(k, (state >> 33) as usize % (k + 1));
        }
        let permuted = OutcomeSequence::new(shuffled, 3).unwrap();

        // Relabel symbols by an alphabet rotation.
        let rotated: Vec<usize> = symbols.iter().map(|&s| (s + 1) % 3).collect();
        let relabeled = OutcomeSequence::new(rotated, 3).unwrap();

        let value = memoryless_maximum(&original).value;
        prop_assert_eq!(&value, &memoryless_maximum(&permuted).value);
        prop_assert_eq!(&value, &memoryless_maximum(&relabeled).value);
    }

    #[test]
    fn memoryless_maximum_is_a_probability(
        symbols in proptest::collection::vec(0usize..4, 1..=12)
    ) {
        let seq = OutcomeSequence::new(symbols.clone(), 4).unwrap();
        let bound = memoryless_maximum(&seq);
        prop_assert!(bound.value_f64 > 0.0);
        prop_assert!(bound.value_f64 <= 1.0);
        let constant = symbols.iter().all(|&s| s == symbols[0]);
        prop_assert_eq!(bound.value_f64 == 1.0, constant);
    }

    #[test]
    fn complexity_never_exceeds_length_and_detects_constants(
        symbols in proptest::collection::vec(0usize..3, 1..=10)
    ) {
        let seq = OutcomeSequence::new(symbols.clone(), 3).unwrap();
        let dc = deterministic_complexity(&seq);
        prop_assert!(dc >= 1);
        prop_assert!(dc <= symbols.len());
        let constant = symbols.iter().all(|&s| s == symbols[0]);
        prop_assert_eq!(dc == 1, constant);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    /// The reported best value must be reproducible from the reported
    /// unitary, and the unitary must actually be unitary.
    #[test]
    fn search_results_are_self_consistent(seed in any::<u64>()) {
        let protocol = MeasurementProtocol::computational_reset(2);
        let seq = OutcomeSequence::parse("01").unwrap();
        let mut config = SearchConfig::default();
        config.restarts = 2;
        config.max_iters = 60;
        config.seed = seed;
        let result = maximize_probability(&protocol, &seq, &config).unwrap();

        let replayed = sequence_probability(&protocol, &result.unitary, &seq).unwrap();
        prop_assert!((replayed - result.value).abs() < 1e-9);

        let dim = result.unitary.nrows();
        let gram = result.unitary.adjoint() * &result.unitary;
        let eye = nalgebra::DMatrix::<num_complex::Complex64>::identity(dim, dim);
        prop_assert!((gram - eye).iter().all(|z| z.norm() < 1e-9));
    }
}
