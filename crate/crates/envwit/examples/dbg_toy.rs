use envwit::quantum::{MeasurementProtocol, OutcomeSequence};
use envwit::relaxation::{build_reduced_relaxation, build_relaxation, realify, RelaxationSpec};
use envwit::sdp::{solve, SolverConfig};
use std::time::Instant;

fn main() {
    let protocol = MeasurementProtocol::computational_reset(2);
    let seq = OutcomeSequence::parse_with_alphabet("01", 2).unwrap();
    let spec = RelaxationSpec::new(protocol, seq, 2);

    let t = Instant::now();
    let dense = build_relaxation(&spec).unwrap();
    println!("dense build {:?} blocks {:?} cons {}", t.elapsed(), dense.blocks, dense.constraint_count());
    let t = Instant::now();
    let mut cfg = SolverConfig::default();
    cfg.verbose = true;
    cfg.max_iters = 30;
    let rd = solve(&realify(&dense), &cfg).unwrap();
    println!("dense solve {:?} status {} value {:?}", t.elapsed(), rd.status, rd.value);

    let t = Instant::now();
    match build_reduced_relaxation(&spec) {
        Ok(res) => {
            println!(
                "sparse build {:?} vars {} cons {} exact {}",
                t.elapsed(),
                res.reduced.scalar_variable_count(),
                res.reduced.constraint_count(),
                res.exact
            );
            let t = Instant::now();
            let rs = solve(&realify(&res.reduced), &SolverConfig::default()).unwrap();
            println!("sparse solve {:?} status {} value {:?}", t.elapsed(), rs.status, rs.value);
        }
        Err(e) => println!("sparse: {e}"),
    }
}
