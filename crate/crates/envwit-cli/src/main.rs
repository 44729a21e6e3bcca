//! Command-line front end: certified sequence-probability bounds, analytic
//! screening, deterministic complexity, lower-bound search, dimension
//! certification from observed statistics, and SDPA export.
//!
//! Every command prints one JSON document (pretty, schema-tagged) to stdout
//! or `--output`; diagnostics go to stderr; the exit code is zero exactly
//! when the command completed.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::json;

use envwit::analytic::{
    deterministic_complexity, memoryless_maximum, triviality_check, Triviality,
};
use envwit::quantum::{MeasurementProtocol, OutcomeSequence};
use envwit::relaxation::{
    build_reduced_relaxation, build_relaxation, definetti_error_bound, realify, RelaxationSpec,
    Representation,
};
use envwit::sdp::{export_sdpa, solve, SdpProblem, SolverConfig};
use envwit::search::{maximize_probability, SearchConfig};
use envwit::sparse::ReductionReport;
use envwit::Error;

#[derive(Parser)]
#[command(
    name = "envwit",
    version,
    about = "Certified upper bounds on outcome-sequence probabilities, \
             as witnesses of environment dimension"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Certified upper bound on the probability of an outcome sequence.
    Bound(BoundArgs),
    /// Sweep environment dimensions and report those refuted by an observed
    /// probability.
    Certify(CertifyArgs),
    /// Exact maximum for a one-dimensional (memoryless) environment.
    Analytic(SeqOnlyArgs),
    /// Minimum environment dimension reaching the sequence with certainty.
    Dc(SeqOnlyArgs),
    /// Gradient-ascent lower bound over system–environment unitaries.
    Search(SearchArgs),
    /// Export the relaxation as an SDPA sparse problem file.
    Export(ExportArgs),
}

#[derive(Args)]
struct ProtocolArgs {
    /// Protocol TOML file, or the built-in token "eq16": a qubit probe
    /// measured in its computational basis and re-prepared in the first
    /// basis state, environment starting there too.
    #[arg(long, default_value = "eq16")]
    protocol: String,

    /// Environment dimension; overrides the dimension stored in a protocol
    /// file.
    #[arg(long = "dE")]
    d_e: Option<usize>,
}

impl ProtocolArgs {
    fn resolve(&self) -> anyhow::Result<MeasurementProtocol> {
        if self.protocol == "eq16" {
            return Ok(MeasurementProtocol::computational_reset(self.d_e.unwrap_or(2)));
        }
        let text = fs::read_to_string(&self.protocol)
            .with_context(|| format!("reading protocol file {}", self.protocol))?;
        let protocol = MeasurementProtocol::from_toml(&text)?;
        Ok(match self.d_e {
            Some(d) if d != protocol.d_e() => protocol.with_environment_dim(d),
            _ => protocol,
        })
    }
}

#[derive(Args)]
struct SolverArgs {
    /// Solver tolerance (duality gap and feasibility).
    #[arg(long, default_value_t = 1e-8)]
    eps: f64,

    /// Interior-point iteration cap.
    #[arg(long)]
    max_iters: Option<u32>,

    /// Wall-clock cap per solve, in seconds.
    #[arg(long)]
    time_limit: Option<f64>,
}

impl SolverArgs {
    /// Solver knobs; the `ENVWIT_SOLVER` environment variable selects the
    /// backend binding.
    fn config(&self) -> SolverConfig {
        let mut config = SolverConfig::default();
        config.eps_abs = self.eps;
        config.eps_rel = self.eps;
        if let Some(iters) = self.max_iters {
            config.max_iters = iters;
        }
        config.time_limit = self.time_limit;
        if let Ok(backend) = std::env::var("ENVWIT_SOLVER") {
            config.backend = backend;
        }
        config
    }
}

#[derive(Args)]
struct BoundArgs {
    #[command(flatten)]
    protocol: ProtocolArgs,

    /// Outcome sequence, e.g. "001".
    #[arg(long)]
    seq: String,

    /// Number of exchangeable copies (the hierarchy level).
    #[arg(long = "N")]
    copies: usize,

    /// Add partial-transpose blocks (implies the full-space representation).
    #[arg(long)]
    ppt: bool,

    /// Reduce to effective-sparsity blocks before solving.
    #[arg(long)]
    sparse: bool,

    /// Use the raw tensor-power representation instead of the symmetric one.
    #[arg(long)]
    full_space: bool,

    /// Override the build-size budget (estimated scalars + entries).
    #[arg(long)]
    budget: Option<u128>,

    #[command(flatten)]
    solver: SolverArgs,

    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,

    /// Zero out wall-clock fields so output is byte-stable across runs.
    #[arg(long)]
    stable_output: bool,
}

#[derive(Args)]
struct CertifyArgs {
    /// Protocol TOML file, or the built-in token "eq16" (swept over
    /// environment dimensions).
    #[arg(long, default_value = "eq16")]
    protocol: String,

    /// Outcome sequence, e.g. "001".
    #[arg(long)]
    seq: String,

    /// Observed probability of the sequence.
    #[arg(long)]
    observed: f64,

    /// Largest environment dimension to test.
    #[arg(long = "max-dE", default_value_t = 2)]
    max_d_e: usize,

    /// Hierarchy level used for the SDP bounds (dimensions ≥ 2).
    #[arg(long = "N")]
    copies: usize,

    /// Add partial-transpose blocks to the SDP bounds.
    #[arg(long)]
    ppt: bool,

    /// Reduce to effective-sparsity blocks before solving (falls back to a
    /// dense solve when nothing reduces).
    #[arg(long)]
    sparse: bool,

    #[command(flatten)]
    solver: SolverArgs,

    /// Directory for cached bounds, keyed by protocol, sequence, dimension,
    /// level, transpose blocks and tolerance.
    #[arg(long)]
    cache: Option<PathBuf>,

    /// Solve this many dimensions concurrently.
    #[arg(long, default_value_t = 1)]
    jobs: usize,

    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,

    /// Zero out wall-clock fields so output is byte-stable across runs.
    #[arg(long)]
    stable_output: bool,
}

#[derive(Args)]
struct SeqOnlyArgs {
    /// Outcome sequence, e.g. "001".
    #[arg(long)]
    seq: String,

    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SearchArgs {
    #[command(flatten)]
    protocol: ProtocolArgs,

    /// Outcome sequence, e.g. "001".
    #[arg(long)]
    seq: String,

    /// Seed for the restart initializations.
    #[arg(long, default_value_t = 1)]
    seed: u64,

    /// Number of random starting points.
    #[arg(long, default_value_t = 64)]
    restarts: usize,

    /// Iteration cap per restart.
    #[arg(long, default_value_t = 1500)]
    max_iters: usize,

    /// Write the best unitary to a TOML file.
    #[arg(long)]
    export_unitary: Option<PathBuf>,

    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,

    /// Zero out wall-clock fields so output is byte-stable across runs.
    #[arg(long)]
    stable_output: bool,
}

#[derive(Args)]
struct ExportArgs {
    #[command(flatten)]
    protocol: ProtocolArgs,

    /// Outcome sequence, e.g. "001".
    #[arg(long)]
    seq: String,

    /// Number of exchangeable copies (the hierarchy level).
    #[arg(long = "N")]
    copies: usize,

    /// Add partial-transpose blocks (implies the full-space representation).
    #[arg(long)]
    ppt: bool,

    /// Reduce to effective-sparsity blocks before exporting.
    #[arg(long)]
    sparse: bool,

    /// Use the raw tensor-power representation instead of the symmetric one.
    #[arg(long)]
    full_space: bool,

    /// Override the build-size budget (estimated scalars + entries).
    #[arg(long)]
    budget: Option<u128>,

    /// Destination problem file (SDPA sparse format, ".dat-s").
    #[arg(long)]
    output: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Bound(args) => cmd_bound(args),
        Command::Certify(args) => cmd_certify(args),
        Command::Analytic(args) => cmd_analytic(args),
        Command::Dc(args) => cmd_dc(args),
        Command::Search(args) => cmd_search(args),
        Command::Export(args) => cmd_export(args),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}

fn emit(output: Option<&PathBuf>, report: &serde_json::Value) -> anyhow::Result<()> {
    let text = serde_json::to_string_pretty(report)?;
    match output {
        Some(path) => fs::write(path, text + "\n")
            .with_context(|| format!("writing {}", path.display()))?,
        None => println!("{text}"),
    }
    Ok(())
}

fn parse_seq(text: &str, protocol: &MeasurementProtocol) -> anyhow::Result<OutcomeSequence> {
    Ok(OutcomeSequence::parse_with_alphabet(text, protocol.alphabet_size())?)
}

/// Builds the requested relaxation, reducing first when asked to; a coupling
/// graph too dense to reduce falls back to the dense build with a note.
fn build_problem(
    spec: &RelaxationSpec,
    sparse: bool,
) -> envwit::Result<(SdpProblem, Option<ReductionReport>, Option<String>)> {
    if sparse {
        match build_reduced_relaxation(spec) {
            Ok(result) => {
                let report = result.report();
                return Ok((result.reduced, Some(report), None));
            }
            Err(Error::NoReduction) => {
                let note =
                    "coupling graph is a single dense component; solved without reduction";
                return Ok((build_relaxation(spec)?, None, Some(note.to_string())));
            }
            Err(other) => return Err(other),
        }
    }
    Ok((build_relaxation(spec)?, None, None))
}

fn cmd_bound(args: BoundArgs) -> anyhow::Result<()> {
    let protocol = args.protocol.resolve()?;
    let seq = parse_seq(&args.seq, &protocol)?;
    let d_es = protocol.d_es();
    let triviality = triviality_check(&seq, protocol.d_s(), protocol.d_e());

    let mut report = json!({
        "schema": "envwit.bound/1",
        "sequence": seq.to_string(),
        "protocol_hash": protocol.content_hash(),
        "d_E": protocol.d_e(),
        "d_S": protocol.d_s(),
        "N": args.copies,
        "ppt": args.ppt,
        "triviality": triviality,
    });

    if triviality == Triviality::TriviallyOne {
        report["status"] = json!("trivially_one");
        report["value"] = json!(1.0);
        report["safe_value"] = json!(1.0);
        report["note"] = json!(
            "a deterministic transition model of this dimension reaches the \
             sequence with certainty; no relaxation was solved"
        );
        return emit(args.output.as_ref(), &report);
    }

    let mut spec = RelaxationSpec::new(protocol, seq, args.copies);
    if args.full_space {
        spec = spec.with_representation(Representation::FullSpace);
    }
    if args.ppt {
        spec = spec.with_ppt();
    }
    if let Some(budget) = args.budget {
        spec.scalar_budget = budget;
    }

    let (problem, reduction, note) = build_problem(&spec, args.sparse)?;
    let mut result = solve(&realify(&problem), &args.solver.config())?;
    if args.stable_output {
        result.wall_time_s = 0.0;
    }

    report["representation"] = json!(match spec.representation {
        Representation::Symmetric => "symmetric",
        Representation::FullSpace => "full_space",
    });
    report["status"] = json!(result.status.to_string());
    report["value"] = json!(result.value);
    report["safe_value"] = json!(result.safe_value);
    report["definetti_error"] =
        json!(definetti_error_bound(spec.seq.len(), d_es, args.copies));
    report["solver"] = serde_json::to_value(&result)?;
    report["reduction"] = json!(reduction);
    report["note"] = json!(note);
    emit(args.output.as_ref(), &report)
}

/// One row of a certification sweep.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct DimensionRow {
    #[serde(rename = "d_E")]
    d_e: usize,
    /// "exact" (closed form), "sdp" (hierarchy level), or "trivial"
    /// (reachable with certainty).
    method: String,
    /// Certified upper bound: never below the true maximum.
    #[serde(skip_serializing_if = "Option::is_none")]
    safe_value: Option<f64>,
    violated: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    status: Option<String>,
    cached: bool,
    wall_time_s: f64,
}

fn cache_path(
    dir: &std::path::Path,
    protocol: &MeasurementProtocol,
    seq: &OutcomeSequence,
    copies: usize,
    ppt: bool,
    eps: f64,
) -> PathBuf {
    dir.join(format!(
        "{}-{}-N{}-ppt{}-eps{:.0e}.json",
        protocol.content_hash(),
        seq,
        copies,
        u8::from(ppt),
        eps,
    ))
}

fn cmd_certify(args: CertifyArgs) -> anyhow::Result<()> {
    if !(0.0..=1.0).contains(&args.observed) {
        bail!("--observed must be a probability, got {}", args.observed);
    }
    let base = ProtocolArgs { protocol: args.protocol.clone(), d_e: None }.resolve()?;
    let seq = parse_seq(&args.seq, &base)?;
    if let Some(dir) = &args.cache {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }

    let mut rows: Vec<DimensionRow> = Vec::new();

    // Dimension one has a closed form — exact, so also safe.
    let exact = memoryless_maximum(&seq).value_f64;
    rows.push(DimensionRow {
        d_e: 1,
        method: "exact".into(),
        safe_value: Some(exact),
        violated: args.observed > exact,
        status: None,
        cached: false,
        wall_time_s: 0.0,
    });

    // Stop the sweep at the first trivially-reachable dimension: every
    // larger dimension is trivial too and can never be refuted.
    let mut pending: Vec<usize> = Vec::new();
    let mut trivial_row = None;
    for d in 2..=args.max_d_e {
        let protocol = base.with_environment_dim(d);
        if triviality_check(&seq, protocol.d_s(), d) == Triviality::TriviallyOne {
            trivial_row = Some(DimensionRow {
                d_e: d,
                method: "trivial".into(),
                safe_value: Some(1.0),
                violated: false,
                status: None,
                cached: false,
                wall_time_s: 0.0,
            });
            break;
        }
        pending.push(d);
    }

    // Resolve cache hits up front; solve the misses, `jobs` at a time.
    let mut misses: Vec<usize> = Vec::new();
    for &d in &pending {
        let protocol = base.with_environment_dim(d);
        let hit = args.cache.as_ref().and_then(|dir| {
            let path = cache_path(dir, &protocol, &seq, args.copies, args.ppt, args.solver.eps);
            let text = fs::read_to_string(path).ok()?;
            serde_json::from_str::<DimensionRow>(&text).ok()
        });
        match hit {
            Some(mut row) => {
                row.cached = true;
                row.violated = row.safe_value.is_some_and(|b| args.observed > b);
                rows.push(row);
            }
            None => misses.push(d),
        }
    }

    let solve_dimension = |d: usize| -> anyhow::Result<DimensionRow> {
        let protocol = base.with_environment_dim(d);
        let seq = parse_seq(&args.seq, &protocol)?;
        let spec = if args.ppt {
            RelaxationSpec::new(protocol, seq, args.copies).with_ppt()
        } else {
            RelaxationSpec::new(protocol, seq, args.copies)
        };
        let started = Instant::now();
        let (problem, _, _) = build_problem(&spec, args.sparse)?;
        let result = solve(&realify(&problem), &args.solver.config())?;
        Ok(DimensionRow {
            d_e: d,
            method: "sdp".into(),
            safe_value: result.safe_value,
            violated: result.safe_value.is_some_and(|b| args.observed > b),
            status: Some(result.status.to_string()),
            cached: false,
            wall_time_s: started.elapsed().as_secs_f64(),
        })
    };

    let jobs = args.jobs.max(1);
    for chunk in misses.chunks(jobs) {
        let solved: Vec<anyhow::Result<DimensionRow>> = std::thread::scope(|scope| {
            let handles: Vec<_> = chunk
                .iter()
                .map(|&d| scope.spawn(move || solve_dimension(d)))
                .collect();
            handles.into_iter().map(|h| h.join().expect("solver thread panicked")).collect()
        });
        for row in solved {
            let row = row?;
            // Only certified rows are worth replaying on a later run.
            if let Some(dir) = args.cache.as_ref().filter(|_| row.safe_value.is_some()) {
                let protocol = base.with_environment_dim(row.d_e);
                let path =
                    cache_path(dir, &protocol, &seq, args.copies, args.ppt, args.solver.eps);
                fs::write(&path, serde_json::to_string_pretty(&row)?)
                    .with_context(|| format!("writing cache entry {}", path.display()))?;
            }
            rows.push(row);
        }
    }
    if let Some(row) = trivial_row {
        rows.push(row);
    }
    rows.sort_by_key(|row| row.d_e);
    if args.stable_output {
        for row in &mut rows {
            row.wall_time_s = 0.0;
        }
    }

    // A violated bound at dimension d refutes every environment of
    // dimension ≤ d, certifying d_E ≥ d + 1.
    let certified = rows.iter().filter(|row| row.violated).map(|row| row.d_e).max();
    let report = json!({
        "schema": "envwit.certify/1",
        "sequence": seq.to_string(),
        "observed": args.observed,
        "N": args.copies,
        "ppt": args.ppt,
        "dimensions": rows,
        "certified_d_e_at_least": certified.map(|d| d + 1),
        "inconclusive": certified.is_none(),
    });
    emit(args.output.as_ref(), &report)
}

fn cmd_analytic(args: SeqOnlyArgs) -> anyhow::Result<()> {
    let seq = OutcomeSequence::parse(&args.seq)?;
    let bound = memoryless_maximum(&seq);
    let report = json!({
        "schema": "envwit.analytic/1",
        "sequence": seq.to_string(),
        "value": bound.value_f64,
        "value_rational": bound.value.to_string(),
        "per_symbol_probs": bound.per_symbol_probs,
    });
    emit(args.output.as_ref(), &report)
}

fn cmd_dc(args: SeqOnlyArgs) -> anyhow::Result<()> {
    let seq = OutcomeSequence::parse(&args.seq)?;
    let report = json!({
        "schema": "envwit.dc/1",
        "sequence": seq.to_string(),
        "deterministic_complexity": deterministic_complexity(&seq),
    });
    emit(args.output.as_ref(), &report)
}

/// Row-major nested-array rendering of a complex matrix, matching the
/// protocol TOML convention of `[re, im]` pairs.
#[derive(Serialize)]
struct UnitaryFile {
    d_e: usize,
    d_s: usize,
    unitary: Vec<Vec<[f64; 2]>>,
}

fn cmd_search(args: SearchArgs) -> anyhow::Result<()> {
    let protocol = args.protocol.resolve()?;
    let seq = parse_seq(&args.seq, &protocol)?;

    let mut config = SearchConfig::default();
    config.restarts = args.restarts;
    config.max_iters = args.max_iters;
    config.seed = args.seed;

    let started = Instant::now();
    let result = maximize_probability(&protocol, &seq, &config)?;
    let wall_time_s = if args.stable_output { 0.0 } else { started.elapsed().as_secs_f64() };

    if let Some(path) = &args.export_unitary {
        let u = &result.unitary;
        let file = UnitaryFile {
            d_e: protocol.d_e(),
            d_s: protocol.d_s(),
            unitary: (0..u.nrows())
                .map(|r| (0..u.ncols()).map(|c| [u[(r, c)].re, u[(r, c)].im]).collect())
                .collect(),
        };
        fs::write(path, toml::to_string(&file)?)
            .with_context(|| format!("writing {}", path.display()))?;
    }

    let report = json!({
        "schema": "envwit.search/1",
        "sequence": seq.to_string(),
        "d_E": protocol.d_e(),
        "seed": args.seed,
        "value": result.value,
        "restarts_used": result.restarts_used,
        "converged": result.converged,
        "wall_time_s": wall_time_s,
    });
    emit(args.output.as_ref(), &report)
}

fn cmd_export(args: ExportArgs) -> anyhow::Result<()> {
    let protocol = args.protocol.resolve()?;
    let seq = parse_seq(&args.seq, &protocol)?;

    let mut spec = RelaxationSpec::new(protocol, seq, args.copies);
    if args.full_space {
        spec = spec.with_representation(Representation::FullSpace);
    }
    if args.ppt {
        spec = spec.with_ppt();
    }
    if let Some(budget) = args.budget {
        spec.scalar_budget = budget;
    }

    let (problem, reduction, note) = build_problem(&spec, args.sparse)?;
    let real = realify(&problem);
    export_sdpa(&real, &args.output)?;

    let report = json!({
        "schema": "envwit.export/1",
        "output": args.output.display().to_string(),
        "blocks": real.blocks,
        "constraints": real.constraint_count(),
        "reduction": reduction,
        "note": note,
    });
    emit(None, &report)
}
