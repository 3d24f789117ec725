//! `arbrec`: generate instances, run the engine, run seeded experiments,
//! solve min-cost instances and re-check traces.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use arbrec::arrivals::{bidirected_path_adversary, uniform_random_sequence};
use arbrec::engine::run_sequence;
use arbrec::experiment::{default_m, run_experiment, ExperimentConfig};
use arbrec::graph::Digraph;
use arbrec::io::{format_instance, read_instance, read_trace, write_trace, write_trial_matrix, Instance, WeightedInstance};
use arbrec::mincost::{
    brute_force_min_arborescence, chu_liu_edmonds, incremental_recourse, min_arborescence_with_certificate,
    triangle_adversary, verify_dual_certificate, CandidateRule, BRUTE_FORCE_MAX_N,
};
use arbrec::oracle::max_forest_cardinality;
use arbrec::verify::{InvariantChecker, VerifyLevel, DEFAULT_SAMPLE_EVERY};

const EXIT_USAGE: u8 = 1;
const EXIT_VERIFY: u8 = 2;
const EXIT_IO: u8 = 3;

#[derive(Debug)]
enum Failure {
    Usage(String),
    Verify(String),
    Io(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => EXIT_USAGE,
            Failure::Verify(_) => EXIT_VERIFY,
            Failure::Io(_) => EXIT_IO,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Verify(m) | Failure::Io(m) => m,
        }
    }
}

impl From<arbrec::io::IoError> for Failure {
    fn from(e: arbrec::io::IoError) -> Self {
        match e {
            arbrec::io::IoError::Parse { .. } => Failure::Usage(e.to_string()),
            _ => Failure::Io(e.to_string()),
        }
    }
}

fn io_fail(path: &Path, e: impl std::fmt::Display) -> Failure {
    Failure::Io(format!("{}: {e}", path.display()))
}

#[derive(Parser, Debug)]
#[command(name = "arbrec", version, about = "Incremental maximum arborescence forests with recourse accounting")]
struct Cli {
    /// Directory for outputs whose path is not given explicitly.
    #[arg(long, global = true, env = "ARBREC_OUT_DIR", default_value = ".")]
    out_dir: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write an instance file.
    Gen(GenArgs),
    /// Run the engine on an instance, writing a CSV trace and a JSON summary.
    Run(RunArgs),
    /// Seeded random trials over several sizes.
    Experiment(ExperimentArgs),
    /// Minimum-cost arborescence of a weighted instance.
    Mincost(MincostArgs),
    /// Re-check a trace against an instance using the oracles only.
    Verify(VerifyArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum GenKind {
    Random,
    Adversarial,
    MincostAdversarial,
}

#[derive(Args, Debug)]
struct GenArgs {
    kind: GenKind,
    #[arg(long)]
    n: usize,
    /// Arc count for random instances (default ceil(n log2 n)).
    #[arg(long)]
    m: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overwrite an existing file.
    #[arg(long)]
    force: bool,
}

#[derive(Args, Debug)]
struct RunArgs {
    instance: PathBuf,
    #[arg(long)]
    trace: Option<PathBuf>,
    #[arg(long)]
    summary: Option<PathBuf>,
    #[arg(long, default_value = "sampled", value_parser = parse_level)]
    verify: VerifyLevel,
    #[arg(long, default_value_t = DEFAULT_SAMPLE_EVERY)]
    sample_every: usize,
}

#[derive(Args, Debug)]
struct ExperimentArgs {
    /// Comma-separated sizes.
    #[arg(long, value_delimiter = ',', default_values_t = [128usize, 256, 512, 1024])]
    n: Vec<usize>,
    /// Arc count for every size (default ceil(n log2 n)).
    #[arg(long)]
    m: Option<usize>,
    #[arg(long, default_value_t = 20)]
    trials: usize,
    /// Trial i uses seed + i.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "sampled", value_parser = parse_level)]
    verify: VerifyLevel,
    #[arg(long)]
    no_gap: bool,
    #[arg(long)]
    no_connectivity: bool,
    #[arg(long)]
    summary: Option<PathBuf>,
    #[arg(long)]
    matrix: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct MincostArgs {
    instance: PathBuf,
    /// Re-check the dual certificate independently.
    #[arg(long)]
    verify_dual: bool,
    /// Compare against exhaustive search (small n only).
    #[arg(long)]
    verify_brute: bool,
    /// Re-solve after each arc past the base graph and report recourse.
    #[arg(long)]
    incremental: bool,
    #[arg(long, default_value = "arc", value_parser = parse_rule)]
    candidate_rule: CandidateRule,
    /// Write the report as JSON.
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    instance: PathBuf,
    trace: PathBuf,
}

fn parse_level(s: &str) -> Result<VerifyLevel, String> {
    s.parse()
}

fn parse_rule(s: &str) -> Result<CandidateRule, String> {
    s.parse()
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| io_fail(dir, e))?;
    }
    File::create(path).map(BufWriter::new).map_err(|e| io_fail(path, e))
}

fn write_json(path: &Path, value: &serde_json::Value) -> Result<(), Failure> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| io_fail(path, e))?;
    writeln!(w).and_then(|_| w.flush()).map_err(|e| io_fail(path, e))
}

fn gen(args: GenArgs, out_dir: &Path) -> Result<(), Failure> {
    let usage = |e: &dyn std::fmt::Display| Failure::Usage(e.to_string());
    let (instance, name) = match args.kind {
        GenKind::Random => {
            if args.n < 2 {
                return Err(Failure::Usage(format!("n must be at least 2, got {}", args.n)));
            }
            let m = args.m.unwrap_or_else(|| default_m(args.n));
            let seq = uniform_random_sequence(args.n, m, args.seed).map_err(|e| usage(&e))?;
            (Instance::Unweighted(seq), format!("random-n{}-m{m}-s{}.txt", args.n, args.seed))
        }
        GenKind::Adversarial => {
            let seq = bidirected_path_adversary(args.n).map_err(|e| usage(&e))?;
            (Instance::Unweighted(seq), format!("adversarial-n{}.txt", args.n))
        }
        GenKind::MincostAdversarial => {
            let inst = triangle_adversary(args.n).map_err(|e| usage(&e))?;
            (
                Instance::Weighted(WeightedInstance::from_incremental(&inst)),
                format!("mincost-adversarial-n{}.txt", args.n),
            )
        }
    };
    let path = args.out.unwrap_or_else(|| out_dir.join(name));
    if path.exists() && !args.force {
        return Err(Failure::Usage(format!("{} exists; pass --force to overwrite", path.display())));
    }
    let mut w = create(&path)?;
    w.write_all(format_instance(&instance).as_bytes())
        .and_then(|_| w.flush())
        .map_err(|e| io_fail(&path, e))?;
    println!("wrote {}", path.display());
    Ok(())
}

fn run(args: RunArgs, out_dir: &Path) -> Result<(), Failure> {
    let seq = match read_instance(&args.instance)? {
        Instance::Unweighted(seq) => seq,
        Instance::Weighted(_) => {
            return Err(Failure::Usage("weighted instance: use the mincost subcommand".into()));
        }
    };
    let n = seq.n;
    let mut checker = InvariantChecker::new(n, args.verify)
        .with_sample_every(args.sample_every)
        .with_total_steps(seq.len());
    let (trace, engine) = match run_sequence(n, &seq.entries, &mut [&mut checker]) {
        Ok(r) => r,
        Err(arbrec::engine::EngineError::Invariant(v)) => return Err(Failure::Verify(v.to_string())),
        Err(e) => return Err(Failure::Usage(e.to_string())),
    };
    let trace_path = args.trace.unwrap_or_else(|| out_dir.join("trace.csv"));
    let summary_path = args.summary.unwrap_or_else(|| out_dir.join("summary.json"));
    write_trace(create(&trace_path)?, &trace).map_err(|e| io_fail(&trace_path, e))?;
    let phases = trace.phases();
    let summary = json!({
        "schema_version": arbrec::experiment::SCHEMA_VERSION,
        "log_base": 2,
        "instance": args.instance.display().to_string(),
        "n": n,
        "m": trace.m(),
        "total_recourse": trace.total_recourse(),
        "phase1_recourse": phases.map(|p| p.phase1),
        "phase2_recourse": phases.map(|p| p.phase2),
        "updates": trace.updates(),
        "final_forest_size": engine.forest().size(),
        "final_num_roots": engine.forest().num_roots(),
        "verify": args.verify,
        "checks": checker.counts,
    });
    write_json(&summary_path, &summary)?;
    println!(
        "n={n} m={} total_recourse={} updates={} forest_size={}",
        trace.m(),
        trace.total_recourse(),
        trace.updates(),
        engine.forest().size()
    );
    Ok(())
}

fn experiment(args: ExperimentArgs, out_dir: &Path) -> Result<(), Failure> {
    let config = ExperimentConfig {
        n_list: args.n,
        m: args.m,
        trials: args.trials,
        base_seed: args.seed,
        verify: args.verify,
        component_gap: !args.no_gap,
        connectivity: !args.no_connectivity,
    };
    let summary = run_experiment(&config).map_err(|e| Failure::Usage(e.to_string()))?;
    let summary_path = args.summary.unwrap_or_else(|| out_dir.join("experiment.json"));
    let matrix_path = args.matrix.unwrap_or_else(|| out_dir.join("experiment.csv"));
    let value = serde_json::to_value(&summary).map_err(|e| Failure::Io(e.to_string()))?;
    write_json(&summary_path, &value)?;
    write_trial_matrix(create(&matrix_path)?, &summary.trials).map_err(|e| io_fail(&matrix_path, e))?;
    println!("n\tm\tok\tfailed\ttotal/(m log2^2 n)\tphase1/(n log2 n)\tgap viol.\tstrongly conn.");
    for a in &summary.aggregates {
        let opt = |x: Option<f64>| x.map_or("-".to_string(), |v| format!("{v:.4}"));
        println!(
            "{}\t{}\t{}\t{}\t{:.3e} ± {:.1e}\t{:.3e} ± {:.1e}\t{}\t{}",
            a.n,
            a.m,
            a.trials_ok,
            a.trials_failed,
            a.ratio_total.mean,
            a.ratio_total.std,
            a.ratio_phase1.mean,
            a.ratio_phase1.std,
            opt(a.gap_violation_fraction),
            opt(a.fraction_strongly_connected)
        );
    }
    if let Some(f) = summary.failures.first() {
        return Err(Failure::Verify(format!(
            "{} trial(s) failed; first n={} seed={}: {}",
            summary.failures.len(),
            f.n,
            f.seed,
            f.error
        )));
    }
    Ok(())
}

fn mincost(args: MincostArgs) -> Result<(), Failure> {
    let inst = match read_instance(&args.instance)? {
        Instance::Weighted(w) => w,
        Instance::Unweighted(_) => return Err(Failure::Usage("instance is not weighted".into())),
    };
    let g = inst.graph().map_err(|e| Failure::Usage(e.to_string()))?;
    let mut problems = Vec::new();
    let mut report = json!({ "n": g.n(), "m": g.arcs().len(), "root": g.root() });

    let (cle_tree, cle_cost) = chu_liu_edmonds(&g).map_err(|e| Failure::Usage(e.to_string()))?;
    report["edmonds_cost"] = json!(cle_cost);
    match min_arborescence_with_certificate(&g, args.candidate_rule) {
        Ok(sol) => {
            println!(
                "cost {} (dual value {}, {} dual sets, {} restarts, rule {})",
                sol.cost,
                sol.packing.value(),
                sol.packing.sets.len(),
                sol.restarts,
                args.candidate_rule
            );
            if sol.cost != cle_cost {
                problems.push(format!("primal-dual cost {} != edmonds cost {cle_cost}", sol.cost));
            }
            if args.verify_dual {
                let check = verify_dual_certificate(&g, &sol.tree, &sol.packing);
                println!("dual certificate: {check}");
                if !check.is_valid() {
                    problems.push(format!("certificate: {check}"));
                }
            }
            report["cost"] = json!(sol.cost);
            report["tree"] = json!(sol.tree);
            report["packing"] = json!(sol.packing);
            report["restarts"] = json!(sol.restarts);
        }
        Err(e) => {
            // Fall back to the classical algorithm and keep the instance on record.
            println!("primal-dual failed ({e}); edmonds cost {cle_cost}");
            report["cost"] = json!(cle_cost);
            report["tree"] = json!(cle_tree);
            report["primal_dual_error"] = json!(e.to_string());
            if args.verify_dual {
                problems.push(format!("no certificate: {e}"));
            }
        }
    }
    if args.verify_brute {
        if g.n() > BRUTE_FORCE_MAX_N {
            println!("brute force skipped: n > {BRUTE_FORCE_MAX_N}");
        } else {
            let (_, brute) = brute_force_min_arborescence(&g).map_err(|e| Failure::Usage(e.to_string()))?;
            println!("brute force cost {brute}");
            report["brute_force_cost"] = json!(brute);
            if brute != cle_cost {
                problems.push(format!("brute force cost {brute} != edmonds cost {cle_cost}"));
            }
        }
    }
    if args.incremental {
        let inc = inst.incremental().map_err(|e| Failure::Usage(e.to_string()))?;
        let rep = incremental_recourse(&inc).map_err(|e| Failure::Usage(e.to_string()))?;
        println!(
            "incremental: {} insertions, recourse {}, tree changed {} times",
            rep.per_step.len(),
            rep.total_recourse,
            rep.changes()
        );
        report["incremental"] = json!(rep);
    }
    if let Some(path) = &args.json {
        write_json(path, &report)?;
    }
    if problems.is_empty() {
        Ok(())
    } else {
        Err(Failure::Verify(problems.join("; ")))
    }
}

fn verify(args: VerifyArgs) -> Result<(), Failure> {
    let seq = match read_instance(&args.instance)? {
        Instance::Unweighted(seq) => seq,
        Instance::Weighted(_) => return Err(Failure::Usage("weighted instance has no engine trace".into())),
    };
    let file = File::open(&args.trace).map_err(|e| io_fail(&args.trace, e))?;
    let rows = read_trace(BufReader::new(file))?;
    if rows.len() != seq.len() {
        return Err(Failure::Verify(format!(
            "trace has {} rows, instance has {} arcs",
            rows.len(),
            seq.len()
        )));
    }
    let n = seq.n;
    let mut g = Digraph::new(n);
    for (i, (row, e)) in rows.iter().zip(&seq.entries).enumerate() {
        let bad = |what: String| Failure::Verify(format!("step {}: {what}", i + 1));
        if row.step != i + 1 || (row.tail, row.head) != (e.tail, e.head) {
            return Err(bad(format!("row ({}, {}) does not match arc ({}, {})", row.tail, row.head, e.tail, e.head)));
        }
        if row.rho.map(f64::to_bits) != e.rho.map(f64::to_bits) {
            return Err(bad("arc value differs from the instance".into()));
        }
        g.add_arc(e.tail, e.head).map_err(|err| bad(err.to_string()))?;
        let expected = max_forest_cardinality(&g);
        if row.forest_size != expected {
            return Err(bad(format!("forest size {} but the maximum is {expected}", row.forest_size)));
        }
        if row.num_roots + row.forest_size != n {
            return Err(bad("roots + forest size != n".into()));
        }
        if row.deletions > row.vanishing_arb_size || (row.updated == 0 && row.deletions > 0) {
            return Err(bad(format!(
                "{} deletions exceed the vanishing arborescence size {}",
                row.deletions, row.vanishing_arb_size
            )));
        }
    }
    let total: u64 = rows.iter().map(|r| r.deletions as u64).sum();
    println!("trace consistent: {} steps, total recourse {total}", rows.len());
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_USAGE) } else { ExitCode::SUCCESS };
        }
    };
    let out_dir = cli.out_dir;
    let result = match cli.command {
        Command::Gen(a) => gen(a, &out_dir),
        Command::Run(a) => run(a, &out_dir),
        Command::Experiment(a) => experiment(a, &out_dir),
        Command::Mincost(a) => mincost(a),
        Command::Verify(a) => verify(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
