use std::fs;
use std::io::{self, BufReader, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use lmaxsat::dimacs::{parse_auto, write_solution, write_wcnf, ParseOptions, ParsedInstance, SolutionStatus};
use lmaxsat::maxsat::{Algorithm, Mode};
use lmaxsat::oracle::{brute_force_maxsat, random_wcnf};
use lmaxsat::pipeline::{preprocess_wcnf, solve_wcnf, PipelineConfig, PipelineOutcome};
use lmaxsat::reduction::lcnf_to_wcnf;
use lmaxsat::{Error, Wcnf};

const EXIT_HARD_UNSAT: u8 = 20;

#[derive(Parser)]
#[command(name = "lmaxsat", version, about = "Weighted partial MaxSAT with sound preprocessing")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve an instance and print the optimum in evaluation format.
    Solve(SolveArgs),
    /// Run the preprocessing pipeline and print or emit the result.
    Preprocess(PreprocessArgs),
    /// Solve by exhaustive enumeration (small instances only).
    Oracle(OracleArgs),
    /// Compare every configuration against the oracle on random instances.
    Fuzz(FuzzArgs),
}

#[derive(Args)]
struct InputArgs {
    /// Input file in WCNF or CNF format; stdin when omitted or "-".
    file: Option<PathBuf>,
    /// Grow the variable range instead of rejecting literals beyond the header.
    #[arg(long)]
    lenient: bool,
}

#[derive(Args, Clone)]
struct PrepArgs {
    /// Preprocessing: none, bce, rs or bce,rs.
    #[arg(long, default_value = "bce,rs", value_parser = parse_prep)]
    prep: Prep,
    /// Keep hard clauses out of blocked clause elimination.
    #[arg(long)]
    bce_soft_only: bool,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    prep: PrepArgs,
    #[arg(long, value_enum, default_value_t = ModeArg::Noninc)]
    mode: ModeArg,
    #[arg(long, value_enum, default_value_t = AlgArg::Wmsu1)]
    alg: AlgArg,
    /// Check the reconstructed model against the input (on by default).
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set, num_args = 0..=1, default_missing_value = "true")]
    verify: bool,
    /// Print one comment line per core.
    #[arg(long)]
    trace: bool,
    /// Give up after this many conflicts in a single SAT call.
    #[arg(long)]
    conflict_budget: Option<u64>,
}

#[derive(Args)]
struct PreprocessArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    prep: PrepArgs,
    /// Print the selector encoding of the preprocessed formula as WCNF
    /// instead of the labelled dump, and write a reconstruction sidecar.
    #[arg(long)]
    emit_wcnf: bool,
    /// Sidecar path; defaults to the input path with `.recon.json` appended.
    #[arg(long)]
    sidecar: Option<PathBuf>,
    /// Also write the blocked clause record, one clause per line.
    #[arg(long)]
    bce_record: Option<PathBuf>,
}

#[derive(Args)]
struct OracleArgs {
    #[command(flatten)]
    input: InputArgs,
}

#[derive(Args)]
struct FuzzArgs {
    #[arg(long, default_value_t = 1000)]
    count: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    threads: usize,
    #[arg(long, default_value_t = 12)]
    max_vars: u32,
    #[arg(long, default_value_t = 25)]
    max_clauses: usize,
    #[arg(long, default_value_t = 5)]
    max_weight: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Prep {
    bce: bool,
    rs: bool,
}

fn parse_prep(s: &str) -> Result<Prep, String> {
    match s {
        "none" => Ok(Prep { bce: false, rs: false }),
        "bce" => Ok(Prep { bce: true, rs: false }),
        "rs" => Ok(Prep { bce: false, rs: true }),
        "bce,rs" | "rs,bce" => Ok(Prep { bce: true, rs: true }),
        _ => Err(format!("expected none, bce, rs or bce,rs, got {s:?}")),
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    Noninc,
    Inc,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum AlgArg {
    Fumalik,
    Wmsu1,
}

impl PrepArgs {
    fn config(&self) -> PipelineConfig {
        PipelineConfig {
            bce: self.prep.bce,
            bce_soft_only: self.bce_soft_only,
            rs: self.prep.rs,
            ..PipelineConfig::default()
        }
    }
}

fn read_input(args: &InputArgs) -> anyhow::Result<ParsedInstance> {
    let opts = ParseOptions { strict: !args.lenient };
    let (name, parsed) = match args.file.as_deref() {
        None => ("<stdin>".to_string(), read_stdin(opts)?),
        Some(p) if p == Path::new("-") => ("<stdin>".to_string(), read_stdin(opts)?),
        Some(p) => {
            let file = fs::File::open(p).with_context(|| format!("cannot open {}", p.display()))?;
            (p.display().to_string(), parse_auto(BufReader::new(file), opts))
        }
    };
    let inst = parsed.with_context(|| format!("{name}: parse error"))?;
    for w in &inst.warnings {
        eprintln!("c warning: {name}: {w}");
    }
    Ok(inst)
}

fn read_stdin(opts: ParseOptions) -> anyhow::Result<Result<ParsedInstance, lmaxsat::dimacs::ParseError>> {
    let mut text = String::new();
    io::stdin().read_to_string(&mut text).context("cannot read stdin")?;
    Ok(parse_auto(text.as_bytes(), opts))
}

fn solve(args: &SolveArgs) -> anyhow::Result<u8> {
    let inst = read_input(&args.input)?;
    let config = PipelineConfig {
        mode: match args.mode {
            ModeArg::Noninc => Mode::NonIncremental,
            ModeArg::Inc => Mode::Incremental,
        },
        algorithm: match args.alg {
            AlgArg::Fumalik => Algorithm::FuMalik,
            AlgArg::Wmsu1 => Algorithm::Wmsu1,
        },
        conflict_budget: args.conflict_budget,
        verify: args.verify,
        ..args.prep.config()
    };
    let mut out = io::stdout().lock();
    let result = match solve_wcnf(&inst.wcnf, &config) {
        Ok(r) => r,
        Err(Error::ResourceLimit { conflicts }) => {
            writeln!(out, "c conflict budget exhausted after {conflicts} conflicts")?;
            out.write_all(write_solution(None, SolutionStatus::Unknown).as_bytes())?;
            return Ok(0);
        }
        Err(e) => return Err(e.into()),
    };
    if args.trace {
        writeln!(
            out,
            "c prep bce removed {} lcnf {} -> {} clauses",
            result.bce_removed, result.lcnf_clauses_before, result.lcnf_clauses_after
        )?;
        for line in &result.stats.trace {
            writeln!(out, "c {line}")?;
        }
        writeln!(
            out,
            "c iterations {} loads {} sat calls {}",
            result.stats.iterations, result.stats.loads, result.stats.sat_calls
        )?;
    }
    match &result.outcome {
        PipelineOutcome::Optimum(sol) => {
            out.write_all(write_solution(Some(sol), SolutionStatus::Optimum).as_bytes())?;
            Ok(0)
        }
        PipelineOutcome::HardUnsat => {
            out.write_all(write_solution(None, SolutionStatus::HardUnsat).as_bytes())?;
            Ok(EXIT_HARD_UNSAT)
        }
    }
}

fn preprocess(args: &PreprocessArgs) -> anyhow::Result<u8> {
    let inst = read_input(&args.input)?;
    let f = &inst.wcnf;
    let pre = preprocess_wcnf(f, &args.prep.config());
    if let Some(path) = &args.bce_record {
        fs::write(path, pre.bce.to_text()).with_context(|| format!("cannot write {}", path.display()))?;
    }
    let mut out = io::stdout().lock();
    if !args.emit_wcnf {
        writeln!(
            out,
            "c bce removed {} lcnf {} -> {} clauses, eliminated {} variables",
            pre.bce.entries.len(),
            pre.lcnf_clauses_before,
            pre.lcnf.len(),
            pre.bve.entries.len()
        )?;
        out.write_all(pre.lcnf.to_text().as_bytes())?;
        return Ok(0);
    }

    let sidecar = match (&args.sidecar, args.input.file.as_deref()) {
        (Some(p), _) => p.clone(),
        (None, Some(p)) if p != Path::new("-") => {
            let mut s = p.as_os_str().to_owned();
            s.push(".recon.json");
            PathBuf::from(s)
        }
        _ => bail!("--sidecar is required when reading stdin"),
    };
    let (encoded, selectors) = lcnf_to_wcnf(&pre.lcnf);
    // label i of the lifted formula is the i-th soft clause left after BCE
    let soft_index: Vec<(u32, usize)> = selectors
        .keys()
        .map(|l| {
            let i = l.id() as usize - 1;
            let original = if args.prep.prep.bce { pre.bce.soft_origin[i] } else { i };
            (l.id(), original + 1)
        })
        .collect();
    let record = json!({
        "num_vars": f.num_vars,
        "selectors": selectors.iter().map(|(l, v)| (l.id(), v.index())).collect::<Vec<_>>(),
        "soft_index": soft_index,
        "bve": pre.bve,
        "bce": pre.bce,
    });
    fs::write(&sidecar, serde_json::to_string_pretty(&record)? + "\n")
        .with_context(|| format!("cannot write {}", sidecar.display()))?;
    out.write_all(write_wcnf(&encoded)?.as_bytes())?;
    Ok(0)
}

fn oracle(args: &OracleArgs) -> anyhow::Result<u8> {
    let inst = read_input(&args.input)?;
    let mut out = io::stdout().lock();
    match brute_force_maxsat(&inst.wcnf)? {
        Some(sol) => {
            out.write_all(write_solution(Some(&sol), SolutionStatus::Optimum).as_bytes())?;
            Ok(0)
        }
        None => {
            out.write_all(write_solution(None, SolutionStatus::HardUnsat).as_bytes())?;
            Ok(EXIT_HARD_UNSAT)
        }
    }
}

fn fuzz_configs(f: &Wcnf) -> Vec<PipelineConfig> {
    let mut v = Vec::new();
    for (bce, rs) in [(false, false), (true, false), (false, true), (true, true)] {
        for mode in [Mode::NonIncremental, Mode::Incremental] {
            for algorithm in [Algorithm::FuMalik, Algorithm::Wmsu1] {
                if algorithm == Algorithm::FuMalik && !f.is_unweighted() {
                    continue;
                }
                v.push(PipelineConfig {
                    bce,
                    rs,
                    mode,
                    algorithm,
                    ..PipelineConfig::default()
                });
            }
        }
    }
    v
}

/// Returns a description of every configuration that disagrees with the oracle.
fn fuzz_one(args: &FuzzArgs, k: u64) -> anyhow::Result<Vec<String>> {
    let seed = args.seed.wrapping_add(k);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nvars = rng.gen_range(1..=args.max_vars.max(1));
    let nclauses = rng.gen_range(1..=args.max_clauses.max(1));
    let max_weight = if rng.gen_bool(1.0 / 3.0) { 1 } else { args.max_weight.max(1) };
    let hard_fraction = [0.0, 0.3, 0.6][rng.gen_range(0..3)];
    let f = random_wcnf(seed, nvars, nclauses, max_weight, hard_fraction);
    let expected = brute_force_maxsat(&f)?.map(|s| s.cost);
    let mut bad = Vec::new();
    for cfg in fuzz_configs(&f) {
        let got = solve_wcnf(&f, &cfg).map(|r| match r.outcome {
            PipelineOutcome::Optimum(s) => Some(s.cost),
            PipelineOutcome::HardUnsat => None,
        });
        if !matches!(&got, Ok(c) if *c == expected) {
            bad.push(format!(
                "seed {seed}: bce={} rs={} {:?} {:?} gave {got:?}, oracle {expected:?}",
                cfg.bce, cfg.rs, cfg.mode, cfg.algorithm
            ));
        }
    }
    Ok(bad)
}

fn fuzz(args: &FuzzArgs) -> anyhow::Result<u8> {
    let next = AtomicU64::new(0);
    let failures = Mutex::new(Vec::new());
    let threads = args.threads.max(1);
    std::thread::scope(|s| -> anyhow::Result<()> {
        let workers: Vec<_> = (0..threads)
            .map(|_| {
                s.spawn(|| -> anyhow::Result<()> {
                    loop {
                        let k = next.fetch_add(1, Ordering::Relaxed);
                        if k >= args.count {
                            return Ok(());
                        }
                        let bad = fuzz_one(args, k)?;
                        failures.lock().unwrap().extend(bad);
                    }
                })
            })
            .collect();
        for w in workers {
            w.join().expect("fuzz worker panicked")?;
        }
        Ok(())
    })?;
    let mut failures = failures.into_inner().unwrap();
    failures.sort();
    let mut out = io::stdout().lock();
    for f in &failures {
        writeln!(out, "c mismatch {f}")?;
    }
    writeln!(out, "c fuzz {} instances, {} mismatches", args.count, failures.len())?;
    Ok(u8::from(!failures.is_empty()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Solve(a) => solve(a),
        Command::Preprocess(a) => preprocess(a),
        Command::Oracle(a) => oracle(a),
        Command::Fuzz(a) => fuzz(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
