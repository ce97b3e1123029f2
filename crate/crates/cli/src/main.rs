use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use pgsat::actions::StaticHandling;
use pgsat::bench::{read_manifest, run_benchmark, write_bench_csv, write_stats_csv};
use pgsat::cover::select_cover;
use pgsat::encode::{EncodeOptions, Encoder, EncodingKind};
use pgsat::mutex::{infer_groups, instantiate};
use pgsat::pddl::{parse, Problem};
use pgsat::solve::{solve, ExternalSolver, Mode, Outcome, SolveConfig, WallClock};

#[derive(Parser)]
#[command(name = "pgsat", version, about = "Lifted SAT planner with mutex-group state encodings")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Find a plan with an external SAT solver.
    Plan(PlanArgs),
    /// Run every encoding over a manifest of instances and write CSV.
    Bench(BenchArgs),
    /// Print the verified mutex groups of a problem.
    Groups(InstanceArgs),
    /// Print how each predicate is represented.
    Cover {
        #[command(flatten)]
        instance: InstanceArgs,
        #[arg(long)]
        no_pp: bool,
    },
    /// Write the formula for one length as DIMACS.
    Encode {
        #[command(flatten)]
        instance: InstanceArgs,
        #[arg(long, value_enum, default_value = "plmg")]
        encoding: Encoding,
        #[arg(long)]
        no_pp: bool,
        #[arg(long)]
        length: u32,
        /// Output file (stdout if omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct InstanceArgs {
    #[arg(long)]
    domain: PathBuf,
    #[arg(long)]
    problem: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum Encoding {
    Ground,
    Plmg,
    Binary,
}

impl From<Encoding> for EncodingKind {
    fn from(e: Encoding) -> Self {
        match e {
            Encoding::Ground => EncodingKind::Ground,
            Encoding::Plmg => EncodingKind::Plmg,
            Encoding::Binary => EncodingKind::Binary,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Optimal,
    Sat,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Optimal => Mode::Optimal,
            ModeArg::Sat => Mode::Satisficing,
        }
    }
}

#[derive(Args)]
struct PlanArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    #[arg(long, value_enum, default_value = "plmg")]
    encoding: Encoding,
    /// Keep predicates that occur in no precondition.
    #[arg(long)]
    no_pp: bool,
    #[arg(long, value_enum, default_value = "optimal")]
    mode: ModeArg,
    /// Solver command; the CNF path is appended.
    #[arg(long)]
    solver: String,
    #[arg(long, default_value_t = 200)]
    max_length: u32,
    /// Total time limit in seconds.
    #[arg(long)]
    time_limit: Option<f64>,
    /// Keep the generated CNF files in this directory.
    #[arg(long)]
    keep_cnf: Option<PathBuf>,
    /// Append per-length statistics to this CSV file.
    #[arg(long)]
    stats: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// File with one `domain problem` path pair per line.
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long)]
    solver: String,
    #[arg(long, value_enum, default_value = "optimal")]
    mode: ModeArg,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "ground,plmg,binary")]
    encodings: Vec<Encoding>,
    /// Also run each encoding without predicate pruning.
    #[arg(long)]
    both_pp: bool,
    #[arg(long, default_value_t = 200)]
    max_length: u32,
    /// Time limit per instance and configuration, in seconds.
    #[arg(long)]
    time_limit: Option<f64>,
    /// Output CSV (stdout if omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

fn load(args: &InstanceArgs) -> Result<Problem> {
    let d = fs::read_to_string(&args.domain).with_context(|| format!("reading {}", args.domain.display()))?;
    let p = fs::read_to_string(&args.problem).with_context(|| format!("reading {}", args.problem.display()))?;
    Ok(parse(&d, &p)?)
}

fn seconds(s: Option<f64>) -> Result<Option<Duration>> {
    s.map(|s| Duration::try_from_secs_f64(s).context("invalid time limit")).transpose()
}

fn output(path: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(io::BufWriter::new(fs::File::create(p).with_context(|| format!("creating {}", p.display()))?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn instance_name(problem: &Path) -> String {
    problem.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

fn plan(args: PlanArgs) -> Result<ExitCode> {
    let problem = load(&args.instance)?;
    let mut solver = ExternalSolver::new(&args.solver)?.keep_cnf(args.keep_cnf.clone());
    let config = SolveConfig {
        encoding: args.encoding.into(),
        pp: !args.no_pp,
        max_length: args.max_length,
        time_limit: seconds(args.time_limit)?,
    };
    let (plan, report) = solve(&problem, args.mode.into(), &config, &mut solver, &WallClock::start())?;
    if let Some(path) = &args.stats {
        let fresh = !path.exists() || fs::metadata(path)?.len() == 0;
        let file = fs::OpenOptions::new().create(true).append(true).open(path)?;
        write_stats_csv(&report.stats_rows(&instance_name(&args.instance.problem)), fresh, file)?;
    }
    match (plan, report.outcome) {
        (Some(plan), _) => {
            print!("{}", plan.display(&problem));
            Ok(ExitCode::SUCCESS)
        }
        (None, Outcome::Timeout) => {
            eprintln!("timeout");
            Ok(ExitCode::from(20))
        }
        (None, _) => {
            eprintln!("no plan within the bound");
            Ok(ExitCode::from(10))
        }
    }
}

fn bench(args: BenchArgs) -> Result<ExitCode> {
    let manifest = read_manifest(&args.manifest)?;
    if args.encodings.is_empty() {
        bail!("no encodings given");
    }
    let limit = seconds(args.time_limit)?;
    let mut configs = Vec::new();
    for pp in if args.both_pp { vec![true, false] } else { vec![true] } {
        for e in &args.encodings {
            configs.push(SolveConfig { encoding: (*e).into(), pp, max_length: args.max_length, time_limit: limit });
        }
    }
    let mut solver = ExternalSolver::new(&args.solver)?;
    let rows = run_benchmark(&manifest, &configs, args.mode.into(), &mut solver);
    write_bench_csv(&rows, output(&args.out)?)?;
    Ok(ExitCode::SUCCESS)
}

fn groups(args: InstanceArgs) -> Result<ExitCode> {
    let problem = load(&args)?;
    let mut out = io::stdout().lock();
    for (i, c) in infer_groups(&problem).iter().enumerate() {
        writeln!(out, "{} {}", if c.exactly_one { "EO " } else { "AMO" }, c.display(&problem))?;
        for g in instantiate(c, i, &problem) {
            writeln!(out, "  {}", g.dump_line(&problem, c))?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cover(args: InstanceArgs, no_pp: bool) -> Result<ExitCode> {
    let problem = load(&args)?;
    let cover = select_cover(&problem, &infer_groups(&problem), !no_pp);
    print!("{}", cover.report(&problem, &StaticHandling::compute(&problem)));
    Ok(ExitCode::SUCCESS)
}

fn encode(args: InstanceArgs, encoding: Encoding, no_pp: bool, length: u32, out: Option<PathBuf>) -> Result<ExitCode> {
    let problem = load(&args)?;
    let enc = Encoder::new(&problem, EncodeOptions::new(encoding.into(), !no_pp))?;
    let cnf = enc.encode(length);
    eprintln!("{}", cnf.stats_line(length as usize));
    cnf.write_dimacs(output(&out)?)?;
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let result = match Cli::parse().command {
        Cmd::Plan(a) => plan(a),
        Cmd::Bench(a) => bench(a),
        Cmd::Groups(a) => groups(a),
        Cmd::Cover { instance, no_pp } => cover(instance, no_pp),
        Cmd::Encode { instance, encoding, no_pp, length, out } => encode(instance, encoding, no_pp, length, out),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
