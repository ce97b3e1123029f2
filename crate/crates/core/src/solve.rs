//! Solving loops: encode a bound, hand the formula to a SAT backend, decode.

use std::fmt;
use std::fs;
use std::io::{self, Read};
use std::path::PathBuf;
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

use log::{debug, info};
use thiserror::Error;
use wait_timeout::ChildExt;

use crate::actions::ExtractError;
use crate::cnf::CnfFormula;
use crate::encode::{EncodeError, EncodeOptions, Encoder, EncodingKind};
use crate::pddl::Problem;
use crate::plan::{validate, Invalid, Plan};

/// Bounds tried in satisficing mode.
pub const SAT_BOUNDS: [u32; 5] = [10, 25, 50, 100, 200];

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SatOutcome {
    /// `model[i]` is the value of variable `i + 1`.
    Sat(Vec<bool>),
    Unsat,
    Timeout,
}

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("i/o: {0}")]
    Io(#[from] io::Error),
    #[error("solver: {0}")]
    Solver(String),
    #[error(transparent)]
    Encode(#[from] EncodeError),
    #[error("malformed model: {0}")]
    Extract(#[from] ExtractError),
    #[error("decoded plan is invalid: {0}")]
    InvalidPlan(Invalid),
}

pub trait SatBackend {
    /// Solves `cnf` within `budget` (unlimited if `None`). `label` names the
    /// formula, e.g. for kept CNF files.
    fn solve(&mut self, cnf: &CnfFormula, budget: Option<Duration>, label: &str) -> Result<SatOutcome, SolveError>;
}

/// Runs a solver executable on a DIMACS file and reads SAT-competition
/// output (`s ...` and `v ...` lines).
#[derive(Clone, Debug)]
pub struct ExternalSolver {
    program: String,
    args: Vec<String>,
    pub keep_cnf: Option<PathBuf>,
}

impl ExternalSolver {
    /// `command` is split on whitespace; the CNF path is appended.
    pub fn new(command: &str) -> Result<Self, SolveError> {
        let mut parts = command.split_whitespace().map(str::to_string);
        let program = parts.next().ok_or_else(|| SolveError::Solver("empty solver command".into()))?;
        Ok(ExternalSolver { program, args: parts.collect(), keep_cnf: None })
    }

    pub fn keep_cnf(mut self, dir: Option<PathBuf>) -> Self {
        self.keep_cnf = dir;
        self
    }
}

impl SatBackend for ExternalSolver {
    fn solve(&mut self, cnf: &CnfFormula, budget: Option<Duration>, label: &str) -> Result<SatOutcome, SolveError> {
        let mut temp = None;
        let path = match &self.keep_cnf {
            Some(dir) => {
                fs::create_dir_all(dir)?;
                let path = dir.join(format!("{label}.cnf"));
                cnf.write_dimacs(io::BufWriter::new(fs::File::create(&path)?))?;
                path
            }
            None => {
                let file = tempfile::Builder::new().prefix("pgsat-").suffix(".cnf").tempfile()?;
                cnf.write_dimacs(io::BufWriter::new(file.as_file()))?;
                let path = file.path().to_path_buf();
                temp = Some(file);
                path
            }
        };
        debug!("running {} on {}", self.program, path.display());
        let mut child = Command::new(&self.program)
            .args(&self.args)
            .arg(&path)
            .stdin(Stdio::null())
            .stdout(Stdio::piped())
            .stderr(Stdio::null())
            .spawn()
            .map_err(|e| SolveError::Solver(format!("cannot start `{}`: {e}", self.program)))?;
        let mut stdout = child.stdout.take().expect("piped stdout");
        let reader = std::thread::spawn(move || {
            let mut text = String::new();
            stdout.read_to_string(&mut text).map(|_| text)
        });
        let status = match budget {
            Some(b) => child.wait_timeout(b)?,
            None => Some(child.wait()?),
        };
        if status.is_none() {
            child.kill()?;
            child.wait()?;
            let _ = reader.join();
            return Ok(SatOutcome::Timeout);
        }
        let text = reader.join().map_err(|_| SolveError::Solver("output reader panicked".into()))??;
        drop(temp);
        parse_solver_output(&text, cnf.num_vars())
    }
}

/// Reads SAT-competition output. Variables missing from the `v` lines are
/// false.
pub fn parse_solver_output(text: &str, num_vars: usize) -> Result<SatOutcome, SolveError> {
    let mut status = None;
    let mut model = vec![false; num_vars];
    for line in text.lines() {
        let mut words = line.split_whitespace();
        match words.next() {
            Some("s") => status = Some(words.collect::<Vec<_>>().join(" ")),
            Some("v") => {
                for w in words {
                    let lit: i64 = w.parse().map_err(|_| SolveError::Solver(format!("bad literal `{w}`")))?;
                    let var = lit.unsigned_abs() as usize;
                    if var > num_vars {
                        return Err(SolveError::Solver(format!("literal {lit} beyond {num_vars} variables")));
                    }
                    if var > 0 {
                        model[var - 1] = lit > 0;
                    }
                }
            }
            _ => {}
        }
    }
    match status.as_deref() {
        Some("SATISFIABLE") => Ok(SatOutcome::Sat(model)),
        Some("UNSATISFIABLE") => Ok(SatOutcome::Unsat),
        Some("UNKNOWN") => Ok(SatOutcome::Timeout),
        Some(other) => Err(SolveError::Solver(format!("unknown status `{other}`"))),
        None => Err(SolveError::Solver("no status line in solver output".into())),
    }
}

/// Elapsed time since the run started.
pub trait Clock {
    fn elapsed(&self) -> Duration;
}

pub struct WallClock(Instant);

impl WallClock {
    pub fn start() -> Self {
        WallClock(Instant::now())
    }
}

impl Clock for WallClock {
    fn elapsed(&self) -> Duration {
        self.0.elapsed()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Optimal,
    Satisficing,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Optimal => "optimal",
            Mode::Satisficing => "sat",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LengthResult {
    Sat,
    Unsat,
    Timeout,
}

impl LengthResult {
    pub fn as_str(self) -> &'static str {
        match self {
            LengthResult::Sat => "SAT",
            LengthResult::Unsat => "UNSAT",
            LengthResult::Timeout => "TIMEOUT",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LengthRecord {
    pub length: u32,
    pub vars: usize,
    pub clauses: usize,
    pub result: LengthResult,
    pub budget: Option<Duration>,
    pub seconds: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    Plan,
    /// Every bound tried was unsatisfiable.
    NoPlan,
    Timeout,
}

impl Outcome {
    pub fn as_str(self) -> &'static str {
        match self {
            Outcome::Plan => "plan",
            Outcome::NoPlan => "unsat-bound-exhausted",
            Outcome::Timeout => "timeout",
        }
    }
}

#[derive(Clone, Debug)]
pub struct SolveReport {
    pub mode: Mode,
    pub encoding: EncodingKind,
    pub pp: bool,
    pub records: Vec<LengthRecord>,
    pub outcome: Outcome,
}

impl SolveReport {
    /// Stats rows: instance, encoding, pp, length, vars, clauses, result, seconds.
    pub fn stats_rows(&self, instance: &str) -> Vec<[String; 8]> {
        self.records
            .iter()
            .map(|r| {
                [
                    instance.to_string(),
                    self.encoding.to_string(),
                    if self.pp { "on" } else { "off" }.to_string(),
                    r.length.to_string(),
                    r.vars.to_string(),
                    r.clauses.to_string(),
                    r.result.as_str().to_string(),
                    format!("{:.3}", r.seconds),
                ]
            })
            .collect()
    }
}

#[derive(Clone, Debug)]
pub struct SolveConfig {
    pub encoding: EncodingKind,
    pub pp: bool,
    /// Largest length tried in optimal mode.
    pub max_length: u32,
    pub time_limit: Option<Duration>,
}

impl SolveConfig {
    pub fn new(encoding: EncodingKind, pp: bool) -> Self {
        SolveConfig { encoding, pp, max_length: 200, time_limit: None }
    }
}

struct Attempt {
    record: LengthRecord,
    plan: Option<Plan>,
}

fn attempt(
    encoder: &Encoder,
    length: u32,
    budget: Option<Duration>,
    backend: &mut dyn SatBackend,
    clock: &dyn Clock,
) -> Result<Attempt, SolveError> {
    let start = clock.elapsed();
    let cnf = encoder.encode(length);
    let label = format!("{}-{}", encoder.kind(), length);
    let outcome = backend.solve(&cnf, budget, &label)?;
    let seconds = clock.elapsed().saturating_sub(start).as_secs_f64();
    let (result, plan) = match outcome {
        SatOutcome::Sat(model) => {
            let plan = Plan::new(encoder.decode_plan(&cnf, &model, length)?);
            validate(&plan, encoder.problem).map_err(SolveError::InvalidPlan)?;
            (LengthResult::Sat, Some(plan))
        }
        SatOutcome::Unsat => (LengthResult::Unsat, None),
        SatOutcome::Timeout => (LengthResult::Timeout, None),
    };
    info!("{} {} -> {}", label, cnf.stats_line(length as usize), result.as_str());
    let record = LengthRecord {
        length,
        vars: cnf.num_vars(),
        clauses: cnf.num_clauses(),
        result,
        budget,
        seconds,
    };
    Ok(Attempt { record, plan })
}

fn remaining(limit: Option<Duration>, clock: &dyn Clock) -> Option<Duration> {
    limit.map(|l| l.saturating_sub(clock.elapsed()))
}

/// Tries lengths 0, 1, 2, ... up to `max_length`; the first plan found is
/// optimal.
pub fn solve_optimal(
    problem: &Problem,
    config: &SolveConfig,
    backend: &mut dyn SatBackend,
    clock: &dyn Clock,
) -> Result<(Option<Plan>, SolveReport), SolveError> {
    let encoder = Encoder::new(problem, EncodeOptions::new(config.encoding, config.pp))?;
    let mut report =
        SolveReport { mode: Mode::Optimal, encoding: config.encoding, pp: config.pp, records: Vec::new(), outcome: Outcome::NoPlan };
    for length in 0..=config.max_length {
        let budget = remaining(config.time_limit, clock);
        if budget == Some(Duration::ZERO) {
            report.outcome = Outcome::Timeout;
            return Ok((None, report));
        }
        let a = attempt(&encoder, length, budget, backend, clock)?;
        let result = a.record.result;
        report.records.push(a.record);
        match result {
            LengthResult::Sat => {
                report.outcome = Outcome::Plan;
                return Ok((a.plan, report));
            }
            LengthResult::Timeout => {
                report.outcome = Outcome::Timeout;
                return Ok((None, report));
            }
            LengthResult::Unsat => {}
        }
    }
    Ok((None, report))
}

/// Tries [`SAT_BOUNDS`] in order, giving each the remaining time divided by
/// the number of bounds left.
pub fn solve_satisficing(
    problem: &Problem,
    config: &SolveConfig,
    backend: &mut dyn SatBackend,
    clock: &dyn Clock,
) -> Result<(Option<Plan>, SolveReport), SolveError> {
    let encoder = Encoder::new(problem, EncodeOptions::new(config.encoding, config.pp))?;
    let mut report = SolveReport {
        mode: Mode::Satisficing,
        encoding: config.encoding,
        pp: config.pp,
        records: Vec::new(),
        outcome: Outcome::NoPlan,
    };
    for (i, &bound) in SAT_BOUNDS.iter().enumerate() {
        let left = (SAT_BOUNDS.len() - i) as u32;
        let budget = remaining(config.time_limit, clock).map(|r| r / left);
        if budget == Some(Duration::ZERO) {
            report.outcome = Outcome::Timeout;
            break;
        }
        let a = attempt(&encoder, bound, budget, backend, clock)?;
        let result = a.record.result;
        report.records.push(a.record);
        match result {
            LengthResult::Sat => {
                report.outcome = Outcome::Plan;
                return Ok((a.plan, report));
            }
            LengthResult::Timeout => report.outcome = Outcome::Timeout,
            LengthResult::Unsat => {}
        }
    }
    Ok((None, report))
}

pub fn solve(
    problem: &Problem,
    mode: Mode,
    config: &SolveConfig,
    backend: &mut dyn SatBackend,
    clock: &dyn Clock,
) -> Result<(Option<Plan>, SolveReport), SolveError> {
    match mode {
        Mode::Optimal => solve_optimal(problem, config, backend, clock),
        Mode::Satisficing => solve_satisficing(problem, config, backend, clock),
    }
}
