//! Batch runs over a manifest of instances, reported as CSV.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use log::warn;

use crate::pddl::parse;
use crate::solve::{solve, Clock, Mode, SatBackend, SolveConfig, WallClock};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ManifestEntry {
    pub name: String,
    pub domain: PathBuf,
    pub problem: PathBuf,
}

/// Reads a manifest: one `domain-path problem-path` pair per line, relative
/// to the manifest's directory. Blank lines and `#` comments are skipped.
pub fn read_manifest(path: &Path) -> io::Result<Vec<ManifestEntry>> {
    let base = path.parent().unwrap_or(Path::new("."));
    let text = fs::read_to_string(path)?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split_whitespace().collect();
        let [domain, problem] = parts[..] else {
            return Err(io::Error::new(
                io::ErrorKind::InvalidData,
                format!("{}:{}: expected `domain problem`", path.display(), i + 1),
            ));
        };
        out.push(ManifestEntry::new(base.join(domain), base.join(problem)));
    }
    Ok(out)
}

impl ManifestEntry {
    /// Names the instance `<dir>/<problem stem>`.
    pub fn new(domain: PathBuf, problem: PathBuf) -> Self {
        let stem = problem.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        let name = match problem.parent().and_then(|p| p.file_name()) {
            Some(dir) => format!("{}/{}", dir.to_string_lossy(), stem),
            None => stem,
        };
        ManifestEntry { name, domain, problem }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchRow {
    pub instance: String,
    pub encoding: String,
    pub pp: bool,
    pub outcome: String,
    pub plan_length: Option<usize>,
    pub lengths: Vec<u32>,
    pub vars: Vec<usize>,
    pub clauses: Vec<usize>,
    pub seconds: f64,
}

pub const BENCH_HEADER: [&str; 9] =
    ["instance", "encoding", "pp", "outcome", "plan_length", "lengths", "vars", "clauses", "seconds"];

fn join<T: ToString>(xs: &[T]) -> String {
    xs.iter().map(T::to_string).collect::<Vec<_>>().join(";")
}

impl BenchRow {
    pub fn record(&self) -> [String; 9] {
        [
            self.instance.clone(),
            self.encoding.clone(),
            if self.pp { "on" } else { "off" }.to_string(),
            self.outcome.clone(),
            self.plan_length.map(|n| n.to_string()).unwrap_or_default(),
            join(&self.lengths),
            join(&self.vars),
            join(&self.clauses),
            format!("{:.3}", self.seconds),
        ]
    }
}

/// Runs every configuration on every instance. Failures become rows with
/// outcome `error`.
pub fn run_benchmark(
    manifest: &[ManifestEntry],
    configs: &[SolveConfig],
    mode: Mode,
    backend: &mut dyn SatBackend,
) -> Vec<BenchRow> {
    let mut rows = Vec::new();
    for entry in manifest {
        let parsed = fs::read_to_string(&entry.domain)
            .and_then(|d| fs::read_to_string(&entry.problem).map(|p| (d, p)))
            .map_err(|e| e.to_string())
            .and_then(|(d, p)| parse(&d, &p).map_err(|e| e.to_string()));
        for config in configs {
            let clock = WallClock::start();
            let mut row = BenchRow {
                instance: entry.name.clone(),
                encoding: config.encoding.to_string(),
                pp: config.pp,
                outcome: "error".into(),
                plan_length: None,
                lengths: Vec::new(),
                vars: Vec::new(),
                clauses: Vec::new(),
                seconds: 0.0,
            };
            match &parsed {
                Err(e) => warn!("{}: {e}", entry.name),
                Ok(problem) => match solve(problem, mode, config, backend, &clock) {
                    Ok((plan, report)) => {
                        row.outcome = report.outcome.as_str().into();
                        row.plan_length = plan.map(|p| p.len());
                        row.lengths = report.records.iter().map(|r| r.length).collect();
                        row.vars = report.records.iter().map(|r| r.vars).collect();
                        row.clauses = report.records.iter().map(|r| r.clauses).collect();
                    }
                    Err(e) => warn!("{} ({}): {e}", entry.name, config.encoding),
                },
            }
            row.seconds = clock.elapsed().as_secs_f64();
            rows.push(row);
        }
    }
    rows
}

pub fn write_bench_csv<W: io::Write>(rows: &[BenchRow], sink: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(BENCH_HEADER)?;
    for r in rows {
        w.write_record(r.record())?;
    }
    w.flush()?;
    Ok(())
}

pub const STATS_HEADER: [&str; 8] = ["instance", "encoding", "pp", "length", "vars", "clauses", "result", "seconds"];

/// Writes per-length solver statistics (see [`crate::solve::SolveReport::stats_rows`]),
/// preceded by the header line if `header` is set.
pub fn write_stats_csv<W: io::Write>(rows: &[[String; 8]], header: bool, sink: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    if header {
        w.write_record(STATS_HEADER)?;
    }
    for r in rows {
        w.write_record(r)?;
    }
    w.flush()?;
    Ok(())
}
