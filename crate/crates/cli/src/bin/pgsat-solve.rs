//! Minimal SAT solver front end with SAT-competition output:
//! `pgsat-solve FILE.cnf` prints `s SATISFIABLE` and `v` lines (exit 10) or
//! `s UNSATISFIABLE` (exit 20).

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::process::ExitCode;

fn run(path: &str) -> anyhow::Result<ExitCode> {
    let mut solver = varisat::Solver::new();
    solver.add_dimacs_cnf(BufReader::new(File::open(path)?))?;
    let out = io::stdout();
    let mut out = BufWriter::new(out.lock());
    if !solver.solve()? {
        writeln!(out, "s UNSATISFIABLE")?;
        return Ok(ExitCode::from(20));
    }
    writeln!(out, "s SATISFIABLE")?;
    let model = solver.model().unwrap_or_default();
    for chunk in model.chunks(16) {
        let line: Vec<String> = chunk.iter().map(|l| l.to_dimacs().to_string()).collect();
        writeln!(out, "v {}", line.join(" "))?;
    }
    writeln!(out, "v 0")?;
    Ok(ExitCode::from(10))
}

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().collect();
    let [_, path] = &args[..] else {
        eprintln!("usage: pgsat-solve FILE.cnf");
        return ExitCode::from(1);
    };
    match run(path) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("pgsat-solve: {e}");
            println!("s UNKNOWN");
            ExitCode::from(1)
        }
    }
}
