#![allow(dead_code)]

use std::path::PathBuf;
use std::time::Duration;

use pgsat::cnf::CnfFormula;
use pgsat::pddl::{parse, Problem};
use pgsat::solve::{SatBackend, SatOutcome, SolveError};
use varisat::ExtendFormula;

/// In-process solver; ignores the budget.
pub struct Varisat;

impl SatBackend for Varisat {
    fn solve(&mut self, cnf: &CnfFormula, _: Option<Duration>, _: &str) -> Result<SatOutcome, SolveError> {
        Ok(solve_cnf(cnf))
    }
}

pub fn solve_cnf(cnf: &CnfFormula) -> SatOutcome {
    let mut s = varisat::Solver::new();
    for c in cnf.clauses() {
        let lits: Vec<varisat::Lit> = c.iter().map(|l| varisat::Lit::from_dimacs(l.0 as isize)).collect();
        s.add_clause(&lits);
    }
    if !s.solve().expect("varisat failed") {
        return SatOutcome::Unsat;
    }
    let mut model = vec![false; cnf.num_vars()];
    for l in s.model().unwrap() {
        let v = l.var().to_dimacs() as usize;
        if v <= model.len() {
            model[v - 1] = l.is_positive();
        }
    }
    SatOutcome::Sat(model)
}

pub fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data")
}

pub struct Instance {
    pub name: &'static str,
    pub domain: &'static str,
    pub problem: &'static str,
    /// Optimal plan length, worked out by hand.
    pub optimum: usize,
}

pub const INSTANCES: [Instance; 11] = [
    Instance { name: "transport/p01", domain: "transport", problem: "p01", optimum: 1 },
    Instance { name: "transport/p02", domain: "transport", problem: "p02", optimum: 4 },
    Instance { name: "transport/p03", domain: "transport", problem: "p03", optimum: 7 },
    Instance { name: "blocksworld/p01", domain: "blocksworld", problem: "p01", optimum: 4 },
    Instance { name: "blocksworld/p02", domain: "blocksworld", problem: "p02", optimum: 6 },
    Instance { name: "blocksworld/p03", domain: "blocksworld", problem: "p03", optimum: 4 },
    Instance { name: "gripper/p01", domain: "gripper", problem: "p01", optimum: 5 },
    Instance { name: "gripper/p02", domain: "gripper", problem: "p02", optimum: 9 },
    Instance { name: "visitall/p01", domain: "visitall", problem: "p01", optimum: 3 },
    Instance { name: "visitall/p02", domain: "visitall", problem: "p02", optimum: 8 },
    Instance { name: "pantry/p01", domain: "pantry", problem: "p01", optimum: 4 },
];

impl Instance {
    pub fn load(&self) -> Problem {
        let dir = data_dir().join(self.domain);
        let d = std::fs::read_to_string(dir.join("domain.pddl")).unwrap();
        let p = std::fs::read_to_string(dir.join(format!("{}.pddl", self.problem))).unwrap();
        parse(&d, &p).unwrap_or_else(|e| panic!("{}: {e}", self.name))
    }
}

pub fn instance(name: &str) -> &'static Instance {
    INSTANCES.iter().find(|i| i.name == name).unwrap()
}
