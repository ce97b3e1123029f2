use std::fmt::Write;

use super::{Atom, Fact, Problem, Term};

impl Problem {
    /// Renders the domain half as PDDL. Parsing the output of
    /// [`Problem::domain_pddl`] and [`Problem::problem_pddl`] yields an equal
    /// `Problem`.
    pub fn domain_pddl(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "(define (domain {})", self.domain_name);
        let _ = writeln!(out, "  (:requirements :strips :typing)");
        let mut types = String::new();
        for t in self.types.ids().skip(1) {
            let parent = self.types.parent(t).unwrap();
            let _ = write!(types, " {} - {}", self.types.name(t), self.types.name(parent));
        }
        let _ = writeln!(out, "  (:types{types})");
        let constants: Vec<_> = self.objects.iter().filter(|o| o.constant).collect();
        if !constants.is_empty() {
            let _ = write!(out, "  (:constants");
            for o in constants {
                let _ = write!(out, " {} - {}", o.name, self.types.name(o.ty));
            }
            let _ = writeln!(out, ")");
        }
        let _ = writeln!(out, "  (:predicates");
        for p in &self.predicates {
            let _ = write!(out, "    ({}", p.name);
            for (i, t) in p.param_types.iter().enumerate() {
                let _ = write!(out, " ?x{i} - {}", self.types.name(*t));
            }
            let _ = writeln!(out, ")");
        }
        let _ = writeln!(out, "  )");
        for a in &self.actions {
            let _ = writeln!(out, "  (:action {}", a.name);
            let params: Vec<String> = a
                .params
                .iter()
                .map(|p| format!("{} - {}", p.name, self.types.name(p.ty)))
                .collect();
            let _ = writeln!(out, "    :parameters ({})", params.join(" "));
            let render = |atom: &Atom| -> String {
                let mut s = format!("({}", self.predicate(atom.pred).name);
                for t in &atom.args {
                    match *t {
                        Term::Param(i) => s.push_str(&format!(" {}", a.params[i].name)),
                        Term::Obj(o) => s.push_str(&format!(" {}", self.object(o).name)),
                    }
                }
                s.push(')');
                s
            };
            let prec: Vec<String> = a.prec.iter().map(render).collect();
            let _ = writeln!(out, "    :precondition (and {})", prec.join(" "));
            let effs: Vec<String> = a
                .add
                .iter()
                .map(render)
                .chain(a.del.iter().map(|x| format!("(not {})", render(x))))
                .collect();
            let _ = writeln!(out, "    :effect (and {}))", effs.join(" "));
        }
        out.push_str(")\n");
        out
    }

    pub fn problem_pddl(&self) -> String {
        let fact = |f: &Fact| -> String {
            let mut s = format!("({}", self.predicate(f.pred).name);
            for o in &f.args {
                s.push(' ');
                s.push_str(&self.object(*o).name);
            }
            s.push(')');
            s
        };
        let mut out = String::new();
        let _ = writeln!(out, "(define (problem {})", self.name);
        let _ = writeln!(out, "  (:domain {})", self.domain_name);
        let _ = write!(out, "  (:objects");
        for o in self.objects.iter().filter(|o| !o.constant) {
            let _ = write!(out, " {} - {}", o.name, self.types.name(o.ty));
        }
        let _ = writeln!(out, ")");
        let init: Vec<String> = self.init.iter().map(fact).collect();
        let _ = writeln!(out, "  (:init {})", init.join(" "));
        let goal: Vec<String> = self.goal.iter().map(fact).collect();
        let _ = writeln!(out, "  (:goal (and {})))", goal.join(" "));
        out
    }
}
