//! Clauses over facts that keep one variable per layer.

use super::{Encoder, Use};
use crate::actions::{action_var, arg_var};
use crate::cnf::{CnfFormula, Lit, VarKey};
use crate::pddl::Polarity;

impl Encoder<'_> {
    fn fact_lit(f: &mut CnfFormula, fact: u32, step: u32) -> Lit {
        f.var(VarKey::Fact { fact, step }).pos()
    }

    pub(super) fn ground_init(&self, f: &mut CnfFormula) {
        for (i, fact) in self.facts.iter().enumerate() {
            let x = Self::fact_lit(f, i as u32, 0);
            f.add_clause(&[if self.problem.is_init(fact) { x } else { !x }]);
        }
    }

    pub(super) fn ground_transition(&self, f: &mut CnfFormula, t: u32) {
        let n = self.facts.len();
        let mut add_causes: Vec<Vec<Lit>> = vec![Vec::new(); n];
        let mut del_causes: Vec<Vec<Lit>> = vec![Vec::new(); n];
        for u in &self.ground_uses {
            let a = action_var(f, u.action, t);
            let guard: Vec<Lit> = u.guard.iter().map(|&(s, o)| arg_var(f, s, o, t)).collect();
            let mut clause: Vec<Lit> = std::iter::once(!a).chain(guard.iter().map(|g| !*g)).collect();
            match u.kind {
                Use::Prec => {
                    clause.push(Self::fact_lit(f, u.fact, t - 1));
                    f.add_clause(&clause);
                }
                Use::Effect(effect) => {
                    let x = Self::fact_lit(f, u.fact, t);
                    let add = effect.polarity == Polarity::Add;
                    clause.push(if add { x } else { !x });
                    f.add_clause(&clause);
                    let c = f.var(VarKey::CauseGround { effect, fact: u.fact, step: t }).pos();
                    f.add_clause(&[!c, a]);
                    for g in &guard {
                        f.add_clause(&[!c, *g]);
                    }
                    let causes = if add { &mut add_causes } else { &mut del_causes };
                    causes[u.fact as usize].push(c);
                }
            }
        }
        for i in 0..n {
            let before = Self::fact_lit(f, i as u32, t - 1);
            let after = Self::fact_lit(f, i as u32, t);
            let mut rise = vec![before, !after];
            rise.extend(&add_causes[i]);
            f.add_clause(&rise);
            let mut fall = vec![!before, after];
            fall.extend(&del_causes[i]);
            f.add_clause(&fall);
        }
    }
}
