//! Grounding helpers and the explicit-state semantics used by the plan
//! validator and the breadth-first oracle.

use std::collections::BTreeSet;

use super::{ActionId, Atom, Fact, GroundAction, ObjId, Polarity, PredId, Problem, Term};

/// An explicit state: the set of true facts.
pub type State = BTreeSet<Fact>;

/// All facts of a predicate, in lexicographic order of object indices.
pub fn ground_facts(problem: &Problem, pred: PredId) -> Vec<Fact> {
    let schema = problem.predicate(pred);
    let ranges: Vec<_> = schema
        .param_types
        .iter()
        .map(|t| problem.types.members(*t))
        .collect();
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(ranges.len());
    fn rec(
        pred: PredId,
        ranges: &[std::ops::Range<u32>],
        cur: &mut Vec<ObjId>,
        out: &mut Vec<Fact>,
    ) {
        if cur.len() == ranges.len() {
            out.push(Fact::new(pred, cur.clone()));
            return;
        }
        for o in ranges[cur.len()].clone() {
            cur.push(ObjId(o));
            rec(pred, ranges, cur, out);
            cur.pop();
        }
    }
    rec(pred, &ranges, &mut cur, &mut out);
    out
}

/// Every `(action, effect)` pair whose effect has the given predicate and
/// polarity, in action order.
pub fn achievers(problem: &Problem, pred: PredId, polarity: Polarity) -> Vec<(ActionId, &Atom)> {
    problem
        .action_ids()
        .flat_map(|a| {
            problem
                .action(a)
                .effects(polarity)
                .iter()
                .filter(move |e| e.pred == pred)
                .map(move |e| (a, e))
        })
        .collect()
}

/// One type-valid instantiation of the parameters occurring in an atom.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AtomGrounding {
    /// `(parameter index, object)` for each distinct parameter of the atom, in
    /// order of first occurrence.
    pub binding: Vec<(usize, ObjId)>,
    pub fact: Fact,
}

/// Enumerates the ground instances of a schema atom over the parameter types
/// of `action`. Parameters appearing twice receive the same object.
pub fn atom_groundings(problem: &Problem, action: ActionId, atom: &Atom) -> Vec<AtomGrounding> {
    let schema = problem.action(action);
    let mut params: Vec<usize> = Vec::new();
    for t in &atom.args {
        if let Term::Param(i) = *t {
            if !params.contains(&i) {
                params.push(i);
            }
        }
    }
    let ranges: Vec<_> = params
        .iter()
        .map(|&i| problem.types.members(schema.params[i].ty))
        .collect();
    let mut out = Vec::new();
    let mut cur: Vec<ObjId> = Vec::with_capacity(params.len());
    loop {
        if cur.len() == params.len() {
            let binding: Vec<(usize, ObjId)> = params.iter().copied().zip(cur.iter().copied()).collect();
            let args = atom
                .args
                .iter()
                .map(|t| match *t {
                    Term::Obj(o) => o,
                    Term::Param(i) => binding.iter().find(|(p, _)| *p == i).unwrap().1,
                })
                .collect();
            out.push(AtomGrounding { binding, fact: Fact::new(atom.pred, args) });
            // advance odometer
            loop {
                let Some(last) = cur.pop() else { return out };
                let k = cur.len();
                if last.0 + 1 < ranges[k].end {
                    cur.push(ObjId(last.0 + 1));
                    break;
                }
            }
        } else {
            let k = cur.len();
            if ranges[k].is_empty() {
                // no valid object for this parameter; backtrack
                loop {
                    let Some(last) = cur.pop() else { return out };
                    let k = cur.len();
                    if last.0 + 1 < ranges[k].end {
                        cur.push(ObjId(last.0 + 1));
                        break;
                    }
                }
            } else {
                cur.push(ObjId(ranges[k].start));
            }
        }
    }
}

fn instantiate(atom: &Atom, args: &[ObjId]) -> Fact {
    Fact::new(
        atom.pred,
        atom.args
            .iter()
            .map(|t| match *t {
                Term::Obj(o) => o,
                Term::Param(i) => args[i],
            })
            .collect(),
    )
}

impl GroundAction {
    pub fn prec(&self, problem: &Problem) -> Vec<Fact> {
        let s = problem.action(self.action);
        s.prec.iter().map(|a| instantiate(a, &self.args)).collect()
    }

    pub fn add(&self, problem: &Problem) -> Vec<Fact> {
        let s = problem.action(self.action);
        s.add.iter().map(|a| instantiate(a, &self.args)).collect()
    }

    pub fn del(&self, problem: &Problem) -> Vec<Fact> {
        let s = problem.action(self.action);
        s.del.iter().map(|a| instantiate(a, &self.args)).collect()
    }

    /// Every bound object lies in its parameter's type.
    pub fn respects_types(&self, problem: &Problem) -> bool {
        let s = problem.action(self.action);
        s.params.len() == self.args.len()
            && s
                .params
                .iter()
                .zip(&self.args)
                .all(|(p, o)| problem.types.contains(p.ty, *o))
    }
}

/// `(s \ del) ∪ add`.
pub fn apply(problem: &Problem, state: &State, action: &GroundAction) -> State {
    let mut next = state.clone();
    for f in action.del(problem) {
        next.remove(&f);
    }
    for f in action.add(problem) {
        next.insert(f);
    }
    next
}

pub fn goal_reached(problem: &Problem, state: &State) -> bool {
    problem.goal.iter().all(|g| state.contains(g))
}

/// All ground actions applicable in `state`, ordered by action then binding.
///
/// Parameters are bound by joining the preconditions against the state;
/// parameters not mentioned in any precondition range over their type.
pub fn applicable_actions(problem: &Problem, state: &State) -> Vec<GroundAction> {
    let mut out = Vec::new();
    for a in problem.action_ids() {
        let schema = problem.action(a);
        let mut binding: Vec<Option<ObjId>> = vec![None; schema.params.len()];
        bind_preconditions(problem, state, a, 0, &mut binding, &mut out);
    }
    out
}

fn bind_preconditions(
    problem: &Problem,
    state: &State,
    a: ActionId,
    next_prec: usize,
    binding: &mut Vec<Option<ObjId>>,
    out: &mut Vec<GroundAction>,
) {
    let schema = problem.action(a);
    if next_prec == schema.prec.len() {
        bind_free(problem, a, 0, binding, out);
        return;
    }
    let atom = &schema.prec[next_prec];
    let lo = Fact::new(atom.pred, Vec::new());
    for f in state.range(lo..) {
        if f.pred != atom.pred {
            break;
        }
        let saved = binding.clone();
        let mut ok = true;
        for (t, o) in atom.args.iter().zip(&f.args) {
            match *t {
                Term::Obj(c) => ok &= c == *o,
                Term::Param(i) => match binding[i] {
                    Some(b) => ok &= b == *o,
                    None => {
                        if problem.types.contains(schema.params[i].ty, *o) {
                            binding[i] = Some(*o);
                        } else {
                            ok = false;
                        }
                    }
                },
            }
            if !ok {
                break;
            }
        }
        if ok {
            bind_preconditions(problem, state, a, next_prec + 1, binding, out);
        }
        *binding = saved;
    }
}

fn bind_free(
    problem: &Problem,
    a: ActionId,
    i: usize,
    binding: &mut Vec<Option<ObjId>>,
    out: &mut Vec<GroundAction>,
) {
    let schema = problem.action(a);
    if i == binding.len() {
        out.push(GroundAction { action: a, args: binding.iter().map(|b| b.unwrap()).collect() });
        return;
    }
    if binding[i].is_some() {
        bind_free(problem, a, i + 1, binding, out);
        return;
    }
    for o in problem.types.member_ids(schema.params[i].ty) {
        binding[i] = Some(o);
        bind_free(problem, a, i + 1, binding, out);
    }
    binding[i] = None;
}
