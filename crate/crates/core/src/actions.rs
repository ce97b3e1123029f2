//! Lifted action layer: unified argument slots and the per-step clauses that
//! select one action and its arguments.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::cnf::{CnfFormula, Lit, VarKey};
use crate::pddl::{ActionId, Atom, GroundAction, ObjId, PredId, Problem, Term, TypeId};

/// Type-indexed argument slots shared by all action schemas.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UnifiedArgs {
    slots: Vec<TypeId>,
    /// `map[a][i]` is the slot of parameter `i` of action `a`.
    map: Vec<Vec<u32>>,
}

impl UnifiedArgs {
    /// One slot group per parameter type, ordered by first appearance; a
    /// group has as many slots as the action with the most parameters of that
    /// type. Parameters take the slots of their type in declaration order.
    pub fn compute(problem: &Problem) -> Self {
        let mut order: Vec<TypeId> = Vec::new();
        let mut count: BTreeMap<TypeId, usize> = BTreeMap::new();
        for a in &problem.actions {
            let mut here: BTreeMap<TypeId, usize> = BTreeMap::new();
            for p in &a.params {
                if !order.contains(&p.ty) {
                    order.push(p.ty);
                }
                *here.entry(p.ty).or_default() += 1;
            }
            for (t, n) in here {
                let c = count.entry(t).or_default();
                *c = (*c).max(n);
            }
        }
        let mut slots = Vec::new();
        let mut first: BTreeMap<TypeId, u32> = BTreeMap::new();
        for t in &order {
            first.insert(*t, slots.len() as u32);
            slots.extend(std::iter::repeat_n(*t, count[t]));
        }
        let map = problem
            .actions
            .iter()
            .map(|a| {
                let mut used: BTreeMap<TypeId, u32> = BTreeMap::new();
                a.params
                    .iter()
                    .map(|p| {
                        let k = used.entry(p.ty).or_default();
                        let s = first[&p.ty] + *k;
                        *k += 1;
                        s
                    })
                    .collect()
            })
            .collect();
        UnifiedArgs { slots, map }
    }

    /// Builds a layout from explicit slot types and parameter mappings. Each
    /// parameter must map to a distinct slot whose type contains the
    /// parameter's type.
    pub fn with_layout(problem: &Problem, slots: Vec<TypeId>, map: Vec<Vec<u32>>) -> Result<Self, String> {
        if map.len() != problem.actions.len() {
            return Err("one mapping per action required".into());
        }
        for (a, m) in problem.actions.iter().zip(&map) {
            if m.len() != a.params.len() {
                return Err(format!("action {} maps {} of {} parameters", a.name, m.len(), a.params.len()));
            }
            let distinct: BTreeSet<_> = m.iter().collect();
            if distinct.len() != m.len() {
                return Err(format!("action {} maps two parameters to one slot", a.name));
            }
            for (p, s) in a.params.iter().zip(m) {
                let st = *slots.get(*s as usize).ok_or("slot out of range")?;
                if !problem.types.is_subtype(p.ty, st) {
                    return Err(format!(
                        "parameter {} of {} does not fit slot {s} of type {}",
                        p.name,
                        a.name,
                        problem.types.name(st)
                    ));
                }
            }
        }
        Ok(UnifiedArgs { slots, map })
    }

    pub fn num_slots(&self) -> usize {
        self.slots.len()
    }

    pub fn slot_type(&self, slot: u32) -> TypeId {
        self.slots[slot as usize]
    }

    pub fn slot_types(&self) -> &[TypeId] {
        &self.slots
    }

    pub fn slot_of(&self, action: ActionId, param: usize) -> u32 {
        self.map[action.index()][param]
    }

    pub fn action_slots(&self, action: ActionId) -> &[u32] {
        &self.map[action.index()]
    }

    /// Runs of equal slot types, e.g. `[(vehicle, 1), (location, 2), (package, 1)]`.
    pub fn type_counts(&self) -> Vec<(TypeId, usize)> {
        let mut out: Vec<(TypeId, usize)> = Vec::new();
        for t in &self.slots {
            match out.last_mut() {
                Some((lt, n)) if lt == t => *n += 1,
                _ => out.push((*t, 1)),
            }
        }
        out
    }

    pub fn display<'a>(&'a self, problem: &'a Problem) -> impl fmt::Display + 'a {
        struct D<'a>(&'a UnifiedArgs, &'a Problem);
        impl fmt::Display for D<'_> {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                let parts: Vec<String> = self
                    .0
                    .type_counts()
                    .into_iter()
                    .map(|(t, n)| format!("{}x{n}", self.1.types.name(t)))
                    .collect();
                write!(f, "[{}]", parts.join(", "))
            }
        }
        D(self, problem)
    }
}

pub fn action_var(f: &mut CnfFormula, action: ActionId, step: u32) -> Lit {
    f.var(VarKey::Action { action, step }).pos()
}

pub fn arg_var(f: &mut CnfFormula, slot: u32, obj: ObjId, step: u32) -> Lit {
    f.var(VarKey::ArgEq { slot, obj, step }).pos()
}

/// How static predicates are handled. A static predicate occurring in a
/// precondition with three or more distinct parameters is demoted: it keeps
/// per-argument filtering here but is also encoded as ordinary state.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StaticHandling {
    in_layer: Vec<bool>,
    demoted: Vec<bool>,
}

impl StaticHandling {
    pub fn compute(problem: &Problem) -> Self {
        let mut demoted = vec![false; problem.predicates.len()];
        for a in &problem.actions {
            for atom in &a.prec {
                if problem.predicate(atom.pred).is_static && distinct_params(atom).len() >= 3 {
                    demoted[atom.pred.index()] = true;
                }
            }
        }
        let in_layer = problem
            .predicates
            .iter()
            .zip(&demoted)
            .map(|(p, d)| p.is_static && !d)
            .collect();
        StaticHandling { in_layer, demoted }
    }

    /// Static and fully handled by the action layer; no state variables.
    pub fn in_layer(&self, p: PredId) -> bool {
        self.in_layer[p.index()]
    }

    pub fn demoted(&self, p: PredId) -> bool {
        self.demoted[p.index()]
    }
}

fn distinct_params(atom: &Atom) -> Vec<usize> {
    let mut out = Vec::new();
    for t in &atom.args {
        if let Term::Param(i) = *t {
            if !out.contains(&i) {
                out.push(i);
            }
        }
    }
    out
}

/// Allocates the action and argument variables of step `t` and emits the
/// selection constraints.
pub fn encode_action_step(f: &mut CnfFormula, t: u32, problem: &Problem, ua: &UnifiedArgs) {
    let acts: Vec<Lit> = problem.action_ids().map(|a| action_var(f, a, t)).collect();
    let mut slot_vars: Vec<Vec<Lit>> = Vec::with_capacity(ua.num_slots());
    for s in 0..ua.num_slots() as u32 {
        let vars = problem
            .types
            .member_ids(ua.slot_type(s))
            .map(|o| arg_var(f, s, o, t))
            .collect();
        slot_vars.push(vars);
    }
    f.at_most_one(&acts, t);
    for vars in &slot_vars {
        f.at_most_one(vars, t);
    }
    for a in problem.action_ids() {
        let schema = problem.action(a);
        let av = acts[a.index()];
        for (i, p) in schema.params.iter().enumerate() {
            let s = ua.slot_of(a, i);
            let mut clause = vec![!av];
            for o in problem.types.member_ids(ua.slot_type(s)) {
                let x = arg_var(f, s, o, t);
                if problem.types.contains(p.ty, o) {
                    clause.push(x);
                } else {
                    f.add_clause(&[!av, !x]);
                }
            }
            f.add_clause(&clause);
        }
    }
}

/// Init facts matching `atom`, as bindings of its distinct parameters.
fn static_support(problem: &Problem, action: ActionId, atom: &Atom) -> Vec<Vec<ObjId>> {
    let schema = problem.action(action);
    let params = distinct_params(atom);
    let mut rows = Vec::new();
    for fact in problem.init.iter().filter(|f| f.pred == atom.pred) {
        let mut binding: Vec<Option<ObjId>> = vec![None; params.len()];
        let mut ok = true;
        for (term, o) in atom.args.iter().zip(&fact.args) {
            match *term {
                Term::Obj(c) => ok &= c == *o,
                Term::Param(i) => {
                    let k = params.iter().position(|x| *x == i).unwrap();
                    ok &= problem.types.contains(schema.params[i].ty, *o);
                    match binding[k] {
                        Some(b) => ok &= b == *o,
                        None => binding[k] = Some(*o),
                    }
                }
            }
        }
        if ok {
            rows.push(binding.into_iter().map(|b| b.unwrap()).collect());
        }
    }
    rows
}

/// Clauses restricting arguments to tuples that satisfy static preconditions.
pub fn encode_static_preconditions(
    f: &mut CnfFormula,
    t: u32,
    problem: &Problem,
    ua: &UnifiedArgs,
    statics: &StaticHandling,
) {
    for a in problem.action_ids() {
        let schema = problem.action(a);
        for atom in &schema.prec {
            if !problem.predicate(atom.pred).is_static {
                continue;
            }
            let av = action_var(f, a, t);
            let params = distinct_params(atom);
            let rows = static_support(problem, a, atom);
            if params.is_empty() {
                if rows.is_empty() {
                    f.add_clause(&[!av]);
                }
                continue;
            }
            for (k, &p) in params.iter().enumerate() {
                let seen: BTreeSet<ObjId> = rows.iter().map(|r| r[k]).collect();
                let s = ua.slot_of(a, p);
                for o in problem.types.member_ids(schema.params[p].ty) {
                    if !seen.contains(&o) {
                        let x = arg_var(f, s, o, t);
                        f.add_clause(&[!av, !x]);
                    }
                }
            }
            if params.len() == 2 && statics.in_layer(atom.pred) {
                let (s1, s2) = (ua.slot_of(a, params[0]), ua.slot_of(a, params[1]));
                let mut partners: BTreeMap<ObjId, BTreeSet<ObjId>> = BTreeMap::new();
                for r in &rows {
                    partners.entry(r[0]).or_default().insert(r[1]);
                }
                for (o, others) in partners {
                    let mut clause = vec![!av, !arg_var(f, s1, o, t)];
                    for o2 in others {
                        clause.push(arg_var(f, s2, o2, t));
                    }
                    f.add_clause(&clause);
                }
            }
        }
    }
}

/// Actions at step `t` require some action at `t − 1`.
pub fn encode_compactness(f: &mut CnfFormula, t: u32, problem: &Problem) {
    if t < 2 {
        return;
    }
    let prev: Vec<Lit> = problem.action_ids().map(|b| action_var(f, b, t - 1)).collect();
    for a in problem.action_ids() {
        let mut clause = vec![!action_var(f, a, t)];
        clause.extend_from_slice(&prev);
        f.add_clause(&clause);
    }
}

/// Everything the action layer contributes to step `t`.
pub fn encode_step(f: &mut CnfFormula, t: u32, problem: &Problem, ua: &UnifiedArgs, statics: &StaticHandling) {
    encode_action_step(f, t, problem, ua);
    encode_static_preconditions(f, t, problem, ua, statics);
    encode_compactness(f, t, problem);
}

/// Errors raised when a model does not describe a well-formed plan.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ExtractError {
    #[error("step {step}: {action} selected but slot {slot} has no object")]
    UnassignedSlot { step: u32, action: String, slot: u32 },
    #[error("step {step}: more than one action selected")]
    TwoActions { step: u32 },
    #[error("step {step}: action after an empty step")]
    Gap { step: u32 },
}

/// Reads the selected action and arguments of steps `1..=length` from a
/// model. Empty steps are skipped; they may only form a suffix.
pub fn extract_plan(
    model: &dyn Fn(&VarKey) -> bool,
    problem: &Problem,
    ua: &UnifiedArgs,
    length: u32,
) -> Result<Vec<GroundAction>, ExtractError> {
    let mut plan = Vec::new();
    let mut gap = false;
    for t in 1..=length {
        let chosen: Vec<ActionId> = problem
            .action_ids()
            .filter(|a| model(&VarKey::Action { action: *a, step: t }))
            .collect();
        match chosen.as_slice() {
            [] => gap = true,
            [a] => {
                if gap {
                    return Err(ExtractError::Gap { step: t });
                }
                let schema = problem.action(*a);
                let mut args = Vec::with_capacity(schema.params.len());
                for (i, p) in schema.params.iter().enumerate() {
                    let slot = ua.slot_of(*a, i);
                    let o = problem
                        .types
                        .member_ids(p.ty)
                        .find(|o| model(&VarKey::ArgEq { slot, obj: *o, step: t }))
                        .ok_or_else(|| ExtractError::UnassignedSlot {
                            step: t,
                            action: schema.name.clone(),
                            slot,
                        })?;
                    args.push(o);
                }
                plan.push(GroundAction { action: *a, args });
            }
            _ => return Err(ExtractError::TwoActions { step: t }),
        }
    }
    Ok(plan)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pddl::parse;

    const DOMAIN: &str = "(define (domain t) (:requirements :strips :typing)
      (:types a b)
      (:predicates (p ?x - a) (q ?x - a ?y - a) (r ?x - a))
      (:action two :parameters (?x - a ?y - a) :precondition (and (q ?x ?y) (r ?x)) :effect (and (p ?x)))
      (:action one :parameters (?z - a) :precondition (and (r ?z)) :effect (and (not (p ?z))))
      (:action other :parameters (?w - b) :precondition (and) :effect (and)))";

    fn problem() -> Problem {
        parse(
            DOMAIN,
            "(define (problem t1) (:domain t) (:objects a1 a2 a3 - a) (:init (q a1 a2) (q a1 a3) (r a1)) (:goal (and)))",
        )
        .unwrap()
    }

    #[test]
    fn slots_take_the_maximum_per_type() {
        let p = problem();
        let ua = UnifiedArgs::compute(&p);
        assert_eq!(ua.display(&p).to_string(), "[ax2, bx1]");
        assert_eq!(ua.slot_of(p.action_id("one").unwrap(), 0), 0);
        assert_eq!(ua.slot_of(p.action_id("two").unwrap(), 1), 1);
    }

    #[test]
    fn empty_type_makes_action_unselectable() {
        let p = problem();
        let ua = UnifiedArgs::compute(&p);
        let mut f = CnfFormula::new();
        encode_action_step(&mut f, 1, &p, &ua);
        let other = f.lookup(&VarKey::Action { action: p.action_id("other").unwrap(), step: 1 }).unwrap();
        assert!(f.contains_clause(&[other.neg()]));
    }

    #[test]
    fn static_filters_and_completion() {
        let p = problem();
        let ua = UnifiedArgs::compute(&p);
        let statics = StaticHandling::compute(&p);
        let mut f = CnfFormula::new();
        encode_action_step(&mut f, 1, &p, &ua);
        encode_static_preconditions(&mut f, 1, &p, &ua, &statics);
        let two = action_var(&mut f, p.action_id("two").unwrap(), 1);
        let (a1, a2, a3) = (p.object_id("a1").unwrap(), p.object_id("a2").unwrap(), p.object_id("a3").unwrap());
        let x = |f: &mut CnfFormula, s, o| arg_var(f, s, o, 1);
        // q never has a2 or a3 first, never a1 second
        let c = [!two, !x(&mut f, 0, a2)];
        assert!(f.contains_clause(&c));
        let c = [!two, !x(&mut f, 1, a1)];
        assert!(f.contains_clause(&c));
        let c = [!two, !x(&mut f, 0, a1), x(&mut f, 1, a2), x(&mut f, 1, a3)];
        assert!(f.contains_clause(&c));
        let one = action_var(&mut f, p.action_id("one").unwrap(), 1);
        let c = [!one, !x(&mut f, 0, a3)];
        assert!(f.contains_clause(&c));
    }

    #[test]
    fn compactness_only_from_step_two() {
        let p = problem();
        let mut f = CnfFormula::new();
        encode_compactness(&mut f, 1, &p);
        assert_eq!(f.num_clauses(), 0);
        encode_compactness(&mut f, 2, &p);
        assert_eq!(f.num_clauses(), 3);
        assert!(f.clauses().all(|c| c.len() == 4));
    }
}
