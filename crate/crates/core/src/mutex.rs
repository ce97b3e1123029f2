//! Lifted mutex groups: candidate generation, a lifted fact-alternation
//! check, exactly-one classification and instantiation into partially lifted
//! groups.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;

use crate::pddl::{ActionId, Atom, Fact, ObjId, PredId, Problem, Term, TypeId};
use crate::search::StateSpace;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Role {
    Fixed,
    Counted,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LmgVar {
    pub ty: TypeId,
    pub role: Role,
}

/// A group atom; `args` index into the candidate's variables.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LmgAtom {
    pub pred: PredId,
    pub args: Vec<usize>,
}

/// `⟨fix, cnt, atoms⟩`. Atoms have pairwise distinct predicates, every atom
/// mentions every fixed variable, and no atom mentions a variable twice.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LmgCandidate {
    pub vars: Vec<LmgVar>,
    pub atoms: Vec<LmgAtom>,
    /// Set by [`classify_candidate`]; instantiated groups additionally need
    /// exactly one initial fact.
    pub exactly_one: bool,
}

impl LmgCandidate {
    pub fn fixed(&self) -> Vec<usize> {
        (0..self.vars.len()).filter(|&i| self.vars[i].role == Role::Fixed).collect()
    }

    pub fn counted(&self) -> Vec<usize> {
        (0..self.vars.len()).filter(|&i| self.vars[i].role == Role::Counted).collect()
    }

    pub fn predicates(&self) -> impl Iterator<Item = PredId> + '_ {
        self.atoms.iter().map(|a| a.pred)
    }

    /// Same group up to variable renaming and atom order.
    fn canonical(&self) -> (Vec<LmgVar>, Vec<LmgAtom>) {
        let mut atoms = self.atoms.clone();
        atoms.sort_by_key(|a| a.pred);
        let mut rename: Vec<Option<usize>> = vec![None; self.vars.len()];
        let mut vars = Vec::new();
        for a in &mut atoms {
            for v in &mut a.args {
                let r = *rename[*v].get_or_insert_with(|| {
                    vars.push(self.vars[*v]);
                    vars.len() - 1
                });
                *v = r;
            }
        }
        (vars, atoms)
    }

    pub fn display<'a>(&'a self, problem: &'a Problem) -> impl fmt::Display + 'a {
        struct D<'a>(&'a LmgCandidate, &'a Problem);
        impl fmt::Display for D<'_> {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                let (c, p) = (self.0, self.1);
                let names = var_names(c, p);
                let list = |role: Role| -> String {
                    (0..c.vars.len())
                        .filter(|&i| c.vars[i].role == role)
                        .map(|i| format!("{} - {}", names[i], p.types.name(c.vars[i].ty)))
                        .collect::<Vec<_>>()
                        .join(", ")
                };
                let atoms: Vec<String> = c
                    .atoms
                    .iter()
                    .map(|a| {
                        let args: Vec<&str> = a.args.iter().map(|v| names[*v].as_str()).collect();
                        format!("{}({})", p.predicate(a.pred).name, args.join(", "))
                    })
                    .collect();
                write!(f, "<{{{}}}, {{{}}}, {{{}}}>", list(Role::Fixed), list(Role::Counted), atoms.join(", "))
            }
        }
        D(self, problem)
    }
}

/// `?<type>` names, numbered when a type occurs more than once.
fn var_names(c: &LmgCandidate, problem: &Problem) -> Vec<String> {
    let mut seen: BTreeMap<TypeId, usize> = BTreeMap::new();
    let total: BTreeMap<TypeId, usize> = c.vars.iter().fold(BTreeMap::new(), |mut m, v| {
        *m.entry(v.ty).or_default() += 1;
        m
    });
    c.vars
        .iter()
        .map(|v| {
            let k = seen.entry(v.ty).or_default();
            *k += 1;
            let base = problem.types.name(v.ty);
            if total[&v.ty] > 1 {
                format!("?{base}{k}")
            } else {
                format!("?{base}")
            }
        })
        .collect()
}

/// Single-predicate candidates for every split of a predicate's parameters
/// into fixed and counted ones, with fixed parameters also narrowed to each
/// subtype of their declared type, followed by pairwise merges of those over
/// distinct predicates whose fixed variables correspond one-to-one with
/// compatible types. Duplicates are removed; order is deterministic.
pub fn generate_candidates(problem: &Problem) -> Vec<LmgCandidate> {
    let mut singles = Vec::new();
    for p in problem.pred_ids() {
        let schema = problem.predicate(p);
        let n = schema.arity();
        for mask in 0u32..(1 << n) {
            let fixed_pos: Vec<usize> = (0..n).filter(|i| mask & (1 << i) == 0).collect();
            let choices: Vec<Vec<TypeId>> = fixed_pos
                .iter()
                .map(|&i| problem.types.subtree(schema.param_types[i]))
                .collect();
            for combo in product(&choices) {
                let vars = (0..n)
                    .map(|i| match fixed_pos.iter().position(|&j| j == i) {
                        Some(k) => LmgVar { ty: combo[k], role: Role::Fixed },
                        None => LmgVar { ty: schema.param_types[i], role: Role::Counted },
                    })
                    .collect();
                singles.push(LmgCandidate {
                    vars,
                    atoms: vec![LmgAtom { pred: p, args: (0..n).collect() }],
                    exactly_one: false,
                });
            }
        }
    }
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for c in &singles {
        if seen.insert(c.canonical()) {
            out.push(c.clone());
        }
    }
    for i in 0..singles.len() {
        for j in i + 1..singles.len() {
            for m in merge(problem, &singles[i], &singles[j]) {
                if seen.insert(m.canonical()) {
                    out.push(m);
                }
            }
        }
    }
    out
}

fn product(choices: &[Vec<TypeId>]) -> Vec<Vec<TypeId>> {
    let mut out = vec![Vec::new()];
    for c in choices {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                c.iter().map(move |t| {
                    let mut v = prefix.clone();
                    v.push(*t);
                    v
                })
            })
            .collect();
    }
    out
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for k in 0..=p.len() {
            let mut q = p.clone();
            q.insert(k, n - 1);
            out.push(q);
        }
    }
    out
}

fn merge(problem: &Problem, a: &LmgCandidate, b: &LmgCandidate) -> Vec<LmgCandidate> {
    if a.atoms.iter().any(|x| b.atoms.iter().any(|y| x.pred == y.pred)) {
        return Vec::new();
    }
    let (fa, fb) = (a.fixed(), b.fixed());
    if fa.len() != fb.len() {
        return Vec::new();
    }
    let mut out = Vec::new();
    'perm: for perm in permutations(fa.len()) {
        let mut vars = a.vars.clone();
        for (k, &va) in fa.iter().enumerate() {
            let vb = fb[perm[k]];
            match problem.types.meet(a.vars[va].ty, b.vars[vb].ty) {
                Some(t) => vars[va].ty = t,
                None => continue 'perm,
            }
        }
        let mut map = vec![usize::MAX; b.vars.len()];
        for (k, &va) in fa.iter().enumerate() {
            map[fb[perm[k]]] = va;
        }
        for (i, v) in b.vars.iter().enumerate() {
            if v.role == Role::Counted {
                map[i] = vars.len();
                vars.push(*v);
            }
        }
        let mut atoms = a.atoms.clone();
        atoms.extend(b.atoms.iter().map(|x| LmgAtom {
            pred: x.pred,
            args: x.args.iter().map(|v| map[*v]).collect(),
        }));
        out.push(LmgCandidate { vars, atoms, exactly_one: false });
    }
    out
}

/// Objects an action term may denote.
fn term_range(problem: &Problem, action: ActionId, t: Term) -> std::ops::Range<u32> {
    match t {
        Term::Obj(o) => o.0..o.0 + 1,
        Term::Param(i) => problem.types.members(problem.action(action).params[i].ty),
    }
}

fn ranges_overlap(a: &std::ops::Range<u32>, b: &std::ops::Range<u32>) -> bool {
    a.start.max(b.start) < a.end.min(b.end)
}

fn term_may_fit(problem: &Problem, action: ActionId, t: Term, ty: TypeId) -> bool {
    ranges_overlap(&term_range(problem, action, t), &problem.types.members(ty))
}

fn term_must_fit(problem: &Problem, action: ActionId, t: Term, ty: TypeId) -> bool {
    let r = term_range(problem, action, t);
    let m = problem.types.members(ty);
    !r.is_empty() && m.start <= r.start && r.end <= m.end
}

fn terms_may_equal(problem: &Problem, action: ActionId, a: Term, b: Term) -> bool {
    a == b || ranges_overlap(&term_range(problem, action, a), &term_range(problem, action, b))
}

/// Binding of the candidate's fixed variables to action terms.
type FixedBinding = BTreeMap<usize, Term>;

/// If `effect` can ground to a fact of `atom`, the terms it puts at the fixed
/// positions.
fn unify(problem: &Problem, action: ActionId, c: &LmgCandidate, atom: &LmgAtom, effect: &Atom) -> Option<FixedBinding> {
    if atom.pred != effect.pred {
        return None;
    }
    let mut phi = FixedBinding::new();
    for (v, t) in atom.args.iter().zip(&effect.args) {
        if !term_may_fit(problem, action, *t, c.vars[*v].ty) {
            return None;
        }
        if c.vars[*v].role == Role::Fixed {
            phi.insert(*v, *t);
        }
    }
    Some(phi)
}

/// `effect` may ground to a group fact of the instantiation described by `phi`.
fn may_match(problem: &Problem, action: ActionId, c: &LmgCandidate, phi: &FixedBinding, effect: &Atom) -> bool {
    c.atoms.iter().any(|atom| {
        atom.pred == effect.pred
            && atom.args.iter().zip(&effect.args).all(|(v, t)| {
                term_may_fit(problem, action, *t, c.vars[*v].ty)
                    && match phi.get(v) {
                        Some(bound) => terms_may_equal(problem, action, *bound, *t),
                        None => true,
                    }
            })
    })
}

/// Every grounding of `effect` is a group fact of the instantiation
/// described by `phi`.
fn must_match(problem: &Problem, action: ActionId, c: &LmgCandidate, phi: &FixedBinding, effect: &Atom) -> bool {
    c.atoms.iter().any(|atom| {
        atom.pred == effect.pred
            && atom.args.iter().zip(&effect.args).all(|(v, t)| match phi.get(v) {
                Some(bound) => bound == t,
                None => term_must_fit(problem, action, *t, c.vars[*v].ty),
            })
    })
}

/// Facts of the group in `facts`, keyed by the objects at the fixed positions.
fn group_members<'a>(
    problem: &Problem,
    c: &LmgCandidate,
    facts: impl Iterator<Item = &'a Fact>,
) -> BTreeMap<Vec<ObjId>, usize> {
    let fixed = c.fixed();
    let mut count = BTreeMap::new();
    for f in facts {
        for atom in c.atoms.iter().filter(|a| a.pred == f.pred) {
            if atom.args.iter().zip(&f.args).all(|(v, o)| problem.types.contains(c.vars[*v].ty, *o)) {
                let key = fixed
                    .iter()
                    .map(|fv| f.args[atom.args.iter().position(|x| x == fv).unwrap()])
                    .collect();
                *count.entry(key).or_default() += 1;
            }
        }
    }
    count
}

fn well_formed(c: &LmgCandidate) -> bool {
    let fixed = c.fixed();
    let preds: BTreeSet<_> = c.predicates().collect();
    preds.len() == c.atoms.len()
        && c.atoms.iter().all(|a| {
            let distinct: BTreeSet<_> = a.args.iter().collect();
            distinct.len() == a.args.len() && fixed.iter().all(|f| a.args.contains(f))
        })
}

/// Lifted fact-alternation check. Sound: a `true` verdict means every
/// instantiation of the fixed variables is a mutex group in all reachable
/// states. Malformed candidates are rejected.
pub fn verify_fam(c: &LmgCandidate, problem: &Problem) -> bool {
    if !well_formed(c) {
        return false;
    }
    if group_members(problem, c, problem.init.iter()).values().any(|&n| n > 1) {
        return false;
    }
    for a in problem.action_ids() {
        let schema = problem.action(a);
        let prec_del: Vec<&Atom> = schema.del.iter().filter(|d| schema.prec.contains(d)).collect();
        for e in &schema.add {
            for atom in &c.atoms {
                let Some(phi) = unify(problem, a, c, atom, e) else { continue };
                let adds = schema.add.iter().filter(|x| may_match(problem, a, c, &phi, x)).count();
                let dels = usize::from(prec_del.iter().any(|d| must_match(problem, a, c, &phi, d)));
                if adds > dels {
                    return false;
                }
            }
        }
    }
    true
}

/// Lifted part of the exactly-one test: every action that may delete a
/// group fact certainly adds one of the same instantiation.
pub fn classify_candidate(c: &LmgCandidate, problem: &Problem) -> bool {
    for a in problem.action_ids() {
        let schema = problem.action(a);
        for d in &schema.del {
            for atom in &c.atoms {
                let Some(phi) = unify(problem, a, c, atom, d) else { continue };
                if !schema.add.iter().any(|x| must_match(problem, a, c, &phi, x)) {
                    return false;
                }
            }
        }
    }
    true
}

/// Generates candidates and keeps the verified ones, with their lifted
/// exactly-one flag set.
pub fn infer_groups(problem: &Problem) -> Vec<LmgCandidate> {
    generate_candidates(problem)
        .into_iter()
        .filter(|c| verify_fam(c, problem))
        .map(|mut c| {
            c.exactly_one = classify_candidate(&c, problem);
            c
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PlmgArg {
    Obj(ObjId),
    /// Index into [`Plmg::cnt`].
    Cnt(usize),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PlmgAtom {
    pub pred: PredId,
    pub args: Vec<PlmgArg>,
}

/// A mutex group with its fixed variables instantiated.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Plmg {
    /// Index of the candidate this group was instantiated from.
    pub source: usize,
    /// Objects of the fixed variables, in the candidate's order.
    pub fixed: Vec<ObjId>,
    /// Types of the counted variables.
    pub cnt: Vec<TypeId>,
    pub atoms: Vec<PlmgAtom>,
    pub exactly_one: bool,
    /// All ground facts of the group, sorted.
    pub facts: Vec<Fact>,
}

impl Plmg {
    /// The atom whose groundings include `f`, with the counted values it binds.
    pub fn match_fact(&self, problem: &Problem, f: &Fact) -> Option<(usize, Vec<(usize, ObjId)>)> {
        for (i, atom) in self.atoms.iter().enumerate() {
            if atom.pred != f.pred {
                continue;
            }
            let mut binding = Vec::new();
            let ok = atom.args.iter().zip(&f.args).all(|(a, o)| match *a {
                PlmgArg::Obj(x) => x == *o,
                PlmgArg::Cnt(c) => {
                    binding.push((c, *o));
                    problem.types.contains(self.cnt[c], *o)
                }
            });
            if ok {
                return Some((i, binding));
            }
        }
        None
    }

    pub fn contains(&self, f: &Fact) -> bool {
        self.facts.binary_search(f).is_ok()
    }

    /// `EO|AMO  fixed-binding  {atoms}  |F(M)|`.
    pub fn dump_line(&self, problem: &Problem, candidate: &LmgCandidate) -> String {
        let names = var_names(candidate, problem);
        let fixed: Vec<String> = candidate
            .fixed()
            .iter()
            .zip(&self.fixed)
            .map(|(v, o)| format!("{}={}", names[*v], problem.object(*o).name))
            .collect();
        let cnt_names: Vec<&str> = candidate.counted().iter().map(|v| names[*v].as_str()).collect();
        let atoms: Vec<String> = self
            .atoms
            .iter()
            .map(|a| {
                let args: Vec<&str> = a
                    .args
                    .iter()
                    .map(|x| match *x {
                        PlmgArg::Obj(o) => problem.object(o).name.as_str(),
                        PlmgArg::Cnt(c) => cnt_names[c],
                    })
                    .collect();
                format!("{}({})", problem.predicate(a.pred).name, args.join(", "))
            })
            .collect();
        format!(
            "{}  {}  {{{}}}  {}",
            if self.exactly_one { "EO" } else { "AMO" },
            if fixed.is_empty() { "-".to_string() } else { fixed.join(",") },
            atoms.join(", "),
            self.facts.len()
        )
    }
}

/// One group per assignment of the fixed variables. `source` is recorded in
/// each group. Exactly-one requires the candidate's lifted flag and exactly
/// one initial fact in the group.
pub fn instantiate(c: &LmgCandidate, source: usize, problem: &Problem) -> Vec<Plmg> {
    let fixed = c.fixed();
    let counted = c.counted();
    let choices: Vec<Vec<ObjId>> = fixed.iter().map(|v| problem.types.member_ids(c.vars[*v].ty).collect()).collect();
    let mut assignments = vec![Vec::new()];
    for ch in &choices {
        assignments = assignments
            .into_iter()
            .flat_map(|p: Vec<ObjId>| {
                ch.iter().map(move |o| {
                    let mut v = p.clone();
                    v.push(*o);
                    v
                })
            })
            .collect();
    }
    assignments
        .into_iter()
        .map(|objs| {
            let atoms: Vec<PlmgAtom> = c
                .atoms
                .iter()
                .map(|a| PlmgAtom {
                    pred: a.pred,
                    args: a
                        .args
                        .iter()
                        .map(|v| match fixed.iter().position(|f| f == v) {
                            Some(k) => PlmgArg::Obj(objs[k]),
                            None => PlmgArg::Cnt(counted.iter().position(|x| x == v).unwrap()),
                        })
                        .collect(),
                })
                .collect();
            let mut cnt: Vec<TypeId> = counted.iter().map(|v| c.vars[*v].ty).collect();
            let (atoms, kept) = drop_empty_atoms(problem, atoms, &cnt);
            cnt = kept.iter().map(|k| cnt[*k]).collect();
            let mut facts = Vec::new();
            for a in &atoms {
                ground_atom(problem, a, &cnt, &mut facts);
            }
            facts.sort();
            facts.dedup();
            let init = facts.iter().filter(|f| problem.is_init(f)).count();
            Plmg {
                source,
                fixed: objs,
                cnt,
                atoms,
                exactly_one: c.exactly_one && init == 1,
                facts,
            }
        })
        .collect()
}

/// Removes atoms with a counted variable of an empty type, then counted
/// variables no remaining atom uses. Returns the atoms with renumbered
/// counted variables and the old indices of the kept ones.
fn drop_empty_atoms(problem: &Problem, atoms: Vec<PlmgAtom>, cnt: &[TypeId]) -> (Vec<PlmgAtom>, Vec<usize>) {
    let atoms: Vec<PlmgAtom> = atoms
        .into_iter()
        .filter(|a| a.args.iter().all(|x| !matches!(x, PlmgArg::Cnt(c) if problem.types.size(cnt[*c]) == 0)))
        .collect();
    let kept: Vec<usize> = (0..cnt.len())
        .filter(|c| atoms.iter().any(|a| a.args.contains(&PlmgArg::Cnt(*c))))
        .collect();
    let atoms = atoms
        .into_iter()
        .map(|a| PlmgAtom {
            pred: a.pred,
            args: a
                .args
                .into_iter()
                .map(|x| match x {
                    PlmgArg::Cnt(c) => PlmgArg::Cnt(kept.iter().position(|k| *k == c).unwrap()),
                    o => o,
                })
                .collect(),
        })
        .collect();
    (atoms, kept)
}

fn ground_atom(problem: &Problem, atom: &PlmgAtom, cnt: &[TypeId], out: &mut Vec<Fact>) {
    let mut args: Vec<ObjId> = Vec::with_capacity(atom.args.len());
    fn rec(problem: &Problem, atom: &PlmgAtom, cnt: &[TypeId], args: &mut Vec<ObjId>, out: &mut Vec<Fact>) {
        let k = args.len();
        if k == atom.args.len() {
            out.push(Fact::new(atom.pred, args.clone()));
            return;
        }
        match atom.args[k] {
            PlmgArg::Obj(o) => {
                args.push(o);
                rec(problem, atom, cnt, args, out);
                args.pop();
            }
            PlmgArg::Cnt(c) => {
                for o in problem.types.member_ids(cnt[c]) {
                    args.push(o);
                    rec(problem, atom, cnt, args, out);
                    args.pop();
                }
            }
        }
    }
    rec(problem, atom, cnt, &mut args, out);
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ViolationKind {
    /// Two or more group facts hold.
    TooMany,
    /// An exactly-one group has no true fact.
    NoneTrue,
    /// A state with no true group fact leads to one with a true fact.
    Revived,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MutexVerdict {
    Holds,
    Violated { state: Vec<Fact>, kind: ViolationKind },
    Inconclusive,
}

/// Checks a group against every reachable state, exploring at most
/// `state_cap` states.
pub fn verify_mutex_exhaustive(plmg: &Plmg, problem: &Problem, state_cap: usize) -> MutexVerdict {
    check_mutex(plmg, &StateSpace::explore(problem, state_cap))
}

/// As [`verify_mutex_exhaustive`] over an already explored state space.
/// Violations are reported even for partial spaces.
pub fn check_mutex(plmg: &Plmg, space: &StateSpace) -> MutexVerdict {
    let counts: Vec<usize> = space
        .states
        .iter()
        .map(|s| plmg.facts.iter().filter(|f| s.contains(*f)).count())
        .collect();
    for (i, &n) in counts.iter().enumerate() {
        let kind = if n > 1 {
            Some(ViolationKind::TooMany)
        } else if n == 0 && plmg.exactly_one {
            Some(ViolationKind::NoneTrue)
        } else if n == 0
            && space.successors.get(i).is_some_and(|succ| succ.iter().any(|&j| counts[j] > 0))
        {
            Some(ViolationKind::Revived)
        } else {
            None
        };
        if let Some(kind) = kind {
            return MutexVerdict::Violated { state: space.states[i].iter().cloned().collect(), kind };
        }
    }
    if space.complete {
        MutexVerdict::Holds
    } else {
        MutexVerdict::Inconclusive
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pddl::parse;

    const TRANSPORT: &str = "(define (domain transport) (:requirements :strips :typing)
      (:types location locatable - object vehicle package - locatable)
      (:predicates (road ?l1 ?l2 - location) (at ?x - locatable ?l - location)
                   (in ?p - package ?v - vehicle))
      (:action drive :parameters (?v - vehicle ?l1 ?l2 - location)
        :precondition (and (at ?v ?l1) (road ?l1 ?l2))
        :effect (and (not (at ?v ?l1)) (at ?v ?l2)))
      (:action drop :parameters (?v - vehicle ?l - location ?p - package)
        :precondition (and (at ?v ?l) (in ?p ?v))
        :effect (and (not (in ?p ?v)) (at ?p ?l)))
      (:action pickup :parameters (?v - vehicle ?l - location ?p - package)
        :precondition (and (at ?v ?l) (at ?p ?l))
        :effect (and (not (at ?p ?l)) (in ?p ?v))))";

    fn transport(objects: &str, init: &str) -> Problem {
        parse(
            TRANSPORT,
            &format!("(define (problem t) (:domain transport) (:objects {objects}) (:init {init}) (:goal (and)))"),
        )
        .unwrap()
    }

    fn tiny() -> Problem {
        transport("v - vehicle p - package l - location", "(at v l) (in p v)")
    }

    fn find(cands: &[LmgCandidate], p: &Problem, text: &str) -> Option<LmgCandidate> {
        cands.iter().find(|c| c.display(p).to_string() == text).cloned()
    }

    #[test]
    fn single_predicate_splits() {
        let p = tiny();
        let cands = generate_candidates(&p);
        assert!(find(&cands, &p, "<{?locatable - locatable}, {?location - location}, {at(?locatable, ?location)}>").is_some());
        assert!(find(&cands, &p, "<{?location - location}, {?locatable - locatable}, {at(?locatable, ?location)}>").is_some());
        assert!(find(&cands, &p, "<{?vehicle - vehicle}, {?location - location}, {at(?vehicle, ?location)}>").is_some());
    }

    #[test]
    fn package_group_verifies_and_is_exactly_one() {
        let p = tiny();
        let cands = generate_candidates(&p);
        let text = "<{?package - package}, {?location - location, ?vehicle - vehicle}, {at(?package, ?location), in(?package, ?vehicle)}>";
        let c = find(&cands, &p, text).expect("merged package group");
        assert!(verify_fam(&c, &p));
        assert!(classify_candidate(&c, &p));
        let mut c = c;
        c.exactly_one = true;
        let groups = instantiate(&c, 0, &p);
        assert_eq!(groups.len(), 1);
        assert!(groups[0].exactly_one);
        assert_eq!(groups[0].dump_line(&p, &c), "EO  ?package=p  {at(p, ?location), in(p, ?vehicle)}  2");
        assert_eq!(verify_mutex_exhaustive(&groups[0], &p, 1000), MutexVerdict::Holds);
    }

    #[test]
    fn unbalanced_groups_fail() {
        let p = tiny();
        let cands = generate_candidates(&p);
        let at_pkg = find(&cands, &p, "<{?package - package}, {?location - location}, {at(?package, ?location)}>").unwrap();
        assert!(!verify_fam(&at_pkg, &p));
        let all_at = find(&cands, &p, "<{}, {?locatable - locatable, ?location - location}, {at(?locatable, ?location)}>").unwrap();
        let two = transport("v - vehicle p q - package l - location", "(at v l) (at p l) (at q l)");
        assert!(!verify_fam(&all_at, &two));
    }

    #[test]
    fn static_group_with_single_init_fact() {
        let p = transport("v - vehicle p - package a b - location", "(at v a) (in p v) (road a b)");
        let cands = generate_candidates(&p);
        let road = find(&cands, &p, "<{?location1 - location}, {?location2 - location}, {road(?location1, ?location2)}>").unwrap();
        assert!(verify_fam(&road, &p));
    }

    #[test]
    fn exhaustive_check_finds_violation() {
        let p = tiny();
        let wrong = Plmg {
            source: 0,
            fixed: vec![],
            cnt: vec![],
            atoms: vec![],
            exactly_one: false,
            facts: vec![p.fact("at", &["v", "l"]), p.fact("in", &["p", "v"])],
        };
        match verify_mutex_exhaustive(&wrong, &p, 100) {
            MutexVerdict::Violated { kind: ViolationKind::TooMany, state } => assert_eq!(state, p.init),
            other => panic!("{other:?}"),
        }
        assert_eq!(verify_mutex_exhaustive(&wrong, &p, 0), MutexVerdict::Inconclusive);
    }
}
