//! The three state encodings. All share the lifted action layer; they differ
//! in how the state of each layer is represented:
//!
//! * `Ground`: one variable per state fact.
//! * `Plmg`: selected mutex groups with one-hot counted values, remaining
//!   facts ground.
//! * `Binary`: as `Plmg`, with counted values stored as bit vectors.
//!
//! States are numbered `0..=L` and actions `1..=L`; the action of step `t`
//! reads layer `t − 1` and writes layer `t`.

mod binary;
mod ground;
mod plmg;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::actions::{self, ExtractError, StaticHandling, UnifiedArgs};
use crate::cnf::{CnfFormula, EffectRef, Side, VarKey, PAIRWISE_AMO_LIMIT};
use crate::cover::{empty_cover, select_cover, CoverResult};
use crate::mutex::{infer_groups, LmgCandidate, PlmgArg};
use crate::pddl::{atom_groundings, ActionId, Atom, Fact, GroundAction, ObjId, Problem, Term};

pub use binary::bit_count;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EncodingKind {
    Ground,
    Plmg,
    Binary,
}

impl EncodingKind {
    pub const ALL: [EncodingKind; 3] = [EncodingKind::Ground, EncodingKind::Plmg, EncodingKind::Binary];
}

impl fmt::Display for EncodingKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EncodingKind::Ground => "ground",
            EncodingKind::Plmg => "plmg",
            EncodingKind::Binary => "binary",
        })
    }
}

impl FromStr for EncodingKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "ground" => Ok(EncodingKind::Ground),
            "plmg" => Ok(EncodingKind::Plmg),
            "binary" => Ok(EncodingKind::Binary),
            _ => Err(format!("unknown encoding `{s}` (expected ground, plmg or binary)")),
        }
    }
}

#[derive(Clone, Debug)]
pub struct EncodeOptions {
    pub kind: EncodingKind,
    pub pruning: bool,
    /// Keep an emptied group empty. Only valid for groups from the
    /// fact-alternation check, which is the only source used here.
    pub none_persistence: bool,
    pub amo_limit: usize,
}

impl EncodeOptions {
    pub fn new(kind: EncodingKind, pruning: bool) -> Self {
        EncodeOptions { kind, pruning, none_persistence: true, amo_limit: PAIRWISE_AMO_LIMIT }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EncodeError {
    #[error("goal fact {0} is neither in a mutex group nor encoded ground")]
    UncoveredGoal(String),
}

/// Where an atom of an action schema sits.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Use {
    Prec,
    Effect(EffectRef),
}

/// A ground instance of an action atom over a ground-encoded fact.
#[derive(Clone, Debug)]
pub(crate) struct GroundUse {
    pub action: ActionId,
    pub kind: Use,
    pub guard: Vec<(u32, ObjId)>,
    pub fact: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub(crate) enum Guard {
    Arg { slot: u32, obj: ObjId },
    InDom { cnt: u32, slot: u32 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub(crate) enum Rhs {
    /// The counted variable equals the slot's object.
    Arg { cnt: u32, slot: u32 },
    Obj { cnt: u32, obj: ObjId },
}

impl Rhs {
    pub fn cnt(self) -> u32 {
        match self {
            Rhs::Arg { cnt, .. } | Rhs::Obj { cnt, .. } => cnt,
        }
    }
}

/// An action atom matched against one literal of a selected group.
#[derive(Clone, Debug)]
pub(crate) struct GroupUse {
    pub action: ActionId,
    pub kind: Use,
    pub plmg: u32,
    pub lit: u32,
    pub guard: Vec<Guard>,
    pub rhs: Vec<Rhs>,
}

/// A problem prepared for encoding at any length.
pub struct Encoder<'a> {
    pub problem: &'a Problem,
    pub options: EncodeOptions,
    pub ua: UnifiedArgs,
    pub statics: StaticHandling,
    /// Verified candidates the cover was chosen from (empty for `Ground`).
    pub candidates: Vec<LmgCandidate>,
    pub cover: CoverResult,
    /// Facts with one variable per layer.
    pub facts: Vec<Fact>,
    fact_index: HashMap<Fact, u32>,
    ground_uses: Vec<GroundUse>,
    group_uses: Vec<GroupUse>,
    /// `(plmg, cnt, slot)` triples used in guards, with the sides they are
    /// compared on.
    helpers: BTreeMap<(u32, u32, u32), BTreeSet<Side>>,
    /// Bits per counted value in the binary encoding.
    pub bits: u32,
}

impl<'a> Encoder<'a> {
    pub fn new(problem: &'a Problem, options: EncodeOptions) -> Result<Self, EncodeError> {
        let (candidates, cover) = match options.kind {
            EncodingKind::Ground => (Vec::new(), empty_cover(problem, options.pruning)),
            EncodingKind::Plmg | EncodingKind::Binary => {
                let c = infer_groups(problem);
                let cover = select_cover(problem, &c, options.pruning);
                (c, cover)
            }
        };
        Self::with_cover(problem, options, candidates, cover)
    }

    /// Uses a given cover instead of inferring one. A `Ground` encoder must
    /// be given a cover without groups.
    pub fn with_cover(
        problem: &'a Problem,
        options: EncodeOptions,
        candidates: Vec<LmgCandidate>,
        cover: CoverResult,
    ) -> Result<Self, EncodeError> {
        assert!(options.kind != EncodingKind::Ground || cover.selected.is_empty());
        let ua = UnifiedArgs::compute(problem);
        let statics = StaticHandling::compute(problem);
        let facts = cover.ground_facts();
        let fact_index: HashMap<Fact, u32> = facts.iter().enumerate().map(|(i, f)| (f.clone(), i as u32)).collect();
        let mut enc = Encoder {
            problem,
            options,
            ua,
            statics,
            candidates,
            cover,
            facts,
            fact_index,
            ground_uses: Vec::new(),
            group_uses: Vec::new(),
            helpers: BTreeMap::new(),
            bits: bit_count(problem.objects.len()),
        };
        enc.collect_uses();
        for g in &problem.goal {
            if !enc.fact_index.contains_key(g) && !enc.cover.selected.iter().any(|m| m.contains(g)) {
                return Err(EncodeError::UncoveredGoal(problem.display_fact(g).to_string()));
            }
        }
        Ok(enc)
    }

    fn atoms(&self, a: ActionId) -> Vec<(Use, &'a Atom)> {
        let schema = self.problem.action(a);
        let mut out: Vec<(Use, &Atom)> = schema
            .prec
            .iter()
            .filter(|x| !self.statics.in_layer(x.pred))
            .map(|x| (Use::Prec, x))
            .collect();
        for (polarity, index, atom) in schema.all_effects() {
            out.push((Use::Effect(EffectRef { action: a, polarity, index: index as u32 }), atom));
        }
        out
    }

    fn collect_uses(&mut self) {
        let problem = self.problem;
        for a in problem.action_ids() {
            let schema = problem.action(a);
            for (kind, atom) in self.atoms(a) {
                for g in atom_groundings(problem, a, atom) {
                    if let Some(&fact) = self.fact_index.get(&g.fact) {
                        let guard = g.binding.iter().map(|(i, o)| (self.ua.slot_of(a, *i), *o)).collect();
                        self.ground_uses.push(GroundUse { action: a, kind, guard, fact });
                    }
                }
                for (m, group) in self.cover.selected.iter().enumerate() {
                    for (l, lit) in group.atoms.iter().enumerate() {
                        if lit.pred != atom.pred {
                            continue;
                        }
                        let mut guard = Vec::new();
                        let mut rhs = Vec::new();
                        let mut ok = true;
                        for (x, term) in lit.args.iter().zip(&atom.args) {
                            match (*x, *term) {
                                (PlmgArg::Obj(o), Term::Param(i)) => {
                                    ok &= problem.types.contains(schema.params[i].ty, o);
                                    guard.push(Guard::Arg { slot: self.ua.slot_of(a, i), obj: o });
                                }
                                (PlmgArg::Obj(o), Term::Obj(c)) => ok &= o == c,
                                (PlmgArg::Cnt(c), Term::Param(i)) => {
                                    ok &= problem.types.overlaps(schema.params[i].ty, group.cnt[c]);
                                    let slot = self.ua.slot_of(a, i);
                                    guard.push(Guard::InDom { cnt: c as u32, slot });
                                    rhs.push(Rhs::Arg { cnt: c as u32, slot });
                                }
                                (PlmgArg::Cnt(c), Term::Obj(o)) => {
                                    ok &= problem.types.contains(group.cnt[c], o);
                                    rhs.push(Rhs::Obj { cnt: c as u32, obj: o });
                                }
                            }
                        }
                        if !ok {
                            continue;
                        }
                        guard.sort();
                        guard.dedup();
                        rhs.sort();
                        rhs.dedup();
                        let side = if kind == Use::Prec { Side::Pre } else { Side::Post };
                        for r in &rhs {
                            if let Rhs::Arg { cnt, slot } = *r {
                                self.helpers.entry((m as u32, cnt, slot)).or_default().insert(side);
                            }
                        }
                        self.group_uses.push(GroupUse { action: a, kind, plmg: m as u32, lit: l as u32, guard, rhs });
                    }
                }
            }
        }
    }

    pub fn kind(&self) -> EncodingKind {
        self.options.kind
    }

    fn binary(&self) -> bool {
        self.options.kind == EncodingKind::Binary
    }

    /// Number of literal variables of group `m`, including "none".
    pub fn num_lits(&self, m: usize) -> u32 {
        let g = &self.cover.selected[m];
        g.atoms.len() as u32 + u32::from(!g.exactly_one)
    }

    /// State variables allocated per layer.
    pub fn state_vars_per_layer(&self) -> usize {
        let mut n = self.facts.len();
        for (m, g) in self.cover.selected.iter().enumerate() {
            n += self.num_lits(m) as usize;
            for t in &g.cnt {
                n += if self.binary() { self.bits as usize } else { self.problem.types.size(*t) };
            }
        }
        n
    }

    /// Builds the formula for plans of up to `length` steps.
    pub fn encode(&self, length: u32) -> CnfFormula {
        let mut f = CnfFormula::with_amo_limit(self.options.amo_limit);
        self.state_layer(&mut f, 0);
        self.encode_init(&mut f);
        f.mark_segment(0);
        for t in 1..=length {
            actions::encode_step(&mut f, t, self.problem, &self.ua, &self.statics);
            if self.binary() {
                self.encode_arg_bits(&mut f, t);
            }
            self.state_layer(&mut f, t);
            self.ground_transition(&mut f, t);
            self.group_transition(&mut f, t);
            f.mark_segment(t);
        }
        self.encode_goal(&mut f, length);
        f
    }

    fn state_layer(&self, f: &mut CnfFormula, layer: u32) {
        for i in 0..self.facts.len() as u32 {
            f.var(VarKey::Fact { fact: i, step: layer });
        }
        self.group_layer(f, layer);
    }

    fn encode_init(&self, f: &mut CnfFormula) {
        self.ground_init(f);
        self.group_init(f);
    }

    fn encode_goal(&self, f: &mut CnfFormula, length: u32) {
        for g in &self.problem.goal {
            if let Some(&i) = self.fact_index.get(g) {
                let v = f.var(VarKey::Fact { fact: i, step: length });
                f.add_clause(&[v.pos()]);
            }
            self.group_goal(f, g, length);
        }
    }

    /// Reads the plan from a satisfying assignment (`assignment[i]` is the
    /// value of variable `i + 1`).
    pub fn decode_plan(
        &self,
        f: &CnfFormula,
        assignment: &[bool],
        length: u32,
    ) -> Result<Vec<GroundAction>, ExtractError> {
        let value = |k: &VarKey| f.lookup(k).is_some_and(|v| assignment.get(v.0 as usize - 1).copied().unwrap_or(false));
        actions::extract_plan(&value, self.problem, &self.ua, length)
    }

    /// The state each layer of a model describes: the true ground-encoded
    /// facts and, per selected group, its selected fact (`None` for "none").
    pub fn decode_states(&self, f: &CnfFormula, assignment: &[bool], length: u32) -> Vec<DecodedLayer> {
        let value = |k: &VarKey| f.lookup(k).is_some_and(|v| assignment.get(v.0 as usize - 1).copied().unwrap_or(false));
        (0..=length)
            .map(|t| DecodedLayer {
                ground: (0..self.facts.len() as u32)
                    .filter(|i| value(&VarKey::Fact { fact: *i, step: t }))
                    .map(|i| self.facts[i as usize].clone())
                    .collect(),
                groups: (0..self.cover.selected.len()).map(|m| self.decode_group(&value, m, t)).collect(),
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecodedLayer {
    pub ground: BTreeSet<Fact>,
    pub groups: Vec<Option<Fact>>,
}

impl DecodedLayer {
    /// All facts the layer asserts.
    pub fn facts(&self) -> BTreeSet<Fact> {
        let mut out = self.ground.clone();
        out.extend(self.groups.iter().flatten().cloned());
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cnf::Lit;
    use crate::pddl::parse;

    const PANTRY: &str = include_str!("../../tests/data/pantry/domain.pddl");

    fn pantry(objects: &str, init: &str, goal: &str) -> Problem {
        parse(
            PANTRY,
            &format!("(define (problem q) (:domain pantry) (:objects {objects}) (:init {init}) (:goal (and {goal})))"),
        )
        .unwrap()
    }

    fn lit(f: &CnfFormula, key: VarKey) -> Lit {
        f.lookup(&key).unwrap().pos()
    }

    fn amo_group(enc: &Encoder, item: &str) -> u32 {
        let o = enc.problem.object_id(item).unwrap();
        enc.cover.selected.iter().position(|g| !g.exactly_one && g.fixed == [o]).unwrap() as u32
    }

    #[test]
    fn kind_names_round_trip() {
        for k in EncodingKind::ALL {
            assert_eq!(k.to_string().parse::<EncodingKind>(), Ok(k));
        }
        assert!("onehot".parse::<EncodingKind>().is_err());
    }

    #[test]
    fn empty_group_starts_at_none_and_stays_there() {
        let p = pantry("apple pear - item", "(free) (shelved apple)", "(eaten apple)");
        let enc = Encoder::new(&p, EncodeOptions::new(EncodingKind::Plmg, true)).unwrap();
        let f = enc.encode(2);
        let (apple, pear) = (amo_group(&enc, "apple"), amo_group(&enc, "pear"));
        let none = |m, step| lit(&f, VarKey::Lit { plmg: m, lit: 2, step });
        assert!(f.contains_clause(&[none(pear, 0)]));
        assert!(!f.contains_clause(&[none(apple, 0)]));
        assert!(f.contains_clause(&[!none(apple, 1), none(apple, 2)]));

        let mut opts = EncodeOptions::new(EncodingKind::Plmg, true);
        opts.none_persistence = false;
        let enc = Encoder::new(&p, opts).unwrap();
        let f = enc.encode(2);
        let none = |step| lit(&f, VarKey::Lit { plmg: apple, lit: 2, step });
        assert!(!f.contains_clause(&[!none(1), none(2)]));
    }

    #[test]
    fn amo_literal_has_no_cause_for_none() {
        let p = pantry("apple - item", "(free) (shelved apple)", "(eaten apple)");
        let enc = Encoder::new(&p, EncodeOptions::new(EncodingKind::Plmg, true)).unwrap();
        let f = enc.encode(1);
        assert!(!f.keys().any(|(_, k)| matches!(k, VarKey::LitCause { lit: 2, .. })));
    }

    #[test]
    fn single_object_needs_no_bits() {
        let p = pantry("apple - item", "(free) (shelved apple)", "(eaten apple)");
        let enc = Encoder::new(&p, EncodeOptions::new(EncodingKind::Binary, true)).unwrap();
        assert_eq!(enc.bits, 0);
        let f = enc.encode(1);
        assert!(!f.keys().any(|(_, k)| matches!(k, VarKey::CntBit { .. } | VarKey::ArgBit { .. })));
        for (_, k) in f.keys() {
            if let VarKey::CntChanged { .. } = k {
                assert!(f.contains_clause(&[!lit(&f, *k)]));
            }
        }
    }

    #[test]
    fn ground_init_units_cover_every_fact() {
        let p = pantry("apple pear - item", "(free) (shelved apple)", "(eaten apple)");
        let enc = Encoder::new(&p, EncodeOptions::new(EncodingKind::Ground, false)).unwrap();
        assert!(enc.cover.selected.is_empty());
        assert_eq!(enc.facts.len(), 1 + 3 * 2);
        let f = enc.encode(0);
        for (i, fact) in enc.facts.iter().enumerate() {
            let x = lit(&f, VarKey::Fact { fact: i as u32, step: 0 });
            assert!(f.contains_clause(&[if p.is_init(fact) { x } else { !x }]));
        }
        let goal = enc.facts.iter().position(|x| *x == p.fact("eaten", &["apple"])).unwrap() as u32;
        assert!(f.contains_clause(&[lit(&f, VarKey::Fact { fact: goal, step: 0 })]));
    }
}
