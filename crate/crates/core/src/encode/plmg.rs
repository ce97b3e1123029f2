//! Clauses over the selected mutex groups. Counted values are one-hot
//! `CntEq` variables, or bit vectors in the binary encoding (see `binary`).

use super::{Encoder, Guard, Rhs, Use};
use crate::actions::{action_var, arg_var};
use crate::cnf::{CnfFormula, Lit, Side, VarKey};
use crate::mutex::PlmgArg;
use crate::pddl::{Fact, ObjId, Polarity};

impl Encoder<'_> {
    fn lit_var(f: &mut CnfFormula, m: u32, lit: u32, step: u32) -> Lit {
        f.var(VarKey::Lit { plmg: m, lit, step }).pos()
    }

    fn cnt_members(&self, m: u32, c: u32) -> impl Iterator<Item = ObjId> + '_ {
        self.problem.types.member_ids(self.cover.selected[m as usize].cnt[c as usize])
    }

    /// Literals whose conjunction says counted variable `c` of group `m`
    /// holds `o` in `layer`.
    pub(super) fn cnt_value(&self, f: &mut CnfFormula, m: u32, c: u32, o: ObjId, layer: u32) -> Vec<Lit> {
        if self.binary() {
            self.cnt_bits_value(f, m, c, o, layer)
        } else {
            vec![f.var(VarKey::CntEq { plmg: m, cnt: c, obj: o, step: layer }).pos()]
        }
    }

    pub(super) fn group_layer(&self, f: &mut CnfFormula, layer: u32) {
        for (m, g) in self.cover.selected.iter().enumerate() {
            let m = m as u32;
            let lits: Vec<Lit> = (0..self.num_lits(m as usize)).map(|l| Self::lit_var(f, m, l, layer)).collect();
            let mut counted = Vec::new();
            for c in 0..g.cnt.len() as u32 {
                if self.binary() {
                    self.cnt_bits(f, m, c, layer);
                } else {
                    let vars: Vec<Lit> = self
                        .cnt_members(m, c)
                        .map(|o| f.var(VarKey::CntEq { plmg: m, cnt: c, obj: o, step: layer }).pos())
                        .collect();
                    counted.push(vars);
                }
            }
            f.exactly_one(&lits, layer);
            for vars in &counted {
                f.exactly_one(vars, layer);
            }
            if self.binary() {
                for c in 0..g.cnt.len() as u32 {
                    self.range_constraint(f, m, c, layer);
                }
            }
        }
    }

    /// Units making group `m` hold `fact` in `layer`.
    fn assert_fact(&self, f: &mut CnfFormula, m: u32, fact: &Fact, layer: u32) {
        let g = &self.cover.selected[m as usize];
        let (lit, binding) = g.match_fact(self.problem, fact).expect("fact outside the group");
        let x = Self::lit_var(f, m, lit as u32, layer);
        f.add_clause(&[x]);
        for (c, o) in binding {
            for x in self.cnt_value(f, m, c as u32, o, layer) {
                f.add_clause(&[x]);
            }
        }
    }

    pub(super) fn group_init(&self, f: &mut CnfFormula) {
        for (m, g) in self.cover.selected.iter().enumerate() {
            let m = m as u32;
            let init: Vec<&Fact> = g.facts.iter().filter(|x| self.problem.is_init(x)).collect();
            if init.is_empty() {
                debug_assert!(!g.exactly_one);
                let none = Self::lit_var(f, m, g.atoms.len() as u32, 0);
                f.add_clause(&[none]);
            }
            for x in init {
                self.assert_fact(f, m, x, 0);
            }
        }
    }

    pub(super) fn group_goal(&self, f: &mut CnfFormula, goal: &Fact, length: u32) {
        for (m, g) in self.cover.selected.iter().enumerate() {
            if g.contains(goal) {
                self.assert_fact(f, m as u32, goal, length);
            }
        }
    }

    fn guard_lit(f: &mut CnfFormula, m: u32, g: Guard, t: u32) -> Lit {
        match g {
            Guard::Arg { slot, obj } => arg_var(f, slot, obj, t),
            Guard::InDom { cnt, slot } => f.var(VarKey::InDom { plmg: m, cnt, slot, step: t }).pos(),
        }
    }

    /// Conjunctions (one per counted variable) for the right-hand side of a
    /// match.
    fn rhs_lits(&self, f: &mut CnfFormula, m: u32, rhs: Rhs, t: u32, side: Side) -> Vec<Lit> {
        let layer = if side == Side::Pre { t - 1 } else { t };
        match rhs {
            Rhs::Arg { cnt, slot } => vec![f.var(VarKey::CntEqArg { plmg: m, cnt, slot, step: t, side }).pos()],
            Rhs::Obj { cnt, obj } => self.cnt_value(f, m, cnt, obj, layer),
        }
    }

    pub(super) fn group_transition(&self, f: &mut CnfFormula, t: u32) {
        let groups = self.cover.selected.len();
        let mut lit_causes: Vec<Vec<Vec<Lit>>> =
            (0..groups).map(|m| vec![Vec::new(); self.num_lits(m) as usize]).collect();
        let mut cnt_causes: Vec<Vec<Vec<Lit>>> =
            self.cover.selected.iter().map(|g| vec![Vec::new(); g.cnt.len()]).collect();

        for u in &self.group_uses {
            let m = u.plmg;
            let a = action_var(f, u.action, t);
            let guard: Vec<Lit> = u.guard.iter().map(|g| Self::guard_lit(f, m, *g, t)).collect();
            let side = if u.kind == Use::Prec { Side::Pre } else { Side::Post };
            let layer = if side == Side::Pre { t - 1 } else { t };
            let lit = Self::lit_var(f, m, u.lit, layer);
            let rhs: Vec<Vec<Lit>> = u.rhs.iter().map(|r| self.rhs_lits(f, m, *r, t, side)).collect();
            let premise: Vec<Lit> = std::iter::once(!a).chain(guard.iter().map(|g| !*g)).collect();
            let with = |x: Lit| {
                let mut c = premise.clone();
                c.push(x);
                c
            };
            match u.kind {
                Use::Effect(e) if e.polarity == Polarity::Del => {
                    let mut clause = premise.clone();
                    clause.push(!lit);
                    clause.extend(rhs.iter().flatten().map(|x| !*x));
                    f.add_clause(&clause);
                }
                _ => {
                    f.add_clause(&with(lit));
                    for x in rhs.iter().flatten() {
                        f.add_clause(&with(*x));
                    }
                }
            }
            if let Use::Effect(effect) = u.kind {
                if effect.polarity == Polarity::Add {
                    let mut causes =
                        vec![(f.var(VarKey::LitCause { plmg: m, lit: u.lit, effect, step: t }).pos(), None)];
                    for r in &u.rhs {
                        let cnt = r.cnt();
                        let v = f.var(VarKey::CntCause { plmg: m, cnt, effect, step: t }).pos();
                        if !causes.iter().any(|(x, _)| *x == v) {
                            causes.push((v, Some(cnt)));
                        }
                    }
                    for (c, cnt) in causes {
                        f.add_clause(&with(c));
                        f.add_clause(&[!c, a]);
                        for g in &guard {
                            f.add_clause(&[!c, *g]);
                        }
                        match cnt {
                            None => lit_causes[m as usize][u.lit as usize].push(c),
                            Some(k) => cnt_causes[m as usize][k as usize].push(c),
                        }
                    }
                }
            }
        }

        self.helper_clauses(f, t);

        for (m, g) in self.cover.selected.iter().enumerate() {
            let mu = m as u32;
            for c in 0..g.cnt.len() as u32 {
                let changed = f.var(VarKey::CntChanged { plmg: mu, cnt: c, step: t }).pos();
                if self.binary() {
                    self.bit_change(f, mu, c, t, changed);
                } else {
                    let members: Vec<ObjId> = self.cnt_members(mu, c).collect();
                    for o in members {
                        let before = f.var(VarKey::CntEq { plmg: mu, cnt: c, obj: o, step: t - 1 }).pos();
                        let after = f.var(VarKey::CntEq { plmg: mu, cnt: c, obj: o, step: t }).pos();
                        f.add_clause(&[!before, after, changed]);
                    }
                }
                let mut clause = vec![!changed];
                clause.extend(&cnt_causes[m][c as usize]);
                f.add_clause(&clause);
            }
            for (l, causes) in lit_causes[m].iter().take(g.atoms.len()).enumerate() {
                let before = Self::lit_var(f, mu, l as u32, t - 1);
                let after = Self::lit_var(f, mu, l as u32, t);
                let mut clause = vec![before, !after];
                clause.extend(causes);
                f.add_clause(&clause);
            }
            if !g.exactly_one && self.options.none_persistence {
                let none = g.atoms.len() as u32;
                let before = Self::lit_var(f, mu, none, t - 1);
                let after = Self::lit_var(f, mu, none, t);
                f.add_clause(&[!before, after]);
            }
        }
    }

    /// Definitions of `InDom` and `CntEqArg` for the referenced
    /// `(group, counted variable, slot)` combinations.
    fn helper_clauses(&self, f: &mut CnfFormula, t: u32) {
        let types = &self.problem.types;
        for (&(m, c, slot), sides) in &self.helpers {
            let cnt_ty = self.cover.selected[m as usize].cnt[c as usize];
            let slot_ty = self.ua.slot_type(slot);
            let in_dom = f.var(VarKey::InDom { plmg: m, cnt: c, slot, step: t }).pos();
            for o in types.member_ids(slot_ty) {
                let x = arg_var(f, slot, o, t);
                f.add_clause(&[!x, if types.contains(cnt_ty, o) { in_dom } else { !in_dom }]);
            }
            for &side in sides {
                let eq = f.var(VarKey::CntEqArg { plmg: m, cnt: c, slot, step: t, side }).pos();
                if self.binary() {
                    self.bit_equality(f, m, c, slot, t, side, eq);
                    continue;
                }
                let layer = if side == Side::Pre { t - 1 } else { t };
                for o in types.member_ids(slot_ty) {
                    let x = arg_var(f, slot, o, t);
                    if types.contains(cnt_ty, o) {
                        let v = f.var(VarKey::CntEq { plmg: m, cnt: c, obj: o, step: layer }).pos();
                        f.add_clause(&[!x, !v, eq]);
                        f.add_clause(&[!x, !eq, v]);
                        f.add_clause(&[!v, !eq, x]);
                    } else {
                        f.add_clause(&[!x, !eq]);
                    }
                }
                for o in types.member_ids(cnt_ty).filter(|o| !types.contains(slot_ty, *o)) {
                    let v = f.var(VarKey::CntEq { plmg: m, cnt: c, obj: o, step: layer }).pos();
                    f.add_clause(&[!v, !eq]);
                }
            }
        }
    }

    /// The fact group `m` holds under `value`, `None` for "none".
    pub(super) fn decode_group(&self, value: &dyn Fn(&VarKey) -> bool, m: usize, layer: u32) -> Option<Fact> {
        let g = &self.cover.selected[m];
        let mu = m as u32;
        let lit = (0..g.atoms.len()).find(|l| value(&VarKey::Lit { plmg: mu, lit: *l as u32, step: layer }))?;
        let atom = &g.atoms[lit];
        let args = atom
            .args
            .iter()
            .map(|a| match *a {
                PlmgArg::Obj(o) => Some(o),
                PlmgArg::Cnt(c) if self.binary() => Some(self.decode_bits(value, mu, c as u32, layer)),
                PlmgArg::Cnt(c) => self
                    .cnt_members(mu, c as u32)
                    .find(|o| value(&VarKey::CntEq { plmg: mu, cnt: c as u32, obj: *o, step: layer })),
            })
            .collect::<Option<Vec<ObjId>>>()?;
        Some(Fact { pred: atom.pred, args })
    }
}
