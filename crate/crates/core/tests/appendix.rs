//! Worked example on the three-object transport instance: vehicle `v`,
//! package `p`, location `l`, with `p` in `v` and goal `p` at `l`.

mod common;

use common::instance;
use pgsat::actions::UnifiedArgs;
use pgsat::cnf::{CnfFormula, EffectRef, Lit, Side, VarKey};
use pgsat::encode::{EncodeOptions, Encoder, EncodingKind};
use pgsat::pddl::{ObjId, Polarity, Problem};

struct Names<'a> {
    p: &'a Problem,
    f: &'a CnfFormula,
}

impl Names<'_> {
    fn lit(&self, key: VarKey) -> Lit {
        self.f.lookup(&key).unwrap_or_else(|| panic!("no variable {key:?}")).pos()
    }
    fn obj(&self, name: &str) -> ObjId {
        self.p.object_id(name).unwrap()
    }
    fn drop(&self) -> Lit {
        self.lit(VarKey::Action { action: self.p.action_id("drop").unwrap(), step: 1 })
    }
    fn arg(&self, slot: u32, obj: &str) -> Lit {
        self.lit(VarKey::ArgEq { slot, obj: self.obj(obj), step: 1 })
    }
    fn effect(&self, polarity: Polarity, index: u32) -> EffectRef {
        EffectRef { action: self.p.action_id("drop").unwrap(), polarity, index }
    }
}

#[test]
fn unified_argument_layout() {
    let p = instance("transport/p01").load();
    assert_eq!(UnifiedArgs::compute(&p).display(&p).to_string(), "[vehiclex1, locationx2, packagex1]");
}

#[test]
fn grounded_example_clauses() {
    let p = instance("transport/p01").load();
    let enc = Encoder::new(&p, EncodeOptions::new(EncodingKind::Ground, true)).unwrap();
    let f = enc.encode(1);
    let n = Names { p: &p, f: &f };
    let fact = |pred: &str, args: &[&str], step: u32| {
        let i = enc.facts.iter().position(|x| *x == p.fact(pred, args)).unwrap() as u32;
        n.lit(VarKey::Fact { fact: i, step })
    };
    let (drop, v1, v2, v4) = (n.drop(), n.arg(0, "v"), n.arg(1, "l"), n.arg(3, "p"));

    // precondition: drop¹ ∧ (v₁=v)¹ ∧ (v₂=l)¹ ⟹ at(v,l)⁰
    assert!(f.implies_clause(&[!drop, !v1, !v2, fact("at", &["v", "l"], 0)]));
    // effects
    assert!(f.implies_clause(&[!drop, !v1, !v4, !fact("in", &["p", "v"], 1)]));
    assert!(f.implies_clause(&[!drop, !v2, !v4, fact("at", &["p", "l"], 1)]));
    // cause variable of the add effect at(?l, ?p) for at(p,l)
    let at_pl = enc.facts.iter().position(|x| *x == p.fact("at", &["p", "l"])).unwrap() as u32;
    let cause = n.lit(VarKey::CauseGround { effect: n.effect(Polarity::Add, 0), fact: at_pl, step: 1 });
    for x in [drop, v2, v4] {
        assert!(f.implies_clause(&[!cause, x]));
    }
    // frame: in(p,v)⁰ ∧ ¬in(p,v)¹ ⟹ c^{¬in(p,v),1}
    let in_pv = enc.facts.iter().position(|x| *x == p.fact("in", &["p", "v"])).unwrap() as u32;
    let del_cause = n.lit(VarKey::CauseGround { effect: n.effect(Polarity::Del, 0), fact: in_pv, step: 1 });
    assert!(f.implies_clause(&[!fact("in", &["p", "v"], 0), fact("in", &["p", "v"], 1), del_cause]));
    // init and goal
    assert!(f.implies_clause(&[fact("at", &["v", "l"], 0)]));
    assert!(f.implies_clause(&[fact("in", &["p", "v"], 0)]));
    assert!(f.implies_clause(&[!fact("at", &["p", "l"], 0)]));
    assert!(f.implies_clause(&[fact("at", &["p", "l"], 1)]));
}

#[test]
fn plmg_example_clauses() {
    let p = instance("transport/p01").load();
    let enc = Encoder::new(&p, EncodeOptions::new(EncodingKind::Plmg, true)).unwrap();
    let f = enc.encode(1);
    let n = Names { p: &p, f: &f };
    let group = |obj: &str| enc.cover.selected.iter().position(|g| g.fixed == [n.obj(obj)]).unwrap() as u32;
    let (pm, vm) = (group("p"), group("v"));
    // package group: literal 0 is at(p, ?l), literal 1 is in(p, ?v); counted 0 is ?l, 1 is ?v
    let lit = |plmg, lit, step| n.lit(VarKey::Lit { plmg, lit, step });
    let in_dom = |plmg, cnt, slot| n.lit(VarKey::InDom { plmg, cnt, slot, step: 1 });
    let eq_arg = |plmg, cnt, slot, side| n.lit(VarKey::CntEqArg { plmg, cnt, slot, step: 1, side });
    let cnt_eq = |plmg, cnt, obj, step| n.lit(VarKey::CntEq { plmg, cnt, obj: n.obj(obj), step });
    let (drop, v1, v2, v4) = (n.drop(), n.arg(0, "v"), n.arg(1, "l"), n.arg(3, "p"));

    // precondition in(?p, ?v): ⟹ (in^M)⁰ ∧ (v_cnt ≡ v₁)⁰
    let g = [!drop, !v4, !in_dom(pm, 1, 0)];
    assert!(f.implies_clause(&[&g[..], &[lit(pm, 1, 0)]].concat()));
    assert!(f.implies_clause(&[&g[..], &[eq_arg(pm, 1, 0, Side::Pre)]].concat()));
    // precondition at(?v, ?l) on the vehicle group: ⟹ (at^m)⁰ ∧ (l_cnt ≡ v₂)⁰
    let g = [!drop, !v1, !in_dom(vm, 0, 1)];
    assert!(f.implies_clause(&[&g[..], &[lit(vm, 0, 0)]].concat()));
    assert!(f.implies_clause(&[&g[..], &[eq_arg(vm, 0, 1, Side::Pre)]].concat()));
    // add at(?p, ?l): ⟹ (at^M)¹ ∧ (l_cnt ≡ v₂)¹
    let g = [!drop, !v4, !in_dom(pm, 0, 1)];
    assert!(f.implies_clause(&[&g[..], &[lit(pm, 0, 1)]].concat()));
    assert!(f.implies_clause(&[&g[..], &[eq_arg(pm, 0, 1, Side::Post)]].concat()));
    // delete in(?p, ?v): one wide clause
    assert!(f.implies_clause(&[!drop, !v4, !in_dom(pm, 1, 0), !lit(pm, 1, 1), !eq_arg(pm, 1, 0, Side::Post)]));
    // causes of the add effect, both directions
    let add = n.effect(Polarity::Add, 0);
    let lit_cause = n.lit(VarKey::LitCause { plmg: pm, lit: 0, effect: add, step: 1 });
    let cnt_cause = n.lit(VarKey::CntCause { plmg: pm, cnt: 0, effect: add, step: 1 });
    for c in [lit_cause, cnt_cause] {
        assert!(f.implies_clause(&[!drop, !v4, !in_dom(pm, 0, 1), c]));
        for x in [drop, v4, in_dom(pm, 0, 1)] {
            assert!(f.implies_clause(&[!c, x]));
        }
    }
    // ¬(at^M)⁰ ∧ (at^M)¹ ⟹ (at^M ← drop)¹
    assert!(f.implies_clause(&[lit(pm, 0, 0), !lit(pm, 0, 1), lit_cause]));
    // helpers
    assert!(f.implies_clause(&[!v2, in_dom(pm, 0, 1)]));
    let (eq, val) = (eq_arg(pm, 0, 1, Side::Post), cnt_eq(pm, 0, "l", 1));
    assert!(f.implies_clause(&[!eq, !val, v2]));
    assert!(f.implies_clause(&[!eq, !v2, val]));
    assert!(f.implies_clause(&[!val, !v2, eq]));
    // falling edge of l_cnt
    let changed = n.lit(VarKey::CntChanged { plmg: pm, cnt: 0, step: 1 });
    assert!(f.implies_clause(&[!cnt_eq(pm, 0, "l", 0), cnt_eq(pm, 0, "l", 1), changed]));
    // init: p in v; goal: p at l
    assert!(f.implies_clause(&[lit(pm, 1, 0)]));
    assert!(f.implies_clause(&[cnt_eq(pm, 1, "v", 0)]));
    assert!(f.implies_clause(&[lit(pm, 0, 1)]));
    assert!(f.implies_clause(&[cnt_eq(pm, 0, "l", 1)]));
}
