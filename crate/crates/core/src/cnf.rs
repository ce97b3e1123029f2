//! Variable bookkeeping, clause storage and DIMACS output shared by the encoders.

use std::collections::HashMap;
use std::fmt;
use std::io::{self, Write};
use std::ops::Not;

use thiserror::Error;

use crate::pddl::{ActionId, ObjId, Polarity};

/// Groups larger than this get the sequential-counter encoding.
pub const PAIRWISE_AMO_LIMIT: usize = 256;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarId(pub u32);

impl VarId {
    pub fn pos(self) -> Lit {
        Lit(self.0 as i32)
    }

    pub fn neg(self) -> Lit {
        Lit(-(self.0 as i32))
    }
}

/// A signed DIMACS literal.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Lit(pub i32);

impl Lit {
    pub fn var(self) -> VarId {
        VarId(self.0.unsigned_abs())
    }

    pub fn is_positive(self) -> bool {
        self.0 > 0
    }
}

impl Not for Lit {
    type Output = Lit;
    fn not(self) -> Lit {
        Lit(-self.0)
    }
}

impl fmt::Display for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Which layer a counted variable is compared against: the state before the
/// action (`Pre`, layer t−1) or after it (`Post`, layer t).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    Pre,
    Post,
}

/// Identifies an effect atom of an action schema.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EffectRef {
    pub action: ActionId,
    pub polarity: Polarity,
    pub index: u32,
}

/// Semantic name of a propositional variable. Steps of actions run from 1,
/// state layers from 0. `fact` fields index the encoder's ground fact table,
/// `plmg` fields the selected groups, `lit` the group's atom list (the
/// index one past the last atom is the "none" literal).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VarKey {
    Action { action: ActionId, step: u32 },
    ArgEq { slot: u32, obj: ObjId, step: u32 },
    Fact { fact: u32, step: u32 },
    CauseGround { effect: EffectRef, fact: u32, step: u32 },
    CntEq { plmg: u32, cnt: u32, obj: ObjId, step: u32 },
    Lit { plmg: u32, lit: u32, step: u32 },
    InDom { plmg: u32, cnt: u32, slot: u32, step: u32 },
    CntEqArg { plmg: u32, cnt: u32, slot: u32, step: u32, side: Side },
    CntCause { plmg: u32, cnt: u32, effect: EffectRef, step: u32 },
    LitCause { plmg: u32, lit: u32, effect: EffectRef, step: u32 },
    CntChanged { plmg: u32, cnt: u32, step: u32 },
    ArgBit { slot: u32, bit: u32, step: u32 },
    CntBit { plmg: u32, cnt: u32, bit: u32, step: u32 },
    BitEq { plmg: u32, cnt: u32, slot: u32, bit: u32, step: u32, side: Side },
    CntChangedBit { plmg: u32, cnt: u32, bit: u32, step: u32 },
    AmoAux { group: u32, index: u32, step: u32 },
}

impl VarKey {
    pub fn step(&self) -> u32 {
        match *self {
            VarKey::Action { step, .. }
            | VarKey::ArgEq { step, .. }
            | VarKey::Fact { step, .. }
            | VarKey::CauseGround { step, .. }
            | VarKey::CntEq { step, .. }
            | VarKey::Lit { step, .. }
            | VarKey::InDom { step, .. }
            | VarKey::CntEqArg { step, .. }
            | VarKey::CntCause { step, .. }
            | VarKey::LitCause { step, .. }
            | VarKey::CntChanged { step, .. }
            | VarKey::ArgBit { step, .. }
            | VarKey::CntBit { step, .. }
            | VarKey::BitEq { step, .. }
            | VarKey::CntChangedBit { step, .. }
            | VarKey::AmoAux { step, .. } => step,
        }
    }

    /// True for variables that describe the state of one layer (as opposed
    /// to actions, arguments and auxiliaries).
    pub fn is_state(&self) -> bool {
        matches!(self, VarKey::Fact { .. } | VarKey::CntEq { .. } | VarKey::Lit { .. } | VarKey::CntBit { .. })
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CnfError {
    #[error("variable {0:?} allocated twice")]
    DuplicateKey(VarKey),
    #[error("assignment has no value for variable {0}")]
    MissingVariable(u32),
    #[error("malformed DIMACS: {0}")]
    Dimacs(String),
}

/// Variable and clause counts at the end of a timestep.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SegmentMark {
    pub step: u32,
    pub vars: usize,
    pub clauses: usize,
}

#[derive(Clone, Debug)]
pub struct CnfFormula {
    keys: Vec<VarKey>,
    ids: HashMap<VarKey, VarId>,
    lits: Vec<Lit>,
    ends: Vec<u32>,
    marks: Vec<SegmentMark>,
    amo_limit: usize,
    amo_groups: u32,
}

impl Default for CnfFormula {
    fn default() -> Self {
        Self::new()
    }
}

impl CnfFormula {
    pub fn new() -> Self {
        Self::with_amo_limit(PAIRWISE_AMO_LIMIT)
    }

    /// Uses pairwise at-most-one for groups of up to `limit` variables and the
    /// sequential counter above. Intended for tests.
    pub fn with_amo_limit(limit: usize) -> Self {
        CnfFormula {
            keys: Vec::new(),
            ids: HashMap::new(),
            lits: Vec::new(),
            ends: Vec::new(),
            marks: Vec::new(),
            amo_limit: limit,
            amo_groups: 0,
        }
    }

    pub fn num_vars(&self) -> usize {
        self.keys.len()
    }

    pub fn num_clauses(&self) -> usize {
        self.ends.len()
    }

    pub fn new_var(&mut self, key: VarKey) -> Result<VarId, CnfError> {
        if self.ids.contains_key(&key) {
            return Err(CnfError::DuplicateKey(key));
        }
        self.keys.push(key);
        let id = VarId(self.keys.len() as u32);
        self.ids.insert(key, id);
        Ok(id)
    }

    /// Returns the variable for `key`, allocating it on first use.
    pub fn var(&mut self, key: VarKey) -> VarId {
        if let Some(&id) = self.ids.get(&key) {
            return id;
        }
        self.keys.push(key);
        let id = VarId(self.keys.len() as u32);
        self.ids.insert(key, id);
        id
    }

    pub fn lookup(&self, key: &VarKey) -> Option<VarId> {
        self.ids.get(key).copied()
    }

    pub fn key(&self, id: VarId) -> &VarKey {
        &self.keys[id.0 as usize - 1]
    }

    pub fn keys(&self) -> impl Iterator<Item = (VarId, &VarKey)> {
        self.keys.iter().enumerate().map(|(i, k)| (VarId(i as u32 + 1), k))
    }

    /// Panics on an empty clause: encoders express "never" as a unit clause
    /// over the offending variable instead.
    pub fn add_clause(&mut self, clause: &[Lit]) {
        assert!(!clause.is_empty(), "empty clause");
        debug_assert!(clause.iter().all(|l| l.0 != 0 && l.var().0 as usize <= self.keys.len()));
        self.lits.extend_from_slice(clause);
        self.ends.push(self.lits.len() as u32);
    }

    pub fn clause(&self, i: usize) -> &[Lit] {
        let start = if i == 0 { 0 } else { self.ends[i - 1] as usize };
        &self.lits[start..self.ends[i] as usize]
    }

    pub fn clauses(&self) -> impl Iterator<Item = &[Lit]> {
        (0..self.ends.len()).map(|i| self.clause(i))
    }

    /// True when some stored clause has exactly the given literals, in any order.
    pub fn contains_clause(&self, clause: &[Lit]) -> bool {
        let mut want = clause.to_vec();
        want.sort();
        want.dedup();
        self.clauses().any(|c| {
            if c.len() < want.len() {
                return false;
            }
            let mut have = c.to_vec();
            have.sort();
            have.dedup();
            have == want
        })
    }

    /// True when some stored clause is a subset of `clause`, so the formula
    /// entails it.
    pub fn implies_clause(&self, clause: &[Lit]) -> bool {
        self.clauses().any(|c| c.iter().all(|l| clause.contains(l)))
    }

    pub fn at_most_one(&mut self, lits: &[Lit], step: u32) {
        if lits.len() <= 1 {
            return;
        }
        if lits.len() <= self.amo_limit {
            for i in 0..lits.len() {
                for j in i + 1..lits.len() {
                    self.add_clause(&[!lits[i], !lits[j]]);
                }
            }
            return;
        }
        // sequential counter: s_i means "some of x_1..x_i is true"
        let group = self.amo_groups;
        self.amo_groups += 1;
        let n = lits.len();
        let s: Vec<VarId> = (0..n - 1)
            .map(|i| self.var(VarKey::AmoAux { group, index: i as u32, step }))
            .collect();
        self.add_clause(&[!lits[0], s[0].pos()]);
        for i in 1..n - 1 {
            self.add_clause(&[!lits[i], s[i].pos()]);
            self.add_clause(&[s[i - 1].neg(), s[i].pos()]);
            self.add_clause(&[!lits[i], s[i - 1].neg()]);
        }
        self.add_clause(&[!lits[n - 1], s[n - 2].neg()]);
    }

    pub fn exactly_one(&mut self, lits: &[Lit], step: u32) {
        self.at_most_one(lits, step);
        self.add_clause(lits);
    }

    pub fn mark_segment(&mut self, step: u32) {
        self.marks.push(SegmentMark { step, vars: self.num_vars(), clauses: self.num_clauses() });
    }

    pub fn segment_marks(&self) -> &[SegmentMark] {
        &self.marks
    }

    pub fn write_dimacs<W: Write>(&self, mut sink: W) -> io::Result<()> {
        let mut out = io::BufWriter::new(&mut sink);
        writeln!(out, "p cnf {} {}", self.num_vars(), self.num_clauses())?;
        for c in self.clauses() {
            for l in c {
                write!(out, "{} ", l.0)?;
            }
            out.write_all(b"0\n")?;
        }
        out.flush()
    }

    pub fn to_dimacs(&self) -> String {
        let mut buf = Vec::new();
        self.write_dimacs(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("ascii")
    }

    /// Maps a solver assignment back to variable keys. `assignment[i]` is the
    /// value of variable `i + 1`.
    pub fn decode_model(&self, assignment: &[bool]) -> Result<HashMap<VarKey, bool>, CnfError> {
        if assignment.len() < self.keys.len() {
            return Err(CnfError::MissingVariable(assignment.len() as u32 + 1));
        }
        Ok(self.keys.iter().zip(assignment).map(|(k, v)| (*k, *v)).collect())
    }

    pub fn stats_line(&self, length: usize) -> String {
        format!("length={length} vars={} clauses={}", self.num_vars(), self.num_clauses())
    }
}

/// Parses DIMACS text into its declared variable count and clause list.
pub fn parse_dimacs(text: &str) -> Result<(usize, Vec<Vec<i32>>), CnfError> {
    let mut header = None;
    let mut clauses = Vec::new();
    let mut cur = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('c') {
            continue;
        }
        if let Some(rest) = line.strip_prefix("p cnf") {
            let nums: Vec<usize> = rest
                .split_whitespace()
                .map(|x| x.parse().map_err(|_| CnfError::Dimacs(line.to_string())))
                .collect::<Result<_, _>>()?;
            if nums.len() != 2 {
                return Err(CnfError::Dimacs(line.to_string()));
            }
            header = Some((nums[0], nums[1]));
            continue;
        }
        for tok in line.split_whitespace() {
            let v: i32 = tok.parse().map_err(|_| CnfError::Dimacs(tok.to_string()))?;
            if v == 0 {
                clauses.push(std::mem::take(&mut cur));
            } else {
                cur.push(v);
            }
        }
    }
    let (vars, n) = header.ok_or_else(|| CnfError::Dimacs("missing header".into()))?;
    if !cur.is_empty() || clauses.len() != n {
        return Err(CnfError::Dimacs(format!("expected {n} clauses, found {}", clauses.len())));
    }
    Ok((vars, clauses))
}
