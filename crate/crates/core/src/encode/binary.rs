//! Bit-vector representation of counted values. Values are global object
//! indices, so slot arguments and counted variables share one bit width.

use super::Encoder;
use crate::actions::arg_var;
use crate::cnf::{CnfFormula, Lit, Side, VarKey};
use crate::pddl::ObjId;

/// Bits needed to tell `n` objects apart.
pub fn bit_count(n: usize) -> u32 {
    if n <= 1 {
        0
    } else {
        usize::BITS - (n - 1).leading_zeros()
    }
}

fn bit_lits(vars: &[Lit], value: u32) -> Vec<Lit> {
    vars.iter().enumerate().map(|(b, x)| if value >> b & 1 == 1 { *x } else { !*x }).collect()
}

/// Clauses forcing the number encoded by `bits` (least significant first)
/// to be at least `lo` and at most `hi`.
pub(crate) fn range_clauses(bits: &[Lit], lo: u32, hi: u32) -> Vec<Vec<Lit>> {
    let n = bits.len();
    let mut out = Vec::new();
    for i in 0..n {
        if lo >> i & 1 == 1 {
            let mut c = vec![bits[i]];
            c.extend((i + 1..n).filter(|j| lo >> j & 1 == 0).map(|j| bits[j]));
            out.push(c);
        }
        if hi >> i & 1 == 0 {
            let mut c = vec![!bits[i]];
            c.extend((i + 1..n).filter(|j| hi >> j & 1 == 1).map(|j| !bits[j]));
            out.push(c);
        }
    }
    out
}

impl Encoder<'_> {
    pub(super) fn cnt_bits(&self, f: &mut CnfFormula, m: u32, c: u32, layer: u32) -> Vec<Lit> {
        (0..self.bits).map(|bit| f.var(VarKey::CntBit { plmg: m, cnt: c, bit, step: layer }).pos()).collect()
    }

    fn arg_bits(&self, f: &mut CnfFormula, slot: u32, t: u32) -> Vec<Lit> {
        (0..self.bits).map(|bit| f.var(VarKey::ArgBit { slot, bit, step: t }).pos()).collect()
    }

    pub(super) fn cnt_bits_value(&self, f: &mut CnfFormula, m: u32, c: u32, o: ObjId, layer: u32) -> Vec<Lit> {
        let bits = self.cnt_bits(f, m, c, layer);
        bit_lits(&bits, o.0)
    }

    pub(super) fn range_constraint(&self, f: &mut CnfFormula, m: u32, c: u32, layer: u32) {
        let range = self.problem.types.members(self.cover.selected[m as usize].cnt[c as usize]);
        let bits = self.cnt_bits(f, m, c, layer);
        for clause in range_clauses(&bits, range.start, range.end - 1) {
            f.add_clause(&clause);
        }
    }

    /// `ArgEq(slot, o) ⟹ bits(slot) = o` for every slot.
    pub(super) fn encode_arg_bits(&self, f: &mut CnfFormula, t: u32) {
        for slot in 0..self.ua.num_slots() as u32 {
            let bits = self.arg_bits(f, slot, t);
            for o in self.problem.types.member_ids(self.ua.slot_type(slot)) {
                let x = arg_var(f, slot, o, t);
                for b in bit_lits(&bits, o.0) {
                    f.add_clause(&[!x, b]);
                }
            }
        }
    }

    /// `eq ⟺ bits(slot) = bits(cnt)` through per-bit `BitEq` variables.
    #[allow(clippy::too_many_arguments)]
    pub(super) fn bit_equality(&self, f: &mut CnfFormula, m: u32, c: u32, slot: u32, t: u32, side: Side, eq: Lit) {
        let layer = if side == Side::Pre { t - 1 } else { t };
        let xs = self.arg_bits(f, slot, t);
        let ys = self.cnt_bits(f, m, c, layer);
        let mut all = Vec::new();
        for (bit, (x, y)) in xs.iter().zip(&ys).enumerate() {
            let q = f.var(VarKey::BitEq { plmg: m, cnt: c, slot, bit: bit as u32, step: t, side }).pos();
            f.add_clause(&[!*x, !*y, q]);
            f.add_clause(&[*x, *y, q]);
            f.add_clause(&[!eq, !*x, *y]);
            f.add_clause(&[!eq, *x, !*y]);
            all.push(!q);
        }
        all.push(eq);
        f.add_clause(&all);
    }

    /// `changed` is true when some bit of the value flipped between `t − 1`
    /// and `t`.
    pub(super) fn bit_change(&self, f: &mut CnfFormula, m: u32, c: u32, t: u32, changed: Lit) {
        let before = self.cnt_bits(f, m, c, t - 1);
        let after = self.cnt_bits(f, m, c, t);
        let mut any = vec![!changed];
        for bit in 0..self.bits {
            let d = f.var(VarKey::CntChangedBit { plmg: m, cnt: c, bit, step: t }).pos();
            let (x, y) = (before[bit as usize], after[bit as usize]);
            f.add_clause(&[!x, y, d]);
            f.add_clause(&[x, !y, d]);
            f.add_clause(&[!d, changed]);
            any.push(d);
        }
        f.add_clause(&any);
    }

    pub(super) fn decode_bits(&self, value: &dyn Fn(&VarKey) -> bool, m: u32, c: u32, layer: u32) -> ObjId {
        let v = (0..self.bits)
            .filter(|bit| value(&VarKey::CntBit { plmg: m, cnt: c, bit: *bit, step: layer }))
            .fold(0u32, |acc, bit| acc | 1 << bit);
        ObjId(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bit_counts() {
        assert_eq!(bit_count(0), 0);
        assert_eq!(bit_count(1), 0);
        assert_eq!(bit_count(2), 1);
        assert_eq!(bit_count(5), 3);
        assert_eq!(bit_count(8), 3);
        assert_eq!(bit_count(9), 4);
    }

    #[test]
    fn range_clauses_admit_exactly_the_range() {
        let n = 4;
        let bits: Vec<Lit> = (1..=n).map(Lit).collect();
        for lo in 0..16u32 {
            for hi in lo..16u32 {
                let clauses = range_clauses(&bits, lo, hi);
                for v in 0..16u32 {
                    let sat = clauses.iter().all(|c| {
                        c.iter().any(|l| {
                            let b = l.0.unsigned_abs() - 1;
                            (v >> b & 1 == 1) == l.is_positive()
                        })
                    });
                    assert_eq!(sat, lo <= v && v <= hi, "lo={lo} hi={hi} v={v}");
                }
            }
        }
    }
}
