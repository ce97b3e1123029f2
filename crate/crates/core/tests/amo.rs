//! Pairwise and sequential-counter at-most-one constraints accept the same
//! assignments of the original variables.

use pgsat::cnf::{CnfFormula, Lit, VarKey};

fn constraint(n: usize, limit: usize) -> CnfFormula {
    let mut f = CnfFormula::with_amo_limit(limit);
    let lits: Vec<Lit> = (0..n).map(|i| f.var(VarKey::Fact { fact: i as u32, step: 0 }).pos()).collect();
    f.at_most_one(&lits, 0);
    f
}

/// Whether some assignment to the auxiliaries (variables after the first
/// `n`) satisfies `f` together with `x`.
fn accepts(f: &CnfFormula, n: usize, x: u32) -> bool {
    let aux = f.num_vars() - n;
    (0..1u32 << aux).any(|y| {
        f.clauses().all(|c| {
            c.iter().any(|l| {
                let v = l.var().0 as usize - 1;
                let value = if v < n { x >> v & 1 == 1 } else { y >> (v - n) & 1 == 1 };
                value == l.is_positive()
            })
        })
    })
}

#[test]
fn encodings_agree_exhaustively() {
    for n in 2..=8 {
        let pairwise = constraint(n, usize::MAX);
        let counter = constraint(n, 0);
        assert_eq!(pairwise.num_vars(), n);
        assert_eq!(counter.num_vars(), 2 * n - 1);
        assert_eq!(counter.num_clauses(), 3 * n - 4);
        for x in 0..1u32 << n {
            let want = x.count_ones() <= 1;
            assert_eq!(accepts(&pairwise, n, x), want, "pairwise n={n} x={x:b}");
            assert_eq!(accepts(&counter, n, x), want, "counter n={n} x={x:b}");
        }
    }
}
