//! Choosing which mutex groups encode the state, which facts stay ground,
//! and which predicates are dropped entirely.

use std::collections::{BTreeSet, HashSet};
use std::fmt::Write;

use crate::actions::StaticHandling;
use crate::mutex::{instantiate, LmgCandidate, Plmg};
use crate::pddl::{ground_facts, Fact, PredId, Problem};

/// Predicates occurring in no precondition, with the goal facts over them.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Pruning {
    pub kept: BTreeSet<PredId>,
    pub pruned: BTreeSet<PredId>,
    pub goal_exceptions: Vec<Fact>,
}

pub fn prune_predicates(problem: &Problem) -> Pruning {
    let used: BTreeSet<PredId> = problem
        .actions
        .iter()
        .flat_map(|a| a.prec.iter().map(|x| x.pred))
        .collect();
    let (kept, pruned) = problem.pred_ids().partition(|p| used.contains(p));
    let goal_exceptions = problem.goal.iter().filter(|g| !used.contains(&g.pred)).cloned().collect();
    Pruning { kept, pruned, goal_exceptions }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Disposition {
    CoveredByLmg,
    Grounded,
    Pruned,
    Static,
}

impl Disposition {
    pub fn as_str(self) -> &'static str {
        match self {
            Disposition::CoveredByLmg => "covered-by-LMG",
            Disposition::Grounded => "grounded",
            Disposition::Pruned => "pruned",
            Disposition::Static => "static",
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct CoverResult {
    /// 𝔓, in selection order.
    pub selected: Vec<Plmg>,
    /// 𝔘: state facts outside every selected group, plus the goal exceptions.
    pub uncovered: Vec<Fact>,
    /// Predicates removed by a group covering all of their facts.
    pub covered_predicates: BTreeSet<PredId>,
    pub pruned_predicates: BTreeSet<PredId>,
    pub goal_exception_facts: Vec<Fact>,
    /// Goal facts over predicates handled by the action layer. They never
    /// change, so they are encoded as frozen ground facts.
    pub static_goal_facts: Vec<Fact>,
    /// Facts newly covered by each selected group at selection time.
    pub newly_covered: Vec<usize>,
    /// Ties and other choices made during selection.
    pub notes: Vec<String>,
}

impl CoverResult {
    /// Facts encoded with one variable per layer: 𝔘 and the static goal facts.
    pub fn ground_facts(&self) -> Vec<Fact> {
        let mut out: Vec<Fact> = self.uncovered.iter().chain(&self.static_goal_facts).cloned().collect();
        out.sort();
        out.dedup();
        out
    }

    pub fn disposition(&self, statics: &StaticHandling, p: PredId) -> Disposition {
        if self.pruned_predicates.contains(&p) {
            Disposition::Pruned
        } else if statics.in_layer(p) {
            Disposition::Static
        } else if self.uncovered.iter().any(|f| f.pred == p) {
            Disposition::Grounded
        } else {
            Disposition::CoveredByLmg
        }
    }

    /// One line per predicate, then |𝔓| and |𝔘|.
    pub fn report(&self, problem: &Problem, statics: &StaticHandling) -> String {
        let mut out = String::new();
        for p in problem.pred_ids() {
            let _ = writeln!(out, "{}: {}", problem.predicate(p).name, self.disposition(statics, p).as_str());
        }
        let _ = writeln!(out, "|P| = {}", self.selected.len());
        let _ = writeln!(out, "|U| = {}", self.uncovered.len());
        for n in &self.notes {
            let _ = writeln!(out, "note: {n}");
        }
        out
    }
}

/// Facts that need a state representation: all groundings of predicates that
/// are neither handled by the action layer nor pruned.
pub fn state_facts(problem: &Problem, statics: &StaticHandling, pruned: &BTreeSet<PredId>) -> Vec<Fact> {
    problem
        .pred_ids()
        .filter(|p| !statics.in_layer(*p) && !pruned.contains(p))
        .flat_map(|p| ground_facts(problem, p))
        .collect()
}

/// Selects groups from verified candidates.
///
/// Phase 1 repeatedly takes the first candidate (in generation order) whose
/// groups together contain every state fact of some remaining predicate and
/// selects all of its groups. Phase 2 then picks single groups greedily by
/// the number of state facts they newly cover, preferring exactly-one groups,
/// then fewer counted variables, then generation order.
pub fn select_cover(problem: &Problem, verified: &[LmgCandidate], pruning: bool) -> CoverResult {
    let statics = StaticHandling::compute(problem);
    let prune = if pruning { prune_predicates(problem) } else { Pruning::default() };
    let facts = state_facts(problem, &statics, &prune.pruned);
    let relevant: HashSet<&Fact> = facts.iter().collect();
    let mut covered: HashSet<Fact> = HashSet::new();
    let mut result = CoverResult {
        pruned_predicates: prune.pruned.clone(),
        goal_exception_facts: prune.goal_exceptions.clone(),
        static_goal_facts: problem.goal.iter().filter(|g| statics.in_layer(g.pred)).cloned().collect(),
        ..CoverResult::default()
    };

    let eligible: Vec<(usize, Vec<Plmg>)> = verified
        .iter()
        .enumerate()
        .filter(|(_, c)| c.predicates().all(|p| !statics.in_layer(p) && !prune.pruned.contains(&p)))
        .map(|(i, c)| {
            let groups = instantiate(c, i, problem).into_iter().filter(|g| !g.facts.is_empty()).collect();
            (i, groups)
        })
        .collect();
    let mut used = vec![false; eligible.len()];

    let mut remaining: BTreeSet<PredId> = facts.iter().map(|f| f.pred).collect();
    let full_cover = |groups: &[Plmg], p: PredId| -> bool {
        let union: HashSet<&Fact> = groups.iter().flat_map(|g| g.facts.iter()).filter(|f| f.pred == p).collect();
        facts.iter().filter(|f| f.pred == p).all(|f| union.contains(f))
    };
    loop {
        let mut pick = None;
        'search: for (k, (_, groups)) in eligible.iter().enumerate() {
            if used[k] {
                continue;
            }
            for &p in &remaining {
                if full_cover(groups, p) {
                    pick = Some((k, p));
                    break 'search;
                }
            }
        }
        let Some((k, p)) = pick else { break };
        let others: Vec<usize> = (k + 1..eligible.len())
            .filter(|&j| !used[j] && full_cover(&eligible[j].1, p))
            .map(|j| eligible[j].0)
            .collect();
        if !others.is_empty() {
            result.notes.push(format!(
                "{} fully covered by candidates {:?} as well; took candidate {}",
                problem.predicate(p).name,
                others,
                eligible[k].0
            ));
        }
        used[k] = true;
        for g in &eligible[k].1 {
            let new = g.facts.iter().filter(|f| relevant.contains(f) && covered.insert((*f).clone())).count();
            result.newly_covered.push(new);
            result.selected.push(g.clone());
        }
        let done: Vec<PredId> = remaining.iter().copied().filter(|q| full_cover(&eligible[k].1, *q)).collect();
        for q in done {
            remaining.remove(&q);
            result.covered_predicates.insert(q);
        }
    }

    let mut pool: Vec<&Plmg> = eligible
        .iter()
        .enumerate()
        .filter(|(k, _)| !used[*k])
        .flat_map(|(_, (_, groups))| groups.iter())
        .collect();
    loop {
        let mut best: Option<(usize, usize)> = None;
        for (i, g) in pool.iter().enumerate() {
            let new = g.facts.iter().filter(|f| relevant.contains(f) && !covered.contains(*f)).count();
            if new == 0 {
                continue;
            }
            let better = match best {
                None => true,
                Some((bi, bn)) => {
                    let b = pool[bi];
                    (new, g.exactly_one, std::cmp::Reverse(g.cnt.len()))
                        > (bn, b.exactly_one, std::cmp::Reverse(b.cnt.len()))
                }
            };
            if better {
                best = Some((i, new));
            }
        }
        let Some((i, new)) = best else { break };
        let g = pool.remove(i);
        for f in &g.facts {
            if relevant.contains(f) {
                covered.insert(f.clone());
            }
        }
        result.newly_covered.push(new);
        result.selected.push(g.clone());
    }

    let mut uncovered: Vec<Fact> = facts.iter().filter(|f| !covered.contains(*f)).cloned().collect();
    uncovered.extend(prune.goal_exceptions.iter().cloned());
    uncovered.sort();
    uncovered.dedup();
    result.uncovered = uncovered;
    result
}

/// A cover that selects nothing: every state fact is encoded ground.
pub fn empty_cover(problem: &Problem, pruning: bool) -> CoverResult {
    select_cover(problem, &[], pruning)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mutex::infer_groups;
    use crate::pddl::parse;

    const VISIT: &str = "(define (domain grid) (:requirements :strips :typing)
      (:types place)
      (:predicates (connected ?a ?b - place) (at-robot ?x - place) (visited ?x - place))
      (:action move :parameters (?from ?to - place)
        :precondition (and (at-robot ?from) (connected ?from ?to))
        :effect (and (at-robot ?to) (not (at-robot ?from)) (visited ?to))))";

    fn grid() -> Problem {
        parse(
            VISIT,
            "(define (problem g) (:domain grid) (:objects a b c - place)
               (:init (at-robot a) (visited a) (connected a b) (connected b a) (connected b c) (connected c b))
               (:goal (and (visited a) (visited b) (visited c))))",
        )
        .unwrap()
    }

    #[test]
    fn visited_is_pruned_with_goal_exceptions() {
        let p = grid();
        let pr = prune_predicates(&p);
        let names: Vec<&str> = pr.pruned.iter().map(|x| p.predicate(*x).name.as_str()).collect();
        assert_eq!(names, vec!["visited"]);
        assert_eq!(pr.goal_exceptions.len(), 3);
    }

    #[test]
    fn robot_position_is_one_group() {
        let p = grid();
        let cover = select_cover(&p, &infer_groups(&p), true);
        assert_eq!(cover.selected.len(), 1);
        assert_eq!(cover.selected[0].facts.len(), 3);
        assert!(cover.selected[0].exactly_one);
        let uncovered: Vec<String> = cover.uncovered.iter().map(|f| p.display_fact(f).to_string()).collect();
        assert_eq!(uncovered, vec!["visited(a)", "visited(b)", "visited(c)"]);
        let statics = StaticHandling::compute(&p);
        let report = cover.report(&p, &statics);
        assert!(report.contains("at-robot: covered-by-LMG"));
        assert!(report.contains("visited: pruned"));
        assert!(report.contains("connected: static"));
    }

    #[test]
    fn without_candidates_everything_is_ground() {
        let p = grid();
        let cover = select_cover(&p, &[], false);
        assert!(cover.selected.is_empty());
        assert_eq!(cover.uncovered.len(), 6);
    }
}
