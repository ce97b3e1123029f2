//! Explicit-state breadth-first search over ground states. Used as an
//! independent reference for plan lengths and mutex invariants.

use std::collections::{HashMap, VecDeque};

use crate::pddl::{applicable_actions, apply, goal_reached, GroundAction, Problem, State};

/// Reachable states discovered by breadth-first search from the initial state.
#[derive(Clone, Debug)]
pub struct StateSpace {
    pub states: Vec<State>,
    /// Successor indices of every fully expanded state.
    pub successors: Vec<Vec<usize>>,
    /// True when every reachable state was found and expanded.
    pub complete: bool,
}

impl StateSpace {
    /// Explores at most `cap` states.
    pub fn explore(problem: &Problem, cap: usize) -> Self {
        let mut space = StateSpace { states: Vec::new(), successors: Vec::new(), complete: false };
        if cap == 0 {
            return space;
        }
        let mut index: HashMap<State, usize> = HashMap::new();
        let init: State = problem.init.iter().cloned().collect();
        index.insert(init.clone(), 0);
        space.states.push(init);
        let mut next = 0;
        while next < space.states.len() {
            let s = space.states[next].clone();
            let mut succ = Vec::new();
            for a in applicable_actions(problem, &s) {
                let t = apply(problem, &s, &a);
                let id = match index.get(&t) {
                    Some(&id) => id,
                    None => {
                        if space.states.len() >= cap {
                            return space;
                        }
                        let id = space.states.len();
                        index.insert(t.clone(), id);
                        space.states.push(t);
                        id
                    }
                };
                succ.push(id);
            }
            space.successors.push(succ);
            next += 1;
        }
        space.complete = true;
        space
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OracleResult {
    Optimal(usize),
    Unreachable,
    Capped,
}

/// Length of a shortest plan, found by breadth-first search over at most
/// `cap` states.
pub fn bfs_oracle(problem: &Problem, cap: usize) -> OracleResult {
    match bfs_plan(problem, cap) {
        Ok(Some(plan)) => OracleResult::Optimal(plan.len()),
        Ok(None) => OracleResult::Unreachable,
        Err(Capped) => OracleResult::Capped,
    }
}

/// The state cap was reached before the search finished.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Capped;

/// A shortest plan, `Ok(None)` if the goal is unreachable.
pub fn bfs_plan(problem: &Problem, cap: usize) -> Result<Option<Vec<GroundAction>>, Capped> {
    if cap == 0 {
        return Err(Capped);
    }
    let init: State = problem.init.iter().cloned().collect();
    let mut parent: Vec<Option<(usize, GroundAction)>> = vec![None];
    let mut states = vec![init.clone()];
    let mut index: HashMap<State, usize> = HashMap::from([(init, 0)]);
    let mut queue = VecDeque::from([0usize]);
    let path = |mut i: usize, parent: &[Option<(usize, GroundAction)>]| {
        let mut plan = Vec::new();
        while let Some((p, a)) = &parent[i] {
            plan.push(a.clone());
            i = *p;
        }
        plan.reverse();
        plan
    };
    if goal_reached(problem, &states[0]) {
        return Ok(Some(Vec::new()));
    }
    while let Some(i) = queue.pop_front() {
        let s = states[i].clone();
        for a in applicable_actions(problem, &s) {
            let t = apply(problem, &s, &a);
            if index.contains_key(&t) {
                continue;
            }
            if states.len() >= cap {
                return Err(Capped);
            }
            let id = states.len();
            let done = goal_reached(problem, &t);
            index.insert(t.clone(), id);
            states.push(t);
            parent.push(Some((i, a)));
            if done {
                return Ok(Some(path(id, &parent)));
            }
            queue.push_back(id);
        }
    }
    Ok(None)
}
