//! Plans and their validation by simulation.

use std::fmt;

use thiserror::Error;

use crate::pddl::{apply, GroundAction, Problem, State};

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Plan {
    pub steps: Vec<GroundAction>,
}

impl Plan {
    pub fn new(steps: Vec<GroundAction>) -> Self {
        Plan { steps }
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// One `(action obj ...)` line per step.
    pub fn display<'a>(&'a self, problem: &'a Problem) -> impl fmt::Display + 'a {
        PlanDisplay { plan: self, problem }
    }
}

struct PlanDisplay<'a> {
    plan: &'a Plan,
    problem: &'a Problem,
}

impl fmt::Display for PlanDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for step in &self.plan.steps {
            writeln!(f, "{}", self.problem.display_action(step))?;
        }
        Ok(())
    }
}

/// Why a plan fails. Steps are numbered from 1.
#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum Invalid {
    #[error("step {step}: arguments violate the parameter types")]
    BadArguments { step: usize },
    #[error("step {step}: precondition {fact} does not hold")]
    MissingPrecondition { step: usize, fact: String },
    #[error("goal {fact} does not hold after the plan")]
    MissingGoal { fact: String },
}

/// Simulates `plan` from the initial state and returns the final state.
pub fn validate(plan: &Plan, problem: &Problem) -> Result<State, Invalid> {
    let mut state: State = problem.init.iter().cloned().collect();
    for (i, a) in plan.steps.iter().enumerate() {
        let step = i + 1;
        if a.args.len() != problem.action(a.action).params.len() || !a.respects_types(problem) {
            return Err(Invalid::BadArguments { step });
        }
        if let Some(f) = a.prec(problem).into_iter().find(|f| !state.contains(f)) {
            return Err(Invalid::MissingPrecondition { step, fact: problem.display_fact(&f).to_string() });
        }
        state = apply(problem, &state, a);
    }
    if let Some(g) = problem.goal.iter().find(|g| !state.contains(*g)) {
        return Err(Invalid::MissingGoal { fact: problem.display_fact(g).to_string() });
    }
    Ok(state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pddl::parse;

    fn tiny() -> Problem {
        parse(
            include_str!("../tests/data/transport/domain.pddl"),
            include_str!("../tests/data/transport/p01.pddl"),
        )
        .unwrap()
    }

    #[test]
    fn single_drop_is_valid() {
        let p = tiny();
        let plan = Plan::new(vec![p.ground_action("drop", &["v", "l", "p"])]);
        assert!(validate(&plan, &p).is_ok());
        assert_eq!(plan.display(&p).to_string(), "(drop v l p)\n");
    }

    #[test]
    fn second_drop_misses_in() {
        let p = tiny();
        let d = p.ground_action("drop", &["v", "l", "p"]);
        let plan = Plan::new(vec![d.clone(), d]);
        assert_eq!(
            validate(&plan, &p),
            Err(Invalid::MissingPrecondition { step: 2, fact: "in(p,v)".into() })
        );
    }

    #[test]
    fn empty_plan_misses_goal() {
        let p = tiny();
        assert_eq!(validate(&Plan::default(), &p), Err(Invalid::MissingGoal { fact: "at(p,l)".into() }));
    }
}
