//! Typed STRIPS problems: parsing, the lifted representation and grounding helpers.
//!
//! Everything here is immutable once a [`Problem`] has been built. Objects are
//! numbered so that the members of every type form one contiguous index range,
//! which the binary encoder relies on for its bound constraints.

mod ground;
mod parse;
mod print;
mod sexpr;
mod types;

pub use ground::{
    achievers, apply, applicable_actions, atom_groundings, ground_facts, goal_reached,
    AtomGrounding, State,
};
pub use parse::parse;
pub use types::{flatten_types, TypeTable};

use std::fmt;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PddlError {
    #[error("{line}:{col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("unsupported requirement `{0}`")]
    UnsupportedRequirement(String),
    #[error("{line}:{col}: unsupported construct `{what}`")]
    Unsupported { line: usize, col: usize, what: String },
    #[error("type hierarchy is not a tree: {0}")]
    NonTreeHierarchy(String),
    #[error("{line}:{col}: {msg}")]
    Semantic { line: usize, col: usize, msg: String },
}

macro_rules! index_type {
    ($(#[$m:meta])* $name:ident) => {
        $(#[$m])*
        #[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub struct $name(pub u32);

        impl $name {
            #[inline]
            pub fn index(self) -> usize {
                self.0 as usize
            }
        }
    };
}

index_type!(
    /// Index into [`TypeTable`].
    TypeId
);
index_type!(
    /// Position of an object in the global object ordering.
    ObjId
);
index_type!(PredId);
index_type!(ActionId);

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Object {
    pub name: String,
    pub index: ObjId,
    /// The type the object was declared with.
    pub ty: TypeId,
    /// Declared under `:constants` in the domain.
    pub constant: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PredicateSchema {
    pub name: String,
    pub param_types: Vec<TypeId>,
    /// True when no action adds or deletes the predicate.
    pub is_static: bool,
}

impl PredicateSchema {
    pub fn arity(&self) -> usize {
        self.param_types.len()
    }
}

/// Argument of an atom inside an action schema.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    /// Index into the action's parameter list.
    Param(usize),
    Obj(ObjId),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Atom {
    pub pred: PredId,
    pub args: Vec<Term>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Polarity {
    Add,
    Del,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Param {
    pub name: String,
    pub ty: TypeId,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ActionSchema {
    pub name: String,
    pub params: Vec<Param>,
    pub prec: Vec<Atom>,
    pub add: Vec<Atom>,
    pub del: Vec<Atom>,
}

impl ActionSchema {
    pub fn effects(&self, polarity: Polarity) -> &[Atom] {
        match polarity {
            Polarity::Add => &self.add,
            Polarity::Del => &self.del,
        }
    }

    /// Add effects followed by delete effects, each tagged with its polarity and
    /// its index inside its own list.
    pub fn all_effects(&self) -> impl Iterator<Item = (Polarity, usize, &Atom)> {
        self.add
            .iter()
            .enumerate()
            .map(|(i, a)| (Polarity::Add, i, a))
            .chain(self.del.iter().enumerate().map(|(i, a)| (Polarity::Del, i, a)))
    }
}

/// A fully ground atom.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Fact {
    pub pred: PredId,
    pub args: Vec<ObjId>,
}

impl Fact {
    pub fn new(pred: PredId, args: Vec<ObjId>) -> Self {
        Fact { pred, args }
    }
}

/// An action schema together with one object per parameter.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroundAction {
    pub action: ActionId,
    pub args: Vec<ObjId>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Problem {
    pub domain_name: String,
    pub name: String,
    pub types: TypeTable,
    pub objects: Vec<Object>,
    pub predicates: Vec<PredicateSchema>,
    pub actions: Vec<ActionSchema>,
    /// Sorted and deduplicated.
    pub init: Vec<Fact>,
    /// Sorted and deduplicated.
    pub goal: Vec<Fact>,
}

impl Problem {
    pub fn predicate(&self, p: PredId) -> &PredicateSchema {
        &self.predicates[p.index()]
    }

    pub fn action(&self, a: ActionId) -> &ActionSchema {
        &self.actions[a.index()]
    }

    pub fn object(&self, o: ObjId) -> &Object {
        &self.objects[o.index()]
    }

    pub fn predicate_id(&self, name: &str) -> Option<PredId> {
        self.predicates
            .iter()
            .position(|p| p.name == name)
            .map(|i| PredId(i as u32))
    }

    pub fn action_id(&self, name: &str) -> Option<ActionId> {
        self.actions
            .iter()
            .position(|a| a.name == name)
            .map(|i| ActionId(i as u32))
    }

    pub fn object_id(&self, name: &str) -> Option<ObjId> {
        self.objects
            .iter()
            .position(|o| o.name == name)
            .map(|i| ObjId(i as u32))
    }

    pub fn action_ids(&self) -> impl Iterator<Item = ActionId> {
        (0..self.actions.len() as u32).map(ActionId)
    }

    pub fn pred_ids(&self) -> impl Iterator<Item = PredId> {
        (0..self.predicates.len() as u32).map(PredId)
    }

    pub fn is_init(&self, f: &Fact) -> bool {
        self.init.binary_search(f).is_ok()
    }

    /// Builds a fact from names, e.g. `problem.fact("at", &["p", "l"])`.
    /// Panics on unknown names; meant for tests and examples.
    pub fn fact(&self, pred: &str, args: &[&str]) -> Fact {
        let p = self
            .predicate_id(pred)
            .unwrap_or_else(|| panic!("unknown predicate {pred}"));
        let args = args
            .iter()
            .map(|a| self.object_id(a).unwrap_or_else(|| panic!("unknown object {a}")))
            .collect();
        Fact::new(p, args)
    }

    /// Builds a ground action from names. Panics on unknown names.
    pub fn ground_action(&self, action: &str, args: &[&str]) -> GroundAction {
        let a = self
            .action_id(action)
            .unwrap_or_else(|| panic!("unknown action {action}"));
        let args = args
            .iter()
            .map(|x| self.object_id(x).unwrap_or_else(|| panic!("unknown object {x}")))
            .collect();
        GroundAction { action: a, args }
    }

    pub fn display_fact<'a>(&'a self, f: &'a Fact) -> impl fmt::Display + 'a {
        DisplayFact { problem: self, fact: f }
    }

    pub fn display_action<'a>(&'a self, ga: &'a GroundAction) -> impl fmt::Display + 'a {
        DisplayAction { problem: self, action: ga }
    }

    /// Renders a schema atom with parameter names, e.g. `at(?v, ?l)`.
    pub fn display_atom(&self, action: ActionId, atom: &Atom) -> String {
        let schema = self.action(action);
        let args: Vec<String> = atom
            .args
            .iter()
            .map(|t| match *t {
                Term::Param(i) => schema.params[i].name.clone(),
                Term::Obj(o) => self.object(o).name.clone(),
            })
            .collect();
        format!("{}({})", self.predicate(atom.pred).name, args.join(", "))
    }
}

struct DisplayFact<'a> {
    problem: &'a Problem,
    fact: &'a Fact,
}

impl fmt::Display for DisplayFact<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.problem.predicate(self.fact.pred).name)?;
        for (i, o) in self.fact.args.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", self.problem.object(*o).name)?;
        }
        write!(f, ")")
    }
}

struct DisplayAction<'a> {
    problem: &'a Problem,
    action: &'a GroundAction,
}

impl fmt::Display for DisplayAction<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}", self.problem.action(self.action.action).name)?;
        for o in &self.action.args {
            write!(f, " {}", self.problem.object(*o).name)?;
        }
        write!(f, ")")
    }
}
