pub mod actions;
pub mod bench;
pub mod cnf;
pub mod cover;
pub mod encode;
pub mod mutex;
pub mod pddl;
pub mod plan;
pub mod search;
pub mod solve;
