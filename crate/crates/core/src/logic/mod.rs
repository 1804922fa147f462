//! Propositional formulas, clausal form and a DPLL-backed reasoner.

pub mod cnf;
mod formula;
mod parse;
mod reasoner;
pub mod sat;

pub use formula::Formula;
pub use parse::{parse_formula, ParseError};
pub use reasoner::{
    EntailmentType, EntailmentTypes, InconsistentKb, InferenceCounter, KnowledgeBase, Reasoner,
};
