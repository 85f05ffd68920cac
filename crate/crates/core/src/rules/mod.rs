//! Rules as data: schematic atoms, calculi, matching against branches and
//! the built-in catalog.

mod catalog;
mod json;
mod matching;
mod pattern;

use thiserror::Error;

pub use catalog::{builtin_calculus, family_rules, CATALOG};
pub use json::{parse_pattern, CalculusJson, RuleJson};
pub use matching::{
    apply_instantiation, expand_free, flat_disjuncts, format_binding, inst_f, instantiate_atom,
    instantiate_denominators, match_atom, match_numerator, match_rule, normalize_binding,
    side_conditions_hold, Application, Binding, GroundValue, Instantiation, Value,
};
pub use pattern::{
    Calculus, ClausifyMode, DPat, FPat, Family, PatPayload, PatternAtom, RPat, Rule, RuleShape,
    SideCondition, Sort,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RuleError {
    #[error("unknown calculus `{0}`")]
    UnknownCalculus(String),
    #[error("unknown rule `{0}`")]
    UnknownRule(String),
    #[error("unknown rule family `{0}`")]
    UnknownFamily(String),
    #[error("duplicate rule id `{0}`")]
    DuplicateRule(String),
    #[error("rule `{rule}` uses variable `{var}` at two sorts")]
    IllSorted { rule: String, var: String },
    #[error("bad pattern `{text}`: {message}")]
    Pattern { text: String, message: String },
    #[error("rule `{rule}` has no denominator {index}")]
    NoSuchDenominator { rule: String, index: usize },
    #[error("calculus `{calculus}` lacks {what}")]
    MissingPrerequisite { calculus: String, what: String },
}
