//! Tableau calculi for the multi-modal logic K_m and its extension with relational negation, represented as data.

pub mod cli;
pub mod engine;
pub mod models;
pub mod oracle;
pub mod refine;
pub mod rules;
pub mod syntax;
