//! Tableau derivations: branches with congruence closure over domain terms,
//! fair rule scheduling and verdicts.

mod arena;
mod branch;

pub use arena::{Arena, Atom, AtomBody, TermId, TermNode};
pub use branch::{AddOutcome, Branch, BranchSnapshot, BranchStatus};
mod derive;

pub use derive::{
    derive, saturate_branch, BranchOutcome, Bounds, DeriveOptions, EngineError, Stats, Strategy, TableauResult,
    Verdict,
};
