use std::collections::{BTreeSet, HashMap};
use std::fmt;

use crate::syntax::Formula;

/// Disjunction of literals: `~n1 | .. | ~nm | p1 | .. | pn`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Clause {
    /// Atoms occurring negated.
    pub negatives: Vec<Formula>,
    /// Remaining disjuncts; none is a negated atom.
    pub positives: Vec<Formula>,
}

impl Clause {
    pub fn width(&self) -> usize {
        self.negatives.len() + self.positives.len()
    }

    pub fn literal_count(&self) -> usize {
        self.width()
    }

    pub fn literals(&self) -> impl Iterator<Item = Formula> + '_ {
        self.negatives
            .iter()
            .map(|a| Formula::negate(a.clone()))
            .chain(self.positives.iter().cloned())
    }

    /// The clause as a formula, negatives first. The empty clause has no formula.
    pub fn to_formula(&self) -> Option<Formula> {
        self.literals().reduce(Formula::or)
    }

    fn from_literals(lits: Vec<Formula>) -> Option<Clause> {
        let mut negatives = BTreeSet::new();
        let mut positives = BTreeSet::new();
        for lit in lits {
            match lit {
                Formula::Not(a) if a.is_atomic() => {
                    negatives.insert(*a);
                }
                other => {
                    positives.insert(other);
                }
            }
        }
        let tautology = negatives.iter().any(|a| positives.contains(a))
            || positives.iter().any(|l| match l {
                Formula::Not(inner) => positives.contains(inner.as_ref()),
                _ => false,
            });
        if tautology {
            return None;
        }
        Some(Clause { negatives: negatives.into_iter().collect(), positives: positives.into_iter().collect() })
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .negatives
            .iter()
            .map(|a| format!("~{a}"))
            .chain(self.positives.iter().map(|p| {
                if matches!(p, Formula::Or(..)) {
                    format!("({p})")
                } else {
                    p.to_string()
                }
            }))
            .collect();
        if parts.is_empty() {
            write!(f, "FALSE")
        } else {
            write!(f, "{}", parts.join(" | "))
        }
    }
}

/// Polarity-aware definitional clausifier. Definition propositions are shared
/// across calls, so one instance serves a whole derivation.
#[derive(Clone, Debug, Default)]
pub struct Clausifier {
    taken: BTreeSet<String>,
    names: HashMap<(Formula, bool), (Formula, Vec<Clause>)>,
    defined: BTreeSet<String>,
    next: usize,
}

impl Clausifier {
    /// `taken` are proposition names the definitions must avoid.
    pub fn new(taken: BTreeSet<String>) -> Self {
        Clausifier { taken, ..Self::default() }
    }

    /// Names introduced so far.
    pub fn definitions(&self) -> &BTreeSet<String> {
        &self.defined
    }

    pub fn clausify(&mut self, fml: &Formula) -> Vec<Clause> {
        let mut out = Vec::new();
        let mut defs = Vec::new();
        for (item, pol) in conjuncts(fml, true) {
            let lits = self.disjuncts(item, pol, &mut defs);
            out.extend(Clause::from_literals(lits));
        }
        out.extend(defs);
        let mut seen = BTreeSet::new();
        out.retain(|c| seen.insert(c.clone()));
        out
    }

    fn disjuncts(&mut self, fml: &Formula, pol: bool, defs: &mut Vec<Clause>) -> Vec<Formula> {
        match (fml, pol) {
            (Formula::Not(inner), _) => self.disjuncts(inner, !pol, defs),
            (Formula::Or(l, r), true) => {
                let mut out = self.disjuncts(l, true, defs);
                out.extend(self.disjuncts(r, true, defs));
                out
            }
            (Formula::Or(..), false) => vec![self.define(fml, pol, defs)],
            (atom, true) => vec![atom.clone()],
            (atom, false) => vec![Formula::negate(atom.clone())],
        }
    }

    /// Proposition `d` with clauses `~d | member` for every conjunct of (fml, pol).
    fn define(&mut self, fml: &Formula, pol: bool, defs: &mut Vec<Clause>) -> Formula {
        // Reuse re-emits the defining clauses: earlier output may live on another branch.
        if let Some((d, clauses)) = self.names.get(&(fml.clone(), pol)) {
            defs.extend(clauses.iter().cloned());
            return d.clone();
        }
        let d = Formula::prop(self.fresh());
        let start = defs.len();
        for (item, ipol) in conjuncts(fml, pol) {
            let mut lits = vec![Formula::negate(d.clone())];
            lits.extend(self.disjuncts(item, ipol, defs));
            defs.extend(Clause::from_literals(lits));
        }
        self.names.insert((fml.clone(), pol), (d.clone(), defs[start..].to_vec()));
        d
    }

    fn fresh(&mut self) -> String {
        loop {
            let name = format!("d{}", self.next);
            self.next += 1;
            if !self.taken.contains(&name) {
                self.defined.insert(name.clone());
                return name;
            }
        }
    }
}

/// Conjunctive reading of a signed formula: members that must all hold, each a
/// literal or a positive disjunction.
fn conjuncts(fml: &Formula, pol: bool) -> Vec<(&Formula, bool)> {
    match (fml, pol) {
        (Formula::Not(inner), _) => conjuncts(inner, !pol),
        (Formula::Or(l, r), false) => {
            let mut out = conjuncts(l, false);
            out.extend(conjuncts(r, false));
            out
        }
        _ => vec![(fml, pol)],
    }
}

/// Equisatisfiable clause set for a formula; modal literals stay opaque.
pub fn clausify(fml: &Formula) -> Vec<Clause> {
    Clausifier::new(fml.props()).clausify(fml)
}
