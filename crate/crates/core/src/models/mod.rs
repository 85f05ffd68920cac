//! Models read off open branches, evaluation of formulae and relations in
//! them, the reflection check and frame-condition checks.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::{Arena, Branch, BranchSnapshot};
use crate::rules::{
    expand_free, instantiate_atom, match_numerator, Binding, GroundValue, PatternAtom, Rule, Value,
};
use crate::syntax::{DomainTerm, FrameCondition, Formula, Payload, Relation, SignedAtom};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("the branch is closed")]
    ClosedBranch,
    #[error("no domain element {0}")]
    UnknownClass(usize),
    #[error("term `{0}` does not occur in the model")]
    UnknownTerm(String),
    #[error("nominal `{0}` cannot be evaluated")]
    Nominal(String),
    #[error("rule `{rule}` has no denominator {index}")]
    NoSuchDenominator { rule: String, index: usize },
}

/// A finite Kripke model. Domain elements are indices into `domain`, which
/// holds their display names.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Model {
    pub domain: Vec<String>,
    pub props: BTreeSet<(String, usize)>,
    pub rels: BTreeSet<(String, usize, usize)>,
    /// Relation constants of the signature, including those with empty extension.
    pub relations: BTreeSet<String>,
    /// Interpretation of domain terms.
    pub class_of: BTreeMap<DomainTerm, usize>,
}

/// Serialized form of a model, elements referred to by name.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelJson {
    pub domain: Vec<String>,
    pub prop_val: Vec<(String, String)>,
    pub rel_val: Vec<(String, String, String)>,
}

impl Model {
    fn check(&self, e: usize) -> Result<(), ModelError> {
        if e < self.domain.len() {
            Ok(())
        } else {
            Err(ModelError::UnknownClass(e))
        }
    }

    pub fn element(&self, t: &DomainTerm) -> Result<usize, ModelError> {
        self.class_of.get(t).copied().ok_or_else(|| ModelError::UnknownTerm(t.to_string()))
    }

    /// JSON view with the propositions in `hidden` left out.
    pub fn to_json(&self, hidden: &BTreeSet<String>) -> ModelJson {
        let name = |e: usize| self.domain[e].clone();
        ModelJson {
            domain: self.domain.clone(),
            prop_val: self
                .props
                .iter()
                .filter(|(p, _)| !hidden.contains(p))
                .map(|(p, e)| (p.clone(), name(*e)))
                .collect(),
            rel_val: self.rels.iter().map(|(r, s, t)| (r.clone(), name(*s), name(*t))).collect(),
        }
    }
}

/// The model of an open branch: one element per term class, and exactly the
/// positive atomic facts of the branch.
pub fn extract_model(branch: &BranchSnapshot) -> Result<Model, ModelError> {
    if branch.closed.is_some() {
        return Err(ModelError::ClosedBranch);
    }
    let mut model = Model::default();
    for (e, (rep, members)) in branch.classes.iter().enumerate() {
        model.domain.push(rep.to_string());
        model.class_of.insert(rep.clone(), e);
        for m in members {
            model.class_of.insert(m.clone(), e);
        }
    }
    for atom in &branch.atoms {
        match &atom.payload {
            Payload::HoldsF(f, _) => model.relations.extend(f.relation_constants()),
            Payload::HoldsR(r, _, _) => {
                model.relations.insert(r.base().to_string());
            }
            Payload::Equal(..) => {}
        }
        if !atom.positive {
            continue;
        }
        match &atom.payload {
            Payload::HoldsF(Formula::Prop(p), t) => {
                let e = model.element(t)?;
                model.props.insert((p.clone(), e));
            }
            Payload::HoldsR(Relation::Const(r), s, t) => {
                let (s, t) = (model.element(s)?, model.element(t)?);
                model.rels.insert((r.clone(), s, t));
            }
            _ => {}
        }
    }
    Ok(model)
}

pub fn eval_relation(m: &Model, rel: &Relation, e: usize, e2: usize) -> Result<bool, ModelError> {
    m.check(e)?;
    m.check(e2)?;
    Ok(relation(m, rel, e, e2))
}

fn relation(m: &Model, rel: &Relation, e: usize, e2: usize) -> bool {
    match rel {
        Relation::Const(r) => m.rels.contains(&(r.clone(), e, e2)),
        Relation::Not(inner) => !relation(m, inner, e, e2),
    }
}

pub fn eval_formula(m: &Model, fml: &Formula, e: usize) -> Result<bool, ModelError> {
    m.check(e)?;
    formula(m, fml, e)
}

fn formula(m: &Model, fml: &Formula, e: usize) -> Result<bool, ModelError> {
    Ok(match fml {
        Formula::Prop(p) => m.props.contains(&(p.clone(), e)),
        Formula::Nom(n) => return Err(ModelError::Nominal(n.clone())),
        Formula::Not(inner) => !formula(m, inner, e)?,
        Formula::Or(l, r) => formula(m, l, e)? || formula(m, r, e)?,
        Formula::Box(rel, inner) => {
            for e2 in 0..m.domain.len() {
                if relation(m, rel, e, e2) && !formula(m, inner, e2)? {
                    return Ok(false);
                }
            }
            true
        }
    })
}

/// Truth of a signed ground atom.
pub fn eval_atom(m: &Model, atom: &SignedAtom) -> Result<bool, ModelError> {
    let value = match &atom.payload {
        Payload::HoldsF(f, t) => formula(m, f, m.element(t)?)?,
        Payload::HoldsR(r, s, t) => relation(m, r, m.element(s)?, m.element(t)?),
        Payload::Equal(s, t) => m.element(s)? == m.element(t)?,
    };
    Ok(value == atom.positive)
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct ReflectionReport {
    pub checked: usize,
    pub violations: Vec<SignedAtom>,
}

impl ReflectionReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks that every atom and equality of the branch is true in `m`.
pub fn reflects(m: &Model, branch: &BranchSnapshot) -> ReflectionReport {
    let mut report = ReflectionReport::default();
    let equalities = branch.equalities.iter().map(|(s, t)| SignedAtom::equal(true, s.clone(), t.clone()));
    for atom in branch.atoms.iter().cloned().chain(equalities) {
        report.checked += 1;
        if eval_atom(m, &atom) != Ok(true) {
            report.violations.push(atom);
        }
    }
    report
}

pub fn check_frame_condition(m: &Model, cond: FrameCondition) -> bool {
    let n = m.domain.len();
    let r = |a: &str, s: usize, t: usize| m.rels.contains(&(a.to_string(), s, t));
    match cond {
        FrameCondition::Irreflexive => m.relations.iter().all(|a| (0..n).all(|e| !r(a, e, e))),
        FrameCondition::ImmediatePredecessor => m.relations.iter().all(|a| {
            (0..n).all(|e| {
                (0..n).any(|p| {
                    r(a, p, e) && p != e && (0..n).all(|mid| !(r(a, p, mid) && r(a, mid, e)) || mid == e || mid == p)
                })
            })
        }),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct DiagnosticReport {
    pub rule: String,
    pub denominator: usize,
    /// Substitutions whose numerator instance is in the branch.
    pub checked: usize,
    /// Substitutions where the model falsifies the refined denominator and no
    /// other denominator instance is in the branch.
    pub counterexamples: Vec<BTreeMap<String, GroundValue>>,
}

/// Branch-local check of the general refinement condition for refining `rule`
/// at `denom_index` (1-based): whenever the numerator instance is in the
/// branch and the model falsifies that denominator, some other denominator
/// instance must already be in the branch.
pub fn diagnose_general_condition(
    branch: &BranchSnapshot,
    rule: &Rule,
    denom_index: usize,
) -> Result<DiagnosticReport, ModelError> {
    if denom_index == 0 || denom_index > rule.denominators.len() {
        return Err(ModelError::NoSuchDenominator { rule: rule.id.clone(), index: denom_index });
    }
    let model = extract_model(branch)?;
    let mut arena = Arena::new();
    let live = branch.restore(&mut arena);
    let relations: Vec<Relation> = model.relations.iter().map(Relation::constant).collect();
    let mut report = DiagnosticReport { rule: rule.id.clone(), denominator: denom_index, ..Default::default() };
    for b in match_numerator(rule, &live, &arena, None) {
        for b in expand_free(rule, &b, &live, &relations) {
            report.checked += 1;
            let Some(refined) = ground(&rule.denominators[denom_index - 1], &b, &mut arena) else { continue };
            let satisfied = refined.iter().all(|a| eval_atom(&model, a) == Ok(true));
            if satisfied {
                continue;
            }
            let mut covered = false;
            for (i, d) in rule.denominators.iter().enumerate() {
                if i + 1 == denom_index {
                    continue;
                }
                if let Some(atoms) = ground(d, &b, &mut arena) {
                    if atoms.iter().all(|a| in_branch(&live, &mut arena, a)) {
                        covered = true;
                        break;
                    }
                }
            }
            if !covered {
                let resolved = b
                    .iter()
                    .map(|(k, v)| {
                        let g = match v {
                            Value::F(f) => GroundValue::F(f.clone()),
                            Value::R(r) => GroundValue::R(r.clone()),
                            Value::D(t) => GroundValue::D(arena.term(*t)),
                        };
                        (k.clone(), g)
                    })
                    .collect();
                report.counterexamples.push(resolved);
            }
        }
    }
    report.counterexamples.sort();
    report.counterexamples.dedup();
    Ok(report)
}

fn ground(pats: &[PatternAtom], b: &Binding, arena: &mut Arena) -> Option<Vec<SignedAtom>> {
    pats.iter().map(|p| instantiate_atom(p, b, arena).map(|a| arena.to_atom(&a))).collect()
}

fn in_branch(branch: &Branch, arena: &mut Arena, atom: &SignedAtom) -> bool {
    if let (true, Payload::Equal(s, t)) = (atom.positive, &atom.payload) {
        let (Some(s), Some(t)) = (arena.lookup(s), arena.lookup(t)) else { return s == t };
        return branch.has_term(s) && branch.has_term(t) && branch.find(s) == branch.find(t);
    }
    let atom = arena.from_atom(atom);
    branch.contains(&branch.normalize(&atom))
}

#[cfg(test)]
mod tests;
