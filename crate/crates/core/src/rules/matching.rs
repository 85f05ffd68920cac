use std::collections::{BTreeMap, BTreeSet};

use super::pattern::{DPat, FPat, PatPayload, PatternAtom, RPat, Rule, SideCondition, Sort};
use crate::engine::{Arena, Atom, AtomBody, Branch, TermId, TermNode};
use crate::syntax::{DomainTerm, Formula, Relation};

/// Ground value of a schema variable.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Value {
    F(Formula),
    R(Relation),
    D(TermId),
}

pub type Binding = BTreeMap<String, Value>;

/// A rule together with a substitution whose numerator instance is in a branch.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Instantiation {
    pub rule: String,
    pub substitution: Binding,
    /// Numerator instance, normalized to class representatives.
    pub matched: Vec<Atom>,
}

/// Substitution value with terms spelled out.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum GroundValue {
    F(Formula),
    R(Relation),
    D(DomainTerm),
}

impl Instantiation {
    pub fn resolve(&self, arena: &Arena) -> BTreeMap<String, GroundValue> {
        self.substitution
            .iter()
            .map(|(k, v)| {
                let g = match v {
                    Value::F(f) => GroundValue::F(f.clone()),
                    Value::R(r) => GroundValue::R(r.clone()),
                    Value::D(t) => GroundValue::D(arena.term(*t)),
                };
                (k.clone(), g)
            })
            .collect()
    }
}

/// Renders a substitution as `x:=a, p:=q`.
pub fn format_binding(binding: &Binding, arena: &Arena) -> String {
    binding
        .iter()
        .map(|(k, v)| match v {
            Value::F(f) => format!("{k}:={f}"),
            Value::R(r) => format!("{k}:={r}"),
            Value::D(t) => format!("{k}:={}", arena.term(*t)),
        })
        .collect::<Vec<_>>()
        .join(", ")
}

/// Disjuncts of a disjunction, flattened, deduplicated and sorted.
pub fn flat_disjuncts(f: &Formula) -> Vec<&Formula> {
    let mut out: Vec<&Formula> = f.disjuncts();
    out.sort();
    out.dedup();
    out
}

fn bind(b: &mut Binding, name: &str, value: Value) -> bool {
    match b.get(name) {
        Some(old) => *old == value,
        None => {
            b.insert(name.to_string(), value);
            true
        }
    }
}

pub fn match_r(p: &RPat, r: &Relation, b: &mut Binding) -> bool {
    match (p, r) {
        (RPat::Var(v), _) => bind(b, v, Value::R(r.clone())),
        (RPat::Const(c), Relation::Const(d)) => c == d,
        (RPat::Not(p), Relation::Not(r)) => match_r(p, r, b),
        _ => false,
    }
}

pub fn match_f(p: &FPat, f: &Formula, b: &mut Binding) -> bool {
    match (p, f) {
        (FPat::Var(v), _) => bind(b, v, Value::F(f.clone())),
        (FPat::Prop(c), Formula::Prop(d)) => c == d,
        (FPat::Not(p), Formula::Not(f)) => match_f(p, f, b),
        (FPat::Or(pl, pr), Formula::Or(l, r)) => match_f(pl, l, b) && match_f(pr, r, b),
        (FPat::Box(pr, pf), Formula::Box(r, f)) => match_r(pr, r, b) && match_f(pf, f, b),
        (FPat::Disj(items), Formula::Or(..)) => {
            let flat = flat_disjuncts(f);
            flat.len() == items.len() && items.iter().zip(flat).all(|(p, f)| match_f(p, f, b))
        }
        (FPat::Clause { negatives, positives }, Formula::Or(..)) => {
            let (neg, pos): (Vec<&Formula>, Vec<&Formula>) =
                flat_disjuncts(f).into_iter().partition(|d| d.is_negated_atom());
            if neg.len() != negatives.len() || pos.len() != positives.len() {
                return false;
            }
            let mut atoms: Vec<&Formula> = neg
                .into_iter()
                .map(|d| match d {
                    Formula::Not(a) => a.as_ref(),
                    _ => unreachable!("negated atom"),
                })
                .collect();
            atoms.sort();
            negatives.iter().zip(atoms).all(|(p, f)| match_f(p, f, b))
                && positives.iter().zip(pos).all(|(p, f)| match_f(p, f, b))
        }
        _ => false,
    }
}

/// All extensions of `b` under which `p` denotes the class `class`.
pub fn match_d(p: &DPat, class: TermId, b: &Binding, branch: &Branch, arena: &Arena) -> Vec<Binding> {
    match p {
        DPat::Var(v) => match b.get(v) {
            Some(Value::D(t)) if branch.find(*t) == class => vec![b.clone()],
            Some(_) => vec![],
            None => {
                let mut b = b.clone();
                b.insert(v.clone(), Value::D(class));
                vec![b]
            }
        },
        DPat::Const(c) => {
            let hit = branch
                .members(class)
                .any(|m| matches!(arena.node(m), TermNode::Const(d) if d == c));
            if hit {
                vec![b.clone()]
            } else {
                vec![]
            }
        }
        DPat::SkF(pr, pf, px) => {
            let mut out = Vec::new();
            for m in branch.members(class) {
                if let TermNode::SkF(r, f, arg) = arena.node(m) {
                    let mut b2 = b.clone();
                    if match_r(pr, r, &mut b2) && match_f(pf, f, &mut b2) {
                        out.extend(match_d(px, branch.find(*arg), &b2, branch, arena));
                    }
                }
            }
            dedup(out)
        }
        DPat::SkG(pr, px) => {
            let mut out = Vec::new();
            for m in branch.members(class) {
                if let TermNode::SkG(r, arg) = arena.node(m) {
                    let mut b2 = b.clone();
                    if match_r(pr, r, &mut b2) {
                        out.extend(match_d(px, branch.find(*arg), &b2, branch, arena));
                    }
                }
            }
            dedup(out)
        }
    }
}

fn dedup(mut v: Vec<Binding>) -> Vec<Binding> {
    if v.len() > 1 {
        v.sort();
        v.dedup();
    }
    v
}

/// Extensions of `b` matching a pattern against one stored atom.
pub fn match_atom(p: &PatternAtom, a: &Atom, b: &Binding, branch: &Branch, arena: &Arena) -> Vec<Binding> {
    if p.positive != a.positive {
        return vec![];
    }
    match (&p.payload, &a.body) {
        (PatPayload::HoldsF(pf, pt), AtomBody::F(f, t)) => {
            let mut b = b.clone();
            if !match_f(pf, f, &mut b) {
                return vec![];
            }
            match_d(pt, *t, &b, branch, arena)
        }
        (PatPayload::HoldsR(pr, ps, pt), AtomBody::R(r, s, t)) => {
            let mut b = b.clone();
            if !match_r(pr, r, &mut b) {
                return vec![];
            }
            match_d(ps, *s, &b, branch, arena)
                .iter()
                .flat_map(|b| match_d(pt, *t, b, branch, arena))
                .collect()
        }
        (PatPayload::Equal(ps, pt), AtomBody::Eq(s, t)) => {
            let mut out = match_pair(ps, pt, *s, *t, b, branch, arena);
            if s != t {
                out.extend(match_pair(ps, pt, *t, *s, b, branch, arena));
            }
            dedup(out)
        }
        _ => vec![],
    }
}

fn match_pair(ps: &DPat, pt: &DPat, s: TermId, t: TermId, b: &Binding, branch: &Branch, arena: &Arena) -> Vec<Binding> {
    match_d(ps, s, b, branch, arena)
        .iter()
        .flat_map(|b| match_d(pt, t, b, branch, arena))
        .collect()
}

/// Instantiates a pattern without creating terms. `Err` if some variable is
/// unbound; `Ok(None)` if the instance mentions a term absent from the branch.
fn lookup_atom(p: &PatternAtom, b: &Binding, branch: &Branch, arena: &Arena) -> Result<Option<Atom>, ()> {
    fn d(p: &DPat, b: &Binding, branch: &Branch, arena: &Arena) -> Result<Option<TermId>, ()> {
        Ok(match p {
            DPat::Var(v) => match b.get(v) {
                Some(Value::D(t)) => Some(*t),
                _ => return Err(()),
            },
            DPat::Const(c) => arena.lookup(&DomainTerm::Const(c.clone())).filter(|t| branch.has_term(*t)),
            DPat::SkF(r, f, x) => {
                let (r, f) = (inst_r(r, b).ok_or(())?, inst_f(f, b).ok_or(())?);
                match d(x, b, branch, arena)? {
                    // Congruent terms share a class; any member with this signature will do.
                    Some(x) => find_skolem(branch, arena, |node| {
                        matches!(node, TermNode::SkF(r2, f2, x2) if *r2 == r && *f2 == f && branch.find(*x2) == branch.find(x))
                    }),
                    None => None,
                }
            }
            DPat::SkG(r, x) => {
                let r = inst_r(r, b).ok_or(())?;
                match d(x, b, branch, arena)? {
                    Some(x) => find_skolem(branch, arena, |node| {
                        matches!(node, TermNode::SkG(r2, x2) if *r2 == r && branch.find(*x2) == branch.find(x))
                    }),
                    None => None,
                }
            }
        })
    }
    let body = match &p.payload {
        PatPayload::HoldsF(f, t) => {
            let f = inst_f(f, b).ok_or(())?;
            match d(t, b, branch, arena)? {
                Some(t) => AtomBody::F(f, t),
                None => return Ok(None),
            }
        }
        PatPayload::HoldsR(r, s, t) => {
            let r = inst_r(r, b).ok_or(())?;
            let s = d(s, b, branch, arena)?;
            let t = d(t, b, branch, arena)?;
            match (s, t) {
                (Some(s), Some(t)) => AtomBody::R(r, s, t),
                _ => return Ok(None),
            }
        }
        PatPayload::Equal(s, t) => {
            let s = d(s, b, branch, arena)?;
            let t = d(t, b, branch, arena)?;
            match (s, t) {
                (Some(s), Some(t)) => AtomBody::Eq(s.min(t), s.max(t)),
                _ => return Ok(None),
            }
        }
    };
    Ok(Some(Atom { positive: p.positive, body }))
}

fn find_skolem(branch: &Branch, arena: &Arena, pred: impl Fn(&TermNode) -> bool) -> Option<TermId> {
    branch.registered_terms().iter().copied().find(|t| pred(arena.node(*t)))
}

pub fn inst_r(p: &RPat, b: &Binding) -> Option<Relation> {
    Some(match p {
        RPat::Var(v) => match b.get(v)? {
            Value::R(r) => r.clone(),
            _ => return None,
        },
        RPat::Const(c) => Relation::Const(c.clone()),
        RPat::Not(p) => Relation::negate(inst_r(p, b)?),
    })
}

pub fn inst_f(p: &FPat, b: &Binding) -> Option<Formula> {
    let or_chain = |items: Vec<Formula>| items.into_iter().reduce(Formula::or);
    Some(match p {
        FPat::Var(v) => match b.get(v)? {
            Value::F(f) => f.clone(),
            _ => return None,
        },
        FPat::Prop(c) => Formula::Prop(c.clone()),
        FPat::Not(p) => Formula::negate(inst_f(p, b)?),
        FPat::Or(l, r) => Formula::or(inst_f(l, b)?, inst_f(r, b)?),
        FPat::Box(r, f) => Formula::necessity(inst_r(r, b)?, inst_f(f, b)?),
        FPat::Disj(items) => or_chain(items.iter().map(|p| inst_f(p, b)).collect::<Option<_>>()?)?,
        FPat::Clause { negatives, positives } => {
            let mut items = Vec::new();
            for p in negatives {
                items.push(Formula::negate(inst_f(p, b)?));
            }
            for p in positives {
                items.push(inst_f(p, b)?);
            }
            or_chain(items)?
        }
    })
}

pub fn inst_d(p: &DPat, b: &Binding, arena: &mut Arena) -> Option<TermId> {
    Some(match p {
        DPat::Var(v) => match b.get(v)? {
            Value::D(t) => *t,
            _ => return None,
        },
        DPat::Const(c) => arena.intern_node(TermNode::Const(c.clone())),
        DPat::SkF(r, f, x) => {
            let node = TermNode::SkF(inst_r(r, b)?, inst_f(f, b)?, inst_d(x, b, arena)?);
            arena.intern_node(node)
        }
        DPat::SkG(r, x) => {
            let node = TermNode::SkG(inst_r(r, b)?, inst_d(x, b, arena)?);
            arena.intern_node(node)
        }
    })
}

/// Ground instance of a pattern atom, creating Skolem terms as needed.
pub fn instantiate_atom(p: &PatternAtom, b: &Binding, arena: &mut Arena) -> Option<Atom> {
    let body = match &p.payload {
        PatPayload::HoldsF(f, t) => AtomBody::F(inst_f(f, b)?, inst_d(t, b, arena)?),
        PatPayload::HoldsR(r, s, t) => AtomBody::R(inst_r(r, b)?, inst_d(s, b, arena)?, inst_d(t, b, arena)?),
        PatPayload::Equal(s, t) => {
            let (s, t) = (inst_d(s, b, arena)?, inst_d(t, b, arena)?);
            AtomBody::Eq(s.min(t), s.max(t))
        }
    };
    Some(Atom { positive: p.positive, body })
}

pub fn side_conditions_hold(rule: &Rule, b: &Binding) -> bool {
    rule.side_conditions.iter().all(|cond| match (cond, b.get(cond.var())) {
        (SideCondition::AtomicOnly(_), Some(Value::F(f))) => f.is_atomic(),
        (SideCondition::AtomicOnly(_), Some(Value::R(r))) => r.is_atomic(),
        (SideCondition::NotNegAtomic(_), Some(Value::F(f))) => !f.is_negated_atom(),
        _ => true,
    })
}

fn extend_one(p: &PatternAtom, b: &Binding, branch: &Branch, arena: &Arena) -> Vec<Binding> {
    match lookup_atom(p, b, branch, arena) {
        Ok(Some(atom)) => {
            if branch.holds(&atom) {
                vec![b.clone()]
            } else {
                vec![]
            }
        }
        Ok(None) => vec![],
        Err(()) => match (&p.payload, p.positive) {
            (PatPayload::Equal(ps, pt), true) => branch
                .classes()
                .into_iter()
                .flat_map(|c| {
                    match_d(ps, c, b, branch, arena)
                        .into_iter()
                        .flat_map(move |b1| match_d(pt, c, &b1, branch, arena))
                        .collect::<Vec<_>>()
                })
                .collect(),
            _ => branch.atoms().iter().flat_map(|a| match_atom(p, a, b, branch, arena)).collect(),
        },
    }
}

/// Numerator matches, optionally requiring numerator position `seed.0` to be
/// matched by the atom `seed.1`.
pub fn match_numerator(rule: &Rule, branch: &Branch, arena: &Arena, seed: Option<(usize, &Atom)>) -> Vec<Binding> {
    let mut current = vec![Binding::new()];
    let mut order: Vec<usize> = (0..rule.numerator.len()).collect();
    if let Some((pos, atom)) = seed {
        current = match_atom(&rule.numerator[pos], atom, &Binding::new(), branch, arena);
        order.retain(|i| *i != pos);
    }
    for i in order {
        if current.is_empty() {
            break;
        }
        let p = &rule.numerator[i];
        current = current.iter().flat_map(|b| extend_one(p, b, branch, arena)).collect();
    }
    current.retain(|b| side_conditions_hold(rule, b));
    dedup(current)
}

/// Extends a numerator binding over the branch classes (domain variables) and
/// the given relation constants (relation variables) for denominator-only
/// variables. Formula variables cannot be enumerated and yield nothing.
pub fn expand_free(rule: &Rule, b: &Binding, branch: &Branch, relations: &[Relation]) -> Vec<Binding> {
    let mut out = vec![b.clone()];
    for (name, sort) in rule.free_vars() {
        let values: Vec<Value> = match sort {
            Sort::D => branch.classes().into_iter().map(Value::D).collect(),
            Sort::R => relations.iter().cloned().map(Value::R).collect(),
            Sort::F => Vec::new(),
        };
        out = out
            .iter()
            .flat_map(|b| {
                let name = &name;
                values.iter().map(move |v| {
                    let mut b = b.clone();
                    b.insert(name.clone(), v.clone());
                    b
                })
            })
            .collect();
    }
    out.retain(|b| side_conditions_hold(rule, b));
    out
}

/// Normalizes domain values to current class representatives.
pub fn normalize_binding(b: &Binding, branch: &Branch) -> Binding {
    b.iter()
        .map(|(k, v)| {
            let v = match v {
                Value::D(t) => Value::D(branch.find(*t)),
                other => other.clone(),
            };
            (k.clone(), v)
        })
        .collect()
}

/// All instantiations of `rule` on `branch`; free denominator variables range
/// over branch classes and `relations`.
pub fn match_rule(rule: &Rule, branch: &Branch, arena: &mut Arena, relations: &[Relation]) -> Vec<Instantiation> {
    if branch.is_closed() {
        return Vec::new();
    }
    let mut out = BTreeSet::new();
    for b in match_numerator(rule, branch, arena, None) {
        for b in expand_free(rule, &b, branch, relations) {
            let matched = rule
                .numerator
                .iter()
                .filter_map(|p| instantiate_atom(p, &b, arena))
                .map(|a| branch.normalize(&a))
                .collect();
            out.insert(Instantiation { rule: rule.id.clone(), substitution: b, matched });
        }
    }
    out.into_iter().collect()
}

/// Outcome of instantiating a rule's denominators.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Application {
    Closing,
    Extensions(Vec<Vec<Atom>>),
}

/// Ground denominators of an instantiation; the branch is not modified.
pub fn apply_instantiation(rule: &Rule, inst: &Instantiation, arena: &mut Arena) -> Application {
    instantiate_denominators(rule, &inst.substitution, arena)
}

pub fn instantiate_denominators(rule: &Rule, b: &Binding, arena: &mut Arena) -> Application {
    if rule.is_closure() {
        return Application::Closing;
    }
    Application::Extensions(
        rule.denominators
            .iter()
            .map(|d| d.iter().filter_map(|p| instantiate_atom(p, b, arena)).collect())
            .collect(),
    )
}
