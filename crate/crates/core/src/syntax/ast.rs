use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

/// A relation expression: a relational constant or its complement.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Relation {
    Const(String),
    Not(Box<Relation>),
}

impl Relation {
    pub fn constant(name: impl Into<String>) -> Self {
        Relation::Const(name.into())
    }

    pub fn negate(inner: Relation) -> Self {
        Relation::Not(Box::new(inner))
    }

    pub fn is_atomic(&self) -> bool {
        matches!(self, Relation::Const(_))
    }

    /// The relational constant underneath all complements.
    pub fn base(&self) -> &str {
        match self {
            Relation::Const(name) => name,
            Relation::Not(inner) => inner.base(),
        }
    }

    pub fn has_negation(&self) -> bool {
        matches!(self, Relation::Not(_))
    }

    pub fn depth(&self) -> usize {
        match self {
            Relation::Const(_) => 0,
            Relation::Not(inner) => 1 + inner.depth(),
        }
    }
}

/// Formulae of sort `f`. Conjunction and diamond are sugar and never stored.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    Prop(String),
    Nom(String),
    Not(Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Box(Relation, Box<Formula>),
}

impl Formula {
    pub fn prop(name: impl Into<String>) -> Self {
        Formula::Prop(name.into())
    }

    pub fn nom(name: impl Into<String>) -> Self {
        Formula::Nom(name.into())
    }

    pub fn negate(inner: Formula) -> Self {
        Formula::Not(Box::new(inner))
    }

    pub fn or(left: Formula, right: Formula) -> Self {
        Formula::Or(Box::new(left), Box::new(right))
    }

    pub fn necessity(rel: Relation, inner: Formula) -> Self {
        Formula::Box(rel, Box::new(inner))
    }

    /// `a & b`, stored as `~(~a | ~b)`.
    pub fn and(left: Formula, right: Formula) -> Self {
        Formula::negate(Formula::or(Formula::negate(left), Formula::negate(right)))
    }

    /// `<r>a`, stored as `~[r]~a`.
    pub fn possibility(rel: Relation, inner: Formula) -> Self {
        Formula::negate(Formula::necessity(rel, Formula::negate(inner)))
    }

    pub fn is_atomic(&self) -> bool {
        matches!(self, Formula::Prop(_) | Formula::Nom(_))
    }

    /// True for `~q` with `q` atomic.
    pub fn is_negated_atom(&self) -> bool {
        matches!(self, Formula::Not(inner) if inner.is_atomic())
    }

    /// Number of formula nodes; relation expressions are not counted.
    pub fn size(&self) -> usize {
        match self {
            Formula::Prop(_) | Formula::Nom(_) => 1,
            Formula::Not(inner) => 1 + inner.size(),
            Formula::Or(l, r) => 1 + l.size() + r.size(),
            Formula::Box(_, inner) => 1 + inner.size(),
        }
    }

    pub fn modal_depth(&self) -> usize {
        match self {
            Formula::Prop(_) | Formula::Nom(_) => 0,
            Formula::Not(inner) => inner.modal_depth(),
            Formula::Or(l, r) => l.modal_depth().max(r.modal_depth()),
            Formula::Box(_, inner) => 1 + inner.modal_depth(),
        }
    }

    pub fn has_nominal(&self) -> bool {
        match self {
            Formula::Prop(_) => false,
            Formula::Nom(_) => true,
            Formula::Not(inner) | Formula::Box(_, inner) => inner.has_nominal(),
            Formula::Or(l, r) => l.has_nominal() || r.has_nominal(),
        }
    }

    pub fn has_relation_negation(&self) -> bool {
        match self {
            Formula::Prop(_) | Formula::Nom(_) => false,
            Formula::Not(inner) => inner.has_relation_negation(),
            Formula::Or(l, r) => l.has_relation_negation() || r.has_relation_negation(),
            Formula::Box(rel, inner) => rel.has_negation() || inner.has_relation_negation(),
        }
    }

    /// Proposition names occurring in the formula.
    pub fn props(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_props(&mut out);
        out
    }

    fn collect_props(&self, out: &mut BTreeSet<String>) {
        match self {
            Formula::Prop(name) => {
                out.insert(name.clone());
            }
            Formula::Nom(_) => {}
            Formula::Not(inner) | Formula::Box(_, inner) => inner.collect_props(out),
            Formula::Or(l, r) => {
                l.collect_props(out);
                r.collect_props(out);
            }
        }
    }

    /// Relational constants occurring in the formula.
    pub fn relation_constants(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_relations(&mut out);
        out
    }

    fn collect_relations(&self, out: &mut BTreeSet<String>) {
        match self {
            Formula::Prop(_) | Formula::Nom(_) => {}
            Formula::Not(inner) => inner.collect_relations(out),
            Formula::Or(l, r) => {
                l.collect_relations(out);
                r.collect_relations(out);
            }
            Formula::Box(rel, inner) => {
                out.insert(rel.base().to_string());
                inner.collect_relations(out);
            }
        }
    }

    /// Flattens nested disjunctions into their disjuncts, left to right.
    pub fn disjuncts(&self) -> Vec<&Formula> {
        let mut out = Vec::new();
        fn walk<'a>(f: &'a Formula, out: &mut Vec<&'a Formula>) {
            match f {
                Formula::Or(l, r) => {
                    walk(l, out);
                    walk(r, out);
                }
                other => out.push(other),
            }
        }
        walk(self, &mut out);
        out
    }
}

/// Ground terms of the domain sort.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DomainTerm {
    Const(String),
    /// Successor witness `f(r, p, x)`.
    SkF(Relation, Formula, Box<DomainTerm>),
    /// Predecessor witness `g(r, x)`.
    SkG(Relation, Box<DomainTerm>),
}

impl DomainTerm {
    pub fn constant(name: impl Into<String>) -> Self {
        DomainTerm::Const(name.into())
    }

    pub fn skolem_f(rel: Relation, fml: Formula, arg: DomainTerm) -> Self {
        DomainTerm::SkF(rel, fml, Box::new(arg))
    }

    pub fn skolem_g(rel: Relation, arg: DomainTerm) -> Self {
        DomainTerm::SkG(rel, Box::new(arg))
    }

    pub fn depth(&self) -> usize {
        match self {
            DomainTerm::Const(_) => 0,
            DomainTerm::SkF(_, _, arg) | DomainTerm::SkG(_, arg) => 1 + arg.depth(),
        }
    }

    pub fn as_const(&self) -> Option<&str> {
        match self {
            DomainTerm::Const(name) => Some(name),
            _ => None,
        }
    }

    pub fn has_relation_negation(&self) -> bool {
        match self {
            DomainTerm::Const(_) => false,
            DomainTerm::SkF(r, f, arg) => {
                r.has_negation() || f.has_relation_negation() || arg.has_relation_negation()
            }
            DomainTerm::SkG(r, arg) => r.has_negation() || arg.has_relation_negation(),
        }
    }

    /// Constant names occurring anywhere in the term.
    pub fn constants(&self, out: &mut BTreeSet<String>) {
        match self {
            DomainTerm::Const(name) => {
                out.insert(name.clone());
            }
            DomainTerm::SkF(_, _, arg) | DomainTerm::SkG(_, arg) => arg.constants(out),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Payload {
    HoldsF(Formula, DomainTerm),
    HoldsR(Relation, DomainTerm, DomainTerm),
    Equal(DomainTerm, DomainTerm),
}

impl Payload {
    /// L-atomic: the embedded formula or relation is atomic.
    pub fn is_l_atomic(&self) -> bool {
        match self {
            Payload::HoldsF(f, _) => f.is_atomic(),
            Payload::HoldsR(r, _, _) => r.is_atomic(),
            Payload::Equal(..) => true,
        }
    }

    pub fn terms(&self) -> Vec<&DomainTerm> {
        match self {
            Payload::HoldsF(_, t) => vec![t],
            Payload::HoldsR(_, s, t) | Payload::Equal(s, t) => vec![s, t],
        }
    }

    pub fn has_relation_negation(&self) -> bool {
        match self {
            Payload::HoldsF(f, t) => f.has_relation_negation() || t.has_relation_negation(),
            Payload::HoldsR(r, s, t) => {
                r.has_negation() || s.has_relation_negation() || t.has_relation_negation()
            }
            Payload::Equal(s, t) => s.has_relation_negation() || t.has_relation_negation(),
        }
    }
}

/// A negated or unnegated atom of the tableau language.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SignedAtom {
    pub positive: bool,
    pub payload: Payload,
}

impl SignedAtom {
    pub fn pos(payload: Payload) -> Self {
        SignedAtom { positive: true, payload }
    }

    pub fn neg(payload: Payload) -> Self {
        SignedAtom { positive: false, payload }
    }

    pub fn holds_f(positive: bool, fml: Formula, at: DomainTerm) -> Self {
        SignedAtom { positive, payload: Payload::HoldsF(fml, at) }
    }

    pub fn holds_r(positive: bool, rel: Relation, from: DomainTerm, to: DomainTerm) -> Self {
        SignedAtom { positive, payload: Payload::HoldsR(rel, from, to) }
    }

    pub fn equal(positive: bool, lhs: DomainTerm, rhs: DomainTerm) -> Self {
        SignedAtom { positive, payload: Payload::Equal(lhs, rhs) }
    }

    pub fn flipped(&self) -> Self {
        SignedAtom { positive: !self.positive, payload: self.payload.clone() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Language {
    Km,
    KmNot,
}

impl Language {
    pub fn admits(self, other: Language) -> bool {
        self == Language::KmNot || other == Language::Km
    }
}

impl fmt::Display for Language {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Language::Km => write!(f, "km"),
            Language::KmNot => write!(f, "kmnot"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FrameCondition {
    Irreflexive,
    ImmediatePredecessor,
}

/// A satisfiability problem: ground assertions plus the logic they live in.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProblemSpec {
    pub assertions: Vec<SignedAtom>,
    pub language: Language,
    pub frame_conditions: BTreeSet<FrameCondition>,
}

impl ProblemSpec {
    pub fn new(assertions: Vec<SignedAtom>, language: Language) -> Self {
        ProblemSpec { assertions, language, frame_conditions: BTreeSet::new() }
    }

    /// The usual root node for a single formula: `+nu_f(E, a0)`.
    pub fn from_formula(fml: Formula, language: Language) -> Self {
        ProblemSpec::new(
            vec![SignedAtom::holds_f(true, fml, DomainTerm::constant("a0"))],
            language,
        )
    }

    pub fn relation_constants(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        for atom in &self.assertions {
            match &atom.payload {
                Payload::HoldsF(f, _) => out.extend(f.relation_constants()),
                Payload::HoldsR(r, _, _) => {
                    out.insert(r.base().to_string());
                }
                Payload::Equal(..) => {}
            }
        }
        out
    }

    pub fn props(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        for atom in &self.assertions {
            if let Payload::HoldsF(f, _) = &atom.payload {
                out.extend(f.props());
            }
        }
        out
    }

    pub fn constants(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        for atom in &self.assertions {
            for t in atom.payload.terms() {
                t.constants(&mut out);
            }
        }
        out
    }
}

/// Smallest set containing `fmls` and closed under immediate subformulas,
/// together with every relation expression met on the way (complements
/// peeled down to their constants).
pub fn subformula_closure<'a, I>(fmls: I) -> (BTreeSet<Formula>, BTreeSet<Relation>)
where
    I: IntoIterator<Item = &'a Formula>,
{
    let mut formulas = BTreeSet::new();
    let mut relations = BTreeSet::new();
    let mut stack: Vec<&Formula> = fmls.into_iter().collect();
    while let Some(f) = stack.pop() {
        if !formulas.insert(f.clone()) {
            continue;
        }
        match f {
            Formula::Prop(_) | Formula::Nom(_) => {}
            Formula::Not(inner) => stack.push(inner),
            Formula::Or(l, r) => {
                stack.push(l);
                stack.push(r);
            }
            Formula::Box(rel, inner) => {
                let mut r = rel;
                loop {
                    relations.insert(r.clone());
                    match r {
                        Relation::Const(_) => break,
                        Relation::Not(next) => r = next,
                    }
                }
                stack.push(inner);
            }
        }
    }
    (formulas, relations)
}
