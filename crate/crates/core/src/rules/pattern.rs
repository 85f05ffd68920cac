use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::syntax::Language;

/// Formula schema.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FPat {
    Var(String),
    Prop(String),
    Not(Box<FPat>),
    Or(Box<FPat>, Box<FPat>),
    Box(RPat, Box<FPat>),
    /// Flattened disjunction with exactly these disjuncts, matched modulo
    /// associativity and commutativity.
    Disj(Vec<FPat>),
    /// Flattened disjunction whose negated-atom disjuncts are `~negatives[i]`
    /// and whose remaining disjuncts are `positives`.
    Clause { negatives: Vec<FPat>, positives: Vec<FPat> },
}

/// Relation schema.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RPat {
    Var(String),
    Const(String),
    Not(Box<RPat>),
}

/// Domain term schema.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DPat {
    Var(String),
    Const(String),
    SkF(RPat, FPat, Box<DPat>),
    SkG(RPat, Box<DPat>),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PatPayload {
    HoldsF(FPat, DPat),
    HoldsR(RPat, DPat, DPat),
    Equal(DPat, DPat),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PatternAtom {
    pub positive: bool,
    pub payload: PatPayload,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sort {
    F,
    R,
    D,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SideCondition {
    /// Formula variable matches only propositions; relation variable only constants.
    AtomicOnly(String),
    /// Formula variable never matches a negated atomic formula.
    NotNegAtomic(String),
}

impl SideCondition {
    pub fn var(&self) -> &str {
        match self {
            SideCondition::AtomicOnly(v) | SideCondition::NotNegAtomic(v) => v,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rule {
    pub id: String,
    pub numerator: Vec<PatternAtom>,
    pub denominators: Vec<Vec<PatternAtom>>,
    pub side_conditions: BTreeSet<SideCondition>,
}

/// Rule shape up to identifiers and the order of atoms inside a set.
pub type RuleShape = (BTreeSet<PatternAtom>, Vec<BTreeSet<PatternAtom>>, BTreeSet<SideCondition>);

impl Rule {
    pub fn new(id: impl Into<String>, numerator: Vec<PatternAtom>, denominators: Vec<Vec<PatternAtom>>) -> Self {
        Rule { id: id.into(), numerator, denominators, side_conditions: BTreeSet::new() }
    }

    pub fn with_side(mut self, cond: SideCondition) -> Self {
        self.side_conditions.insert(cond);
        self
    }

    pub fn is_closure(&self) -> bool {
        self.denominators.is_empty()
    }

    pub fn shape(&self) -> RuleShape {
        (
            self.numerator.iter().cloned().collect(),
            self.denominators.iter().map(|d| d.iter().cloned().collect()).collect(),
            self.side_conditions.clone(),
        )
    }

    /// Sorts of all schema variables, or the first variable used at two sorts.
    pub fn variable_sorts(&self) -> Result<BTreeMap<String, Sort>, String> {
        let mut sorts = BTreeMap::new();
        let mut clash = None;
        let mut visit = |name: &str, sort: Sort| {
            if let Some(old) = sorts.insert(name.to_string(), sort) {
                if old != sort && clash.is_none() {
                    clash = Some(name.to_string());
                }
            }
        };
        for atom in self.numerator.iter().chain(self.denominators.iter().flatten()) {
            atom.payload.visit_vars(&mut visit);
        }
        match clash {
            Some(name) => Err(name),
            None => Ok(sorts),
        }
    }

    pub fn numerator_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        for atom in &self.numerator {
            atom.payload.visit_vars(&mut |name, _| {
                out.insert(name.to_string());
            });
        }
        out
    }

    /// Variables occurring in denominators but not in the numerator, with sorts.
    pub fn free_vars(&self) -> Vec<(String, Sort)> {
        let bound = self.numerator_vars();
        let mut out: Vec<(String, Sort)> = Vec::new();
        for atom in self.denominators.iter().flatten() {
            atom.payload.visit_vars(&mut |name, sort| {
                if !bound.contains(name) && !out.iter().any(|(n, _)| n == name) {
                    out.push((name.to_string(), sort));
                }
            });
        }
        out
    }

    /// Whether some denominator introduces a Skolem term.
    pub fn creates_terms(&self) -> bool {
        self.denominators.iter().flatten().any(|a| a.payload.has_skolem())
    }

    /// The complementary-pair closure rules are decided by the branch itself.
    pub fn is_complement_closure(&self) -> bool {
        self.is_closure()
            && self.side_conditions.is_empty()
            && self.numerator.len() == 2
            && self.numerator[0].payload == self.numerator[1].payload
            && self.numerator[0].positive != self.numerator[1].positive
            && matches!(
                &self.numerator[0].payload,
                PatPayload::HoldsF(FPat::Var(_), DPat::Var(_)) | PatPayload::HoldsR(RPat::Var(_), DPat::Var(_), DPat::Var(_))
            )
    }
}

impl PatPayload {
    pub fn visit_vars(&self, visit: &mut impl FnMut(&str, Sort)) {
        match self {
            PatPayload::HoldsF(f, t) => {
                f.visit_vars(visit);
                t.visit_vars(visit);
            }
            PatPayload::HoldsR(r, s, t) => {
                r.visit_vars(visit);
                s.visit_vars(visit);
                t.visit_vars(visit);
            }
            PatPayload::Equal(s, t) => {
                s.visit_vars(visit);
                t.visit_vars(visit);
            }
        }
    }

    pub fn has_skolem(&self) -> bool {
        match self {
            PatPayload::HoldsF(_, t) => t.is_skolem(),
            PatPayload::HoldsR(_, s, t) | PatPayload::Equal(s, t) => s.is_skolem() || t.is_skolem(),
        }
    }
}

impl FPat {
    pub fn var(name: &str) -> Self {
        FPat::Var(name.to_string())
    }

    pub fn not(inner: FPat) -> Self {
        FPat::Not(Box::new(inner))
    }

    pub fn or(l: FPat, r: FPat) -> Self {
        FPat::Or(Box::new(l), Box::new(r))
    }

    pub fn boxed(r: RPat, f: FPat) -> Self {
        FPat::Box(r, Box::new(f))
    }

    pub fn visit_vars(&self, visit: &mut impl FnMut(&str, Sort)) {
        match self {
            FPat::Var(v) => visit(v, Sort::F),
            FPat::Prop(_) => {}
            FPat::Not(f) => f.visit_vars(visit),
            FPat::Or(l, r) => {
                l.visit_vars(visit);
                r.visit_vars(visit);
            }
            FPat::Box(r, f) => {
                r.visit_vars(visit);
                f.visit_vars(visit);
            }
            FPat::Disj(items) => items.iter().for_each(|f| f.visit_vars(visit)),
            FPat::Clause { negatives, positives } => {
                negatives.iter().chain(positives).for_each(|f| f.visit_vars(visit))
            }
        }
    }
}

impl RPat {
    pub fn var(name: &str) -> Self {
        RPat::Var(name.to_string())
    }

    pub fn not(inner: RPat) -> Self {
        RPat::Not(Box::new(inner))
    }

    pub fn visit_vars(&self, visit: &mut impl FnMut(&str, Sort)) {
        match self {
            RPat::Var(v) => visit(v, Sort::R),
            RPat::Const(_) => {}
            RPat::Not(r) => r.visit_vars(visit),
        }
    }
}

impl DPat {
    pub fn var(name: &str) -> Self {
        DPat::Var(name.to_string())
    }

    pub fn skf(r: RPat, f: FPat, x: DPat) -> Self {
        DPat::SkF(r, f, Box::new(x))
    }

    pub fn skg(r: RPat, x: DPat) -> Self {
        DPat::SkG(r, Box::new(x))
    }

    pub fn is_skolem(&self) -> bool {
        matches!(self, DPat::SkF(..) | DPat::SkG(..))
    }

    pub fn visit_vars(&self, visit: &mut impl FnMut(&str, Sort)) {
        match self {
            DPat::Var(v) => visit(v, Sort::D),
            DPat::Const(_) => {}
            DPat::SkF(r, f, x) => {
                r.visit_vars(visit);
                f.visit_vars(visit);
                x.visit_vars(visit);
            }
            DPat::SkG(r, x) => {
                r.visit_vars(visit);
                x.visit_vars(visit);
            }
        }
    }
}

impl PatternAtom {
    pub fn holds_f(positive: bool, f: FPat, t: DPat) -> Self {
        PatternAtom { positive, payload: PatPayload::HoldsF(f, t) }
    }

    pub fn holds_r(positive: bool, r: RPat, s: DPat, t: DPat) -> Self {
        PatternAtom { positive, payload: PatPayload::HoldsR(r, s, t) }
    }

    pub fn equal(positive: bool, s: DPat, t: DPat) -> Self {
        PatternAtom { positive, payload: PatPayload::Equal(s, t) }
    }

    pub fn flipped(&self) -> Self {
        PatternAtom { positive: !self.positive, payload: self.payload.clone() }
    }
}

/// Parametric rule generators, instantiated per clause width.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    /// `split_k`: a k-ary disjunction branches into its k disjuncts.
    Split,
    /// `split+_mn`: branch on the complements of m negated atoms and on n other disjuncts.
    SplitPlus,
    /// `hyp_mn`: a clause plus its m negated atoms as premises, branching on n disjuncts.
    Hyper,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::Split => "split",
            Family::SplitPlus => "split+",
            Family::Hyper => "hyp",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "split" => Some(Family::Split),
            "split+" => Some(Family::SplitPlus),
            "hyp" => Some(Family::Hyper),
            _ => None,
        }
    }
}

/// Where positive compound Boolean formulas are turned into clauses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum ClausifyMode {
    #[default]
    Off,
    Roots,
    RootsAndConclusions,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Calculus {
    pub name: String,
    pub language: Language,
    pub rules: Vec<Rule>,
    pub families: Vec<Family>,
    pub clausify: ClausifyMode,
}

impl Calculus {
    pub fn new(name: impl Into<String>, language: Language, rules: Vec<Rule>) -> Self {
        Calculus { name: name.into(), language, rules, families: Vec::new(), clausify: ClausifyMode::Off }
    }

    pub fn rule(&self, id: &str) -> Option<&Rule> {
        self.rules.iter().find(|r| r.id == id)
    }

    /// Rule sets compared up to identifiers and atom order, plus families.
    pub fn same_rules(&self, other: &Calculus) -> bool {
        let shapes = |c: &Calculus| c.rules.iter().map(Rule::shape).collect::<BTreeSet<_>>();
        let fams = |c: &Calculus| c.families.iter().copied().collect::<BTreeSet<_>>();
        shapes(self) == shapes(other) && fams(self) == fams(other)
    }

    /// Adds the rules of `other` (frame add-ons), keeping this calculus' language.
    pub fn extend(&self, other: &Calculus) -> Calculus {
        let mut out = self.clone();
        out.name = format!("{}+{}", self.name, other.name);
        for rule in &other.rules {
            if out.rule(&rule.id).is_none() {
                out.rules.push(rule.clone());
            }
        }
        for fam in &other.families {
            if !out.families.contains(fam) {
                out.families.push(*fam);
            }
        }
        out
    }
}

impl fmt::Display for RPat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RPat::Var(v) | RPat::Const(v) => write!(f, "{v}"),
            RPat::Not(r) => write!(f, "-{r}"),
        }
    }
}

fn write_operand(f: &mut fmt::Formatter<'_>, p: &FPat) -> fmt::Result {
    if matches!(p, FPat::Or(..)) {
        write!(f, "({p})")
    } else {
        write!(f, "{p}")
    }
}

impl fmt::Display for FPat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FPat::Var(v) | FPat::Prop(v) => write!(f, "{v}"),
            FPat::Not(p) => {
                write!(f, "~")?;
                write_operand(f, p)
            }
            FPat::Or(l, r) => {
                write!(f, "{l} | ")?;
                write_operand(f, r)
            }
            FPat::Box(r, p) => {
                write!(f, "[{r}]")?;
                write_operand(f, p)
            }
            FPat::Disj(items) => {
                let parts: Vec<String> = items.iter().map(|p| p.to_string()).collect();
                write!(f, "{{{}}}", parts.join(" | "))
            }
            FPat::Clause { negatives, positives } => {
                let parts: Vec<String> = negatives
                    .iter()
                    .map(|p| format!("~{p}"))
                    .chain(positives.iter().map(|p| p.to_string()))
                    .collect();
                write!(f, "{{{}}}", parts.join(" | "))
            }
        }
    }
}

impl fmt::Display for DPat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DPat::Var(v) | DPat::Const(v) => write!(f, "{v}"),
            DPat::SkF(r, p, x) => write!(f, "f({r},{p},{x})"),
            DPat::SkG(r, x) => write!(f, "g({r},{x})"),
        }
    }
}

impl fmt::Display for PatternAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.positive {
            write!(f, "-")?;
        }
        match &self.payload {
            PatPayload::HoldsF(p, t) => write!(f, "nu_f({p}, {t})"),
            PatPayload::HoldsR(r, s, t) => write!(f, "nu_r({r}, {s}, {t})"),
            PatPayload::Equal(s, t) => write!(f, "eq({s}, {t})"),
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let set = |atoms: &[PatternAtom]| atoms.iter().map(|a| a.to_string()).collect::<Vec<_>>().join(", ");
        write!(f, "{}: {{{}}} / ", self.id, set(&self.numerator))?;
        if self.denominators.is_empty() {
            write!(f, "FALSE")
        } else {
            let dens: Vec<String> = self.denominators.iter().map(|d| format!("{{{}}}", set(d))).collect();
            write!(f, "{}", dens.join(" | "))
        }
    }
}
