//! JSON description of calculi. Patterns are written in the fo atom syntax;
//! every identifier in a pattern is a schema variable whose sort follows from
//! its position.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::pattern::{Calculus, ClausifyMode, DPat, FPat, Family, PatPayload, PatternAtom, RPat, Rule, SideCondition};
use super::RuleError;
use crate::syntax::{parse_atom, DomainTerm, Formula, Language, Payload, Relation};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CalculusJson {
    pub name: String,
    pub language: Language,
    #[serde(default)]
    pub families: Vec<String>,
    #[serde(default)]
    pub clausify: ClausifyJson,
    pub rules: Vec<RuleJson>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClausifyJson {
    #[default]
    Off,
    Roots,
    RootsAndConclusions,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RuleJson {
    pub id: String,
    pub numerator: Vec<String>,
    pub denominators: Vec<Vec<String>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub side_conditions: Vec<SideJson>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SideJson {
    AtomicOnly(String),
    NotNegAtomic(String),
}

impl From<&Calculus> for CalculusJson {
    fn from(calc: &Calculus) -> Self {
        let text = |atoms: &[PatternAtom]| atoms.iter().map(|a| a.to_string()).collect::<Vec<_>>();
        CalculusJson {
            name: calc.name.clone(),
            language: calc.language,
            families: calc.families.iter().map(|f| f.name().to_string()).collect(),
            clausify: match calc.clausify {
                ClausifyMode::Off => ClausifyJson::Off,
                ClausifyMode::Roots => ClausifyJson::Roots,
                ClausifyMode::RootsAndConclusions => ClausifyJson::RootsAndConclusions,
            },
            rules: calc
                .rules
                .iter()
                .map(|rule| RuleJson {
                    id: rule.id.clone(),
                    numerator: text(&rule.numerator),
                    denominators: rule.denominators.iter().map(|d| text(d)).collect(),
                    side_conditions: rule
                        .side_conditions
                        .iter()
                        .map(|c| match c {
                            SideCondition::AtomicOnly(v) => SideJson::AtomicOnly(v.clone()),
                            SideCondition::NotNegAtomic(v) => SideJson::NotNegAtomic(v.clone()),
                        })
                        .collect(),
                })
                .collect(),
        }
    }
}

impl CalculusJson {
    pub fn to_calculus(&self) -> Result<Calculus, RuleError> {
        let mut rules = Vec::new();
        let mut ids = BTreeSet::new();
        for rule in &self.rules {
            if !ids.insert(rule.id.clone()) {
                return Err(RuleError::DuplicateRule(rule.id.clone()));
            }
            let parse_set = |items: &[String]| items.iter().map(|s| parse_pattern(s)).collect::<Result<Vec<_>, _>>();
            let mut out = Rule::new(
                rule.id.clone(),
                parse_set(&rule.numerator)?,
                rule.denominators.iter().map(|d| parse_set(d)).collect::<Result<_, _>>()?,
            );
            for side in &rule.side_conditions {
                out = out.with_side(match side {
                    SideJson::AtomicOnly(v) => SideCondition::AtomicOnly(v.clone()),
                    SideJson::NotNegAtomic(v) => SideCondition::NotNegAtomic(v.clone()),
                });
            }
            if let Err(var) = out.variable_sorts() {
                return Err(RuleError::IllSorted { rule: out.id, var });
            }
            rules.push(out);
        }
        let families = self
            .families
            .iter()
            .map(|name| Family::from_name(name).ok_or_else(|| RuleError::UnknownFamily(name.clone())))
            .collect::<Result<_, _>>()?;
        Ok(Calculus {
            name: self.name.clone(),
            language: self.language,
            rules,
            families,
            clausify: match self.clausify {
                ClausifyJson::Off => ClausifyMode::Off,
                ClausifyJson::Roots => ClausifyMode::Roots,
                ClausifyJson::RootsAndConclusions => ClausifyMode::RootsAndConclusions,
            },
        })
    }
}

/// Parses a pattern atom such as `-nu_r(r, x, f(r,p,x))`.
pub fn parse_pattern(text: &str) -> Result<PatternAtom, RuleError> {
    let atom = parse_atom(text, &BTreeSet::new()).map_err(|e| RuleError::Pattern {
        text: text.to_string(),
        message: e.to_string(),
    })?;
    let payload = match &atom.payload {
        Payload::HoldsF(f, t) => PatPayload::HoldsF(fpat(f), dpat(t)),
        Payload::HoldsR(r, s, t) => PatPayload::HoldsR(rpat(r), dpat(s), dpat(t)),
        Payload::Equal(s, t) => PatPayload::Equal(dpat(s), dpat(t)),
    };
    Ok(PatternAtom { positive: atom.positive, payload })
}

fn fpat(f: &Formula) -> FPat {
    match f {
        Formula::Prop(v) | Formula::Nom(v) => FPat::Var(v.clone()),
        Formula::Not(g) => FPat::not(fpat(g)),
        Formula::Or(l, r) => FPat::or(fpat(l), fpat(r)),
        Formula::Box(r, g) => FPat::boxed(rpat(r), fpat(g)),
    }
}

fn rpat(r: &Relation) -> RPat {
    match r {
        Relation::Const(v) => RPat::Var(v.clone()),
        Relation::Not(inner) => RPat::not(rpat(inner)),
    }
}

fn dpat(t: &DomainTerm) -> DPat {
    match t {
        DomainTerm::Const(v) => DPat::Var(v.clone()),
        DomainTerm::SkF(r, f, x) => DPat::skf(rpat(r), fpat(f), dpat(x)),
        DomainTerm::SkG(r, x) => DPat::skg(rpat(r), dpat(x)),
    }
}
