//! Calculus-to-calculus transformations: rule refinement, the atomic
//! refinement condition, clausification and the hypertableau transformation.

mod clausify;

pub use clausify::{clausify, Clause, Clausifier};

use crate::rules::{
    Calculus, ClausifyMode, DPat, FPat, Family, PatPayload, PatternAtom, RPat, Rule, RuleError, SideCondition,
};
use crate::syntax::Language;

/// Replaces `rule` by one rule per atom of denominator `denom_index`
/// (1-based); each moves the complement of that atom into the numerator.
pub fn refine_rule(rule: &Rule, denom_index: usize) -> Result<Vec<Rule>, RuleError> {
    if denom_index == 0 || denom_index > rule.denominators.len() {
        return Err(RuleError::NoSuchDenominator { rule: rule.id.clone(), index: denom_index });
    }
    let chosen = &rule.denominators[denom_index - 1];
    let rest: Vec<Vec<PatternAtom>> = rule
        .denominators
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != denom_index - 1)
        .map(|(_, d)| d.clone())
        .collect();
    Ok(chosen
        .iter()
        .enumerate()
        .map(|(j, psi)| {
            let mut numerator = rule.numerator.clone();
            let moved = psi.flipped();
            if !numerator.contains(&moved) {
                numerator.push(moved);
            }
            Rule {
                id: format!("{}.{}", rule.id, j + 1),
                numerator,
                denominators: rest.clone(),
                side_conditions: rule.side_conditions.clone(),
            }
        })
        .collect())
}

/// The calculus with rule `rule_id` replaced by its refinement at `denom_index`.
pub fn refine_calculus(calc: &Calculus, rule_id: &str, denom_index: usize) -> Result<Calculus, RuleError> {
    let pos = calc
        .rules
        .iter()
        .position(|r| r.id == rule_id)
        .ok_or_else(|| RuleError::UnknownRule(rule_id.to_string()))?;
    let refined = refine_rule(&calc.rules[pos], denom_index)?;
    let mut out = calc.clone();
    out.name = format!("ref({rule_id},{})", calc.name);
    out.rules.splice(pos..=pos, refined);
    Ok(out)
}

/// Verdict of the atomic refinement condition with a human-readable reason.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AtomicCheck {
    pub holds: bool,
    pub explanation: String,
}

/// Whether every atom of the chosen denominator is negative and can only be
/// instantiated to an L-atomic atom in `language`.
pub fn check_atomic_condition(rule: &Rule, denom_index: usize, language: Language) -> Result<AtomicCheck, RuleError> {
    if denom_index == 0 || denom_index > rule.denominators.len() {
        return Err(RuleError::NoSuchDenominator { rule: rule.id.clone(), index: denom_index });
    }
    let atomic_only = |v: &str| rule.side_conditions.contains(&SideCondition::AtomicOnly(v.to_string()));
    for atom in &rule.denominators[denom_index - 1] {
        if atom.positive {
            return Ok(AtomicCheck { holds: false, explanation: format!("`{atom}` is not negative") });
        }
        let atomic = match &atom.payload {
            PatPayload::HoldsF(FPat::Prop(_), _) => true,
            PatPayload::HoldsF(FPat::Var(v), _) => atomic_only(v),
            PatPayload::HoldsF(..) => false,
            PatPayload::HoldsR(RPat::Const(_), ..) => true,
            PatPayload::HoldsR(RPat::Var(v), ..) => language == Language::Km || atomic_only(v),
            PatPayload::HoldsR(RPat::Not(_), ..) => false,
            PatPayload::Equal(..) => true,
        };
        if !atomic {
            return Ok(AtomicCheck {
                holds: false,
                explanation: format!("`{atom}` may be instantiated to a non-atomic {language} expression"),
            });
        }
    }
    Ok(AtomicCheck {
        holds: true,
        explanation: "every atom is negative with an atomic argument".to_string(),
    })
}

fn is_var_f(p: &FPat) -> Option<&str> {
    match p {
        FPat::Var(v) => Some(v),
        _ => None,
    }
}

/// The usual disjunction rule `+nu_f(p | q, x) / +nu_f(p, x) | +nu_f(q, x)`.
fn is_disjunction_rule(rule: &Rule) -> bool {
    let [num] = rule.numerator.as_slice() else { return false };
    let (PatPayload::HoldsF(FPat::Or(l, r), DPat::Var(x)), true) = (&num.payload, num.positive) else {
        return false;
    };
    let (Some(l), Some(r)) = (is_var_f(l), is_var_f(r)) else { return false };
    let expect = |v: &str| vec![PatternAtom::holds_f(true, FPat::var(v), DPat::var(x))];
    rule.side_conditions.is_empty() && rule.denominators == vec![expect(l), expect(r)]
}

/// The negation rule `+nu_f(~p, x) / -nu_f(p, x)`.
fn is_negation_rule(rule: &Rule) -> bool {
    let [num] = rule.numerator.as_slice() else { return false };
    let (PatPayload::HoldsF(FPat::Not(p), DPat::Var(x)), true) = (&num.payload, num.positive) else {
        return false;
    };
    let Some(p) = is_var_f(p) else { return false };
    rule.denominators == vec![vec![PatternAtom::holds_f(false, FPat::var(p), DPat::var(x))]]
}

fn replace_disjunction(calc: &Calculus, family: Family, prefix: &str) -> Result<Calculus, RuleError> {
    let missing = |what: &str| RuleError::MissingPrerequisite { calculus: calc.name.clone(), what: what.to_string() };
    if !calc.rules.iter().any(is_disjunction_rule) {
        return Err(missing("the disjunction rule"));
    }
    if !calc.rules.iter().any(is_negation_rule) {
        return Err(missing("the negation rule"));
    }
    let mut out = calc.clone();
    out.name = format!("{prefix}({})", calc.name);
    out.rules.retain(|r| !is_disjunction_rule(r));
    out.families.retain(|f| *f != Family::Split && *f != Family::SplitPlus);
    out.families.push(family);
    Ok(out)
}

/// Disjunction rule replaced by the `split_k` family.
pub fn split_transform(calc: &Calculus) -> Result<Calculus, RuleError> {
    replace_disjunction(calc, Family::Split, "c")
}

/// Disjunction rule replaced by the `split+_mn` family.
pub fn split_plus_transform(calc: &Calculus) -> Result<Calculus, RuleError> {
    replace_disjunction(calc, Family::SplitPlus, "c+")
}

/// Disjunction rule replaced by the `hyp_mn` family (whose `hyp_0n` members are
/// the `split_n` rules restricted to clauses), with clausification of root
/// assertions and of rule conclusions.
pub fn hypertableau_transform(calc: &Calculus) -> Result<Calculus, RuleError> {
    let mut out = replace_disjunction(calc, Family::Hyper, "hyp")?;
    out.clausify = ClausifyMode::RootsAndConclusions;
    Ok(out)
}
