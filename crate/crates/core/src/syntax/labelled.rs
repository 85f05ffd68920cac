//! Internalised (labelled) notation: `@i phi` stands for `nu_f(phi, i)` and
//! `@i ~[a]~j` for `nu_r(a, i, j)`. Only these shapes are accepted; this is
//! not a hybrid logic front-end.

use thiserror::Error;

use super::ast::{DomainTerm, Formula, SignedAtom};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabelledAssertion {
    /// Written `~@i phi`.
    pub negated: bool,
    pub label: String,
    pub formula: Formula,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EncodeError {
    #[error("nominal in unsupported position in `@{label} {formula}`")]
    UnsupportedNominal { label: String, formula: String },
}

/// Maps a labelled assertion to the tableau atom it abbreviates.
///
/// One leading `~` flips the polarity of the underlying atom, so `@i ~p`
/// is `-nu_f(p, i)` and `@i ~[a]~j` is `+nu_r(a, i, j)`.
pub fn encode_labelled(line: &LabelledAssertion) -> Result<SignedAtom, EncodeError> {
    let label = DomainTerm::Const(line.label.clone());
    let atom = match &line.formula {
        Formula::Not(inner) => base_atom(&label, inner).map(|a| a.flipped()),
        other => base_atom(&label, other),
    };
    let atom = atom.ok_or_else(|| EncodeError::UnsupportedNominal {
        label: line.label.clone(),
        formula: line.formula.to_string(),
    })?;
    Ok(if line.negated { atom.flipped() } else { atom })
}

fn base_atom(label: &DomainTerm, fml: &Formula) -> Option<SignedAtom> {
    match fml {
        Formula::Nom(j) => Some(SignedAtom::equal(true, label.clone(), DomainTerm::Const(j.clone()))),
        Formula::Box(rel, body) => match body.as_ref() {
            Formula::Not(target) => match target.as_ref() {
                Formula::Nom(j) => Some(SignedAtom::holds_r(
                    false,
                    rel.clone(),
                    label.clone(),
                    DomainTerm::Const(j.clone()),
                )),
                _ if !fml.has_nominal() => Some(SignedAtom::holds_f(true, fml.clone(), label.clone())),
                _ => None,
            },
            _ if !fml.has_nominal() => Some(SignedAtom::holds_f(true, fml.clone(), label.clone())),
            _ => None,
        },
        _ if !fml.has_nominal() => Some(SignedAtom::holds_f(true, fml.clone(), label.clone())),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::ast::{Payload, Relation};

    fn assertion(label: &str, formula: Formula) -> LabelledAssertion {
        LabelledAssertion { negated: false, label: label.into(), formula }
    }

    #[test]
    fn diamond_to_nominal_is_a_relation_atom() {
        let f = Formula::possibility(Relation::constant("r"), Formula::nom("b"));
        let atom = encode_labelled(&assertion("a", f)).unwrap();
        assert_eq!(
            atom,
            SignedAtom::holds_r(true, Relation::constant("r"), DomainTerm::constant("a"), DomainTerm::constant("b"))
        );
    }

    #[test]
    fn plain_formula_is_a_holds_atom() {
        let atom = encode_labelled(&assertion("a", Formula::prop("p"))).unwrap();
        assert_eq!(atom, SignedAtom::holds_f(true, Formula::prop("p"), DomainTerm::constant("a")));
    }

    #[test]
    fn nominal_under_disjunction_is_rejected() {
        let f = Formula::or(
            Formula::prop("p"),
            Formula::possibility(Relation::constant("r"), Formula::nom("b")),
        );
        assert!(encode_labelled(&assertion("a", f)).is_err());
    }

    #[test]
    fn nominal_conclusion_is_equality() {
        let atom = encode_labelled(&assertion("i", Formula::nom("j"))).unwrap();
        assert!(matches!(atom.payload, Payload::Equal(..)));
        assert!(atom.positive);
        let neg = encode_labelled(&LabelledAssertion { negated: true, ..assertion("i", Formula::nom("j")) })
            .unwrap();
        assert!(!neg.positive);
    }
}
