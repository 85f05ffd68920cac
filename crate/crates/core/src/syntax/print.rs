use std::fmt;

use super::ast::{DomainTerm, Formula, Payload, Relation, SignedAtom};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RenderStyle {
    /// `nu_f(p, a)`, `-nu_r(r, a, b)`, `eq(a, b)`.
    Fo,
    /// `@a p`, `@a <r>b`, `@a b`. Atoms outside the labelled image fall back to fo.
    Labelled,
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Relation::Const(name) => write!(f, "{name}"),
            Relation::Not(inner) => write!(f, "-{inner}"),
        }
    }
}

fn write_operand(f: &mut fmt::Formatter<'_>, fml: &Formula) -> fmt::Result {
    if matches!(fml, Formula::Or(..)) {
        write!(f, "({fml})")
    } else {
        write!(f, "{fml}")
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::Prop(name) | Formula::Nom(name) => write!(f, "{name}"),
            Formula::Not(inner) => {
                write!(f, "~")?;
                write_operand(f, inner)
            }
            Formula::Box(rel, inner) => {
                write!(f, "[{rel}]")?;
                write_operand(f, inner)
            }
            // `|` is left-associative, so only a right-nested disjunction needs parentheses.
            Formula::Or(l, r) => {
                write!(f, "{l} | ")?;
                write_operand(f, r)
            }
        }
    }
}

impl fmt::Display for DomainTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DomainTerm::Const(name) => write!(f, "{name}"),
            DomainTerm::SkF(rel, fml, arg) => write!(f, "f({rel},{fml},{arg})"),
            DomainTerm::SkG(rel, arg) => write!(f, "g({rel},{arg})"),
        }
    }
}

impl fmt::Display for Payload {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Payload::HoldsF(fml, t) => write!(f, "nu_f({fml}, {t})"),
            Payload::HoldsR(rel, s, t) => write!(f, "nu_r({rel}, {s}, {t})"),
            Payload::Equal(s, t) => write!(f, "eq({s}, {t})"),
        }
    }
}

impl fmt::Display for SignedAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.positive {
            write!(f, "-")?;
        }
        write!(f, "{}", self.payload)
    }
}

/// Prints an atom in the requested style.
pub fn render(atom: &SignedAtom, style: RenderStyle) -> String {
    match style {
        RenderStyle::Fo => atom.to_string(),
        RenderStyle::Labelled => render_labelled(atom).unwrap_or_else(|| atom.to_string()),
    }
}

/// The labelled form of an atom, if it lies in the image of the labelled encoding.
pub fn render_labelled(atom: &SignedAtom) -> Option<String> {
    let text = match (&atom.payload, atom.positive) {
        (Payload::HoldsF(fml, t), positive) => {
            let i = t.as_const()?;
            if fml.has_nominal() {
                return None;
            }
            if positive {
                // `@i ~q` reads back as the negative atom, so `+nu_f(~q, i)` has no labelled form.
                if matches!(fml, Formula::Not(_)) {
                    return None;
                }
                format!("@{i} {fml}")
            } else if matches!(fml, Formula::Or(..)) {
                format!("@{i} ~({fml})")
            } else {
                format!("@{i} ~{fml}")
            }
        }
        (Payload::HoldsR(rel, s, t), positive) => {
            let i = s.as_const()?;
            let j = t.as_const()?;
            if positive {
                format!("@{i} <{rel}>{j}")
            } else {
                format!("@{i} [{rel}]~{j}")
            }
        }
        (Payload::Equal(s, t), positive) => {
            let i = s.as_const()?;
            let j = t.as_const()?;
            if positive {
                format!("@{i} {j}")
            } else {
                format!("@{i} ~{j}")
            }
        }
    };
    Some(text)
}
