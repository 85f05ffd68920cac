use std::collections::{BTreeSet, HashSet};
use std::fmt;

use thiserror::Error;

use super::ast::{
    DomainTerm, Formula, FrameCondition, Language, Payload, ProblemSpec, Relation, SignedAtom,
};
use super::labelled::{encode_labelled, LabelledAssertion};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("{line}:{column}: {message}{}", expected_suffix(.expected))]
    Syntax { line: usize, column: usize, message: String, expected: Vec<String> },
    #[error("line {line}: relation `{relation}` uses relational negation, which K_m does not have")]
    LanguageViolation { line: usize, relation: String },
    #[error("line {line}: {message}")]
    Encoding { line: usize, message: String },
}

fn expected_suffix(expected: &[String]) -> String {
    if expected.is_empty() {
        String::new()
    } else {
        format!(" (expected {})", expected.join(" or "))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Tilde,
    Bar,
    Amp,
    LBrack,
    RBrack,
    Lt,
    Gt,
    LParen,
    RParen,
    Comma,
    At,
    Minus,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Tok::Ident(name) => return write!(f, "`{name}`"),
            Tok::Tilde => "`~`",
            Tok::Bar => "`|`",
            Tok::Amp => "`&`",
            Tok::LBrack => "`[`",
            Tok::RBrack => "`]`",
            Tok::Lt => "`<`",
            Tok::Gt => "`>`",
            Tok::LParen => "`(`",
            Tok::RParen => "`)`",
            Tok::Comma => "`,`",
            Tok::At => "`@`",
            Tok::Minus => "`-`",
            Tok::Eof => "end of line",
        };
        write!(f, "{s}")
    }
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

/// Recursive-descent parser over a single line.
pub(crate) struct LineParser<'n> {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    line: usize,
    end_col: usize,
    nominals: &'n BTreeSet<String>,
}

impl<'n> LineParser<'n> {
    pub(crate) fn new(
        text: &str,
        line: usize,
        nominals: &'n BTreeSet<String>,
    ) -> Result<Self, ParseError> {
        let mut toks = Vec::new();
        let chars: Vec<char> = text.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            let col = i + 1;
            if c.is_whitespace() {
                i += 1;
                continue;
            }
            if c == '#' {
                break;
            }
            if is_ident_start(c) {
                let start = i;
                while i < chars.len() && is_ident_char(chars[i]) {
                    i += 1;
                }
                toks.push((Tok::Ident(chars[start..i].iter().collect()), col));
                continue;
            }
            let tok = match c {
                '~' => Tok::Tilde,
                '|' => Tok::Bar,
                '&' => Tok::Amp,
                '[' => Tok::LBrack,
                ']' => Tok::RBrack,
                '<' => Tok::Lt,
                '>' => Tok::Gt,
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                ',' => Tok::Comma,
                '@' => Tok::At,
                '-' => Tok::Minus,
                other => {
                    return Err(ParseError::Syntax {
                        line,
                        column: col,
                        message: format!("unexpected character `{other}`"),
                        expected: vec![],
                    })
                }
            };
            toks.push((tok, col));
            i += 1;
        }
        let end_col = chars.len() + 1;
        Ok(LineParser { toks, pos: 0, line, end_col, nominals })
    }

    fn peek(&self) -> &Tok {
        self.toks.get(self.pos).map(|(t, _)| t).unwrap_or(&Tok::Eof)
    }

    fn peek_at(&self, offset: usize) -> &Tok {
        self.toks.get(self.pos + offset).map(|(t, _)| t).unwrap_or(&Tok::Eof)
    }

    fn column(&self) -> usize {
        self.toks.get(self.pos).map(|(_, c)| *c).unwrap_or(self.end_col)
    }

    fn error(&self, expected: &[&str]) -> ParseError {
        ParseError::Syntax {
            line: self.line,
            column: self.column(),
            message: format!("unexpected {}", self.peek()),
            expected: expected.iter().map(|s| s.to_string()).collect(),
        }
    }

    fn expect(&mut self, tok: Tok) -> Result<(), ParseError> {
        if *self.peek() == tok {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(&[&tok.to_string()]))
        }
    }

    fn ident(&mut self) -> Result<String, ParseError> {
        match self.peek().clone() {
            Tok::Ident(name) => {
                self.pos += 1;
                Ok(name)
            }
            _ => Err(self.error(&["identifier"])),
        }
    }

    pub(crate) fn at_end(&self) -> bool {
        *self.peek() == Tok::Eof
    }

    pub(crate) fn finish(&self) -> Result<(), ParseError> {
        if self.at_end() {
            Ok(())
        } else {
            Err(self.error(&["end of line"]))
        }
    }

    pub(crate) fn relation(&mut self) -> Result<Relation, ParseError> {
        if *self.peek() == Tok::Minus {
            self.pos += 1;
            return Ok(Relation::negate(self.relation()?));
        }
        match self.peek().clone() {
            Tok::Ident(name) => {
                self.pos += 1;
                Ok(Relation::Const(name))
            }
            _ => Err(self.error(&["relation"])),
        }
    }

    pub(crate) fn formula(&mut self) -> Result<Formula, ParseError> {
        let mut left = self.conjunction()?;
        while *self.peek() == Tok::Bar {
            self.pos += 1;
            let right = self.conjunction()?;
            left = Formula::or(left, right);
        }
        Ok(left)
    }

    fn conjunction(&mut self) -> Result<Formula, ParseError> {
        let mut left = self.unary()?;
        while *self.peek() == Tok::Amp {
            self.pos += 1;
            let right = self.unary()?;
            left = Formula::and(left, right);
        }
        Ok(left)
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        match self.peek().clone() {
            Tok::Tilde => {
                self.pos += 1;
                Ok(Formula::negate(self.unary()?))
            }
            Tok::LBrack => {
                self.pos += 1;
                let rel = self.relation()?;
                self.expect(Tok::RBrack)?;
                Ok(Formula::necessity(rel, self.unary()?))
            }
            Tok::Lt => {
                self.pos += 1;
                let rel = self.relation()?;
                self.expect(Tok::Gt)?;
                Ok(Formula::possibility(rel, self.unary()?))
            }
            Tok::LParen => {
                self.pos += 1;
                let inner = self.formula()?;
                self.expect(Tok::RParen)?;
                Ok(inner)
            }
            Tok::Ident(name) => {
                self.pos += 1;
                if self.nominals.contains(&name) {
                    Ok(Formula::Nom(name))
                } else {
                    Ok(Formula::Prop(name))
                }
            }
            _ => Err(self.error(&["formula"])),
        }
    }

    pub(crate) fn term(&mut self) -> Result<DomainTerm, ParseError> {
        let name = self.ident()?;
        if *self.peek() != Tok::LParen {
            return Ok(DomainTerm::Const(name));
        }
        match name.as_str() {
            "f" => {
                self.pos += 1;
                let rel = self.relation()?;
                self.expect(Tok::Comma)?;
                let fml = self.formula()?;
                self.expect(Tok::Comma)?;
                let arg = self.term()?;
                self.expect(Tok::RParen)?;
                Ok(DomainTerm::skolem_f(rel, fml, arg))
            }
            "g" => {
                self.pos += 1;
                let rel = self.relation()?;
                self.expect(Tok::Comma)?;
                let arg = self.term()?;
                self.expect(Tok::RParen)?;
                Ok(DomainTerm::skolem_g(rel, arg))
            }
            _ => Err(self.error(&["`f(` or `g(` for a Skolem term", "constant"])),
        }
    }

    /// `nu_f(...)`, `nu_r(...)` or `eq(...)` after an optional `-`, if the line starts so.
    fn looks_like_fo_atom(&self) -> bool {
        let offset = usize::from(*self.peek() == Tok::Minus);
        matches!(self.peek_at(offset), Tok::Ident(name) if matches!(name.as_str(), "nu_f" | "nu_r" | "eq"))
            && *self.peek_at(offset + 1) == Tok::LParen
    }

    fn fo_atom(&mut self) -> Result<SignedAtom, ParseError> {
        let positive = if *self.peek() == Tok::Minus {
            self.pos += 1;
            false
        } else {
            true
        };
        let head = self.ident()?;
        self.expect(Tok::LParen)?;
        let payload = match head.as_str() {
            "nu_f" => {
                let col = self.column();
                let fml = self.formula()?;
                if fml.has_nominal() {
                    return Err(ParseError::Syntax {
                        line: self.line,
                        column: col,
                        message: "nominals are not allowed inside nu_f".into(),
                        expected: vec![],
                    });
                }
                self.expect(Tok::Comma)?;
                let t = self.term()?;
                Payload::HoldsF(fml, t)
            }
            "nu_r" => {
                let rel = self.relation()?;
                self.expect(Tok::Comma)?;
                let s = self.term()?;
                self.expect(Tok::Comma)?;
                let t = self.term()?;
                Payload::HoldsR(rel, s, t)
            }
            _ => {
                let s = self.term()?;
                self.expect(Tok::Comma)?;
                let t = self.term()?;
                Payload::Equal(s, t)
            }
        };
        self.expect(Tok::RParen)?;
        Ok(SignedAtom { positive, payload })
    }

    fn labelled(&mut self) -> Result<SignedAtom, ParseError> {
        let negated = if *self.peek() == Tok::Tilde {
            self.pos += 1;
            true
        } else {
            false
        };
        self.expect(Tok::At)?;
        let label = self.ident()?;
        let formula = self.formula()?;
        let line = self.line;
        encode_labelled(&LabelledAssertion { negated, label, formula })
            .map_err(|e| ParseError::Encoding { line, message: e.to_string() })
    }

    fn rel_assertion(&mut self) -> Result<SignedAtom, ParseError> {
        let positive = if *self.peek() == Tok::Tilde {
            self.pos += 1;
            false
        } else {
            true
        };
        let head = self.ident()?;
        debug_assert_eq!(head, "rel");
        self.expect(Tok::LParen)?;
        let rel = self.relation()?;
        self.expect(Tok::Comma)?;
        let s = self.ident()?;
        self.expect(Tok::Comma)?;
        let t = self.ident()?;
        self.expect(Tok::RParen)?;
        Ok(SignedAtom::holds_r(positive, rel, DomainTerm::Const(s), DomainTerm::Const(t)))
    }

    fn looks_like_rel(&self) -> bool {
        let offset = usize::from(*self.peek() == Tok::Tilde);
        matches!(self.peek_at(offset), Tok::Ident(name) if name == "rel")
            && *self.peek_at(offset + 1) == Tok::LParen
    }

    fn looks_like_labelled(&self) -> bool {
        *self.peek() == Tok::At || (*self.peek() == Tok::Tilde && *self.peek_at(1) == Tok::At)
    }
}

/// One parsed assertion line before fresh root constants are assigned.
enum Line {
    Atom(SignedAtom),
    Unlabelled(Formula),
}

/// Parses a single atom in either fo or labelled syntax. Identifiers in
/// `nominals` are read as nominals inside labelled formulas.
pub fn parse_atom(text: &str, nominals: &BTreeSet<String>) -> Result<SignedAtom, ParseError> {
    let mut p = LineParser::new(text, 1, nominals)?;
    let atom = if p.looks_like_fo_atom() {
        p.fo_atom()?
    } else if p.looks_like_labelled() {
        p.labelled()?
    } else if p.looks_like_rel() {
        p.rel_assertion()?
    } else {
        return Err(p.error(&["`nu_f(`", "`nu_r(`", "`eq(`", "`@`", "`rel(`"]));
    };
    p.finish()?;
    Ok(atom)
}

/// Parses a standalone formula (no nominals).
pub fn parse_formula(text: &str) -> Result<Formula, ParseError> {
    let empty = BTreeSet::new();
    let mut p = LineParser::new(text, 1, &empty)?;
    let f = p.formula()?;
    p.finish()?;
    Ok(f)
}

/// Parses a problem document: one assertion per line, `#` comments,
/// `nom`, `language` and `frame` directives.
pub fn parse_problem(text: &str) -> Result<ProblemSpec, ParseError> {
    let mut nominals = BTreeSet::new();
    let mut language: Option<(Language, usize)> = None;
    let mut frames = BTreeSet::new();
    let mut lines: Vec<(usize, Line)> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let mut words = content.split_whitespace();
        let first = words.next().unwrap_or("");
        match first {
            "nom" => {
                let names: Vec<&str> = words.collect();
                if names.is_empty() {
                    return Err(ParseError::Syntax {
                        line: line_no,
                        column: raw.len() + 1,
                        message: "missing nominal name".into(),
                        expected: vec!["identifier".into()],
                    });
                }
                for name in names {
                    nominals.insert(name.to_string());
                }
                continue;
            }
            "language" => {
                let value = words.next().unwrap_or("");
                let lang = match value {
                    "km" => Language::Km,
                    "kmnot" => Language::KmNot,
                    _ => {
                        return Err(ParseError::Syntax {
                            line: line_no,
                            column: raw.find(value).map(|c| c + 1).unwrap_or(1),
                            message: format!("unknown language `{value}`"),
                            expected: vec!["`km`".into(), "`kmnot`".into()],
                        })
                    }
                };
                language = Some((lang, line_no));
                continue;
            }
            "frame" => {
                for value in words {
                    let cond = match value {
                        "irr" | "irreflexive" => FrameCondition::Irreflexive,
                        "imm-pred" | "immediate-predecessor" => {
                            FrameCondition::ImmediatePredecessor
                        }
                        _ => {
                            return Err(ParseError::Syntax {
                                line: line_no,
                                column: raw.find(value).map(|c| c + 1).unwrap_or(1),
                                message: format!("unknown frame condition `{value}`"),
                                expected: vec!["`irr`".into(), "`imm-pred`".into()],
                            })
                        }
                    };
                    frames.insert(cond);
                }
                continue;
            }
            _ => {}
        }

        let mut p = LineParser::new(raw, line_no, &nominals)?;
        let parsed = if p.looks_like_fo_atom() {
            Line::Atom(p.fo_atom()?)
        } else if p.looks_like_labelled() {
            Line::Atom(p.labelled()?)
        } else if p.looks_like_rel() {
            Line::Atom(p.rel_assertion()?)
        } else {
            let col = p.column();
            let f = p.formula()?;
            if f.has_nominal() {
                return Err(ParseError::Encoding {
                    line: line_no,
                    message: format!(
                        "column {col}: nominals may only appear in labelled assertions"
                    ),
                });
            }
            Line::Unlabelled(f)
        };
        p.finish()?;
        lines.push((line_no, parsed));
    }

    let mut used = HashSet::new();
    for (_, line) in &lines {
        if let Line::Atom(atom) = line {
            let mut names = BTreeSet::new();
            for t in atom.payload.terms() {
                t.constants(&mut names);
            }
            used.extend(names);
        }
    }

    let mut next_fresh = 0usize;
    let mut assertions = Vec::with_capacity(lines.len());
    let mut saw_negation: Option<(usize, String)> = None;
    for (line_no, line) in lines {
        let atom = match line {
            Line::Atom(atom) => atom,
            Line::Unlabelled(f) => {
                let name = loop {
                    let candidate = format!("a{next_fresh}");
                    next_fresh += 1;
                    if !used.contains(&candidate) {
                        break candidate;
                    }
                };
                SignedAtom::holds_f(true, f, DomainTerm::Const(name))
            }
        };
        if saw_negation.is_none() {
            if let Some(rel) = first_negated_relation(&atom.payload) {
                saw_negation = Some((line_no, rel.to_string()));
            }
        }
        assertions.push(atom);
    }

    let language = match language {
        Some((Language::Km, _)) => {
            if let Some((line, relation)) = saw_negation {
                return Err(ParseError::LanguageViolation { line, relation });
            }
            Language::Km
        }
        Some((lang, _)) => lang,
        None if saw_negation.is_some() => Language::KmNot,
        None => Language::Km,
    };

    Ok(ProblemSpec { assertions, language, frame_conditions: frames })
}

fn first_negated_relation(payload: &Payload) -> Option<Relation> {
    fn in_formula(f: &Formula) -> Option<Relation> {
        match f {
            Formula::Prop(_) | Formula::Nom(_) => None,
            Formula::Not(inner) => in_formula(inner),
            Formula::Or(l, r) => in_formula(l).or_else(|| in_formula(r)),
            Formula::Box(rel, inner) => {
                if rel.has_negation() {
                    Some(rel.clone())
                } else {
                    in_formula(inner)
                }
            }
        }
    }
    fn in_term(t: &DomainTerm) -> Option<Relation> {
        match t {
            DomainTerm::Const(_) => None,
            DomainTerm::SkF(r, f, arg) => {
                if r.has_negation() {
                    Some(r.clone())
                } else {
                    in_formula(f).or_else(|| in_term(arg))
                }
            }
            DomainTerm::SkG(r, arg) => {
                if r.has_negation() {
                    Some(r.clone())
                } else {
                    in_term(arg)
                }
            }
        }
    }
    match payload {
        Payload::HoldsF(f, t) => in_formula(f).or_else(|| in_term(t)),
        Payload::HoldsR(r, s, t) => {
            if r.has_negation() {
                Some(r.clone())
            } else {
                in_term(s).or_else(|| in_term(t))
            }
        }
        Payload::Equal(s, t) => in_term(s).or_else(|| in_term(t)),
    }
}
