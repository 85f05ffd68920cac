use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;

use crate::syntax::{DomainTerm, Formula, Payload, Relation, SignedAtom};

/// Interned ground domain term.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TermId(u32);

impl TermId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum TermNode {
    Const(String),
    SkF(Relation, Formula, TermId),
    SkG(Relation, TermId),
}

impl TermNode {
    pub fn arg(&self) -> Option<TermId> {
        match self {
            TermNode::Const(_) => None,
            TermNode::SkF(_, _, arg) | TermNode::SkG(_, arg) => Some(*arg),
        }
    }
}

/// Hash-consed store of domain terms shared by every branch of a derivation.
/// Skolem terms are identified by their arguments only, so re-deriving a
/// witness always yields the same id.
#[derive(Clone, Debug, Default)]
pub struct Arena {
    nodes: Vec<TermNode>,
    depth: Vec<u32>,
    index: HashMap<TermNode, TermId>,
}

impl Arena {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn intern_node(&mut self, node: TermNode) -> TermId {
        if let Some(id) = self.index.get(&node) {
            return *id;
        }
        let id = TermId(self.nodes.len() as u32);
        let depth = node.arg().map(|a| self.depth[a.index()] + 1).unwrap_or(0);
        self.nodes.push(node.clone());
        self.depth.push(depth);
        self.index.insert(node, id);
        id
    }

    pub fn intern(&mut self, term: &DomainTerm) -> TermId {
        let node = match term {
            DomainTerm::Const(name) => TermNode::Const(name.clone()),
            DomainTerm::SkF(rel, fml, arg) => {
                let arg = self.intern(arg);
                TermNode::SkF(rel.clone(), fml.clone(), arg)
            }
            DomainTerm::SkG(rel, arg) => {
                let arg = self.intern(arg);
                TermNode::SkG(rel.clone(), arg)
            }
        };
        self.intern_node(node)
    }

    pub fn lookup(&self, term: &DomainTerm) -> Option<TermId> {
        let node = match term {
            DomainTerm::Const(name) => TermNode::Const(name.clone()),
            DomainTerm::SkF(rel, fml, arg) => TermNode::SkF(rel.clone(), fml.clone(), self.lookup(arg)?),
            DomainTerm::SkG(rel, arg) => TermNode::SkG(rel.clone(), self.lookup(arg)?),
        };
        self.index.get(&node).copied()
    }

    pub fn node(&self, id: TermId) -> &TermNode {
        &self.nodes[id.index()]
    }

    pub fn depth(&self, id: TermId) -> u32 {
        self.depth[id.index()]
    }

    pub fn term(&self, id: TermId) -> DomainTerm {
        match self.node(id) {
            TermNode::Const(name) => DomainTerm::Const(name.clone()),
            TermNode::SkF(rel, fml, arg) => DomainTerm::skolem_f(rel.clone(), fml.clone(), self.term(*arg)),
            TermNode::SkG(rel, arg) => DomainTerm::skolem_g(rel.clone(), self.term(*arg)),
        }
    }

    /// Canonical order used to pick class representatives: shallower terms
    /// first, then structural order. Independent of interning order.
    pub fn canonical_cmp(&self, a: TermId, b: TermId) -> Ordering {
        if a == b {
            return Ordering::Equal;
        }
        self.depth(a)
            .cmp(&self.depth(b))
            .then_with(|| self.term(a).cmp(&self.term(b)))
    }

    pub fn to_atom(&self, atom: &Atom) -> SignedAtom {
        let payload = match &atom.body {
            AtomBody::F(f, t) => Payload::HoldsF(f.clone(), self.term(*t)),
            AtomBody::R(r, s, t) => Payload::HoldsR(r.clone(), self.term(*s), self.term(*t)),
            AtomBody::Eq(s, t) => Payload::Equal(self.term(*s), self.term(*t)),
        };
        SignedAtom { positive: atom.positive, payload }
    }

    pub fn from_atom(&mut self, atom: &SignedAtom) -> Atom {
        let body = match &atom.payload {
            Payload::HoldsF(f, t) => AtomBody::F(f.clone(), self.intern(t)),
            Payload::HoldsR(r, s, t) => AtomBody::R(r.clone(), self.intern(s), self.intern(t)),
            Payload::Equal(s, t) => AtomBody::Eq(self.intern(s), self.intern(t)),
        };
        Atom { positive: atom.positive, body }
    }

    pub fn display<'a>(&'a self, atom: &'a Atom) -> impl fmt::Display + 'a {
        DisplayAtom { arena: self, atom }
    }
}

struct DisplayAtom<'a> {
    arena: &'a Arena,
    atom: &'a Atom,
}

impl fmt::Display for DisplayAtom<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.arena.to_atom(self.atom))
    }
}

/// Branch atom over interned terms.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Atom {
    pub positive: bool,
    pub body: AtomBody,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AtomBody {
    F(Formula, TermId),
    R(Relation, TermId, TermId),
    Eq(TermId, TermId),
}

impl Atom {
    pub fn flipped(&self) -> Atom {
        Atom { positive: !self.positive, body: self.body.clone() }
    }

    pub fn terms(&self) -> impl Iterator<Item = TermId> {
        let (a, b) = match &self.body {
            AtomBody::F(_, t) => (*t, None),
            AtomBody::R(_, s, t) | AtomBody::Eq(s, t) => (*s, Some(*t)),
        };
        std::iter::once(a).chain(b)
    }

    pub fn map_terms(&self, mut f: impl FnMut(TermId) -> TermId) -> Atom {
        let body = match &self.body {
            AtomBody::F(fml, t) => AtomBody::F(fml.clone(), f(*t)),
            AtomBody::R(r, s, t) => AtomBody::R(r.clone(), f(*s), f(*t)),
            AtomBody::Eq(s, t) => {
                let (s, t) = (f(*s), f(*t));
                AtomBody::Eq(s.min(t), s.max(t))
            }
        };
        Atom { positive: self.positive, body }
    }
}
