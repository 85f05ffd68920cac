use std::collections::{HashMap, HashSet};

use super::arena::{Arena, Atom, AtomBody, TermId, TermNode};
use crate::syntax::{DomainTerm, SignedAtom};

/// Why a branch closed: the rule (or built-in check) that fired.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BranchStatus {
    Open,
    Closed(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AddOutcome {
    Added,
    Present,
    Closed,
}

/// A set of atoms together with the congruence generated by its positive
/// equalities. Stored atoms always mention class representatives only.
#[derive(Clone, Debug, Default)]
pub struct Branch {
    atoms: Vec<Atom>,
    set: HashSet<Atom>,
    terms: Vec<TermId>,
    rep: HashMap<TermId, TermId>,
    sigs: HashMap<TermNode, TermId>,
    equalities: Vec<(TermId, TermId)>,
    status: Option<String>,
    merges: u64,
}

impl Branch {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_atoms(arena: &mut Arena, atoms: &[SignedAtom]) -> Self {
        let mut branch = Branch::new();
        for atom in atoms {
            let atom = arena.from_atom(atom);
            branch.add(arena, &atom);
        }
        branch
    }

    pub fn status(&self) -> BranchStatus {
        match &self.status {
            None => BranchStatus::Open,
            Some(reason) => BranchStatus::Closed(reason.clone()),
        }
    }

    pub fn is_closed(&self) -> bool {
        self.status.is_some()
    }

    pub(crate) fn close(&mut self, reason: &str) {
        if self.status.is_none() {
            self.status = Some(reason.to_string());
        }
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn contains(&self, atom: &Atom) -> bool {
        self.set.contains(atom)
    }

    /// Number of class merges so far; a change invalidates incremental matching.
    pub fn merge_count(&self) -> u64 {
        self.merges
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    pub fn has_term(&self, t: TermId) -> bool {
        self.rep.contains_key(&t)
    }

    pub fn find(&self, t: TermId) -> TermId {
        self.rep.get(&t).copied().unwrap_or(t)
    }

    /// Class representatives in order of first registration.
    pub fn classes(&self) -> Vec<TermId> {
        self.terms.iter().copied().filter(|t| self.find(*t) == *t).collect()
    }

    pub fn members(&self, class: TermId) -> impl Iterator<Item = TermId> + '_ {
        self.terms.iter().copied().filter(move |t| self.find(*t) == class)
    }

    pub fn registered_terms(&self) -> &[TermId] {
        &self.terms
    }

    pub fn equalities(&self) -> &[(TermId, TermId)] {
        &self.equalities
    }

    /// Whether a normalized atom holds in the branch; positive equalities are
    /// decided by the congruence rather than by membership.
    pub fn holds(&self, atom: &Atom) -> bool {
        match (&atom.body, atom.positive) {
            (AtomBody::Eq(s, t), true) => {
                self.has_term(*s) && self.has_term(*t) && self.find(*s) == self.find(*t)
            }
            _ => self.set.contains(&self.normalize(atom)),
        }
    }

    pub fn normalize(&self, atom: &Atom) -> Atom {
        atom.map_terms(|t| self.find(t))
    }

    /// Registers a term and its subterms; returns its representative.
    pub fn register(&mut self, arena: &Arena, t: TermId) -> TermId {
        if self.rep.contains_key(&t) {
            return self.find(t);
        }
        let node = arena.node(t).clone();
        let sig = match node {
            TermNode::Const(_) => None,
            TermNode::SkF(ref r, ref f, arg) => {
                let arg = self.register(arena, arg);
                Some(TermNode::SkF(r.clone(), f.clone(), arg))
            }
            TermNode::SkG(ref r, arg) => {
                let arg = self.register(arena, arg);
                Some(TermNode::SkG(r.clone(), arg))
            }
        };
        self.terms.push(t);
        self.rep.insert(t, t);
        if let Some(sig) = sig {
            match self.sigs.get(&sig).copied() {
                Some(other) => self.union(arena, t, other),
                None => {
                    self.sigs.insert(sig, t);
                }
            }
        }
        self.find(t)
    }

    /// Adds an atom, registering its terms. Positive equalities merge classes.
    pub fn add(&mut self, arena: &Arena, atom: &Atom) -> AddOutcome {
        if self.is_closed() {
            return AddOutcome::Closed;
        }
        for t in atom.terms() {
            self.register(arena, t);
        }
        if self.is_closed() {
            return AddOutcome::Closed;
        }
        let atom = self.normalize(atom);
        if let (AtomBody::Eq(s, t), true) = (&atom.body, atom.positive) {
            if s == t {
                return AddOutcome::Present;
            }
            self.equalities.push((*s, *t));
            self.union(arena, *s, *t);
            return if self.is_closed() { AddOutcome::Closed } else { AddOutcome::Added };
        }
        if !self.set.insert(atom.clone()) {
            return AddOutcome::Present;
        }
        self.atoms.push(atom.clone());
        self.check_closure(&atom);
        if self.is_closed() {
            AddOutcome::Closed
        } else {
            AddOutcome::Added
        }
    }

    /// Merges the classes of two terms, registering them first if needed.
    pub fn assert_equality(&mut self, arena: &mut Arena, lhs: &DomainTerm, rhs: &DomainTerm) -> AddOutcome {
        let s = arena.intern(lhs);
        let t = arena.intern(rhs);
        self.add(arena, &Atom { positive: true, body: AtomBody::Eq(s.min(t), s.max(t)) })
    }

    fn check_closure(&mut self, atom: &Atom) {
        match &atom.body {
            AtomBody::Eq(s, t) if !atom.positive && s == t => self.close("eq_clash"),
            AtomBody::Eq(..) => {}
            AtomBody::F(..) if self.set.contains(&atom.flipped()) => self.close("close_f"),
            AtomBody::R(..) if self.set.contains(&atom.flipped()) => self.close("close_r"),
            _ => {}
        }
    }

    fn union(&mut self, arena: &Arena, a: TermId, b: TermId) {
        let mut pending = vec![(a, b)];
        let mut merged = false;
        while let Some((a, b)) = pending.pop() {
            let (ra, rb) = (self.find(a), self.find(b));
            if ra == rb {
                continue;
            }
            let (winner, loser) = if arena.canonical_cmp(ra, rb).is_le() { (ra, rb) } else { (rb, ra) };
            for rep in self.rep.values_mut() {
                if *rep == loser {
                    *rep = winner;
                }
            }
            merged = true;
            // Recompute Skolem signatures; clashes are new congruent pairs.
            self.sigs.clear();
            for &t in &self.terms {
                let sig = match arena.node(t) {
                    TermNode::Const(_) => continue,
                    TermNode::SkF(r, f, arg) => TermNode::SkF(r.clone(), f.clone(), self.find(*arg)),
                    TermNode::SkG(r, arg) => TermNode::SkG(r.clone(), self.find(*arg)),
                };
                match self.sigs.get(&sig) {
                    Some(&other) if self.find(other) != self.find(t) => pending.push((other, t)),
                    Some(_) => {}
                    None => {
                        self.sigs.insert(sig, t);
                    }
                }
            }
        }
        if merged {
            self.merges += 1;
            self.renormalize();
        }
    }

    fn renormalize(&mut self) {
        let old = std::mem::take(&mut self.atoms);
        self.set.clear();
        for atom in old {
            let atom = self.normalize(&atom);
            if self.set.insert(atom.clone()) {
                self.atoms.push(atom);
            }
        }
        for i in 0..self.atoms.len() {
            let atom = self.atoms[i].clone();
            self.check_closure(&atom);
        }
    }

    pub fn snapshot(&self, arena: &Arena) -> BranchSnapshot {
        BranchSnapshot {
            atoms: self.atoms.iter().map(|a| arena.to_atom(a)).collect(),
            classes: self
                .classes()
                .into_iter()
                .map(|c| (arena.term(c), self.members(c).map(|m| arena.term(m)).collect()))
                .collect(),
            equalities: self.equalities.iter().map(|(s, t)| (arena.term(*s), arena.term(*t))).collect(),
            closed: self.status.clone(),
        }
    }
}

/// Arena-independent view of a branch.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BranchSnapshot {
    /// Stored atoms over class representatives.
    pub atoms: Vec<SignedAtom>,
    /// Representative and all members of every class.
    pub classes: Vec<(DomainTerm, Vec<DomainTerm>)>,
    /// Positive equalities as they were asserted.
    pub equalities: Vec<(DomainTerm, DomainTerm)>,
    pub closed: Option<String>,
}

impl BranchSnapshot {
    /// Atoms as a sorted set, including asserted equalities. Used to compare
    /// branches produced under different strategies.
    pub fn normalized_set(&self) -> std::collections::BTreeSet<SignedAtom> {
        let mut out: std::collections::BTreeSet<SignedAtom> = self.atoms.iter().cloned().collect();
        for (rep, members) in &self.classes {
            for m in members {
                if m != rep {
                    out.insert(SignedAtom::equal(true, m.clone(), rep.clone()));
                }
            }
        }
        out
    }

    /// Rebuilds a live branch in a fresh arena.
    pub fn restore(&self, arena: &mut Arena) -> Branch {
        let mut branch = Branch::new();
        for (rep, members) in &self.classes {
            let r = arena.intern(rep);
            branch.register(arena, r);
            for m in members {
                let m = arena.intern(m);
                branch.register(arena, m);
            }
        }
        for (s, t) in &self.equalities {
            branch.assert_equality(arena, s, t);
        }
        for atom in &self.atoms {
            let atom = arena.from_atom(atom);
            branch.add(arena, &atom);
        }
        if let Some(reason) = &self.closed {
            branch.close(reason);
        }
        branch
    }
}
