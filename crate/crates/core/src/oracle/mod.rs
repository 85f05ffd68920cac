//! Finite model search: every model up to a domain bound is considered, with
//! optional frame conditions. A ground Boolean encoding searched by a
//! clause-learning solver replaces literal enumeration without skipping any
//! candidate.

mod sat;

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::Serialize;
use thiserror::Error;

use crate::models::Model;
use crate::syntax::{DomainTerm, FrameCondition, Formula, Payload, ProblemSpec, Relation};
use sat::{solve, Cnf, Lit, Search};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("the oracle only handles constants, found `{0}`")]
    SkolemTerm(String),
    #[error("nominal `{0}` cannot be evaluated")]
    Nominal(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OracleOptions {
    pub max_domain: usize,
    /// Bound on search decisions over all domain sizes.
    pub cap: u64,
    /// Conditions required on top of the problem's own.
    pub frame: BTreeSet<FrameCondition>,
}

impl Default for OracleOptions {
    fn default() -> Self {
        OracleOptions { max_domain: 4, cap: 10_000_000, frame: BTreeSet::new() }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OracleOutcome {
    ModelFound(Model),
    /// No model of any size up to `complete_up_to`; `capped` if the search
    /// stopped early at the next size.
    NoModel { complete_up_to: usize, capped: bool },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OracleResult {
    pub outcome: OracleOutcome,
    pub models_checked: u64,
}

impl OracleResult {
    pub fn model(&self) -> Option<&Model> {
        match &self.outcome {
            OracleOutcome::ModelFound(m) => Some(m),
            OracleOutcome::NoModel { .. } => None,
        }
    }
}

/// Searches domain sizes `1..=max_domain` in ascending order. Within a size,
/// root constants are assigned in counter order (the first assertion's
/// constant pinned to element 0), then the relation and proposition
/// valuations are searched for the lexicographically least one, relation
/// triples before proposition pairs.
pub fn oracle_search(problem: &ProblemSpec, opts: &OracleOptions) -> Result<OracleResult, OracleError> {
    check_problem(problem)?;
    let mut frame = opts.frame.clone();
    frame.extend(problem.frame_conditions.iter().copied());
    let constants = ordered_constants(problem);
    let relations: Vec<String> = problem.relation_constants().into_iter().collect();
    let props: Vec<String> = problem.props().into_iter().collect();
    let mut nodes = 0;
    for n in 1..=opts.max_domain {
        let free = constants.len().saturating_sub(1);
        let assignments = (n as u64).pow(free as u32);
        for code in 0..assignments {
            let mut place = BTreeMap::new();
            let mut rest = code;
            for (i, c) in constants.iter().enumerate() {
                let e = if i == 0 { 0 } else { (rest % n as u64) as usize };
                if i > 0 {
                    rest /= n as u64;
                }
                place.insert(c.clone(), e);
            }
            let Some(enc) = Encoding::build(problem, n, &relations, &props, &place, &frame)? else {
                continue;
            };
            match solve(&enc.cnf, &enc.order, opts.cap, &mut nodes) {
                Search::Found(values) => {
                    let model = enc.read_model(&values, &place, &relations, &props);
                    return Ok(OracleResult { outcome: OracleOutcome::ModelFound(model), models_checked: nodes });
                }
                Search::Exhausted => {}
                Search::Capped => {
                    return Ok(OracleResult {
                        outcome: OracleOutcome::NoModel { complete_up_to: n - 1, capped: true },
                        models_checked: nodes,
                    })
                }
            }
        }
    }
    Ok(OracleResult {
        outcome: OracleOutcome::NoModel { complete_up_to: opts.max_domain, capped: false },
        models_checked: nodes,
    })
}

fn check_problem(problem: &ProblemSpec) -> Result<(), OracleError> {
    for atom in &problem.assertions {
        for t in atom.payload.terms() {
            if t.as_const().is_none() {
                return Err(OracleError::SkolemTerm(t.to_string()));
            }
        }
        if let Payload::HoldsF(f, _) = &atom.payload {
            if f.has_nominal() {
                return Err(OracleError::Nominal(f.to_string()));
            }
        }
    }
    Ok(())
}

/// Root constants, the first assertion's first.
fn ordered_constants(problem: &ProblemSpec) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    if let Some(first) = problem.assertions.first() {
        if let Some(c) = first.payload.terms()[0].as_const() {
            out.push(c.to_string());
        }
    }
    for c in problem.constants() {
        if !out.contains(&c) {
            out.push(c);
        }
    }
    out
}

struct Encoding {
    cnf: Cnf,
    n: usize,
    rel_vars: Vec<Lit>,
    prop_vars: Vec<Lit>,
    order: Vec<usize>,
    cache: HashMap<(Formula, usize), Lit>,
    rel_index: HashMap<String, usize>,
    prop_index: HashMap<String, usize>,
}

impl Encoding {
    /// `None` when an equality assertion already fails under `place`.
    fn build(
        problem: &ProblemSpec,
        n: usize,
        relations: &[String],
        props: &[String],
        place: &BTreeMap<String, usize>,
        frame: &BTreeSet<FrameCondition>,
    ) -> Result<Option<Encoding>, OracleError> {
        let mut cnf = Cnf::default();
        let rel_vars: Vec<Lit> = (0..relations.len() * n * n).map(|_| cnf.fresh()).collect();
        let prop_vars: Vec<Lit> = (0..props.len() * n).map(|_| cnf.fresh()).collect();
        let order = rel_vars.iter().chain(&prop_vars).map(|l| l.var()).collect();
        let mut enc = Encoding {
            cnf,
            n,
            rel_vars,
            prop_vars,
            order,
            cache: HashMap::new(),
            rel_index: relations.iter().enumerate().map(|(i, r)| (r.clone(), i)).collect(),
            prop_index: props.iter().enumerate().map(|(i, p)| (p.clone(), i)).collect(),
        };
        let at = |t: &DomainTerm| place[t.as_const().expect("checked")];
        for atom in &problem.assertions {
            let lit = match &atom.payload {
                Payload::HoldsF(f, t) => enc.formula(f, at(t)),
                Payload::HoldsR(r, s, t) => enc.relation(r, at(s), at(t)),
                Payload::Equal(s, t) => {
                    if (at(s) == at(t)) != atom.positive {
                        return Ok(None);
                    }
                    continue;
                }
            };
            enc.cnf.add(vec![if atom.positive { lit } else { lit.not() }]);
        }
        for cond in frame {
            for r in relations {
                enc.frame_condition(*cond, r);
            }
        }
        Ok(Some(enc))
    }

    fn rel_var(&self, r: &str, s: usize, t: usize) -> Lit {
        self.rel_vars[(self.rel_index[r] * self.n + s) * self.n + t]
    }

    fn relation(&mut self, rel: &Relation, s: usize, t: usize) -> Lit {
        match rel {
            Relation::Const(r) => self.rel_var(r, s, t),
            Relation::Not(inner) => self.relation(inner, s, t).not(),
        }
    }

    fn formula(&mut self, fml: &Formula, e: usize) -> Lit {
        if let Some(l) = self.cache.get(&(fml.clone(), e)) {
            return *l;
        }
        let lit = match fml {
            Formula::Prop(p) => self.prop_vars[self.prop_index[p] * self.n + e],
            Formula::Nom(_) => unreachable!("nominals are rejected up front"),
            Formula::Not(inner) => self.formula(inner, e).not(),
            Formula::Or(l, r) => {
                let (l, r) = (self.formula(l, e), self.formula(r, e));
                self.cnf.or(vec![l, r])
            }
            Formula::Box(rel, inner) => {
                let mut parts = Vec::new();
                for e2 in 0..self.n {
                    let edge = self.relation(rel, e, e2);
                    let body = self.formula(inner, e2);
                    parts.push(self.cnf.or(vec![edge.not(), body]));
                }
                self.cnf.and(parts)
            }
        };
        self.cache.insert((fml.clone(), e), lit);
        lit
    }

    fn frame_condition(&mut self, cond: FrameCondition, r: &str) {
        let n = self.n;
        match cond {
            FrameCondition::Irreflexive => {
                for e in 0..n {
                    let l = self.rel_var(r, e, e);
                    self.cnf.add(vec![l.not()]);
                }
            }
            FrameCondition::ImmediatePredecessor => {
                for e in 0..n {
                    let mut options = Vec::new();
                    for p in (0..n).filter(|&p| p != e) {
                        let mut parts = vec![self.rel_var(r, p, e)];
                        for mid in (0..n).filter(|&m| m != e && m != p) {
                            let (a, b) = (self.rel_var(r, p, mid), self.rel_var(r, mid, e));
                            parts.push(self.cnf.or(vec![a.not(), b.not()]));
                        }
                        options.push(self.cnf.and(parts));
                    }
                    let any = self.cnf.or(options);
                    self.cnf.add(vec![any]);
                }
            }
        }
    }

    fn read_model(&self, values: &[bool], place: &BTreeMap<String, usize>, relations: &[String], props: &[String]) -> Model {
        let n = self.n;
        let mut model = Model {
            domain: (0..n).map(|e| format!("e{e}")).collect(),
            relations: relations.iter().cloned().collect(),
            class_of: place.iter().map(|(c, e)| (DomainTerm::constant(c.clone()), *e)).collect(),
            ..Model::default()
        };
        for r in relations {
            for s in 0..n {
                for t in 0..n {
                    if values[self.rel_var(r, s, t).var()] {
                        model.rels.insert((r.clone(), s, t));
                    }
                }
            }
        }
        for (i, p) in props.iter().enumerate() {
            for e in 0..n {
                if values[self.prop_vars[i * n + e].var()] {
                    model.props.insert((p.clone(), e));
                }
            }
        }
        model
    }
}

#[cfg(test)]
mod tests;
