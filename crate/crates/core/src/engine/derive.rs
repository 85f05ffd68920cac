use std::collections::{BTreeMap, BTreeSet, HashSet, VecDeque};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use super::arena::{Arena, Atom, AtomBody};
use super::branch::{Branch, BranchSnapshot, BranchStatus};
use crate::refine::Clausifier;
use crate::rules::{
    expand_free, family_rules, flat_disjuncts, format_binding, instantiate_denominators, match_numerator,
    normalize_binding, Application, Binding, Calculus, ClausifyMode, FPat, Family, PatPayload, PatternAtom, Rule,
    Sort,
};
use crate::syntax::{subformula_closure, Formula, Language, Payload, ProblemSpec, Relation};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Bounds {
    pub max_terms: usize,
    pub max_applications: usize,
    pub max_branches: usize,
}

impl Default for Bounds {
    fn default() -> Self {
        Bounds { max_terms: 64, max_applications: 20_000, max_branches: 4096 }
    }
}

/// Order in which enabled instantiations of equal priority are taken.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Strategy {
    #[default]
    Fifo,
    /// Uniformly random pick within a priority class, from a seeded generator.
    Shuffled(u64),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DeriveOptions {
    pub bounds: Bounds,
    pub strategy: Strategy,
    /// Skip an instantiation when one of its denominators is already in the branch.
    pub regularity: bool,
    /// Keep exploring after the first saturated open branch.
    pub explore_all: bool,
    pub trace: bool,
}

impl Default for DeriveOptions {
    fn default() -> Self {
        DeriveOptions {
            bounds: Bounds::default(),
            strategy: Strategy::Fifo,
            regularity: true,
            explore_all: false,
            trace: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Unsat,
    Sat,
    Unknown(String),
}

impl Verdict {
    pub fn name(&self) -> &'static str {
        match self {
            Verdict::Unsat => "unsat",
            Verdict::Sat => "sat",
            Verdict::Unknown(_) => "unknown",
        }
    }

    pub fn is_decided(&self) -> bool {
        !matches!(self, Verdict::Unknown(_))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BranchOutcome {
    Closed(String),
    Saturated,
    Exhausted(String),
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Stats {
    /// Applications per rule id, including built-in closure checks.
    pub applications: BTreeMap<String, usize>,
    pub total_applications: usize,
    /// Finished branches (closed, saturated or exhausted).
    pub branches: usize,
    pub closed_branches: usize,
    pub open_branches: usize,
    pub exhausted_branches: usize,
    pub max_terms: usize,
}

#[derive(Clone, Debug)]
pub struct TableauResult {
    pub verdict: Verdict,
    pub stats: Stats,
    /// First saturated open branch.
    pub witness: Option<BranchSnapshot>,
    /// All saturated open branches found (only the witness unless exploring all).
    pub saturated: Vec<BranchSnapshot>,
    pub trace: Vec<String>,
    /// Definition propositions introduced by clausification.
    pub definitions: BTreeSet<String>,
    /// Relation constants premise-free rules ranged over.
    pub relations: Vec<Relation>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error("problem in language {problem} cannot be run with {calculus} calculus `{name}`")]
    Language { problem: Language, calculus: Language, name: String },
}

const CLASSES: usize = 5;

struct RuleInfo {
    rule: Rule,
    class: usize,
    free: Vec<(String, Sort)>,
    premise_free: bool,
    clausify_conclusions: bool,
}

fn priority(rule: &Rule) -> usize {
    if rule.is_closure() {
        0
    } else if rule.creates_terms() {
        4
    } else if rule.denominators.iter().flatten().any(|a| a.positive && matches!(a.payload, PatPayload::Equal(..))) {
        2
    } else if rule.denominators.len() == 1 {
        1
    } else {
        3
    }
}

#[derive(Clone)]
struct State {
    id: usize,
    branch: Branch,
    queues: [VecDeque<(usize, Binding)>; CLASSES],
    seen: HashSet<(usize, Binding)>,
    cursor: usize,
    merges: u64,
    partials: Vec<(usize, Binding)>,
    partial_keys: HashSet<(usize, Binding)>,
    expanded: usize,
    known: HashSet<super::arena::TermId>,
    rng: Option<ChaCha8Rng>,
}

enum Step {
    Done(BranchOutcome),
    Fork(usize, Binding, Vec<Vec<Atom>>),
}

struct Derivation {
    rules: Vec<RuleInfo>,
    arena: Arena,
    clausifier: Clausifier,
    relations: Vec<Relation>,
    opts: DeriveOptions,
    stats: Stats,
    trace: Vec<String>,
    next_id: usize,
    created: usize,
}

fn head_compatible(p: &PatternAtom, a: &Atom) -> bool {
    if p.positive != a.positive {
        return false;
    }
    match (&p.payload, &a.body) {
        (PatPayload::HoldsF(fp, _), AtomBody::F(f, _)) => matches!(
            (fp, f),
            (FPat::Var(_), _)
                | (FPat::Prop(_), Formula::Prop(_))
                | (FPat::Not(_), Formula::Not(_))
                | (FPat::Or(..) | FPat::Disj(_) | FPat::Clause { .. }, Formula::Or(..))
                | (FPat::Box(..), Formula::Box(..))
        ),
        (PatPayload::HoldsR(..), AtomBody::R(..)) => true,
        (PatPayload::Equal(..), AtomBody::Eq(..)) => true,
        _ => false,
    }
}

fn needs_clausify(f: &Formula) -> bool {
    match f {
        Formula::Or(..) => true,
        Formula::Not(inner) => matches!(inner.as_ref(), Formula::Or(..) | Formula::Not(_)),
        _ => false,
    }
}

impl Derivation {
    fn new(calc: &Calculus, formulas: &[Formula], relations: Vec<Relation>, taken: BTreeSet<String>, opts: DeriveOptions) -> Self {
        let mut rules: Vec<Rule> = calc.rules.iter().filter(|r| !r.is_complement_closure()).cloned().collect();
        let mut hyper_ids = BTreeSet::new();
        if !calc.families.is_empty() {
            let width = max_width(formulas, calc.clausify != ClausifyMode::Off);
            for family in &calc.families {
                for w in 1..=width {
                    for rule in family_rules(*family, w) {
                        if *family == Family::Hyper {
                            hyper_ids.insert(rule.id.clone());
                        }
                        rules.push(rule);
                    }
                }
            }
        }
        let rules = rules
            .into_iter()
            .map(|rule| RuleInfo {
                class: priority(&rule),
                free: rule.free_vars(),
                premise_free: rule.numerator.is_empty(),
                clausify_conclusions: calc.clausify == ClausifyMode::RootsAndConclusions
                    && !hyper_ids.contains(&rule.id),
                rule,
            })
            .collect();
        Derivation {
            rules,
            arena: Arena::new(),
            clausifier: Clausifier::new(taken),
            relations,
            opts,
            stats: Stats::default(),
            trace: Vec::new(),
            next_id: 0,
            created: 1,
        }
    }

    fn fresh_state(&mut self, branch: Branch) -> State {
        let id = self.next_id;
        self.next_id += 1;
        let rng = match self.opts.strategy {
            Strategy::Fifo => None,
            Strategy::Shuffled(seed) => Some(ChaCha8Rng::seed_from_u64(seed)),
        };
        let mut st = State {
            id,
            branch,
            queues: Default::default(),
            seen: HashSet::new(),
            cursor: 0,
            merges: 0,
            partials: Vec::new(),
            partial_keys: HashSet::new(),
            expanded: 0,
            known: HashSet::new(),
            rng,
        };
        st.merges = st.branch.merge_count();
        for ri in 0..self.rules.len() {
            if self.rules[ri].premise_free {
                add_partial(&mut st, ri, Binding::new());
            }
        }
        st
    }

    /// Atoms to add for a conclusion, clausifying compound positive formulas.
    fn expand_conclusion(&mut self, atom: &Atom, clausify: bool) -> Vec<Atom> {
        match (&atom.body, atom.positive) {
            (AtomBody::F(f, t), true) if clausify && needs_clausify(f) => self
                .clausifier
                .clausify(f)
                .iter()
                .filter_map(|c| c.to_formula())
                .map(|f| Atom { positive: true, body: AtomBody::F(f, *t) })
                .collect(),
            _ => vec![atom.clone()],
        }
    }

    fn add_atoms(&mut self, st: &mut State, atoms: &[Atom], clausify: bool) {
        for atom in atoms {
            for a in self.expand_conclusion(atom, clausify) {
                st.branch.add(&self.arena, &a);
                if st.branch.is_closed() {
                    return;
                }
            }
        }
    }

    fn note(&mut self, rule: &str) {
        *self.stats.applications.entry(rule.to_string()).or_default() += 1;
        self.stats.total_applications += 1;
    }

    fn log(&mut self, st: &State, rule: &str, b: &Binding, added: &str) {
        if self.opts.trace {
            let subst = format_binding(b, &self.arena);
            self.trace.push(format!("b{} {} {{{}}} => {}", st.id, rule, subst, added));
        }
    }

    fn render_set(&self, atoms: &[Atom]) -> String {
        let parts: Vec<String> = atoms.iter().map(|a| self.arena.to_atom(a).to_string()).collect();
        format!("{{{}}}", parts.join(", "))
    }

    fn enqueue(&self, st: &mut State, ri: usize, b: Binding) {
        let b = normalize_binding(&b, &st.branch);
        if st.seen.insert((ri, b.clone())) {
            st.queues[self.rules[ri].class].push_back((ri, b));
        }
    }

    /// Semi-naive matching of new atoms, plus expansion of free variables over new classes.
    fn discover(&self, st: &mut State) {
        let full = st.branch.merge_count() != st.merges;
        if full {
            st.merges = st.branch.merge_count();
            st.cursor = 0;
        }
        let len = st.branch.atoms().len();
        if st.cursor < len || full {
            let new: Vec<Atom> = st.branch.atoms()[st.cursor..].to_vec();
            st.cursor = len;
            for ri in 0..self.rules.len() {
                let info = &self.rules[ri];
                if info.premise_free {
                    continue;
                }
                let mut found = Vec::new();
                if full {
                    found = match_numerator(&info.rule, &st.branch, &self.arena, None);
                } else {
                    for atom in &new {
                        for (pos, p) in info.rule.numerator.iter().enumerate() {
                            if head_compatible(p, atom) {
                                found.extend(match_numerator(&info.rule, &st.branch, &self.arena, Some((pos, atom))));
                            }
                        }
                    }
                }
                for b in found {
                    if info.free.is_empty() {
                        self.enqueue(st, ri, b);
                    } else {
                        add_partial(st, ri, b);
                    }
                }
            }
        }
        let classes = st.branch.classes();
        let changed = full || classes.len() != st.known.len() || classes.iter().any(|c| !st.known.contains(c));
        if !changed && st.expanded == st.partials.len() {
            return;
        }
        for i in 0..st.partials.len() {
            let (ri, b) = st.partials[i].clone();
            if i < st.expanded && !changed {
                continue;
            }
            let info = &self.rules[ri];
            let b = normalize_binding(&b, &st.branch);
            for ext in expand_free(&info.rule, &b, &st.branch, &self.relations) {
                self.enqueue(st, ri, ext);
            }
        }
        st.expanded = st.partials.len();
        st.known = classes.into_iter().collect();
    }

    fn pop(&self, st: &mut State) -> Option<(usize, Binding)> {
        let q = st.queues.iter_mut().find(|q| !q.is_empty())?;
        match st.rng.as_mut() {
            None => q.pop_front(),
            Some(rng) => {
                let i = rng.gen_range(0..q.len());
                q.swap_remove_back(i)
            }
        }
    }

    fn saturate(&mut self, st: &mut State) -> Step {
        loop {
            if let BranchStatus::Closed(reason) = st.branch.status() {
                return Step::Done(BranchOutcome::Closed(reason));
            }
            if st.branch.term_count() > self.opts.bounds.max_terms {
                return Step::Done(BranchOutcome::Exhausted("max_terms".into()));
            }
            self.discover(st);
            let Some((ri, b)) = self.pop(st) else {
                return Step::Done(BranchOutcome::Saturated);
            };
            if self.stats.total_applications >= self.opts.bounds.max_applications {
                return Step::Done(BranchOutcome::Exhausted("max_applications".into()));
            }
            let b = normalize_binding(&b, &st.branch);
            let rule_id = self.rules[ri].rule.id.clone();
            match instantiate_denominators(&self.rules[ri].rule, &b, &mut self.arena) {
                Application::Closing => {
                    self.note(&rule_id);
                    self.log(st, &rule_id, &b, "FALSE");
                    st.branch.close(&rule_id);
                }
                Application::Extensions(exts) => {
                    let exts: Vec<Vec<Atom>> =
                        exts.iter().map(|d| d.iter().map(|a| st.branch.normalize(a)).collect()).collect();
                    let present = exts.iter().any(|d| d.iter().all(|a| st.branch.holds(a)));
                    if present && (self.opts.regularity || exts.len() == 1) {
                        continue;
                    }
                    self.note(&rule_id);
                    if exts.len() == 1 {
                        let text = self.render_set(&exts[0]);
                        self.log(st, &rule_id, &b, &text);
                        let clausify = self.rules[ri].clausify_conclusions;
                        self.add_atoms(st, &exts[0], clausify);
                        self.note_builtin_closure(st, &rule_id);
                    } else {
                        return Step::Fork(ri, b, exts);
                    }
                }
            }
        }
    }

    fn note_builtin_closure(&mut self, st: &State, applied: &str) {
        if let BranchStatus::Closed(reason) = st.branch.status() {
            if reason != applied {
                self.note(&reason);
            }
        }
    }

    fn run(&mut self, root: State) -> (Verdict, Vec<BranchSnapshot>) {
        let mut stack = vec![root];
        let mut saturated = Vec::new();
        let mut unknown: Option<String> = None;
        while let Some(mut st) = stack.pop() {
            let step = self.saturate(&mut st);
            self.stats.max_terms = self.stats.max_terms.max(st.branch.term_count());
            match step {
                Step::Done(outcome) => {
                    self.stats.branches += 1;
                    match outcome {
                        BranchOutcome::Closed(_) => self.stats.closed_branches += 1,
                        BranchOutcome::Saturated => {
                            self.stats.open_branches += 1;
                            saturated.push(st.branch.snapshot(&self.arena));
                            if !self.opts.explore_all {
                                break;
                            }
                        }
                        BranchOutcome::Exhausted(reason) => {
                            self.stats.exhausted_branches += 1;
                            let global = reason == "max_applications";
                            unknown.get_or_insert(reason);
                            if global {
                                break;
                            }
                        }
                    }
                }
                Step::Fork(ri, b, exts) => {
                    if self.created + exts.len() - 1 > self.opts.bounds.max_branches {
                        self.stats.branches += 1;
                        self.stats.exhausted_branches += 1;
                        unknown.get_or_insert("max_branches".into());
                        break;
                    }
                    self.created += exts.len() - 1;
                    let rule_id = self.rules[ri].rule.id.clone();
                    let parts: Vec<String> = exts.iter().map(|d| self.render_set(d)).collect();
                    self.log(&st, &rule_id, &b, &parts.join(" | "));
                    let clausify = self.rules[ri].clausify_conclusions;
                    let mut children = Vec::new();
                    for ext in &exts {
                        let mut child = st.clone();
                        child.id = self.next_id;
                        self.next_id += 1;
                        self.add_atoms(&mut child, ext, clausify);
                        self.note_builtin_closure(&child, &rule_id);
                        children.push(child);
                    }
                    stack.extend(children.into_iter().rev());
                }
            }
        }
        let verdict = if !saturated.is_empty() {
            Verdict::Sat
        } else if let Some(reason) = unknown {
            Verdict::Unknown(reason)
        } else {
            Verdict::Unsat
        };
        (verdict, saturated)
    }

    fn finish(self, verdict: Verdict, saturated: Vec<BranchSnapshot>) -> TableauResult {
        TableauResult {
            verdict,
            stats: self.stats,
            witness: saturated.first().cloned(),
            saturated,
            trace: self.trace,
            definitions: self.clausifier.definitions().clone(),
            relations: self.relations,
        }
    }
}

fn add_partial(st: &mut State, ri: usize, b: Binding) {
    if st.partial_keys.insert((ri, b.clone())) {
        st.partials.push((ri, b));
    }
}

/// Widest disjunction a family rule may need to match.
fn max_width(formulas: &[Formula], clausify: bool) -> usize {
    let (closure, _) = subformula_closure(formulas.iter());
    let mut width = 1;
    let mut clausifier = Clausifier::new(BTreeSet::new());
    for f in &closure {
        if matches!(f, Formula::Or(..)) {
            width = width.max(flat_disjuncts(f).len());
        }
        if clausify {
            for c in clausifier.clausify(f) {
                width = width.max(c.width());
            }
        }
    }
    width
}

fn check_language(problem: Language, calc: &Calculus) -> Result<(), EngineError> {
    if calc.language.admits(problem) {
        Ok(())
    } else {
        Err(EngineError::Language { problem, calculus: calc.language, name: calc.name.clone() })
    }
}

fn payload_formulas(p: &Payload) -> Option<&Formula> {
    match p {
        Payload::HoldsF(f, _) => Some(f),
        _ => None,
    }
}

/// Runs the calculus on the problem: depth-first, left-to-right, each branch
/// saturated from a prioritized fair queue.
pub fn derive(problem: &ProblemSpec, calc: &Calculus, opts: &DeriveOptions) -> Result<TableauResult, EngineError> {
    check_language(problem.language, calc)?;
    let formulas: Vec<Formula> = problem.assertions.iter().filter_map(|a| payload_formulas(&a.payload)).cloned().collect();
    let relations = problem.relation_constants().into_iter().map(Relation::Const).collect();
    let mut d = Derivation::new(calc, &formulas, relations, problem.props(), opts.clone());
    let mut branch = Branch::new();
    let clausify_roots = calc.clausify != ClausifyMode::Off;
    let mut roots = Vec::new();
    for assertion in &problem.assertions {
        let atom = d.arena.from_atom(assertion);
        roots.extend(d.expand_conclusion(&atom, clausify_roots));
    }
    for atom in &roots {
        branch.add(&d.arena, atom);
    }
    let root = d.fresh_state(branch);
    if d.opts.trace {
        let text = d.render_set(&roots);
        d.trace.push(format!("b0 root => {text}"));
    }
    if let BranchStatus::Closed(reason) = root.branch.status() {
        d.note(&reason);
    }
    let (verdict, saturated) = d.run(root);
    Ok(d.finish(verdict, saturated))
}

/// Continues a derivation from an existing branch. Returns the outcome of the
/// depth-first search below it and the first saturated open branch, if any.
pub fn saturate_branch(
    branch: &BranchSnapshot,
    calc: &Calculus,
    opts: &DeriveOptions,
) -> (BranchOutcome, Option<BranchSnapshot>) {
    let formulas: Vec<Formula> = branch.atoms.iter().filter_map(|a| payload_formulas(&a.payload)).cloned().collect();
    let mut relations = BTreeSet::new();
    let mut props = BTreeSet::new();
    for atom in &branch.atoms {
        match &atom.payload {
            Payload::HoldsF(f, _) => {
                relations.extend(f.relation_constants());
                props.extend(f.props());
            }
            Payload::HoldsR(r, ..) => {
                relations.insert(r.base().to_string());
            }
            Payload::Equal(..) => {}
        }
    }
    let relations = relations.into_iter().map(Relation::Const).collect();
    let mut d = Derivation::new(calc, &formulas, relations, props, opts.clone());
    let live = branch.restore(&mut d.arena);
    let root = d.fresh_state(live);
    let (verdict, saturated) = d.run(root);
    let outcome = match verdict {
        Verdict::Sat => BranchOutcome::Saturated,
        Verdict::Unsat => BranchOutcome::Closed("all branches closed".into()),
        Verdict::Unknown(reason) => BranchOutcome::Exhausted(reason),
    };
    (outcome, saturated.into_iter().next())
}
