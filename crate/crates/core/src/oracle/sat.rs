//! Ground Boolean encoding and a clause-learning solver. The least solution
//! in a fixed variable order (false before true) is found by fixing variables
//! one at a time under assumptions, so no candidate is skipped.

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Lit(u32);

impl Lit {
    fn new(var: usize, positive: bool) -> Self {
        Lit((var as u32) << 1 | u32::from(!positive))
    }

    pub fn var(self) -> usize {
        (self.0 >> 1) as usize
    }

    pub fn positive(self) -> bool {
        self.0 & 1 == 0
    }

    pub fn not(self) -> Self {
        Lit(self.0 ^ 1)
    }

    fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Default)]
pub struct Cnf {
    vars: usize,
    clauses: Vec<Vec<Lit>>,
    truth: Option<Lit>,
}

impl Cnf {
    pub fn fresh(&mut self) -> Lit {
        self.vars += 1;
        Lit::new(self.vars - 1, true)
    }

    pub fn add(&mut self, clause: Vec<Lit>) {
        self.clauses.push(clause);
    }

    pub fn constant(&mut self, value: bool) -> Lit {
        let t = match self.truth {
            Some(t) => t,
            None => {
                let t = self.fresh();
                self.add(vec![t]);
                self.truth = Some(t);
                t
            }
        };
        if value {
            t
        } else {
            t.not()
        }
    }

    pub fn or(&mut self, lits: Vec<Lit>) -> Lit {
        match lits.len() {
            0 => self.constant(false),
            1 => lits[0],
            _ => {
                let g = self.fresh();
                let mut long = vec![g.not()];
                long.extend(&lits);
                self.add(long);
                for l in lits {
                    self.add(vec![g, l.not()]);
                }
                g
            }
        }
    }

    pub fn and(&mut self, lits: Vec<Lit>) -> Lit {
        let negated = lits.into_iter().map(Lit::not).collect();
        self.or(negated).not()
    }
}

pub enum Search {
    Found(Vec<bool>),
    Exhausted,
    Capped,
}

enum Answer {
    Sat(Vec<bool>),
    Unsat,
    Capped,
}

struct Solver {
    clauses: Vec<Vec<Lit>>,
    watches: Vec<Vec<usize>>,
    value: Vec<Option<bool>>,
    level: Vec<usize>,
    reason: Vec<Option<usize>>,
    trail: Vec<Lit>,
    trail_lim: Vec<usize>,
    head: usize,
    activity: Vec<f64>,
    bump: f64,
    phase: Vec<bool>,
    seen: Vec<bool>,
    inconsistent: bool,
    decisions: u64,
    cap: u64,
}

impl Solver {
    fn new(cnf: &Cnf, cap: u64) -> Self {
        let n = cnf.vars;
        let mut s = Solver {
            clauses: Vec::new(),
            watches: vec![Vec::new(); 2 * n],
            value: vec![None; n],
            level: vec![0; n],
            reason: vec![None; n],
            trail: Vec::new(),
            trail_lim: Vec::new(),
            head: 0,
            activity: vec![0.0; n],
            bump: 1.0,
            phase: vec![false; n],
            seen: vec![false; n],
            inconsistent: false,
            decisions: 0,
            cap,
        };
        for clause in &cnf.clauses {
            let mut c = clause.clone();
            c.sort();
            c.dedup();
            if c.windows(2).any(|w| w[0] == w[1].not()) {
                continue;
            }
            match c.len() {
                0 => s.inconsistent = true,
                1 => match s.lit_value(c[0]) {
                    Some(false) => s.inconsistent = true,
                    Some(true) => {}
                    None => s.assign(c[0], None),
                },
                _ => {
                    s.attach(c);
                }
            }
        }
        s
    }

    fn attach(&mut self, clause: Vec<Lit>) -> usize {
        let i = self.clauses.len();
        self.watches[clause[0].index()].push(i);
        self.watches[clause[1].index()].push(i);
        self.clauses.push(clause);
        i
    }

    fn lit_value(&self, l: Lit) -> Option<bool> {
        self.value[l.var()].map(|v| v == l.positive())
    }

    fn assign(&mut self, l: Lit, reason: Option<usize>) {
        self.value[l.var()] = Some(l.positive());
        self.level[l.var()] = self.trail_lim.len();
        self.reason[l.var()] = reason;
        self.trail.push(l);
    }

    fn backtrack(&mut self, to: usize) {
        if self.trail_lim.len() <= to {
            return;
        }
        let mark = self.trail_lim[to];
        for l in self.trail.drain(mark..) {
            self.phase[l.var()] = l.positive();
            self.value[l.var()] = None;
            self.reason[l.var()] = None;
        }
        self.trail_lim.truncate(to);
        self.head = self.head.min(mark);
    }

    /// Index of a conflicting clause, if any.
    fn propagate(&mut self) -> Option<usize> {
        while self.head < self.trail.len() {
            let falsified = self.trail[self.head].not();
            self.head += 1;
            let watching = std::mem::take(&mut self.watches[falsified.index()]);
            let mut keep = Vec::with_capacity(watching.len());
            let mut conflict = None;
            for (k, &ci) in watching.iter().enumerate() {
                if conflict.is_some() {
                    keep.extend_from_slice(&watching[k..]);
                    break;
                }
                let clause = &mut self.clauses[ci];
                if clause[0] == falsified {
                    clause.swap(0, 1);
                }
                let other = clause[0];
                if self.value[other.var()].map(|v| v == other.positive()) == Some(true) {
                    keep.push(ci);
                    continue;
                }
                let replacement = (2..clause.len())
                    .find(|&j| self.value[clause[j].var()].map(|v| v == clause[j].positive()) != Some(false));
                if let Some(j) = replacement {
                    clause.swap(1, j);
                    let w = clause[1];
                    self.watches[w.index()].push(ci);
                    continue;
                }
                keep.push(ci);
                match self.lit_value(other) {
                    Some(false) => conflict = Some(ci),
                    _ => self.assign(other, Some(ci)),
                }
            }
            self.watches[falsified.index()] = keep;
            if conflict.is_some() {
                return conflict;
            }
        }
        None
    }

    /// First-UIP learned clause (asserting literal first) and its backjump level.
    fn analyze(&mut self, mut conflict: usize) -> (Vec<Lit>, usize) {
        let current = self.trail_lim.len();
        let mut learned = vec![Lit(0)];
        let mut pending = 0;
        let mut index = self.trail.len();
        let mut resolved: Option<Lit> = None;
        loop {
            for &l in &self.clauses[conflict] {
                if Some(l) == resolved {
                    continue;
                }
                let v = l.var();
                if self.seen[v] || self.level[v] == 0 {
                    continue;
                }
                self.seen[v] = true;
                self.activity[v] += self.bump;
                if self.level[v] == current {
                    pending += 1;
                } else {
                    learned.push(l);
                }
            }
            let next = loop {
                index -= 1;
                if self.seen[self.trail[index].var()] {
                    break self.trail[index];
                }
            };
            self.seen[next.var()] = false;
            pending -= 1;
            if pending == 0 {
                learned[0] = next.not();
                break;
            }
            resolved = Some(next);
            conflict = self.reason[next.var()].expect("implied literals have reasons");
        }
        for l in &learned[1..] {
            self.seen[l.var()] = false;
        }
        self.bump *= 1.05;
        if self.bump > 1e100 {
            self.activity.iter_mut().for_each(|a| *a *= 1e-100);
            self.bump *= 1e-100;
        }
        let mut back = 0;
        if learned.len() > 1 {
            let (best, _) = learned.iter().enumerate().skip(1).max_by_key(|(_, l)| self.level[l.var()]).unwrap();
            learned.swap(1, best);
            back = self.level[learned[1].var()];
        }
        (learned, back)
    }

    fn pick(&self) -> Option<Lit> {
        let mut best: Option<usize> = None;
        for v in 0..self.value.len() {
            if self.value[v].is_none() && best.is_none_or(|b| self.activity[v] > self.activity[b]) {
                best = Some(v);
            }
        }
        best.map(|v| Lit::new(v, self.phase[v]))
    }

    fn solve(&mut self, assumptions: &[Lit]) -> Answer {
        if self.inconsistent {
            return Answer::Unsat;
        }
        self.backtrack(0);
        let mut conflicts = 0u64;
        let mut restart_at = 100u64;
        loop {
            if let Some(conflict) = self.propagate() {
                if self.trail_lim.is_empty() {
                    self.inconsistent = true;
                    return Answer::Unsat;
                }
                let (learned, back) = self.analyze(conflict);
                self.backtrack(back);
                if learned.len() == 1 {
                    self.assign(learned[0], None);
                } else {
                    let asserting = learned[0];
                    let ci = self.attach(learned);
                    self.assign(asserting, Some(ci));
                }
                conflicts += 1;
                if conflicts >= restart_at {
                    restart_at += restart_at / 2;
                    self.backtrack(0);
                }
                continue;
            }
            let decision = if let Some(&a) = assumptions.get(self.trail_lim.len()) {
                match self.lit_value(a) {
                    Some(false) => return Answer::Unsat,
                    Some(true) => {
                        self.trail_lim.push(self.trail.len());
                        continue;
                    }
                    None => a,
                }
            } else {
                match self.pick() {
                    Some(l) => l,
                    None => return Answer::Sat(self.value.iter().map(|v| v.unwrap_or(false)).collect()),
                }
            };
            self.decisions += 1;
            if self.decisions > self.cap {
                return Answer::Capped;
            }
            self.trail_lim.push(self.trail.len());
            self.assign(decision, None);
        }
    }
}

/// Least solution with respect to `order` (earlier variables more
/// significant); variables outside `order` take any satisfying values.
/// `nodes` accumulates solver decisions.
pub fn solve(cnf: &Cnf, order: &[usize], cap: u64, nodes: &mut u64) -> Search {
    let mut solver = Solver::new(cnf, cap.saturating_sub(*nodes));
    let outcome = least(&mut solver, order);
    *nodes += solver.decisions;
    outcome
}

fn least(solver: &mut Solver, order: &[usize]) -> Search {
    let mut model = match solver.solve(&[]) {
        Answer::Sat(m) => m,
        Answer::Unsat => return Search::Exhausted,
        Answer::Capped => return Search::Capped,
    };
    let mut fixed = Vec::with_capacity(order.len());
    for &v in order {
        if model[v] {
            fixed.push(Lit::new(v, false));
            match solver.solve(&fixed) {
                Answer::Sat(m) => model = m,
                Answer::Unsat => *fixed.last_mut().unwrap() = Lit::new(v, true),
                Answer::Capped => return Search::Capped,
            }
        } else {
            fixed.push(Lit::new(v, false));
        }
    }
    Search::Found(model)
}
