use std::collections::BTreeSet;
use std::time::Instant;

use serde::Serialize;
use thiserror::Error;

use crate::engine::{derive, DeriveOptions, EngineError, Stats, TableauResult, Verdict};
use crate::models::{check_frame_condition, extract_model, reflects, Model, ModelJson};
use crate::rules::{builtin_calculus, Calculus, RuleError};
use crate::syntax::{FrameCondition, ProblemSpec};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReportError {
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Rule(#[from] RuleError),
}

/// Catalog entries proved sound and constructively complete.
pub const COMPLETE_CALCULI: &[&str] = &[
    "km-basic",
    "km-refined",
    "kmnot-basic",
    "kmnot-plus",
    "kmnot-refined",
    "kmnot-hyper",
    "irr-basic",
    "irr",
    "imm-pred-basic",
    "imm-pred-refined",
];

/// Whether a (possibly frame-extended) catalog calculus is known complete.
pub fn is_proved_complete(name: &str) -> bool {
    name.split('+').all(|part| COMPLETE_CALCULI.contains(&part))
}

/// Catalog entry implementing a frame condition.
pub fn frame_calculus(cond: FrameCondition, basic: bool) -> &'static str {
    match (cond, basic) {
        (FrameCondition::Irreflexive, _) => "irr",
        (FrameCondition::ImmediatePredecessor, false) => "imm-pred-refined",
        (FrameCondition::ImmediatePredecessor, true) => "imm-pred-basic",
    }
}

/// `calc` extended with the rules for every frame condition.
pub fn with_frames(calc: &Calculus, frames: &BTreeSet<FrameCondition>, basic: bool) -> Result<Calculus, RuleError> {
    let mut out = calc.clone();
    for cond in frames {
        out = out.extend(&builtin_calculus(frame_calculus(*cond, basic))?);
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Outcome {
    Unsat,
    /// A saturated open branch whose model reflects the branch.
    Sat,
    /// A saturated open branch whose model does not reflect it.
    StuckOpen,
    Unknown,
}

impl Outcome {
    pub fn name(self) -> &'static str {
        match self {
            Outcome::Unsat => "unsat",
            Outcome::Sat => "sat",
            Outcome::StuckOpen => "stuck-open",
            Outcome::Unknown => "unknown",
        }
    }

    /// Unsatisfiable against a verified model.
    pub fn contradicts(self, other: Outcome) -> bool {
        matches!((self, other), (Outcome::Unsat, Outcome::Sat) | (Outcome::Sat, Outcome::Unsat))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ProveReport {
    pub calculus: String,
    pub outcome: Outcome,
    pub reason: Option<String>,
    pub stats: Stats,
    pub millis: f64,
    pub model: Option<ModelJson>,
    /// Branch atoms the extracted model gets wrong.
    pub violations: Vec<String>,
    /// Required frame conditions the extracted model fails.
    pub frame_failures: Vec<String>,
    pub trace: Vec<String>,
}

impl ProveReport {
    /// Description of a broken invariant, if the calculus is known complete.
    pub fn invariant_violation(&self) -> Option<String> {
        if !is_proved_complete(&self.calculus) {
            return None;
        }
        if self.outcome == Outcome::StuckOpen {
            return Some(format!("{}: saturated branch not reflected: {}", self.calculus, self.violations.join(", ")));
        }
        if !self.frame_failures.is_empty() {
            return Some(format!("{}: model violates {}", self.calculus, self.frame_failures.join(", ")));
        }
        None
    }
}

/// Full outcome of one derivation: the engine result, the classified report
/// and the extracted model of the witness branch.
pub struct Proof {
    pub result: TableauResult,
    pub report: ProveReport,
    pub model: Option<Model>,
}

/// Runs a derivation, then extracts and checks the model of an open branch
/// against the branch and the frame conditions.
pub fn prove(
    problem: &ProblemSpec,
    calc: &Calculus,
    opts: &DeriveOptions,
    frames: &BTreeSet<FrameCondition>,
) -> Result<Proof, EngineError> {
    let start = Instant::now();
    let result = derive(problem, calc, opts)?;
    let millis = start.elapsed().as_secs_f64() * 1000.0;
    let mut report = ProveReport {
        calculus: calc.name.clone(),
        outcome: Outcome::Unknown,
        reason: None,
        stats: result.stats.clone(),
        millis,
        model: None,
        violations: Vec::new(),
        frame_failures: Vec::new(),
        trace: result.trace.clone(),
    };
    let mut model = None;
    match &result.verdict {
        Verdict::Unsat => report.outcome = Outcome::Unsat,
        Verdict::Unknown(reason) => report.reason = Some(reason.clone()),
        Verdict::Sat => {
            let witness = result.witness.as_ref().expect("sat verdicts carry a witness");
            let m = extract_model(witness).expect("witness branches are open");
            let reflection = reflects(&m, witness);
            report.violations = reflection.violations.iter().map(|a| a.to_string()).collect();
            report.outcome = if reflection.is_ok() { Outcome::Sat } else { Outcome::StuckOpen };
            let mut required = frames.clone();
            required.extend(problem.frame_conditions.iter().copied());
            for cond in required {
                if !check_frame_condition(&m, cond) {
                    report.frame_failures.push(format!("{cond:?}"));
                }
            }
            report.model = Some(m.to_json(&result.definitions));
            model = Some(m);
        }
    }
    Ok(Proof { result, report, model })
}

#[derive(Clone, Debug, Serialize)]
pub struct CompareCell {
    pub problem: String,
    pub calculus: String,
    pub outcome: Outcome,
    pub applications: usize,
    pub branches: usize,
    pub max_terms: usize,
    pub millis: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct CompareReport {
    pub problems: Vec<String>,
    pub calculi: Vec<String>,
    pub cells: Vec<CompareCell>,
    /// `agreement[i][j]`: problems on which calculi `i` and `j` give the same outcome.
    pub agreement: Vec<Vec<usize>>,
    /// Unsat against a verified model, or a broken invariant.
    pub failures: Vec<String>,
}

/// Runs every calculus on every problem, adding the rules for each problem's
/// frame conditions (`basic_frames` selects the unrefined variants).
pub fn compare(
    problems: &[(String, ProblemSpec)],
    calculi: &[Calculus],
    opts: &DeriveOptions,
    basic_frames: bool,
) -> Result<CompareReport, ReportError> {
    let mut cells = Vec::new();
    let mut failures = Vec::new();
    let mut agreement = vec![vec![0; calculi.len()]; calculi.len()];
    for (name, problem) in problems {
        let mut outcomes = Vec::new();
        for calc in calculi {
            let calc = with_frames(calc, &problem.frame_conditions, basic_frames)?;
            let proof = prove(problem, &calc, opts, &BTreeSet::new())?;
            let report = proof.report;
            if let Some(v) = report.invariant_violation() {
                failures.push(format!("{name}: {v}"));
            }
            outcomes.push(report.outcome);
            cells.push(CompareCell {
                problem: name.clone(),
                calculus: calc.name.clone(),
                outcome: report.outcome,
                applications: report.stats.total_applications,
                branches: report.stats.branches,
                max_terms: report.stats.max_terms,
                millis: report.millis,
            });
        }
        for i in 0..calculi.len() {
            for j in 0..calculi.len() {
                if outcomes[i] == outcomes[j] {
                    agreement[i][j] += 1;
                }
                let both_complete = is_proved_complete(&calculi[i].name) && is_proved_complete(&calculi[j].name);
                if i < j && both_complete && outcomes[i].contradicts(outcomes[j]) {
                    failures.push(format!(
                        "{name}: {} says {} but {} says {}",
                        calculi[i].name,
                        outcomes[i].name(),
                        calculi[j].name,
                        outcomes[j].name()
                    ));
                }
            }
        }
    }
    Ok(CompareReport {
        problems: problems.iter().map(|(n, _)| n.clone()).collect(),
        calculi: calculi.iter().map(|c| c.name.clone()).collect(),
        cells,
        agreement,
        failures,
    })
}
