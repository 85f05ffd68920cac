//! Command-line front end, corpus generation and report types.

mod corpus;
mod report;

use std::collections::BTreeSet;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

pub use corpus::{generate_corpus, horn_corpus, problem_text, prop_name, rel_name, CorpusParams};
pub use report::{
    compare, frame_calculus, is_proved_complete, prove, with_frames, CompareCell, CompareReport, Outcome, Proof,
    ProveReport, ReportError, COMPLETE_CALCULI,
};

use crate::engine::{Bounds, DeriveOptions, EngineError, Strategy};
use crate::oracle::{oracle_search, OracleError, OracleOptions, OracleOutcome};
use crate::refine::{clausify, hypertableau_transform, refine_calculus, split_plus_transform, split_transform};
use crate::rules::{builtin_calculus, Calculus, CalculusJson, RuleError};
use crate::syntax::{parse_formula, parse_problem, FrameCondition, Language, ParseError, ProblemSpec};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}: {source}")]
    Parse { path: String, source: ParseError },
    #[error(transparent)]
    Rule(#[from] RuleError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Report(#[from] ReportError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error("bad calculus file: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{0}")]
    Usage(String),
}

#[derive(Parser, Debug)]
#[command(name = "tabref", version, about = "Tableau calculi for K_m and K_m(-) as data")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one calculus on a problem file.
    Prove(ProveArgs),
    /// Run several calculi on problem files or directories and compare.
    Compare(CompareArgs),
    /// Search for a finite model.
    Oracle(OracleArgs),
    /// Print the clauses of a formula.
    Clausify(ClausifyArgs),
    /// Generate a random corpus.
    Gen(GenArgs),
    /// Print a calculus as JSON.
    ShowCalculus(ShowArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum FrameArg {
    Irr,
    ImmPred,
    ImmPredBasic,
}

#[derive(Args, Debug)]
struct BoundArgs {
    #[arg(long, default_value_t = Bounds::default().max_terms)]
    max_terms: usize,
    #[arg(long, default_value_t = Bounds::default().max_applications)]
    max_steps: usize,
    #[arg(long, default_value_t = Bounds::default().max_branches)]
    max_branches: usize,
    /// Pick rule applications at random within a priority class.
    #[arg(long)]
    seed: Option<u64>,
}

impl BoundArgs {
    fn options(&self) -> DeriveOptions {
        DeriveOptions {
            bounds: Bounds {
                max_terms: self.max_terms,
                max_applications: self.max_steps,
                max_branches: self.max_branches,
            },
            strategy: self.seed.map_or(Strategy::Fifo, Strategy::Shuffled),
            ..DeriveOptions::default()
        }
    }
}

#[derive(Args, Debug)]
struct ProveArgs {
    file: PathBuf,
    /// Catalog calculus; defaults to the refined calculus of the problem's language.
    #[arg(long, conflicts_with = "calculus_file")]
    calculus: Option<String>,
    /// Calculus in the JSON format of `show-calculus`.
    #[arg(long)]
    calculus_file: Option<PathBuf>,
    #[arg(long, value_enum)]
    frame: Vec<FrameArg>,
    #[command(flatten)]
    bounds: BoundArgs,
    #[arg(long)]
    trace: bool,
    #[arg(long)]
    emit_model: bool,
    #[arg(long)]
    json: bool,
}

#[derive(Args, Debug)]
struct CompareArgs {
    /// Problem files, or directories of `.p` files.
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
    /// Comma-separated catalog names.
    #[arg(long, value_delimiter = ',', required = true)]
    calculi: Vec<String>,
    #[arg(long, value_enum)]
    frame: Vec<FrameArg>,
    #[command(flatten)]
    bounds: BoundArgs,
    #[arg(long)]
    json: bool,
}

#[derive(Args, Debug)]
struct OracleArgs {
    file: PathBuf,
    #[arg(long, default_value_t = 4)]
    max_domain: usize,
    #[arg(long, default_value_t = 10_000_000)]
    cap: u64,
    #[arg(long, value_enum)]
    frame: Vec<FrameArg>,
    #[arg(long)]
    json: bool,
}

#[derive(Args, Debug)]
struct ClausifyArgs {
    /// Formula text; use --file to read one formula per line instead.
    #[arg(required_unless_present = "file")]
    formula: Option<String>,
    #[arg(long, conflicts_with = "formula")]
    file: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct GenArgs {
    #[arg(long, default_value_t = 7)]
    seed: u64,
    #[arg(long, default_value_t = 10)]
    count: usize,
    #[arg(long, default_value_t = 14)]
    max_size: usize,
    #[arg(long, default_value_t = 3)]
    max_depth: usize,
    #[arg(long, default_value_t = 3)]
    props: usize,
    #[arg(long, default_value_t = 2)]
    rels: usize,
    #[arg(long, value_parser = parse_language, default_value = "km")]
    language: Language,
    #[arg(long, default_value_t = 0.0)]
    relneg_probability: f64,
    /// Clause sets with at most one non-negated-atom disjunct per clause.
    #[arg(long)]
    horn: bool,
    /// Write one `.p` file per problem into this directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ShowArgs {
    name: String,
    #[arg(long, value_enum)]
    frame: Vec<FrameArg>,
    /// `RULE:INDEX` to refine a rule at a denominator.
    #[arg(long)]
    refine: Option<String>,
    /// `split`, `split-plus` or `hyper`.
    #[arg(long)]
    transform: Option<String>,
}

fn parse_language(s: &str) -> Result<Language, String> {
    match s {
        "km" => Ok(Language::Km),
        "kmnot" => Ok(Language::KmNot),
        _ => Err(format!("unknown language `{s}` (expected km or kmnot)")),
    }
}

/// Parses `argv` (program name first), runs the command and returns the exit
/// code: 0 when the command completed, 1 on usage or input errors, 2 when a
/// calculus known to be complete broke an invariant.
pub fn run_cli<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = if e.use_stderr() { write!(err, "{e}") } else { write!(out, "{e}") };
            return code;
        }
    };
    match run(cli.command, out) {
        Ok(Status::Done) => 0,
        Ok(Status::Violation(messages)) => {
            for m in messages {
                let _ = writeln!(err, "invariant violation: {m}");
            }
            2
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            1
        }
    }
}

enum Status {
    Done,
    Violation(Vec<String>),
}

fn run(command: Command, out: &mut dyn Write) -> Result<Status, CliError> {
    match command {
        Command::Prove(args) => prove_command(args, out),
        Command::Compare(args) => compare_command(args, out),
        Command::Oracle(args) => oracle_command(args, out),
        Command::Clausify(args) => clausify_command(args, out),
        Command::Gen(args) => gen_command(args, out),
        Command::ShowCalculus(args) => show_command(args, out),
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io { path: path.display().to_string(), source }
}

fn emit(out: &mut dyn Write, text: impl std::fmt::Display) -> Result<(), CliError> {
    writeln!(out, "{text}").map_err(io_err(Path::new("<stdout>")))
}

fn read_problem(path: &Path) -> Result<ProblemSpec, CliError> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    parse_problem(&text).map_err(|source| CliError::Parse { path: path.display().to_string(), source })
}

fn frames_of(args: &[FrameArg]) -> (BTreeSet<FrameCondition>, bool) {
    let frames = args
        .iter()
        .map(|f| match f {
            FrameArg::Irr => FrameCondition::Irreflexive,
            FrameArg::ImmPred | FrameArg::ImmPredBasic => FrameCondition::ImmediatePredecessor,
        })
        .collect();
    (frames, args.contains(&FrameArg::ImmPredBasic))
}

fn default_calculus(language: Language) -> &'static str {
    match language {
        Language::Km => "km-refined",
        Language::KmNot => "kmnot-refined",
    }
}

fn prove_command(args: ProveArgs, out: &mut dyn Write) -> Result<Status, CliError> {
    let problem = read_problem(&args.file)?;
    let base = match (&args.calculus, &args.calculus_file) {
        (_, Some(path)) => {
            let text = std::fs::read_to_string(path).map_err(io_err(path))?;
            serde_json::from_str::<CalculusJson>(&text)?.to_calculus()?
        }
        (Some(name), None) => builtin_calculus(name)?,
        (None, None) => builtin_calculus(default_calculus(problem.language))?,
    };
    let (mut frames, basic) = frames_of(&args.frame);
    frames.extend(problem.frame_conditions.iter().copied());
    let calc = with_frames(&base, &frames, basic)?;
    let mut opts = args.bounds.options();
    opts.trace = args.trace;
    let proof = prove(&problem, &calc, &opts, &frames)?;
    let report = proof.report;
    if args.json {
        emit(out, serde_json::to_string_pretty(&report)?)?;
    } else {
        if args.trace {
            for line in &report.trace {
                emit(out, line)?;
            }
        }
        emit(out, format_args!("calculus: {}", report.calculus))?;
        emit(out, format_args!("verdict: {}", report.outcome.name()))?;
        if let Some(reason) = &report.reason {
            emit(out, format_args!("reason: {reason}"))?;
        }
        let s = &report.stats;
        emit(
            out,
            format_args!(
                "branches: {} (closed {}, open {}, exhausted {})",
                s.branches, s.closed_branches, s.open_branches, s.exhausted_branches
            ),
        )?;
        let per_rule: Vec<String> = s.applications.iter().map(|(k, v)| format!("{k}={v}")).collect();
        emit(out, format_args!("applications: {} ({})", s.total_applications, per_rule.join(", ")))?;
        emit(out, format_args!("max terms: {}", s.max_terms))?;
        if !report.violations.is_empty() {
            emit(out, format_args!("reflection failures: {}", report.violations.join(", ")))?;
        }
        if !report.frame_failures.is_empty() {
            emit(out, format_args!("frame failures: {}", report.frame_failures.join(", ")))?;
        }
        if args.emit_model {
            if let Some(model) = &report.model {
                emit(out, serde_json::to_string_pretty(model)?)?;
            }
        }
    }
    Ok(match report.invariant_violation() {
        Some(v) => Status::Violation(vec![v]),
        None => Status::Done,
    })
}

fn collect_problems(inputs: &[PathBuf]) -> Result<Vec<(String, ProblemSpec)>, CliError> {
    let mut out = Vec::new();
    for input in inputs {
        if input.is_dir() {
            let mut files: Vec<PathBuf> = std::fs::read_dir(input)
                .map_err(io_err(input))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.extension().is_some_and(|x| x == "p"))
                .collect();
            files.sort();
            for f in files {
                out.push((f.display().to_string(), read_problem(&f)?));
            }
        } else {
            out.push((input.display().to_string(), read_problem(input)?));
        }
    }
    Ok(out)
}

fn compare_command(args: CompareArgs, out: &mut dyn Write) -> Result<Status, CliError> {
    let mut problems = collect_problems(&args.inputs)?;
    let (frames, basic) = frames_of(&args.frame);
    for (_, p) in &mut problems {
        p.frame_conditions.extend(frames.iter().copied());
    }
    let calculi: Vec<Calculus> = args.calculi.iter().map(|n| builtin_calculus(n)).collect::<Result<_, _>>()?;
    let report = compare(&problems, &calculi, &args.bounds.options(), basic)?;
    if args.json {
        emit(out, serde_json::to_string_pretty(&report)?)?;
    } else {
        for cell in &report.cells {
            emit(
                out,
                format_args!(
                    "{}\t{}\t{}\tapplications={}\tbranches={}\tterms={}\t{:.1}ms",
                    cell.problem,
                    cell.calculus,
                    cell.outcome.name(),
                    cell.applications,
                    cell.branches,
                    cell.max_terms,
                    cell.millis
                ),
            )?;
        }
        emit(out, "agreement:")?;
        for (name, row) in report.calculi.iter().zip(&report.agreement) {
            let cells: Vec<String> = row.iter().map(|n| n.to_string()).collect();
            emit(out, format_args!("  {name}\t{}", cells.join("\t")))?;
        }
        for f in &report.failures {
            emit(out, format_args!("FAILURE {f}"))?;
        }
    }
    Ok(if report.failures.is_empty() { Status::Done } else { Status::Violation(report.failures) })
}

fn oracle_command(args: OracleArgs, out: &mut dyn Write) -> Result<Status, CliError> {
    let problem = read_problem(&args.file)?;
    let (frame, _) = frames_of(&args.frame);
    let opts = OracleOptions { max_domain: args.max_domain, cap: args.cap, frame };
    let result = oracle_search(&problem, &opts)?;
    let value = match &result.outcome {
        OracleOutcome::ModelFound(m) => serde_json::json!({
            "outcome": "model-found",
            "model": m.to_json(&BTreeSet::new()),
            "models_checked": result.models_checked,
        }),
        OracleOutcome::NoModel { complete_up_to, capped } => serde_json::json!({
            "outcome": "no-model",
            "complete_up_to": complete_up_to,
            "capped": capped,
            "models_checked": result.models_checked,
        }),
    };
    if args.json {
        emit(out, serde_json::to_string_pretty(&value)?)?;
    } else {
        match &result.outcome {
            OracleOutcome::ModelFound(m) => {
                emit(out, format_args!("model found with {} elements", m.domain.len()))?;
                emit(out, serde_json::to_string_pretty(&m.to_json(&BTreeSet::new()))?)?;
            }
            OracleOutcome::NoModel { complete_up_to, capped } => {
                let note = if *capped { " (search capped)" } else { "" };
                emit(out, format_args!("no model up to {complete_up_to} elements{note}"))?;
            }
        }
    }
    Ok(Status::Done)
}

fn clausify_command(args: ClausifyArgs, out: &mut dyn Write) -> Result<Status, CliError> {
    let (texts, path) = match (&args.formula, &args.file) {
        (Some(f), _) => (vec![f.clone()], "<argument>".to_string()),
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path).map_err(io_err(path))?;
            let lines = text
                .lines()
                .map(|l| l.split('#').next().unwrap_or("").trim().to_string())
                .filter(|l| !l.is_empty())
                .collect();
            (lines, path.display().to_string())
        }
        (None, None) => return Err(CliError::Usage("no formula given".into())),
    };
    for text in texts {
        let f = parse_formula(&text).map_err(|source| CliError::Parse { path: path.clone(), source })?;
        for clause in clausify(&f) {
            emit(out, clause)?;
        }
    }
    Ok(Status::Done)
}

fn gen_command(args: GenArgs, out: &mut dyn Write) -> Result<Status, CliError> {
    let problems = if args.horn {
        horn_corpus(args.seed, args.count)
    } else {
        generate_corpus(&CorpusParams {
            seed: args.seed,
            count: args.count,
            max_formula_size: args.max_size,
            max_modal_depth: args.max_depth,
            n_props: args.props,
            n_rels: args.rels,
            language: args.language,
            relneg_probability: args.relneg_probability,
        })
    };
    match &args.out {
        Some(dir) => {
            std::fs::create_dir_all(dir).map_err(io_err(dir))?;
            for (i, p) in problems.iter().enumerate() {
                let path = dir.join(format!("p{i:04}.p"));
                std::fs::write(&path, problem_text(p)).map_err(io_err(&path))?;
            }
            emit(out, format_args!("wrote {} problems to {}", problems.len(), dir.display()))?;
        }
        None => {
            for p in &problems {
                for atom in &p.assertions {
                    emit(out, atom)?;
                }
            }
        }
    }
    Ok(Status::Done)
}

fn show_command(args: ShowArgs, out: &mut dyn Write) -> Result<Status, CliError> {
    let mut calc = builtin_calculus(&args.name)?;
    if let Some(spec) = &args.refine {
        let (rule, index) = spec
            .rsplit_once(':')
            .and_then(|(r, i)| i.parse::<usize>().ok().map(|i| (r, i)))
            .ok_or_else(|| CliError::Usage(format!("expected RULE:INDEX, got `{spec}`")))?;
        calc = refine_calculus(&calc, rule, index)?;
    }
    if let Some(t) = &args.transform {
        calc = match t.as_str() {
            "split" => split_transform(&calc)?,
            "split-plus" => split_plus_transform(&calc)?,
            "hyper" => hypertableau_transform(&calc)?,
            other => return Err(CliError::Usage(format!("unknown transform `{other}`"))),
        };
    }
    let (frames, basic) = frames_of(&args.frame);
    let calc = with_frames(&calc, &frames, basic)?;
    emit(out, serde_json::to_string_pretty(&CalculusJson::from(&calc))?)?;
    Ok(Status::Done)
}
