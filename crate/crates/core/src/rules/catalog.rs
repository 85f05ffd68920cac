use super::pattern::{Calculus, ClausifyMode, DPat, FPat, Family, PatternAtom, RPat, Rule, SideCondition};
use super::RuleError;
use crate::syntax::Language;

pub const CATALOG: &[&str] = &[
    "km-basic",
    "km-refined",
    "kmnot-basic",
    "kmnot-plus",
    "kmnot-refined",
    "kmnot-refined-incomplete",
    "kmnot-hyper",
    "irr-basic",
    "irr",
    "imm-pred-basic",
    "imm-pred-refined",
];

fn p() -> FPat {
    FPat::var("p")
}
fn q() -> FPat {
    FPat::var("q")
}
fn r() -> RPat {
    RPat::var("r")
}
fn x() -> DPat {
    DPat::var("x")
}
fn y() -> DPat {
    DPat::var("y")
}
fn z() -> DPat {
    DPat::var("z")
}
fn hf(positive: bool, f: FPat, t: DPat) -> PatternAtom {
    PatternAtom::holds_f(positive, f, t)
}
fn hr(positive: bool, rel: RPat, s: DPat, t: DPat) -> PatternAtom {
    PatternAtom::holds_r(positive, rel, s, t)
}
fn eq(positive: bool, s: DPat, t: DPat) -> PatternAtom {
    PatternAtom::equal(positive, s, t)
}

fn km_rules() -> Vec<Rule> {
    let fx = DPat::skf(r(), p(), x());
    vec![
        Rule::new("neg", vec![hf(true, FPat::not(p()), x())], vec![vec![hf(false, p(), x())]]),
        Rule::new("nneg", vec![hf(false, FPat::not(p()), x())], vec![vec![hf(true, p(), x())]]),
        Rule::new(
            "or",
            vec![hf(true, FPat::or(p(), q()), x())],
            vec![vec![hf(true, p(), x())], vec![hf(true, q(), x())]],
        ),
        Rule::new(
            "nor",
            vec![hf(false, FPat::or(p(), q()), x())],
            vec![vec![hf(false, p(), x()), hf(false, q(), x())]],
        ),
        box_rule(),
        Rule::new(
            "dia",
            vec![hf(false, FPat::boxed(r(), p()), x())],
            vec![vec![hr(true, r(), x(), fx.clone()), hf(false, p(), fx)]],
        ),
        Rule::new("close_f", vec![hf(true, p(), x()), hf(false, p(), x())], vec![]),
        Rule::new("close_r", vec![hr(true, r(), x(), y()), hr(false, r(), x(), y())], vec![]),
    ]
}

fn box_rule() -> Rule {
    Rule::new(
        "box",
        vec![hf(true, FPat::boxed(r(), p()), x())],
        vec![vec![hr(false, r(), x(), y())], vec![hf(true, p(), y())]],
    )
}

fn refined_box() -> Rule {
    Rule::new(
        "box.1",
        vec![hf(true, FPat::boxed(r(), p()), x()), hr(true, r(), x(), y())],
        vec![vec![hf(true, p(), y())]],
    )
}

fn relation_negation_rules() -> Vec<Rule> {
    let not_r = RPat::not(r());
    vec![
        Rule::new("rneg", vec![hr(true, not_r.clone(), x(), y())], vec![vec![hr(false, r(), x(), y())]]),
        Rule::new("nrneg", vec![hr(false, not_r, x(), y())], vec![vec![hr(true, r(), x(), y())]]),
    ]
}

fn box_not_rule() -> Rule {
    Rule::new(
        "box_not",
        vec![hf(true, FPat::boxed(RPat::not(r()), p()), x())],
        vec![vec![hr(true, r(), x(), y())], vec![hf(true, p(), y())]],
    )
}

fn replace(rules: &mut [Rule], id: &str, with: Rule) {
    let slot = rules.iter_mut().find(|rule| rule.id == id).expect("rule present");
    *slot = with;
}

fn kmnot_plus() -> Vec<Rule> {
    let mut rules = km_rules();
    rules.extend(relation_negation_rules());
    rules.push(box_not_rule());
    rules
}

fn imm_pred_rules() -> Vec<Rule> {
    let g = DPat::skg(r(), x());
    vec![
        Rule::new("pred", vec![], vec![vec![hr(true, r(), g.clone(), x())]]),
        Rule::new("pred_neq", vec![], vec![vec![eq(false, x(), g.clone())]]),
        Rule::new(
            "pred_imm",
            vec![],
            vec![
                vec![hr(false, r(), g.clone(), z())],
                vec![hr(false, r(), z(), x())],
                vec![eq(true, g, z())],
                vec![eq(true, z(), x())],
            ],
        ),
    ]
}

/// Looks up a calculus of the built-in catalog.
pub fn builtin_calculus(name: &str) -> Result<Calculus, RuleError> {
    let calc = match name {
        "km-basic" => Calculus::new(name, Language::Km, km_rules()),
        "km-refined" => {
            let mut rules = km_rules();
            replace(&mut rules, "box", refined_box());
            Calculus::new(name, Language::Km, rules)
        }
        "kmnot-basic" => {
            let mut rules = km_rules();
            rules.extend(relation_negation_rules());
            Calculus::new(name, Language::KmNot, rules)
        }
        "kmnot-plus" => Calculus::new(name, Language::KmNot, kmnot_plus()),
        "kmnot-refined" => {
            let mut rules = kmnot_plus();
            replace(&mut rules, "box", refined_box());
            Calculus::new(name, Language::KmNot, rules)
        }
        "kmnot-refined-incomplete" => {
            let mut rules = km_rules();
            rules.extend(relation_negation_rules());
            replace(&mut rules, "box", refined_box());
            Calculus::new(name, Language::KmNot, rules)
        }
        "kmnot-hyper" => {
            let mut rules = kmnot_plus();
            replace(&mut rules, "box", refined_box());
            rules.retain(|rule| rule.id != "or");
            let mut calc = Calculus::new(name, Language::KmNot, rules);
            calc.families = vec![Family::Hyper];
            calc.clausify = ClausifyMode::RootsAndConclusions;
            calc
        }
        "irr-basic" => Calculus::new(
            name,
            Language::Km,
            vec![Rule::new("irr_gen", vec![], vec![vec![hr(false, r(), x(), x())]])],
        ),
        "irr" => Calculus::new(name, Language::Km, vec![Rule::new("irr", vec![hr(true, r(), x(), x())], vec![])]),
        "imm-pred-basic" => Calculus::new(name, Language::Km, imm_pred_rules()),
        "imm-pred-refined" => {
            let g = DPat::skg(r(), x());
            Calculus::new(
                name,
                Language::Km,
                vec![
                    imm_pred_rules().remove(0),
                    Rule::new("pred_neq.1", vec![eq(true, x(), g.clone())], vec![]),
                    Rule::new(
                        "pred_imm.1.1",
                        vec![hr(true, r(), g.clone(), z()), hr(true, r(), z(), x())],
                        vec![vec![eq(true, g, z())], vec![eq(true, z(), x())]],
                    ),
                ],
            )
        }
        _ => return Err(RuleError::UnknownCalculus(name.to_string())),
    };
    Ok(calc)
}

fn numbered(prefix: &str, n: usize) -> Vec<FPat> {
    (1..=n).map(|i| FPat::var(&format!("{prefix}{i}"))).collect()
}

/// Concrete members of a rule family with total width exactly `width`.
pub fn family_rules(family: Family, width: usize) -> Vec<Rule> {
    let x = DPat::var("x");
    match family {
        Family::Split => {
            let ps = numbered("p", width);
            vec![Rule::new(
                format!("split_{width}"),
                vec![PatternAtom::holds_f(true, FPat::Disj(ps.clone()), x.clone())],
                ps.into_iter().map(|p| vec![PatternAtom::holds_f(true, p, x.clone())]).collect(),
            )]
        }
        Family::SplitPlus | Family::Hyper => (0..=width)
            .map(|m| {
                let n = width - m;
                let ps = numbered("p", m);
                let qs = numbered("q", n);
                let clause = FPat::Clause { negatives: ps.clone(), positives: qs.clone() };
                let mut numerator = vec![PatternAtom::holds_f(true, clause, x.clone())];
                let mut denominators = Vec::new();
                let id = if family == Family::Hyper {
                    numerator.extend(ps.iter().map(|p| PatternAtom::holds_f(true, p.clone(), x.clone())));
                    format!("hyp_{m}_{n}")
                } else {
                    denominators.extend(ps.iter().map(|p| vec![PatternAtom::holds_f(false, p.clone(), x.clone())]));
                    format!("split+_{m}_{n}")
                };
                denominators.extend(qs.iter().map(|q| vec![PatternAtom::holds_f(true, q.clone(), x.clone())]));
                let mut rule = Rule::new(id, numerator, denominators);
                for i in 1..=m {
                    rule = rule.with_side(SideCondition::AtomicOnly(format!("p{i}")));
                }
                for j in 1..=n {
                    rule = rule.with_side(SideCondition::NotNegAtomic(format!("q{j}")));
                }
                rule
            })
            .collect(),
    }
}
