use std::collections::BTreeSet;

use proptest::prelude::*;

use super::*;
use crate::engine::{derive, Branch, DeriveOptions, Verdict};
use crate::rules::builtin_calculus;
use crate::syntax::{parse_atom, parse_formula, parse_problem};

fn snapshot(texts: &[&str], equalities: &[(&str, &str)]) -> BranchSnapshot {
    let atoms: Vec<SignedAtom> = texts.iter().map(|t| parse_atom(t, &BTreeSet::new()).unwrap()).collect();
    let mut arena = Arena::new();
    let mut b = Branch::from_atoms(&mut arena, &atoms);
    for (s, t) in equalities {
        b.assert_equality(&mut arena, &DomainTerm::constant(*s), &DomainTerm::constant(*t));
    }
    b.snapshot(&arena)
}

fn witness(text: &str, calc: &str) -> BranchSnapshot {
    let problem = parse_problem(text).unwrap();
    let result = derive(&problem, &builtin_calculus(calc).unwrap(), &DeriveOptions::default()).unwrap();
    assert_eq!(result.verdict, Verdict::Sat);
    result.witness.unwrap()
}

const COUNTEREXAMPLE: &str = "language kmnot\nnom b\n@a [--r]p\n@a <r>b\n@b ~p\n";

#[test]
fn single_fact_model() {
    let m = extract_model(&snapshot(&["nu_f(p, a)"], &[])).unwrap();
    assert_eq!(m.domain, vec!["a"]);
    assert_eq!(m.props, BTreeSet::from([("p".to_string(), 0)]));
    assert!(m.rels.is_empty());
    assert!(reflects(&m, &snapshot(&["nu_f(p, a)"], &[])).is_ok());
}

#[test]
fn merged_terms_share_an_element() {
    let snap = snapshot(&["nu_r(r, a, b)"], &[("a", "b")]);
    let m = extract_model(&snap).unwrap();
    assert_eq!(m.domain.len(), 1);
    assert_eq!(m.rels, BTreeSet::from([("r".to_string(), 0, 0)]));
    assert_eq!(m.element(&DomainTerm::constant("b")), Ok(0));
    assert!(reflects(&m, &snap).is_ok());
}

#[test]
fn diamond_model_has_a_successor() {
    let m = extract_model(&witness("@a <r>p", "km-refined")).unwrap();
    assert_eq!(m.domain.len(), 2);
    assert_eq!(m.rels, BTreeSet::from([("r".to_string(), 0, 1)]));
    assert_eq!(m.props, BTreeSet::from([("p".to_string(), 1)]));
    assert!(m.domain[1].starts_with("f(r,"), "{}", m.domain[1]);
}

#[test]
fn closed_branches_have_no_model() {
    let snap = snapshot(&["nu_f(p, a)", "-nu_f(p, a)"], &[]);
    assert_eq!(extract_model(&snap), Err(ModelError::ClosedBranch));
}

#[test]
fn box_is_vacuous_without_successors() {
    let m = extract_model(&snapshot(&["nu_f(q, a)", "nu_f(q, b)"], &[])).unwrap();
    let boxed = parse_formula("[r]p").unwrap();
    for e in 0..m.domain.len() {
        assert_eq!(eval_formula(&m, &boxed, e), Ok(true));
    }
    assert_eq!(eval_formula(&m, &boxed, 7), Err(ModelError::UnknownClass(7)));
    assert!(eval_formula(&m, &Formula::nom("i"), 0).is_err());
}

#[test]
fn stuck_branch_fails_reflection() {
    let snap = witness(COUNTEREXAMPLE, "kmnot-refined-incomplete");
    let m = extract_model(&snap).unwrap();
    let report = reflects(&m, &snap);
    let boxed = parse_atom("nu_f([--r]p, a)", &BTreeSet::new()).unwrap();
    assert_eq!(report.violations, vec![boxed]);
}

#[test]
fn refined_saturated_branches_reflect() {
    for text in ["@a <r>p\n@a [r](q | ~p)", "@a <r>(p & <r>~p)\n@a [r]([r]p | q)", "@a ~[r](p | [r]~p)"] {
        for calc in ["km-basic", "km-refined", "kmnot-plus", "kmnot-refined", "kmnot-hyper"] {
            let snap = witness(text, calc);
            let m = extract_model(&snap).unwrap();
            let report = reflects(&m, &snap);
            assert!(report.is_ok(), "{calc} {text}: {:?}", report.violations);
        }
    }
}

fn model(n: usize, rels: &[(usize, usize)], props: &[usize]) -> Model {
    Model {
        domain: (0..n).map(|i| i.to_string()).collect(),
        props: props.iter().map(|e| ("p".to_string(), *e)).collect(),
        rels: rels.iter().map(|(s, t)| ("r".to_string(), *s, *t)).collect(),
        relations: BTreeSet::from(["r".to_string()]),
        class_of: Default::default(),
    }
}

#[test]
fn frame_condition_examples() {
    assert!(!check_frame_condition(&model(1, &[(0, 0)], &[]), FrameCondition::Irreflexive));
    assert!(check_frame_condition(&model(2, &[(0, 1), (1, 0)], &[]), FrameCondition::ImmediatePredecessor));
    assert!(!check_frame_condition(&model(2, &[], &[]), FrameCondition::ImmediatePredecessor));
    // A three-cycle: the only predecessor of each element is immediate.
    assert!(check_frame_condition(&model(3, &[(0, 1), (1, 2), (2, 0)], &[]), FrameCondition::ImmediatePredecessor));
    // With a shortcut 0->2 through 1, element 2 keeps 1 as immediate predecessor.
    let m = model(3, &[(0, 1), (1, 2), (0, 2), (2, 0)], &[]);
    assert!(check_frame_condition(&m, FrameCondition::ImmediatePredecessor));
    // Complete irreflexive graph on three elements: every predecessor has a detour.
    let m = model(3, &[(0, 1), (0, 2), (1, 0), (1, 2), (2, 0), (2, 1)], &[]);
    assert!(check_frame_condition(&m, FrameCondition::Irreflexive));
    assert!(!check_frame_condition(&m, FrameCondition::ImmediatePredecessor));
}

/// Every model with one relation and one proposition over `n` elements.
fn all_models(n: usize) -> impl Iterator<Item = Model> {
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|s| (0..n).map(move |t| (s, t))).collect();
    (0u64..1 << pairs.len()).flat_map(move |rb| {
        let rels: Vec<(usize, usize)> = pairs.iter().enumerate().filter(|(i, _)| rb >> i & 1 == 1).map(|(_, p)| *p).collect();
        (0u64..1 << n).map(move |pb| {
            let props: Vec<usize> = (0..n).filter(|e| pb >> e & 1 == 1).collect();
            model(n, &rels, &props)
        })
    })
}

#[test]
fn double_complement_is_identity_on_small_models() {
    let plain = parse_formula("[r]p").unwrap();
    let twice = parse_formula("[--r]p").unwrap();
    let r = Relation::constant("r");
    let rr = Relation::negate(Relation::negate(r.clone()));
    for n in 1..=3 {
        for m in all_models(n) {
            for e in 0..n {
                assert_eq!(eval_formula(&m, &plain, e), eval_formula(&m, &twice, e));
                for e2 in 0..n {
                    assert_eq!(eval_relation(&m, &r, e, e2), eval_relation(&m, &rr, e, e2));
                }
            }
        }
    }
}

proptest! {
    #[test]
    fn complement_flips_relation(n in 1usize..5, bits in any::<u32>(), e in 0usize..5, e2 in 0usize..5) {
        let (e, e2) = (e % n, e2 % n);
        let rels: Vec<(usize, usize)> = (0..n * n).filter(|i| bits >> i & 1 == 1).map(|i| (i / n, i % n)).collect();
        let m = model(n, &rels, &[]);
        let r = Relation::constant("r");
        prop_assert_eq!(eval_relation(&m, &Relation::negate(r.clone()), e, e2).unwrap(), !eval_relation(&m, &r, e, e2).unwrap());
        prop_assert_eq!(eval_relation(&m, &r, e, e2).unwrap(), m.rels.contains(&("r".to_string(), e, e2)));
    }
}

#[test]
fn diagnostic_finds_the_stuck_substitution() {
    let snap = witness(COUNTEREXAMPLE, "kmnot-refined-incomplete");
    let basic = builtin_calculus("kmnot-basic").unwrap();
    let report = diagnose_general_condition(&snap, basic.rule("box").unwrap(), 1).unwrap();
    assert_eq!(report.counterexamples.len(), 1, "{report:?}");
    let cx = &report.counterexamples[0];
    assert_eq!(cx["x"], GroundValue::D(DomainTerm::constant("a")));
    assert_eq!(cx["y"], GroundValue::D(DomainTerm::constant("b")));
    assert_eq!(cx["r"], GroundValue::R(Relation::negate(Relation::negate(Relation::constant("r")))));
    assert_eq!(cx["p"], GroundValue::F(Formula::prop("p")));
}

#[test]
fn diagnostic_is_clean_for_km() {
    let basic = builtin_calculus("km-basic").unwrap();
    for text in ["@a <r>p\n@a [r](q | ~p)", "@a [r]p\n@a <r>q\n@a <s>~q"] {
        let snap = witness(text, "km-refined");
        let report = diagnose_general_condition(&snap, basic.rule("box").unwrap(), 1).unwrap();
        assert!(report.checked > 0);
        assert!(report.counterexamples.is_empty(), "{report:?}");
    }
    let snap = witness("@a p | q", "km-refined");
    let report = diagnose_general_condition(&snap, basic.rule("box").unwrap(), 1).unwrap();
    assert_eq!((report.checked, report.counterexamples.len()), (0, 0));
    assert!(diagnose_general_condition(&snap, basic.rule("box").unwrap(), 3).is_err());
}
