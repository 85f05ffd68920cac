use proptest::prelude::*;

use super::*;
use crate::models::{check_frame_condition, eval_atom, eval_formula};
use crate::syntax::{parse_problem, Language, SignedAtom};

fn search(text: &str, max_domain: usize, frame: &[FrameCondition]) -> OracleResult {
    let problem = parse_problem(text).unwrap();
    let opts = OracleOptions { max_domain, frame: frame.iter().copied().collect(), ..OracleOptions::default() };
    oracle_search(&problem, &opts).unwrap()
}

#[test]
fn diamond_has_a_one_element_model() {
    let result = search("@a <r>p", 4, &[]);
    let m = result.model().unwrap();
    assert_eq!(m.domain.len(), 1);
    assert_eq!(m.rels, BTreeSet::from([("r".to_string(), 0, 0)]));
    assert_eq!(m.props, BTreeSet::from([("p".to_string(), 0)]));
}

#[test]
fn counterexample_set_has_no_small_model() {
    let result = search("language kmnot\nnom b\n@a [--r]p\n@a <r>b\n@b ~p\n", 4, &[]);
    assert_eq!(result.outcome, OracleOutcome::NoModel { complete_up_to: 4, capped: false });
}

#[test]
fn loop_contradicts_irreflexivity() {
    let result = search("rel(r, a, a)", 4, &[FrameCondition::Irreflexive]);
    assert_eq!(result.outcome, OracleOutcome::NoModel { complete_up_to: 4, capped: false });
    assert!(search("rel(r, a, a)", 4, &[]).model().is_some());
}

#[test]
fn immediate_predecessor_needs_two_elements() {
    let m = search("@a p", 4, &[FrameCondition::ImmediatePredecessor]).model().cloned();
    // No relation constant occurs, so the condition is vacuous.
    assert_eq!(m.unwrap().domain.len(), 1);
    let m = search("@a [r]p", 4, &[FrameCondition::ImmediatePredecessor]).model().cloned().unwrap();
    assert_eq!(m.domain.len(), 2);
    assert!(check_frame_condition(&m, FrameCondition::ImmediatePredecessor));
}

#[test]
fn skolem_terms_and_nominals_are_rejected() {
    let f = DomainTerm::skolem_g(Relation::constant("r"), DomainTerm::constant("a"));
    let problem = ProblemSpec::new(vec![SignedAtom::holds_f(true, Formula::prop("p"), f)], Language::Km);
    assert!(matches!(oracle_search(&problem, &OracleOptions::default()), Err(OracleError::SkolemTerm(_))));
    let problem = ProblemSpec::new(
        vec![SignedAtom::holds_f(true, Formula::nom("i"), DomainTerm::constant("a"))],
        Language::Km,
    );
    assert!(matches!(oracle_search(&problem, &OracleOptions::default()), Err(OracleError::Nominal(_))));
}

#[test]
fn cap_is_reported() {
    let problem = parse_problem("[r](p | q) & [s](~p | q) & <r><s>~q & <s><r>~p").unwrap();
    let opts = OracleOptions { cap: 3, ..OracleOptions::default() };
    let result = oracle_search(&problem, &opts).unwrap();
    assert!(matches!(result.outcome, OracleOutcome::NoModel { capped: true, .. }), "{:?}", result.outcome);
}

#[test]
fn constants_need_not_be_distinct() {
    let m = search("@a p\n@b ~p\nrel(r, a, b)", 3, &[]).model().cloned().unwrap();
    assert_eq!(m.domain.len(), 2);
    let m = search("@a p\n@b p", 3, &[]).model().cloned().unwrap();
    assert_eq!(m.domain.len(), 1);
    assert_eq!(m.element(&DomainTerm::constant("b")), Ok(0));
}

/// Plain enumeration in the documented order: sizes ascending, then the
/// bit vector of relation triples followed by proposition pairs, least first.
fn brute_force(problem: &ProblemSpec, max_domain: usize) -> Option<Model> {
    let relations: Vec<String> = problem.relation_constants().into_iter().collect();
    let props: Vec<String> = problem.props().into_iter().collect();
    for n in 1..=max_domain {
        let triples: Vec<(String, usize, usize)> = relations
            .iter()
            .flat_map(|r| (0..n).flat_map(move |s| (0..n).map(move |t| (r.clone(), s, t))))
            .collect();
        let pairs: Vec<(String, usize)> = props.iter().flat_map(|p| (0..n).map(move |e| (p.clone(), e))).collect();
        let bits = triples.len() + pairs.len();
        for code in 0u64..1 << bits {
            let bit = |i: usize| code >> (bits - 1 - i) & 1 == 1;
            let model = Model {
                domain: (0..n).map(|e| format!("e{e}")).collect(),
                rels: triples.iter().enumerate().filter(|(i, _)| bit(*i)).map(|(_, t)| t.clone()).collect(),
                props: pairs.iter().enumerate().filter(|(i, _)| bit(triples.len() + *i)).map(|(_, p)| p.clone()).collect(),
                relations: relations.iter().cloned().collect(),
                class_of: [(DomainTerm::constant("a0"), 0)].into_iter().collect(),
            };
            if problem.assertions.iter().all(|a| eval_atom(&model, a) == Ok(true)) {
                return Some(model);
            }
        }
    }
    None
}

fn small_formula() -> impl Strategy<Value = Formula> {
    let leaf = prop_oneof![Just(Formula::prop("p")), Just(Formula::prop("q"))];
    leaf.prop_recursive(4, 12, 2, |inner| {
        let rel = prop_oneof![Just(Relation::constant("r")), Just(Relation::negate(Relation::constant("r")))];
        prop_oneof![
            inner.clone().prop_map(Formula::negate),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::or(a, b)),
            (rel, inner).prop_map(|(r, f)| Formula::necessity(r, f)),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn agrees_with_plain_enumeration(f in small_formula()) {
        let problem = ProblemSpec::from_formula(f.clone(), Language::KmNot);
        let opts = OracleOptions { max_domain: 2, ..OracleOptions::default() };
        let fast = oracle_search(&problem, &opts).unwrap();
        let slow = brute_force(&problem, 2);
        match (fast.model(), slow) {
            (Some(m), Some(expected)) => {
                prop_assert_eq!(&m.rels, &expected.rels);
                prop_assert_eq!(&m.props, &expected.props);
                prop_assert_eq!(m.domain.len(), expected.domain.len());
                prop_assert_eq!(eval_formula(m, &f, 0), Ok(true));
            }
            (None, None) => prop_assert_eq!(fast.outcome, OracleOutcome::NoModel { complete_up_to: 2, capped: false }),
            (fast, slow) => prop_assert!(false, "{f}: {fast:?} vs {slow:?}"),
        }
    }

    #[test]
    fn larger_bounds_keep_models(f in small_formula()) {
        let problem = ProblemSpec::from_formula(f, Language::KmNot);
        let small = oracle_search(&problem, &OracleOptions { max_domain: 2, ..OracleOptions::default() }).unwrap();
        let large = oracle_search(&problem, &OracleOptions { max_domain: 3, ..OracleOptions::default() }).unwrap();
        if let Some(m) = small.model() {
            prop_assert_eq!(large.model(), Some(m));
        }
    }
}
