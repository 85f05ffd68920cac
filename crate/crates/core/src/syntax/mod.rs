//! Logic language `L` (formulae and relations), the tableau atoms over it,
//! and the line-oriented problem syntax.

mod ast;
mod labelled;
mod parser;
mod print;

pub use ast::{
    subformula_closure, DomainTerm, Formula, FrameCondition, Language, Payload, ProblemSpec,
    Relation, SignedAtom,
};
pub use labelled::{encode_labelled, EncodeError, LabelledAssertion};
pub use parser::{parse_atom, parse_formula, parse_problem, ParseError};
pub use print::{render, render_labelled, RenderStyle};

#[cfg(test)]
mod tests {
    use std::collections::BTreeSet;

    use proptest::prelude::*;

    use super::*;

    fn p(name: &str) -> Formula {
        Formula::prop(name)
    }

    fn r(name: &str) -> Relation {
        Relation::constant(name)
    }

    fn c(name: &str) -> DomainTerm {
        DomainTerm::constant(name)
    }

    #[test]
    fn conjunction_is_desugared() {
        let spec = parse_problem("p & ~p").unwrap();
        let expected = Formula::negate(Formula::or(
            Formula::negate(p("p")),
            Formula::negate(Formula::negate(p("p"))),
        ));
        assert_eq!(spec.assertions, vec![SignedAtom::holds_f(true, expected, c("a0"))]);
        assert_eq!(spec.language, Language::Km);
    }

    #[test]
    fn counterexample_set_in_labelled_syntax() {
        let text = "language kmnot\nnom b\n@a [--r]p\n@a <r>b\n@b ~p\n";
        let spec = parse_problem(text).unwrap();
        let box_nn = Formula::necessity(Relation::negate(Relation::negate(r("r"))), p("p"));
        assert_eq!(
            spec.assertions,
            vec![
                SignedAtom::holds_f(true, box_nn, c("a")),
                SignedAtom::holds_r(true, r("r"), c("a"), c("b")),
                SignedAtom::holds_f(false, p("p"), c("b")),
            ]
        );
        assert_eq!(spec.language, Language::KmNot);
    }

    #[test]
    fn relation_negation_in_km_is_rejected() {
        let err = parse_problem("language km\n[s]q\n[-s]q\n").unwrap_err();
        assert!(matches!(err, ParseError::LanguageViolation { line: 3, .. }), "{err}");
    }

    #[test]
    fn language_is_inferred_without_directive() {
        assert_eq!(parse_problem("[-s]q").unwrap().language, Language::KmNot);
        assert_eq!(parse_problem("[s]q").unwrap().language, Language::Km);
    }

    #[test]
    fn syntax_errors_carry_positions() {
        let err = parse_problem("p |\n").unwrap_err();
        match err {
            ParseError::Syntax { line, column, expected, .. } => {
                assert_eq!(line, 1);
                assert_eq!(column, 4);
                assert_eq!(expected, vec!["formula".to_string()]);
            }
            other => panic!("unexpected {other:?}"),
        }
        let err = parse_problem("p\n[r p").unwrap_err();
        assert!(matches!(err, ParseError::Syntax { line: 2, column: 4, .. }), "{err}");
    }

    #[test]
    fn nominal_under_disjunction_is_an_encoding_error() {
        let err = parse_problem("nom b\n@a (p | ~[r]~b)").unwrap_err();
        assert!(matches!(err, ParseError::Encoding { line: 2, .. }));
    }

    #[test]
    fn fresh_constants_follow_input_order_and_skip_labels() {
        let spec = parse_problem("p\n@a0 q\nq | p\n").unwrap();
        let labels: Vec<_> = spec.assertions.iter().map(|a| a.payload.terms()[0].clone()).collect();
        assert_eq!(labels, vec![c("a1"), c("a0"), c("a2")]);
    }

    #[test]
    fn precedence_and_associativity() {
        let f = parse_formula("~[r]p & q | s | t").unwrap();
        let lhs = Formula::and(Formula::negate(Formula::necessity(r("r"), p("p"))), p("q"));
        assert_eq!(f, Formula::or(Formula::or(lhs, p("s")), p("t")));
        let g = parse_formula("<r>p").unwrap();
        assert_eq!(g, Formula::negate(Formula::necessity(r("r"), Formula::negate(p("p")))));
    }

    #[test]
    fn rel_assertions_and_frames() {
        let spec = parse_problem("frame irr\nrel(r, a, a)\n~rel(-s, a, b)").unwrap();
        assert!(spec.frame_conditions.contains(&FrameCondition::Irreflexive));
        assert_eq!(spec.assertions[0], SignedAtom::holds_r(true, r("r"), c("a"), c("a")));
        assert_eq!(
            spec.assertions[1],
            SignedAtom::holds_r(false, Relation::negate(r("s")), c("a"), c("b"))
        );
    }

    #[test]
    fn render_examples() {
        let atom = SignedAtom::holds_r(true, r("r"), c("a"), c("b"));
        assert_eq!(render(&atom, RenderStyle::Labelled), "@a <r>b");
        let sk = DomainTerm::skolem_f(r("r"), p("p"), c("a"));
        let atom = SignedAtom::holds_f(false, p("p"), sk);
        assert_eq!(render(&atom, RenderStyle::Fo), "-nu_f(p, f(r,p,a))");
        // Skolem terms have no labelled form.
        assert_eq!(render(&atom, RenderStyle::Labelled), "-nu_f(p, f(r,p,a))");
    }

    #[test]
    fn closure_examples() {
        let not_r = Relation::negate(r("r"));
        let f = Formula::necessity(not_r.clone(), p("p"));
        let (fmls, rels) = subformula_closure([&f]);
        assert_eq!(fmls, BTreeSet::from([f.clone(), p("p")]));
        assert_eq!(rels, BTreeSet::from([not_r, r("r")]));

        let g = Formula::or(p("p"), p("q"));
        let (fmls, rels) = subformula_closure([&g]);
        assert_eq!(fmls, BTreeSet::from([g.clone(), p("p"), p("q")]));
        assert!(rels.is_empty());
    }

    // Generators shared by the property tests below.

    fn arb_relation() -> impl Strategy<Value = Relation> {
        prop_oneof![Just("r"), Just("s")]
            .prop_map(Relation::constant)
            .prop_recursive(3, 4, 1, |inner| inner.prop_map(Relation::negate))
    }

    pub(crate) fn arb_formula() -> impl Strategy<Value = Formula> {
        let leaf = prop_oneof![Just("p"), Just("q"), Just("s1")].prop_map(Formula::prop);
        leaf.prop_recursive(4, 24, 2, |inner| {
            prop_oneof![
                inner.clone().prop_map(Formula::negate),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::or(a, b)),
                (arb_relation(), inner).prop_map(|(r, f)| Formula::necessity(r, f)),
            ]
        })
    }

    fn arb_term() -> impl Strategy<Value = DomainTerm> {
        let leaf = prop_oneof![Just("a"), Just("b"), Just("a0")].prop_map(DomainTerm::constant);
        leaf.prop_recursive(2, 6, 1, |inner| {
            prop_oneof![
                (arb_relation(), arb_formula(), inner.clone())
                    .prop_map(|(r, f, t)| DomainTerm::skolem_f(r, f, t)),
                (arb_relation(), inner).prop_map(|(r, t)| DomainTerm::skolem_g(r, t)),
            ]
        })
    }

    fn arb_atom() -> impl Strategy<Value = SignedAtom> {
        let payload = prop_oneof![
            (arb_formula(), arb_term()).prop_map(|(f, t)| Payload::HoldsF(f, t)),
            (arb_relation(), arb_term(), arb_term()).prop_map(|(r, s, t)| Payload::HoldsR(r, s, t)),
            (arb_term(), arb_term()).prop_map(|(s, t)| Payload::Equal(s, t)),
        ];
        (any::<bool>(), payload).prop_map(|(positive, payload)| SignedAtom { positive, payload })
    }

    proptest! {
        #![proptest_config(ProptestConfig { cases: 1000, ..ProptestConfig::default() })]

        #[test]
        fn fo_render_round_trips(atom in arb_atom()) {
            let text = render(&atom, RenderStyle::Fo);
            prop_assert_eq!(parse_atom(&text, &BTreeSet::new()).unwrap(), atom);
        }

        #[test]
        fn labelled_render_round_trips(atom in arb_atom()) {
            let mut labels = BTreeSet::new();
            for t in atom.payload.terms() {
                t.constants(&mut labels);
            }
            let text = render(&atom, RenderStyle::Labelled);
            prop_assert_eq!(parse_atom(&text, &labels).unwrap(), atom);
        }

        #[test]
        fn formula_print_round_trips(f in arb_formula()) {
            prop_assert_eq!(parse_formula(&f.to_string()).unwrap(), f);
        }

        #[test]
        fn closure_is_bounded_by_size(f in arb_formula()) {
            let (fmls, _) = subformula_closure([&f]);
            prop_assert!(fmls.len() <= f.size());
            prop_assert!(fmls.contains(&f));
        }
    }
}
