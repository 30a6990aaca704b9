use proptest::prelude::*;
use sidl_core::spec::{ArithExpr, CmpOp, Literal, Rule};
use sidl_core::{parse_sidl, parse_term, print_spec, GameSpec, Term};

fn leaf() -> impl Strategy<Value = Term> {
    prop_oneof![
        "[a-z][a-zA-Z0-9_]{0,5}".prop_map(Term::Atom),
        "\\PC{0,4}".prop_map(Term::Atom),
        any::<i64>().prop_map(Term::Int),
        any::<f64>().prop_filter("finite", |r| r.is_finite()).prop_map(Term::Real),
        "[A-Z_][a-zA-Z0-9_]{0,4}".prop_map(Term::Var),
    ]
}

fn term() -> impl Strategy<Value = Term> {
    leaf().prop_recursive(4, 32, 4, |inner| {
        prop_oneof![
            ("[a-z][a-z0-9]{0,4}", prop::collection::vec(inner.clone(), 1..4))
                .prop_map(|(f, args)| Term::Compound(f, args)),
            prop::collection::vec(inner.clone(), 0..4).prop_map(Term::List),
            (prop::sample::select(vec!["+", "-", "*", "/"]), inner.clone(), inner.clone())
                .prop_map(|(op, a, b)| Term::Compound(op.into(), vec![a, b])),
            inner.prop_map(|a| Term::Compound("-".into(), vec![a])),
        ]
    })
}

fn callable() -> impl Strategy<Value = Term> {
    ("[a-z][a-z0-9_]{0,4}", prop::collection::vec(term(), 0..3)).prop_map(|(f, args)| Term::compound(f, args))
}

fn literal() -> impl Strategy<Value = Literal> {
    let cmp = prop::sample::select(vec![CmpOp::Gt, CmpOp::Lt, CmpOp::Ge, CmpOp::Le, CmpOp::Eq, CmpOp::Ne]);
    prop_oneof![
        callable().prop_map(Literal::Goal),
        callable().prop_map(Literal::Not),
        callable().prop_map(Literal::Ax),
        callable().prop_map(Literal::Next),
        (cmp, term(), term()).prop_map(|(op, l, r)| Literal::Compare {
            op,
            lhs: ArithExpr::from_term(&l),
            rhs: ArithExpr::from_term(&r),
        }),
        ("[a-z]{1,5}", term()).prop_map(|(a, e)| Literal::Payoff { agent: Term::Atom(a), amount: ArithExpr::from_term(&e) }),
        Just(Literal::False),
    ]
}

fn operation_rule() -> impl Strategy<Value = Rule> {
    (callable(), prop::collection::vec(literal(), 0..5))
        .prop_map(|(op, body)| Rule::new(Term::compound("operation", vec![op]), body))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn terms_round_trip(t in term()) {
        let text = t.to_string();
        let back = parse_term(&text).map_err(|e| TestCaseError::fail(format!("{text}: {e}")))?;
        prop_assert_eq!(back, t, "{}", text);
    }

    #[test]
    fn operation_rules_round_trip(rules in prop::collection::vec(operation_rule(), 1..4)) {
        let spec = GameSpec { operation_rules: rules, ..GameSpec::default() };
        let text = print_spec(&spec);
        let back = parse_sidl(&text).map_err(|e| TestCaseError::fail(format!("{text}: {e}")))?;
        prop_assert_eq!(&back, &spec, "{}", text);
        prop_assert_eq!(print_spec(&back), text);
    }
}

#[test]
fn numeric_extremes_round_trip() {
    for t in [
        Term::Int(i64::MIN),
        Term::Int(i64::MAX),
        Term::Real(1e300),
        Term::Real(-0.0),
        Term::Real(5e-324),
        Term::Compound("-".into(), vec![Term::Int(i64::MIN)]),
        Term::Compound("-".into(), vec![Term::Compound("-".into(), vec![Term::var("X")])]),
    ] {
        let text = t.to_string();
        assert_eq!(parse_term(&text).unwrap_or_else(|e| panic!("{text}: {e}")), t, "{text}");
    }
}
