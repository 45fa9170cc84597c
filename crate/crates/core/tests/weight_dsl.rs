use bergman_lab::levi::{SampleBox, Verdict};
use bergman_lab::weight::{
    check_psh_sample, integrability_check, Constant, Func, IntegrabilityConfig, Node,
    ParseErrorKind, PshSampleConfig, VarKind, WeightExpr,
};
use bergman_lab::C64;
use proptest::prelude::*;

const CORPUS: [&str; 50] = [
    "0",
    "1.5",
    "pi",
    "abs2(z1)",
    "abs2(z1 - t1)",
    "abs2(z1) + abs2(z2)",
    "2 * abs2(z1)",
    "0.5 * log(abs2(z1))",
    "log(1 + abs2(z1))",
    "max(log(abs2(z1)), -1)",
    "max(abs2(z1), abs2(z2), 1)",
    "exp(abs2(z1))",
    "re(z1)",
    "im(z1)",
    "re(z1^2)",
    "im(z1 * z2)",
    "re(z1 * t1)",
    "abs2(z1)^2",
    "abs2(z1)^0.5",
    "-abs2(z1)",
    "-re(z1)^2",
    "-(abs2(z1)^2)",
    "(1 + abs2(t1)) * abs2(z1)",
    "abs2(z1) * (1 + abs2(t1))",
    "abs2(z1) - abs2(z2)",
    "abs2(z1) - (abs2(z2) - 1)",
    "abs2(z1) + abs2(z1 * z2)",
    "log(abs2(z1) + abs2(z2))",
    "log(abs2(z1^2 - z2^3))",
    "abs2(z1 + i * z2)",
    "abs2(z1 - 0.5 * i)",
    "re(i * z1)",
    "abs2(t1) * abs2(z1) + abs2(t2)",
    "exp(-abs2(z1))",
    "exp(re(z1 * t1))",
    "max(0, log(abs2(z1)))",
    "abs2(z1)^2 + abs2(z2)^2 - 1",
    "abs2(z1) + abs2(z2) - 1",
    "1e-3 * abs2(z1)",
    "2.5e2 + abs2(z3)",
    "abs2(z1 - t1) + abs2(z2 - t2)",
    "log(1 + abs2(t1)) * abs2(z1)",
    "pi * abs2(z1)",
    "abs2(z1)^2^0.5",
    "(abs2(z1)^2)^0.5",
    "re(z1)^2 + im(z1)^2",
    "-log(abs2(z1))",
    "--abs2(z1)",
    "max(re(z1), im(z1))",
    "abs2((z1 - t1) * (z1 + t1))",
];

fn parse(s: &str) -> WeightExpr {
    s.parse().unwrap_or_else(|e| panic!("{s}: {e}"))
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[test]
fn corpus_round_trips() {
    for s in CORPUS {
        let e = parse(s);
        let printed = e.to_string();
        assert_eq!(printed, s, "printer changed {s}");
        assert_eq!(parse(&printed), e);
    }
}

#[test]
fn worked_examples() {
    let e = parse("abs2(z1 - t1)");
    assert_eq!(e.eval(&[c(1.0, 0.0)], &[c(0.0, 0.0)]).unwrap(), 1.0);

    let e = parse("max(log(abs2(z1)), -1)");
    assert_eq!(e.eval(&[c(0.6, 0.8)], &[]).unwrap().abs(), 0.0);

    let err = "abs2(z1".parse::<WeightExpr>().unwrap_err();
    assert_eq!(err.offset, 8);
    assert_eq!(err.kind, ParseErrorKind::UnexpectedEnd);

    let e = parse("(1 + abs2(t1)) * abs2(z1)");
    assert_eq!(e.eval(&[c(2.0, 0.0)], &[c(1.0, 0.0)]).unwrap(), 8.0);
    assert_eq!(e.eval(&[c(0.0, 0.0)], &[c(0.0, 0.0)]).unwrap(), 0.0);

    let e = parse("0.5*log(abs2(z1))");
    assert_eq!(e.eval(&[c(0.0, 0.0)], &[]).unwrap(), f64::NEG_INFINITY);
}

#[test]
fn sort_errors() {
    let err = "z1".parse::<WeightExpr>().unwrap_err();
    assert_eq!(err.kind, ParseErrorKind::ComplexValued);
    let err = "abs2(z1^0.5)".parse::<WeightExpr>().unwrap_err();
    assert_eq!(err.kind, ParseErrorKind::ComplexPower);
    let err = "log(z1)".parse::<WeightExpr>().unwrap_err();
    assert_eq!(err.kind, ParseErrorKind::ComplexValued);
    assert!(matches!(
        "foo(z1)".parse::<WeightExpr>().unwrap_err().kind,
        ParseErrorKind::UnknownIdentifier(_)
    ));
    assert!(matches!(
        "re(z1, z2)".parse::<WeightExpr>().unwrap_err().kind,
        ParseErrorKind::WrongArity { .. }
    ));
}

#[test]
fn unbound_variable_is_reported() {
    let e = parse("abs2(z2) + abs2(t1)");
    assert!(e.eval(&[c(0.0, 0.0)], &[c(0.0, 0.0)]).is_err());
    assert!(e.eval(&[c(0.0, 0.0); 2], &[]).is_err());
    assert!(e.eval(&[c(0.0, 0.0); 2], &[c(0.0, 0.0)]).is_ok());
}

#[test]
fn evaluation_is_thread_safe() {
    let e = parse("log(1 + abs2(z1 - t1)) + re(z1^3)");
    let z = [c(0.3, -0.7)];
    let t = [c(-0.1, 0.2)];
    let want = e.eval(&z, &t).unwrap();
    std::thread::scope(|s| {
        let handles: Vec<_> = (0..4)
            .map(|_| s.spawn(|| e.eval(&z, &t).unwrap()))
            .collect();
        for h in handles {
            assert_eq!(h.join().unwrap().to_bits(), want.to_bits());
        }
    });
}

#[test]
fn pluriharmonic_has_zero_levi_form() {
    let e = parse("re(z1^2 + 3 * z1 * z2) + im(z2^3)");
    let sb = SampleBox::centered(2, 1.0);
    let cfg = PshSampleConfig {
        grid: 3,
        ..PshSampleConfig::default()
    };
    let r = check_psh_sample(&e, &sb, 2, &cfg).unwrap();
    assert!(
        r.min_levi_eigenvalue.abs() <= 1e-5,
        "{}",
        r.min_levi_eigenvalue
    );
    assert_eq!(r.verdict, Verdict::Pass);
}

#[test]
fn negated_weight_fails_psh() {
    let e = parse("-abs2(z1)");
    let r = check_psh_sample(
        &e,
        &SampleBox::centered(1, 1.0),
        1,
        &PshSampleConfig::default(),
    )
    .unwrap();
    assert_eq!(r.verdict, Verdict::Fail);
    assert!(r.min_levi_eigenvalue < -0.5);
}

#[test]
fn integrability_threshold() {
    let cfg = IntegrabilityConfig::default();
    let radii = [0.5, 0.25, 0.125, 0.0625, 0.03125];
    let z0 = [c(0.0, 0.0)];
    for (coef, divergent) in [(0.5, false), (0.99, false), (1.0, true)] {
        let e = parse(&format!("{coef} * log(abs2(z1))"));
        let r = integrability_check(&e, &z0, &radii, &cfg).unwrap();
        assert_eq!(r.divergent, divergent, "c = {coef}: {r:?}");
    }
}

fn num() -> impl Strategy<Value = Node> {
    prop_oneof![
        (0u32..20).prop_map(|k| Node::num(k as f64)),
        (0.0f64..100.0).prop_map(Node::num),
        (1e-12f64..1e12).prop_map(Node::num),
    ]
}

fn var() -> impl Strategy<Value = Node> {
    (prop_oneof![Just(VarKind::Z), Just(VarKind::T)], 1usize..4)
        .prop_map(|(kind, index)| Node::Var { kind, index })
}

fn bin(f: fn(Box<Node>, Box<Node>) -> Node) -> impl Fn((Node, Node)) -> Node {
    move |(a, b)| f(Box::new(a), Box::new(b))
}

fn complex_node() -> impl Strategy<Value = Node> {
    let leaf = prop_oneof![var(), num(), Just(Node::Const(Constant::I))];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(|a| Node::Neg(Box::new(a))),
            (inner.clone(), inner.clone()).prop_map(bin(Node::Add)),
            (inner.clone(), inner.clone()).prop_map(bin(Node::Sub)),
            (inner.clone(), inner.clone()).prop_map(bin(Node::Mul)),
            (inner, 0u32..4)
                .prop_map(|(a, k)| Node::Pow(Box::new(a), Box::new(Node::num(k as f64)))),
        ]
    })
}

fn real_node() -> impl Strategy<Value = Node> {
    let leaf = prop_oneof![
        num(),
        Just(Node::Const(Constant::Pi)),
        complex_node().prop_map(|a| Node::Call(Func::Abs2, vec![a])),
        complex_node().prop_map(|a| Node::Call(Func::Re, vec![a])),
        complex_node().prop_map(|a| Node::Call(Func::Im, vec![a])),
    ];
    leaf.prop_recursive(3, 24, 3, |inner| {
        prop_oneof![
            inner.clone().prop_map(|a| Node::Neg(Box::new(a))),
            (inner.clone(), inner.clone()).prop_map(bin(Node::Add)),
            (inner.clone(), inner.clone()).prop_map(bin(Node::Sub)),
            (inner.clone(), inner.clone()).prop_map(bin(Node::Mul)),
            (inner.clone(), inner.clone()).prop_map(bin(Node::Pow)),
            inner.clone().prop_map(|a| Node::Call(Func::Log, vec![a])),
            inner.clone().prop_map(|a| Node::Call(Func::Exp, vec![a])),
            prop::collection::vec(inner, 2..4).prop_map(|a| Node::Call(Func::Max, a)),
        ]
    })
}

fn psh_atom() -> impl Strategy<Value = String> {
    prop_oneof![
        Just("abs2(z1)".to_string()),
        Just("log(1 + abs2(z1))".to_string()),
        Just("log(abs2(z1 - 2))".to_string()),
        Just("re(z1^2)".to_string()),
        Just("abs2(z1 * z2) + abs2(z2)".to_string()),
        (0.1f64..2.0).prop_map(|a| format!("{a} * abs2(z1 - z2)")),
        (-1.0f64..1.0).prop_map(|a| format!("{a}")),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn printed_trees_parse_back(root in real_node()) {
        let e = WeightExpr::from_node(root).unwrap();
        let printed = e.to_string();
        let back: WeightExpr = printed.parse().unwrap();
        prop_assert_eq!(back, e);
    }

    #[test]
    fn parse_print_is_idempotent(root in real_node()) {
        let s = WeightExpr::from_node(root).unwrap().to_string();
        let once = parse(&s).to_string();
        prop_assert_eq!(once, s);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn max_of_psh_is_psh(a in psh_atom(), b in psh_atom()) {
        let e = parse(&format!("max({a}, {b})"));
        let sb = SampleBox::centered(2, 1.0);
        let cfg = PshSampleConfig { grid: 3, directions: 4, ..PshSampleConfig::default() };
        let r = check_psh_sample(&e, &sb, 2, &cfg).unwrap();
        prop_assert!(r.verdict != Verdict::Fail, "{}: {}", e, r.min_levi_eigenvalue);
    }
}
