mod common;

use proptest::prelude::*;
use setsep::expr::{parse_expression, BinaryOp, Dims, Expr, UnaryOp, Var};

const DIMS: Dims = Dims { n: 2, m: 1, time: true };

fn leaf() -> impl Strategy<Value = Expr> {
    prop_oneof![
        (-50i32..50).prop_map(|k| Expr::constant(f64::from(k) / 4.0)),
        Just(Expr::var(Var::T)),
        (0usize..2).prop_map(|i| Expr::var(Var::X(i))),
        Just(Expr::var(Var::U(0))),
    ]
}

fn expr_strategy() -> impl Strategy<Value = Expr> {
    leaf().prop_recursive(5, 48, 2, |inner| {
        let unary = prop_oneof![
            Just(UnaryOp::Neg),
            Just(UnaryOp::Sin),
            Just(UnaryOp::Cos),
            Just(UnaryOp::Exp),
            Just(UnaryOp::Log),
            Just(UnaryOp::Sqrt),
            Just(UnaryOp::Abs),
        ];
        let binary = prop_oneof![
            Just(BinaryOp::Add),
            Just(BinaryOp::Sub),
            Just(BinaryOp::Mul),
            Just(BinaryOp::Div),
            Just(BinaryOp::Pow),
        ];
        prop_oneof![
            (unary, inner.clone()).prop_map(|(op, a)| Expr::unary(op, a)),
            (binary, inner.clone(), inner).prop_map(|(op, a, b)| Expr::binary(op, a, b)),
        ]
    })
}

fn same_value(a: &Expr, b: &Expr, point: (f64, &[f64], &[f64])) -> bool {
    let (t, x, u) = point;
    match (a.eval(t, x, u), b.eval(t, x, u)) {
        (Ok(p), Ok(q)) => p == q || (p - q).abs() <= 1e-12 * p.abs().max(1.0),
        (Err(_), Err(_)) => true,
        _ => false,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn printing_reaches_a_fixed_point(e in expr_strategy()) {
        let printed = e.to_string();
        let reparsed = parse_expression(&printed, DIMS).unwrap();
        prop_assert_eq!(reparsed.to_string(), printed.clone());
        let again = parse_expression(&reparsed.to_string(), DIMS).unwrap();
        prop_assert_eq!(again, reparsed);
    }

    #[test]
    fn printing_preserves_meaning(e in expr_strategy(), t in -1.0f64..1.0, x1 in -2.0f64..2.0, x2 in -2.0f64..2.0, u in -2.0f64..2.0) {
        let reparsed = parse_expression(&e.to_string(), DIMS).unwrap();
        prop_assert!(same_value(&e, &reparsed, (t, &[x1, x2], &[u])), "{}", e);
    }

    #[test]
    fn whitespace_is_ignored(e in expr_strategy()) {
        let printed = e.to_string();
        // spaces inside a number or a name would split the token
        let padded: String = printed
            .chars()
            .flat_map(|c| if "+-*/^(),".contains(c) { vec![' ', c, ' '] } else { vec![c] })
            .collect();
        prop_assert_eq!(parse_expression(&padded, DIMS).unwrap().to_string(), printed);
    }
}

#[test]
fn dual_numbers_agree_with_central_differences() {
    let (worst, corpus) = common::dual_vs_central_difference(50, 2024);
    assert_eq!(corpus.len(), 50);
    assert!(worst <= 1e-6, "worst relative disagreement {worst:e}");
}

#[test]
fn right_associative_powers_and_unary_minus() {
    let d = Dims::state(1);
    assert_eq!(
        parse_expression("2^3^2", d).unwrap().eval(0.0, &[0.0], &[]).unwrap(),
        512.0
    );
    assert_eq!(
        parse_expression("-2^2", d).unwrap().eval(0.0, &[0.0], &[]).unwrap(),
        -4.0
    );
    assert_eq!(
        parse_expression("2^-1", d).unwrap().eval(0.0, &[0.0], &[]).unwrap(),
        0.5
    );
    assert_eq!(
        parse_expression("8/4/2", d).unwrap().eval(0.0, &[0.0], &[]).unwrap(),
        1.0
    );
    assert_eq!(
        parse_expression("1 - 2 - 3", d)
            .unwrap()
            .eval(0.0, &[0.0], &[])
            .unwrap(),
        -4.0
    );
}
