mod common;

use chordflow::expr::{eval, parse};
use chordflow::expr::{BinOp, Expr, Func};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn hyper_dual_derivatives_match_central_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let sample = common::ad_sample(&mut rng, 200);
    for (text, err) in &sample {
        assert!(*err < 1e-6, "'{text}': relative error {err:e}");
    }
}

fn arb_expr() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![(0.0f64..1e3).prop_map(Expr::num), (1usize..4).prop_map(Expr::var),];
    leaf.prop_recursive(4, 32, 2, |inner| {
        let func = prop_oneof![
            Just(Func::Sin),
            Just(Func::Cos),
            Just(Func::Tan),
            Just(Func::Exp),
            Just(Func::Log),
            Just(Func::Sqrt),
        ];
        let op = prop_oneof![Just(BinOp::Add), Just(BinOp::Sub), Just(BinOp::Mul), Just(BinOp::Div)];
        prop_oneof![
            inner.clone().prop_map(Expr::neg),
            (func, inner.clone()).prop_map(|(f, a)| Expr::call(f, a)),
            (op, inner.clone(), inner.clone()).prop_map(|(o, a, b)| Expr::binary(o, a, b)),
            (inner, 0.0f64..4.0).prop_map(|(a, p)| Expr::pow(a, Expr::num(p))),
        ]
    })
}

proptest! {
    #[test]
    fn print_then_parse_is_identity(e in arb_expr()) {
        let printed = e.to_string();
        let back = parse(&printed).unwrap();
        prop_assert_eq!(&back, &e, "printed as '{}'", printed);
        prop_assert_eq!(back.to_string(), printed);
    }

    #[test]
    fn printed_form_evaluates_identically(e in arb_expr(), u in prop::collection::vec(0.1f64..2.0, 3)) {
        let back = parse(&e.to_string()).unwrap();
        match (eval(&e, &u), eval(&back, &u)) {
            (Ok(a), Ok(b)) => prop_assert!(a.to_bits() == b.to_bits() || (a.is_nan() && b.is_nan())),
            (Err(_), Err(_)) => {}
            (a, b) => prop_assert!(false, "{:?} vs {:?}", a, b),
        }
    }
}
