use proptest::prelude::*;

use fracvx_core::funclang::ScalarFunc;
use fracvx_core::{parse_expr, Error};

const CORPUS: [&str; 8] = [
    "0.6 - 0.1*t",
    "0.5 + 0.25*t",
    "1 - t^2/2",
    "0.5 + 0.2*t + 0.1*sin(3*t)",
    "exp(-t) * cos(2*t)",
    "sqrt(1 + t) / (2 + t^3)",
    "ln(2 + t) * t^0.7",
    "pow(1 + t, 1.5) - 3^-1",
];

fn central(f: &ScalarFunc, t: f64, h: f64) -> (f64, f64) {
    let (p, m, c) = (f.eval(t + h).unwrap(), f.eval(t - h).unwrap(), f.eval(t).unwrap());
    ((p - m) / (2.0 * h), (p - 2.0 * c + m) / (h * h))
}

proptest! {
    #[test]
    fn jets_match_central_differences(k in 0usize..CORPUS.len(), t in 0.05f64..0.95) {
        let f = parse_expr(CORPUS[k]).unwrap();
        let j = f.eval_jet(t).unwrap();
        let (d1, _) = central(&f, t, 1e-6);
        let (_, d2) = central(&f, t, 1e-4);
        prop_assert!((j.d1 - d1).abs() <= 1e-6 * (1.0 + j.d1.abs()), "{}: {} vs {}", CORPUS[k], j.d1, d1);
        prop_assert!((j.d2 - d2).abs() <= 1e-4 * (1.0 + j.d2.abs()), "{}: {} vs {}", CORPUS[k], j.d2, d2);
    }

    #[test]
    fn folding_preserves_values(k in 0usize..CORPUS.len(), t in 0.0f64..1.0) {
        let folded = ScalarFunc::parse(CORPUS[k]).unwrap().eval(t).unwrap();
        let raw = ScalarFunc::parse_unoptimized(CORPUS[k]).unwrap().eval(t).unwrap();
        prop_assert!((folded - raw).abs() <= 1e-15 * raw.abs().max(1e-300));
    }
}

#[test]
fn errors_carry_positions() {
    assert!(matches!(parse_expr("0.5+"), Err(Error::Syntax { pos: 4, .. })));
    assert!(matches!(parse_expr("2*x"), Err(Error::UnknownIdentifier { pos: 2, .. })));
    assert!(matches!(parse_expr("ln(t)").unwrap().eval(0.0), Err(Error::Domain(_))));
}
