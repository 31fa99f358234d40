use approx::assert_relative_eq;
use proptest::prelude::*;

use fracvx_core::analysis::manufactured_forward;
use fracvx_core::exponent::power_term;
use fracvx_core::operators::eval_forward_grid;
use fracvx_core::{eval_forward, graded_mesh, parse_expr, Family, OperatorSpec, VariableExponent};

fn alpha() -> VariableExponent {
    VariableExponent::new(parse_expr("0.6 - 0.1*t").unwrap(), 1.0).unwrap()
}

// Reference integrals of g = 1 + t at t = 1, computed with mpmath adaptive quadrature.
#[test]
fn forward_values_match_reference_quadrature() {
    let g = parse_expr("1 + t").unwrap();
    let cases = [
        (Family::AbelLeft, 0.0, 3.407_279_964_306_426),
        (Family::AbelRight, 0.0, 10.0 / 3.0),
        (Family::RLLeft, 0.0, 1.939_208_610_429_105),
        (Family::TemperedLeft, 2.0, 1.234_224_251_115_104_7),
    ];
    for (family, sigma, want) in cases {
        let spec = if family.is_tempered() {
            OperatorSpec::tempered(family, alpha(), sigma).unwrap()
        } else {
            OperatorSpec::new(family, alpha()).unwrap()
        };
        let got = eval_forward(&spec, &g, 1.0, 1e-12).unwrap();
        assert_relative_eq!(got, want, max_relative = 1e-10);
    }
}

#[test]
fn manufactured_data_is_refinement_stable() {
    let e = alpha();
    let mesh = graded_mesh(1.0, 16, 2.0).unwrap();
    let u = parse_expr("1 + t").unwrap();
    let f = manufactured_forward(&e, &u, Family::AbelLeft, mesh.nodes()).unwrap();
    let spec = OperatorSpec::new(Family::AbelLeft, e).unwrap();
    for (&t, &v) in mesh.nodes().iter().zip(&f) {
        let tight = eval_forward(&spec, &u, t, 1e-14).unwrap();
        assert!((v - tight).abs() <= 1e-10, "t = {t}: {v} vs {tight}");
    }
}

#[test]
fn grid_evaluation_converges_to_pointwise() {
    let spec = OperatorSpec::new(Family::AbelLeft, alpha()).unwrap();
    let g = parse_expr("1 + t").unwrap();
    let want = eval_forward(&spec, &g, 1.0, 1e-13).unwrap();
    let errs: Vec<f64> = [32, 64, 128]
        .iter()
        .map(|&n| {
            let m = graded_mesh(1.0, n, 1.0).unwrap();
            let gv: Vec<f64> = m.nodes().iter().map(|t| 1.0 + t).collect();
            (eval_forward_grid(&spec, &m, &gv).unwrap()[n] - want).abs()
        })
        .collect();
    assert!(errs[1] < errs[0] && errs[2] < errs[1], "{errs:?}");
}

#[test]
fn family_guards() {
    let e = alpha();
    assert!(OperatorSpec::tempered(Family::AbelLeft, e.clone(), 1.0).is_err());
    assert!(OperatorSpec::new(Family::RLGeneral, e).is_err());
    assert!("abel-sideways".parse::<Family>().is_err());
    for f in Family::ALL {
        assert_eq!(f.name().parse::<Family>().unwrap(), f);
    }
}

proptest! {
    #[test]
    fn power_term_is_bounded_and_inverts(s in 0.0f64..1.0, gap in 1e-9f64..1.0) {
        let e = alpha();
        let t = (s + gap).min(1.0);
        prop_assume!(s < t);
        let p = power_term(&e, s, t).unwrap();
        prop_assert!(p > 0.0 && p.is_finite());
        let swapped = (t - s).powf(e.value(s).unwrap() - e.value(t).unwrap());
        prop_assert!((p * swapped - 1.0).abs() <= 1e-13);
    }

    #[test]
    fn forward_operators_are_linear(a in -3.0f64..3.0, b in -3.0f64..3.0, t in 0.05f64..1.0) {
        let spec = OperatorSpec::new(Family::RLLeft, alpha()).unwrap();
        let f = parse_expr("cos(t)").unwrap();
        let g = parse_expr("t^2").unwrap();
        let combo = parse_expr(&format!("({a})*cos(t) + ({b})*t^2")).unwrap();
        let lhs = eval_forward(&spec, &combo, t, 1e-13).unwrap();
        let rhs = a * eval_forward(&spec, &f, t, 1e-13).unwrap() + b * eval_forward(&spec, &g, t, 1e-13).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + rhs.abs()));
    }
}
