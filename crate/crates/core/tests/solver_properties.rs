use proptest::prelude::*;

use fracvx_core::{graded_mesh, parse_expr, solve_abel, solve_fde, AbelProblem, FdeProblem, VariableExponent};

fn exponent(src: &str) -> VariableExponent {
    VariableExponent::new(parse_expr(src).unwrap(), 1.0).unwrap()
}

fn last(u: &[f64]) -> f64 {
    *u.last().unwrap()
}

#[test]
fn abel_self_convergence() {
    let p = AbelProblem::new(exponent("0.6 - 0.1*t"), parse_expr("t + t^2").unwrap()).unwrap();
    let at_end: Vec<f64> = [64, 128, 256, 512]
        .iter()
        .map(|&n| last(&solve_abel(&p, &graded_mesh(1.0, n, 4.0).unwrap()).unwrap().u))
        .collect();
    let d: Vec<f64> = at_end.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    assert!(d[0] / d[1] >= 1.5 && d[1] / d[2] >= 1.5, "{d:?}");
}

#[test]
fn fde_self_convergence() {
    let p = FdeProblem::new(exponent("1 - t/2"), parse_expr("1 + t").unwrap(), 1.0).unwrap();
    let at_end: Vec<f64> = [64, 128, 256, 512]
        .iter()
        .map(|&n| last(&solve_fde(&p, &graded_mesh(1.0, n, 2.0).unwrap()).unwrap().u))
        .collect();
    let d: Vec<f64> = at_end.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    assert!(d[0] / d[1] >= 1.5 && d[1] / d[2] >= 1.5, "{d:?}");
}

#[test]
fn constant_exponent_abel_closed_form() {
    // ∫_0^t u(s)(t−s)^{-1/2} ds = 4/3 t^{3/2} has solution u = t
    let p = AbelProblem::new(exponent("0.5"), parse_expr("4/3*t^1.5").unwrap()).unwrap();
    let sol = solve_abel(&p, &graded_mesh(1.0, 128, 4.0).unwrap()).unwrap();
    assert!(sol.max_error(|t| t) < 1e-3, "{}", sol.max_error(|t| t));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn abel_solution_is_linear_in_data(a in -2.0f64..2.0, b in -2.0f64..2.0) {
        let e = exponent("0.5 + 0.2*t");
        let mesh = graded_mesh(1.0, 32, 4.0).unwrap();
        let solve = |src: &str| solve_abel(&AbelProblem::new(e.clone(), parse_expr(src).unwrap()).unwrap(), &mesh).unwrap().u;
        let u1 = solve("t");
        let u2 = solve("t^2");
        let uc = solve(&format!("({a})*t + ({b})*t^2"));
        for i in 1..uc.len() {
            let want = a * u1[i] + b * u2[i];
            prop_assert!((uc[i] - want).abs() <= 1e-9 * (1.0 + want.abs()), "node {}: {} vs {}", i, uc[i], want);
        }
    }

    #[test]
    fn fde_solution_is_linear_in_data(a in -2.0f64..2.0, c in -2.0f64..2.0) {
        let e = exponent("1 - t^2/2");
        let mesh = graded_mesh(1.0, 32, 2.0).unwrap();
        let solve = |h: &str, u0: f64| solve_fde(&FdeProblem::new(e.clone(), parse_expr(h).unwrap(), u0).unwrap(), &mesh).unwrap().u;
        let uh = solve("cos(t)", 0.0);
        let u0 = solve("0", 1.0);
        let uc = solve(&format!("({a})*cos(t)"), c);
        for i in 0..uc.len() {
            let want = a * uh[i] + c * u0[i];
            prop_assert!((uc[i] - want).abs() <= 1e-9 * (1.0 + want.abs()), "node {}: {} vs {}", i, uc[i], want);
        }
    }
}
