use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use fracvx_core::{graded_mesh, parse_expr, solve_abel, solve_fde, AbelProblem, FdeProblem, VariableExponent};

fn exponent(src: &str) -> VariableExponent {
    VariableExponent::new(parse_expr(src).unwrap(), 1.0).unwrap()
}

fn solvers(c: &mut Criterion) {
    let abel = AbelProblem::new(exponent("0.6 - 0.1*t"), parse_expr("1 + t").unwrap()).unwrap();
    let fde = FdeProblem::new(exponent("1 - t^2/2"), parse_expr("1 + t").unwrap(), 1.0).unwrap();
    let mut g = c.benchmark_group("solve");
    g.sample_size(10);
    for n in [64, 128, 256] {
        let m4 = graded_mesh(1.0, n, 4.0).unwrap();
        let m2 = graded_mesh(1.0, n, 2.0).unwrap();
        g.bench_with_input(BenchmarkId::new("abel", n), &m4, |b, m| b.iter(|| solve_abel(&abel, m).unwrap()));
        g.bench_with_input(BenchmarkId::new("fde", n), &m2, |b, m| b.iter(|| solve_fde(&fde, m).unwrap()));
    }
    g.finish();
}

criterion_group!(benches, solvers);
criterion_main!(benches);
