use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use fracvx_core::kernels::DEFAULT_Z_TOL;
use fracvx_core::{eval_forward, kernel_k, kernel_l, kernel_rl, parse_expr, rhs_abel, Family, OperatorSpec, VariableExponent};

fn exponent(src: &str) -> VariableExponent {
    VariableExponent::new(parse_expr(src).unwrap(), 1.0).unwrap()
}

fn kernels(c: &mut Criterion) {
    let k = exponent("0.6 - 0.1*t");
    let l = exponent("0.5 + 0.2*t");
    let rl = VariableExponent::for_riemann_liouville(parse_expr("1 - t^2/2").unwrap(), 1.0).unwrap();
    c.bench_function("kernel_k", |b| b.iter(|| kernel_k(&k, black_box(0.2), black_box(0.7)).unwrap()));
    c.bench_function("kernel_rl", |b| b.iter(|| kernel_rl(&rl, black_box(0.2), black_box(0.7)).unwrap()));
    c.bench_function("kernel_l", |b| b.iter(|| kernel_l(&l, black_box(0.2), black_box(0.7), DEFAULT_Z_TOL).unwrap()));
}

fn transforms(c: &mut Criterion) {
    let e = exponent("0.6 - 0.1*t");
    let f = parse_expr("1 + t^2").unwrap();
    let spec = OperatorSpec::new(Family::AbelLeft, e.clone()).unwrap();
    c.bench_function("rhs_abel", |b| b.iter(|| rhs_abel(&e, &f, black_box(0.7)).unwrap()));
    c.bench_function("eval_forward abel-left", |b| b.iter(|| eval_forward(&spec, &f, black_box(0.7), 1e-12).unwrap()));
}

criterion_group!(benches, kernels, transforms);
criterion_main!(benches);
