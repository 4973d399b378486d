use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use khessian_bench::{problem, spectrum, symmetric};
use khessian_core::pde::{assemble_linearized, eval_g, sk_gradient};
use khessian_core::symfun::elem_sym;

fn symmetric_functions(c: &mut Criterion) {
    let mut group = c.benchmark_group("elem_sym");
    for n in [4, 8, 16, 64] {
        let lam = spectrum(n);
        group.bench_with_input(BenchmarkId::from_parameter(n), &lam, |b, lam| {
            b.iter(|| elem_sym(black_box(lam), n / 2).unwrap())
        });
    }
    group.finish();
}

fn minors(c: &mut Criterion) {
    let mut group = c.benchmark_group("sk_gradient");
    for (n, k) in [(3, 2), (4, 2), (4, 3)] {
        let r = symmetric(n);
        group.bench_function(format!("n{n}_k{k}"), |b| b.iter(|| sk_gradient(black_box(&r), k).unwrap()));
    }
    group.finish();
}

fn newton_step(c: &mut Criterion) {
    let (seed, f, w) = problem(17);
    let mut group = c.benchmark_group("newton_step_m17");
    group.sample_size(10);
    group.bench_function("eval_g", |b| b.iter(|| eval_g(black_box(&w), &seed, &f).unwrap()));
    group.bench_function("assemble", |b| b.iter(|| assemble_linearized(black_box(&w), &seed, &f).unwrap()));
    let sys = assemble_linearized(&w, &seed, &f).unwrap();
    group.bench_function("solve", |b| b.iter(|| sys.solve(1e-10).unwrap()));
    group.finish();
}

criterion_group!(benches, symmetric_functions, minors, newton_step);
criterion_main!(benches);
