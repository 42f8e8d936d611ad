use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use sktlab::feasibility::{self, Mode, SolverConfig};
use sktlab::hermitian as h;
use sktlab::{flow, FlowConfig};
use sktlab_bench::{example8, kt, ladder};

fn pointwise(c: &mut Criterion) {
    let mut group = c.benchmark_group("pointwise");
    for case in ladder() {
        let d = case.lie.dim();
        group.bench_with_input(BenchmarkId::new("torsion", d), &case, |b, k| {
            b.iter(|| h::bismut_torsion(&k.lie, &k.j, &k.g).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("pluriclosed", d), &case, |b, k| {
            b.iter(|| h::pluriclosed_residual(&k.lie, &k.j, &k.g).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("bismut", d), &case, |b, k| {
            b.iter(|| h::bismut_connection(&k.lie, &k.j, &k.g).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("skl_residuals", d), &case, |b, k| {
            b.iter(|| h::skl_residuals(&k.lie, &k.j, &k.g).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("normal_form", d), &case, |b, k| {
            b.iter(|| h::skl_normal_form(&k.lie, &k.j, &k.g).unwrap())
        });
    }
    group.finish();
}

fn flow_kt(c: &mut Criterion) {
    let k = kt();
    let cfg = FlowConfig { t_end: 0.5, dt: 1e-3, skl_diagnostics: false, ..FlowConfig::default() };
    c.bench_function("flow/kt_500_steps", |b| b.iter(|| flow::integrate(&k.lie, &k.j, &k.g, &cfg).unwrap()));
}

fn feasibility(c: &mut Criterion) {
    let mut group = c.benchmark_group("feasibility");
    group.sample_size(20);
    let cfg = SolverConfig::default();
    let e8 = example8();
    group.bench_function("example8_build", |b| {
        b.iter(|| feasibility::build_constraints(&e8.lie, &e8.j, Mode::Pluriclosed).unwrap())
    });
    let problem = feasibility::build_constraints(&e8.lie, &e8.j, Mode::Pluriclosed).unwrap();
    group.bench_function("example8_solve", |b| b.iter(|| feasibility::solve(&problem, &cfg)));
    group.bench_function("example8_decide", |b| {
        b.iter(|| feasibility::decide(&e8.lie, &e8.j, Mode::Pluriclosed, &cfg).unwrap())
    });
    group.finish();
}

criterion_group!(benches, pointwise, flow_kt, feasibility);
criterion_main!(benches);
