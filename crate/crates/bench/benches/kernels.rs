use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use mafair_core::dual::multistart_patterns;
use mafair_core::ssmt::order_patterns;
use mafair_core::{allocate_time, rate_vector, reference_scenario, sca_iterate, SolverConfig};

fn rates(c: &mut Criterion) {
    let s = reference_scenario();
    let p = &multistart_patterns(s.geometry(), 1, 7)[0];
    c.bench_function("rate_vector/reference", |b| {
        b.iter(|| rate_vector(&s, black_box(p)).unwrap())
    });
}

fn sca(c: &mut Criterion) {
    let s = reference_scenario();
    let cfg = SolverConfig::default();
    let start = &multistart_patterns(s.geometry(), 1, 7)[0];
    let mu = [0.229, 0.151, 0.620];
    c.bench_function("sca_iterate/reference", |b| {
        b.iter(|| sca_iterate(&s, black_box(&mu), start, &cfg).unwrap())
    });
}

fn visiting_order(c: &mut Criterion) {
    let s = reference_scenario();
    let mut group = c.benchmark_group("order_patterns");
    for gamma in [4usize, 8, 12] {
        let patterns = multistart_patterns(s.geometry(), gamma, 11);
        group.bench_with_input(BenchmarkId::from_parameter(gamma), &patterns, |b, ps| {
            b.iter(|| order_patterns(black_box(ps), 1.0).unwrap())
        });
    }
    group.finish();
}

fn time_sharing(c: &mut Criterion) {
    let s = reference_scenario();
    let mut group = c.benchmark_group("allocate_time");
    for gamma in [3usize, 10, 30] {
        let matrix: Vec<Vec<f64>> = multistart_patterns(s.geometry(), gamma, 13)
            .iter()
            .map(|p| rate_vector(&s, p).unwrap().rates)
            .collect();
        let zero = vec![0.0; s.num_users()];
        group.bench_with_input(BenchmarkId::from_parameter(gamma), &matrix, |b, m| {
            b.iter(|| allocate_time(black_box(m), 100.0, &zero, 100.0).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, rates, sca, visiting_order, time_sharing);
criterion_main!(benches);
