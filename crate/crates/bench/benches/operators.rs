use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use dvchain_bench::{random_matrix, random_set, rng};
use dvchain_core::consts::MU_SUN;
use dvchain_core::dvmatrix::{concat_min, direct_concat, wait_adjust};
use dvchain_core::ephemeris::StateVector;
use dvchain_core::graphsearch::{build_sequence_dfa, build_time_expanded_graph, shortest_path_product, DfaVariant, TimeHorizon};
use dvchain_core::lambert::{rendezvous_dv, solve_lambert, RevBranch, Way};
use dvchain_core::sequence::dfs_best_sequences;
use dvchain_core::SearchConfig;
use nalgebra::Vector3;

fn operators(c: &mut Criterion) {
    let mut group = c.benchmark_group("matrix");
    for (d, h) in [(25, 250), (50, 500)] {
        let mut r = rng(1);
        let a = wait_adjust(&random_matrix(&mut r, d, h, 0.1, "A", "B")).unwrap();
        let b = wait_adjust(&random_matrix(&mut r, d, h, 0.1, "B", "C")).unwrap();
        let label = format!("{d}x{h}");
        group.bench_with_input(BenchmarkId::new("wait_adjust", &label), &a, |bn, m| {
            bn.iter(|| wait_adjust(black_box(m)).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("direct_concat", &label), &(&a, &b), |bn, (x, y)| {
            bn.iter(|| direct_concat(black_box(x), black_box(y)).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("concat_min", &label), &(&a, &b), |bn, (x, y)| {
            bn.iter(|| concat_min(black_box(x), black_box(y)).unwrap())
        });
    }
    group.finish();
}

fn lambert(c: &mut Criterion) {
    let r1 = Vector3::new(1.0, 0.1, 0.0);
    let r2 = Vector3::new(-1.5, 1.2, 0.1);
    c.bench_function("lambert/zero_rev", |b| {
        b.iter(|| solve_lambert(black_box(&r1), black_box(&r2), 400.0, MU_SUN, 0, Way::Short, RevBranch::Left).unwrap())
    });
    c.bench_function("lambert/one_rev", |b| {
        b.iter(|| solve_lambert(black_box(&r1), black_box(&r2), 1200.0, MU_SUN, 1, Way::Short, RevBranch::Right))
    });
    let dep = StateVector {
        r: r1,
        v: Vector3::new(-0.002, 0.0172, 0.0),
        epoch: 0.0,
    };
    let arr = StateVector {
        r: r2,
        v: Vector3::new(-0.007, -0.009, 0.0),
        epoch: 400.0,
    };
    c.bench_function("lambert/rendezvous_dv", |b| {
        b.iter(|| rendezvous_dv(black_box(&dep), black_box(&arr), 400.0, MU_SUN, 0))
    });
}

fn search(c: &mut Criterion) {
    let mut r = rng(2);
    let set = random_set(&mut r, 8, 12, 60);
    let cfg = SearchConfig::new(4, 0.0, 5);
    c.bench_function("search/dfs_8_objects_n4", |b| b.iter(|| dfs_best_sequences(black_box(&set), &cfg).unwrap()));
    let small = random_set(&mut r, 6, 8, 20);
    c.bench_function("search/power_set_6_objects_n3", |b| {
        b.iter(|| {
            let g = build_time_expanded_graph(&small, &[] as &[&str], TimeHorizon::MatchConcatenation).unwrap();
            let dfa = build_sequence_dfa(g.ids(), 3, DfaVariant::PowerSet).unwrap();
            shortest_path_product(&g, &dfa)
        })
    });
}

criterion_group!(benches, operators, lambert, search);
criterion_main!(benches);
