use criterion::{criterion_group, criterion_main, Criterion};
use num_complex::Complex64;

use hyperzeros::dynamics::{propagate, HeatBath};
use hyperzeros::exact::{
    brute_force_partition_poly, factorized_partition_poly, single_edge_closed_form,
};
use hyperzeros::interpolate::cluster_series;
use hyperzeros::model::coloring_to_atomic_csp;
use hyperzeros::zerofree::find_roots;
use hyperzeros::{ComplexMeasure, ProjectionScheme};
use hyperzeros_bench::{counts, tiny};

fn partition(c: &mut Criterion) {
    let t = tiny("three-cycle");
    let csp = t.csp();
    let sp = ProjectionScheme::identity(csp.domains(), Some(0));
    c.bench_function("partition/factorized three-cycle", |b| {
        b.iter(|| factorized_partition_poly(&csp, &sp).unwrap())
    });
    c.bench_function("partition/brute three-cycle", |b| {
        b.iter(|| brute_force_partition_poly(&csp, &sp).unwrap())
    });
}

fn roots(c: &mut Criterion) {
    let edge = single_edge_closed_form(50, 700).unwrap();
    let mut g = c.benchmark_group("roots");
    g.sample_size(10);
    g.bench_function("k50 q700 edge", |b| {
        b.iter(|| find_roots(&edge, 256).unwrap())
    });
    g.bench_function("k50 q700 edge squared", |b| {
        b.iter(|| find_roots(&edge.pow(2), 256).unwrap())
    });
    g.finish();
}

fn glauber(c: &mut Criterion) {
    let t = tiny("two-edges-share-2");
    let hb = HeatBath::new(&counts(&t), Complex64::new(1.0, 1e-4)).unwrap();
    let start = ComplexMeasure::point_mass(&hb.counts().radix, hb.first_feasible().unwrap());
    c.bench_function("glauber/10 sweeps", |b| {
        b.iter(|| propagate(&start, &hb, 10).unwrap())
    });
}

fn fisher(c: &mut Criterion) {
    let t = tiny("two-edges-share-2");
    let csp = coloring_to_atomic_csp(&t.h, t.q).unwrap();
    let mut g = c.benchmark_group("fisher");
    g.sample_size(10);
    g.bench_function("cluster series order 6", |b| {
        b.iter(|| cluster_series(&csp, 6).unwrap())
    });
    g.finish();
}

criterion_group!(benches, partition, roots, glauber, fisher);
criterion_main!(benches);
