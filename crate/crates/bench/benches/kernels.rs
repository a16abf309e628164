use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use blaschke::bodies::{polar_volume, volume};
use blaschke::convex_analysis::legendre;
use blaschke::inequalities::{check_functional, CheckId, FunctionalOptions};
use blaschke::logconcave::{AsplundEndo, LogConcaveFn};
use blaschke::sphere::build_quadrature;
use blaschke::MinkowskiEndo;
use blaschke_bench::{kinked_quadratic, polytope, quadrature};

fn sphere(c: &mut Criterion) {
    c.bench_function("quadrature n=3 res=64", |b| b.iter(|| build_quadrature(3, black_box(64)).unwrap()));
}

fn bodies(c: &mut Criterion) {
    let q = quadrature(3, 64);
    let k = polytope(1);
    c.bench_function("volume polytope", |b| b.iter(|| volume(black_box(&k), &q).unwrap()));
    c.bench_function("polar volume polytope res=64", |b| b.iter(|| polar_volume(black_box(&k), &q).unwrap()));
    for phi in [MinkowskiEndo::delta(3).unwrap(), MinkowskiEndo::sigma(3).unwrap(), MinkowskiEndo::pi1(3).unwrap()] {
        c.bench_function(&format!("polar endo volume {} res=64", phi.label()), |b| {
            b.iter(|| phi.polar_endo_volume(black_box(&k), &q).unwrap())
        });
    }
    let coarse = quadrature(3, 16);
    let pi1 = MinkowskiEndo::pi1(3).unwrap();
    c.bench_function("pi1 by convolution res=16", |b| b.iter(|| pi1.apply(black_box(&k), &coarse).unwrap()));
}

fn conjugates(c: &mut Criterion) {
    let one = kinked_quadratic(1, 4097);
    let two = kinked_quadratic(2, 129);
    c.bench_function("legendre 1-D 4097", |b| b.iter(|| legendre(black_box(&one)).unwrap()));
    c.bench_function("legendre 2-D 129^2", |b| b.iter(|| legendre(black_box(&two)).unwrap()));
}

fn functional(c: &mut Criterion) {
    let mut group = c.benchmark_group("functional");
    group.sample_size(10);
    let f = LogConcaveFn::standard_gaussian(2).unwrap();
    let mu = AsplundEndo::delta(2).unwrap();
    group.bench_function("thm4 gaussian nu", |b| {
        b.iter(|| check_functional(CheckId::THM4, black_box(&f), Some(&mu), FunctionalOptions::default()).unwrap())
    });
    group.finish();
}

criterion_group!(benches, sphere, bodies, conjugates, functional);
criterion_main!(benches);
