use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use randhankel::asympt::{kernel_c, ldp_rate};
use randhankel::hankelproc::{exact_cumulant, sample_path, ProcessParams};
use randhankel::jacobi::{sample_jbe, sample_subblock_dets_fast, JBEParams};
use randhankel::momentspace::{canonical_to_moments, hankel_log_det_product, moments_to_canonical, random_interior_canonical};
use randhankel::rng::stream;
use randhankel::specfun::{log_gamma, polygamma};

fn special(c: &mut Criterion) {
    c.bench_function("log_gamma(7.3)", |b| b.iter(|| log_gamma(black_box(7.3))));
    c.bench_function("polygamma(3, 2.5)", |b| b.iter(|| polygamma(3, black_box(2.5))));
}

fn process(c: &mut Criterion) {
    let params = ProcessParams::new(200, 20, vec![(0.5, 1.0), (1.0, 0.5), (1.0, 1.0)]).unwrap();
    c.bench_function("exact_cumulant m=2 n=200 p=20", |b| b.iter(|| exact_cumulant(2, &params, 1.0, 1.0)));
    let mut rep = 0;
    c.bench_function("sample_path n=200 p=20, 3 grid points", |b| {
        b.iter(|| {
            rep += 1;
            sample_path(&params, 1, rep)
        })
    });
}

fn ensembles(c: &mut Criterion) {
    let jp = JBEParams::new(3, 4.0, 4.0).unwrap();
    let mut rng = stream(5, 0);
    c.bench_function("JβE_3(4,4) direct", |b| b.iter(|| sample_jbe(&mut rng, jp)));
    c.bench_function("JβE_3(4,4) subblock dets, beta path", |b| b.iter(|| sample_subblock_dets_fast(&mut rng, jp)));
}

fn moments(c: &mut Criterion) {
    let canon = random_interior_canonical(&mut stream(6, 0), 3, 10);
    let m = canonical_to_moments(&canon).unwrap();
    c.bench_function("canonical_to_moments p=3 len=10", |b| b.iter(|| canonical_to_moments(black_box(&canon))));
    c.bench_function("moments_to_canonical p=3 len=10", |b| b.iter(|| moments_to_canonical(black_box(&m))));
    c.bench_function("hankel_log_det_product p=3 n=5", |b| b.iter(|| hankel_log_det_product(black_box(&canon), 5)));
}

fn limits(c: &mut Criterion) {
    c.bench_function("kernel_c", |b| b.iter(|| kernel_c(black_box(0.3), black_box(0.7))));
    c.bench_function("ldp_rate t=0.7", |b| b.iter(|| ldp_rate(black_box(-0.4), 1.0, 0.7)));
}

criterion_group!(benches, special, process, ensembles, moments, limits);
criterion_main!(benches);
