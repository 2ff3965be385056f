use criterion::{criterion_group, criterion_main, Criterion};
use num_complex::Complex64;
use std::hint::black_box;

use locham_core::asymptotics::window_derivative;
use locham_core::distributions::{sector_dist, sector_dist_direct};
use locham_core::sector::{branch_power_integral, return_profile};
use locham_core::special::beta_like_rat;
use locham_core::{ComplexJet, QuadSpec, Rational64, SaddleModel};

fn random_jet(order: usize, seed: u64) -> ComplexJet {
    let mut state = seed.wrapping_add(0x9e3779b97f4a7c15);
    let mut next = || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        (state >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
    };
    let mut jet = ComplexJet::zero(order);
    for t in 0..=order {
        for i in 0..=t {
            jet.set(i, t - i, Complex64::new(next(), next())).unwrap();
        }
    }
    jet
}

fn bench_beta(c: &mut Criterion) {
    c.bench_function("beta_like_rat 2/3 2/3", |b| {
        b.iter(|| {
            beta_like_rat(
                black_box(Rational64::new(2, 3)),
                black_box(Rational64::new(2, 3)),
            )
        })
    });
}

fn bench_distributions(c: &mut Criterion) {
    let jet = random_jet(10, 7);
    c.bench_function("sector_dist m=4 k=8", |b| {
        b.iter(|| sector_dist(black_box(&jet), 4, 8, 3).unwrap())
    });
    c.bench_function("sector_dist_direct m=4 k=8", |b| {
        b.iter(|| sector_dist_direct(black_box(&jet), 4, 8, 3).unwrap())
    });
}

fn bench_quadrature(c: &mut Criterion) {
    let spec = QuadSpec::default();
    c.bench_function("branch_power_integral s=1e-4", |b| {
        b.iter(|| branch_power_integral(3, 1, 2, 2, 1.0, black_box(1e-4), &spec).unwrap())
    });
    let jet = random_jet(4, 11);
    c.bench_function("return_profile s=1e-3", |b| {
        b.iter(|| return_profile(black_box(&jet), 2, 0, 1e-3, &spec).unwrap())
    });
}

fn bench_window_derivative(c: &mut Criterion) {
    let jet = random_jet(4, 3);
    let spec = QuadSpec::default();
    c.bench_function("window_derivative D2 of profile", |b| {
        b.iter(|| {
            let mut phi =
                |t: f64| locham_core::sector::partial_return_integral(&jet, 2, 0, 1.0, t, &spec);
            window_derivative(&mut phi, 1e-3, 2e-3, 2).unwrap()
        })
    });
}

fn bench_transit(c: &mut Criterion) {
    let saddle = SaddleModel::flat(2, 4);
    let one = ComplexJet::constant(Complex64::new(1.0, 0.0), 4);
    c.bench_function("transit m=2 s=0.1", |b| {
        b.iter(|| {
            locham_core::flow::transit(&saddle, 0, black_box(0.1), &one, 1e-10, false).unwrap()
        })
    });
}

criterion_group!(
    benches,
    bench_beta,
    bench_distributions,
    bench_quadrature,
    bench_window_derivative,
    bench_transit
);
criterion_main!(benches);
