//! Benchmarks for the hot paths: the norm solver, ellipsoid construction,
//! reducing-operator caches, weighted maximal fields, and the stopping
//! ladder.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use vlfield_core::domain::{CubeFamily, LatticeDomain};
use vlfield_core::exponent::ExponentField;
use vlfield_core::field::{ScalarField, VectorField};
use vlfield_core::linalg::Mat;
use vlfield_core::maximal::{christ_goldberg, cz_decompose};
use vlfield_core::mvee::mvee;
use vlfield_core::varnorm::luxemburg_norm;
use vlfield_core::weights::{DirectionPair, MatrixWeightField, ReducingCache};

fn rand_stream(seed: u64) -> impl FnMut() -> f64 {
    let mut state = seed | 1;
    move || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        (state >> 11) as f64 / (1u64 << 53) as f64
    }
}

fn setup(cells_pow: i32) -> (LatticeDomain, ScalarField, ExponentField) {
    let domain = LatticeDomain::build(1, 1.0, cells_pow - 1).unwrap();
    let mut rnd = rand_stream(7);
    let f = ScalarField::new(
        &domain,
        (0..domain.num_cells()).map(|_| 2.0 * rnd() - 1.0).collect(),
    )
    .unwrap();
    let p = ExponentField::from_values(
        &domain,
        (0..domain.num_cells()).map(|_| 1.4 + 4.0 * rnd()).collect(),
        2.0,
    )
    .unwrap();
    (domain, f, p)
}

fn bench_luxemburg(c: &mut Criterion) {
    let mut group = c.benchmark_group("luxemburg_norm");
    for cells_pow in [7, 10] {
        let (_, f, p) = setup(cells_pow);
        group.bench_with_input(BenchmarkId::from_parameter(1 << cells_pow), &(), |b, _| {
            b.iter(|| luxemburg_norm(black_box(&f), black_box(&p)).unwrap())
        });
    }
    group.finish();
}

fn bench_mvee(c: &mut Criterion) {
    // The degenerate dense near-circular sample, the hardest practical case.
    let m = 64;
    let pts: Vec<[f64; 3]> = (0..m)
        .map(|j| {
            let th = std::f64::consts::PI * 2.0 * j as f64 / m as f64;
            let r = 1.0 + 0.02 * (3.0 * th).sin();
            [r * th.cos(), r * th.sin(), 0.0]
        })
        .collect();
    c.bench_function("mvee_dense_circle_64", |b| b.iter(|| mvee(2, black_box(&pts)).unwrap()));
}

fn weight_2d(domain: &LatticeDomain) -> MatrixWeightField {
    MatrixWeightField::from_fn(domain, 2, |x| {
        let t = 0.8 * x[0];
        let rot = Mat::from_rows(2, &[t.cos(), -t.sin(), t.sin(), t.cos()]);
        let r = x[0].abs().max(1e-3);
        rot.mul(&Mat::diag(2, &[r.powf(0.25), r.powf(-0.125)])).mul(&rot.transpose())
    })
    .unwrap()
}

fn bench_reducing_cache(c: &mut Criterion) {
    let domain = LatticeDomain::build(1, 1.0, 4).unwrap();
    let family = CubeFamily::grid(&domain, 0).unwrap();
    let w = weight_2d(&domain);
    let p = ExponentField::two_step(&domain, 1.8, 3.0).unwrap();
    let dirs = DirectionPair::defaults(2);
    c.bench_function("reducing_cache_32cells", |b| {
        b.iter(|| ReducingCache::build(black_box(&w), &p, &family, &dirs).unwrap())
    });
}

fn bench_weighted_maximal(c: &mut Criterion) {
    let domain = LatticeDomain::build(1, 1.0, 6).unwrap();
    let family = CubeFamily::grid(&domain, 0).unwrap();
    let w = weight_2d(&domain);
    let mut rnd = rand_stream(11);
    let f = VectorField::new(
        &domain,
        2,
        (0..domain.num_cells() * 2).map(|_| 2.0 * rnd() - 1.0).collect(),
    )
    .unwrap();
    c.bench_function("weighted_maximal_128cells", |b| {
        b.iter(|| christ_goldberg(black_box(&f), &w, &family).unwrap())
    });
}

fn bench_stopping_ladder(c: &mut Criterion) {
    let domain = LatticeDomain::build(1, 1.0, 6).unwrap();
    let family = CubeFamily::grid(&domain, 0).unwrap();
    let w = weight_2d(&domain);
    let p = ExponentField::constant(&domain, 2.0).unwrap();
    let cache = ReducingCache::build(&w, &p, &family, &DirectionPair::defaults(2)).unwrap();
    let mut rnd = rand_stream(13);
    let f = VectorField::new(
        &domain,
        2,
        (0..domain.num_cells() * 2).map(|_| 2.0 * rnd() - 1.0).collect(),
    )
    .unwrap();
    c.bench_function("stopping_decomposition_128cells", |b| {
        b.iter(|| cz_decompose(black_box(&f), &w, &family, &cache, 0.25).unwrap())
    });
}

criterion_group!(
    benches,
    bench_luxemburg,
    bench_mvee,
    bench_reducing_cache,
    bench_weighted_maximal,
    bench_stopping_ladder
);
criterion_main!(benches);
