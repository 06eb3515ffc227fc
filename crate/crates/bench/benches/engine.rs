//! Hot paths: binomial identity grids, the straightening build of the
//! truncated Virasoro ring, and a Jacobi identity sweep.

use criterion::{criterion_group, criterion_main, Criterion};
use num_bigint::BigInt;
use std::hint::black_box;
use vrx_core::basering::RingDescriptor;
use vrx_core::exactnum::check_binomial_identities;
use vrx_core::vertexcore::checks::{check_jacobi, GridConfig};
use vrx_core::virasoro::{build, VirasoroParams};

fn bench_binomial_identities(c: &mut Criterion) {
    c.bench_function("binomial_identities_range_12", |b| {
        b.iter(|| {
            let reports = check_binomial_identities(black_box(12), 12, 12);
            assert!(reports.iter().all(|r| r.pass));
        })
    });
}

fn bench_virasoro_build(c: &mut Criterion) {
    let mut group = c.benchmark_group("virasoro");
    group.sample_size(10);
    group.bench_function("build_n8", |b| {
        b.iter(|| {
            let built = build(&VirasoroParams {
                base: RingDescriptor::Integers,
                cprime: BigInt::from(1),
                lift: None,
                max_weight: black_box(8),
            });
            assert_eq!(built.instance.labels.len(), 22);
        })
    });
    group.finish();
}

fn bench_jacobi_grid(c: &mut Criterion) {
    let built = build(&VirasoroParams {
        base: RingDescriptor::Integers,
        cprime: BigInt::from(1),
        lift: None,
        max_weight: 6,
    });
    let cfg = GridConfig::default_for(&built.instance)
        .with_max_weight(4)
        .with_modes(-2, 2);
    let mut group = c.benchmark_group("jacobi");
    group.sample_size(10);
    group.bench_function("grid_w4_m2", |b| {
        b.iter(|| {
            let rep = check_jacobi(&built.instance, &cfg);
            assert!(rep.ok());
        })
    });
    group.finish();
}

criterion_group!(
    benches,
    bench_binomial_identities,
    bench_virasoro_build,
    bench_jacobi_grid
);
criterion_main!(benches);
