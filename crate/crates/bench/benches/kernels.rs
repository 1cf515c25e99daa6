use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use gibbslab_core::boundary::{measure_arc, shadow_arc};
use gibbslab_core::flow::{decay_slope, sample_liouville};
use gibbslab_core::gibbs::{annulus_sums, estimate_critical_exponent, MeasureParams, PattersonMeasure};
use gibbslab_core::group::{build_octagon, enumerate_orbit, EnumerationOptions};
use gibbslab_core::hyperbolic::{busemann, dist, dx_distance, shadow_angle};
use gibbslab_core::potential::{fill_potential_integrals, Potential};
use gibbslab_core::{BoundaryPoint, DiskPoint, OrbitTable};

const PRUNE_MARGIN: f64 = 2.5;

fn octagon_table(radius: f64) -> OrbitTable {
    enumerate_orbit(
        &build_octagon(),
        DiskPoint::ORIGIN,
        DiskPoint::ORIGIN,
        radius,
        EnumerationOptions {
            prune_margin: PRUNE_MARGIN,
            ..Default::default()
        },
    )
    .expect("enumeration")
}

fn geometry(c: &mut Criterion) {
    let p = DiskPoint::new(0.3, -0.4).unwrap();
    let q = DiskPoint::new(-0.7, 0.2).unwrap();
    let xi = BoundaryPoint::new(1.3);
    c.bench_function("dist", |b| b.iter(|| dist(black_box(p), black_box(q))));
    c.bench_function("busemann", |b| b.iter(|| busemann(black_box(xi), black_box(p), black_box(q))));
    c.bench_function("shadow_angle_round_trip", |b| {
        b.iter(|| dx_distance(shadow_angle(black_box(7.5)).unwrap()).unwrap())
    });
}

fn enumeration(c: &mut Criterion) {
    let group = build_octagon();
    let mut g = c.benchmark_group("enumerate_orbit");
    g.sample_size(10);
    for radius in [8.0, 10.0] {
        g.bench_function(format!("octagon_r{radius}"), |b| {
            b.iter(|| {
                enumerate_orbit(
                    &group,
                    DiskPoint::ORIGIN,
                    DiskPoint::ORIGIN,
                    black_box(radius),
                    EnumerationOptions {
                        prune_margin: PRUNE_MARGIN,
                        ..Default::default()
                    },
                )
                .unwrap()
            })
        });
    }
    g.finish();
}

fn quadrature(c: &mut Criterion) {
    let group = build_octagon();
    let bump = Potential::bump(&group, 0.8, 0.3 * group.systole(), DiskPoint::ORIGIN).unwrap();
    let v = sample_liouville(&group, 1, 1).unwrap()[0];
    c.bench_function("bump_flow_integral_len20", |b| {
        b.iter(|| bump.flow_integral(black_box(&v), 20.0, 0.01).unwrap())
    });
    let table = octagon_table(8.0);
    let mut g = c.benchmark_group("fill_potential_integrals");
    g.sample_size(10);
    g.bench_function("octagon_r8", |b| {
        b.iter_batched(
            || table.clone(),
            |mut t| fill_potential_integrals(&mut t, &bump, 0.01).unwrap(),
            BatchSize::LargeInput,
        )
    });
    g.finish();
}

fn measures(c: &mut Criterion) {
    let group = build_octagon();
    let table = octagon_table(10.0);
    let zero = Potential::constant(0.0);
    let delta = estimate_critical_exponent(&annulus_sums(&table, &zero).unwrap(), (4, 7))
        .unwrap()
        .delta;
    let params = MeasureParams::new(delta, 0.05).with_shell(3.0);
    c.bench_function("patterson_build_r10", |b| {
        b.iter(|| PattersonMeasure::build(black_box(&table), &zero, params).unwrap())
    });
    let m = PattersonMeasure::build(&table, &zero, params).unwrap();
    let v = sample_liouville(&group, 2, 1).unwrap()[0];
    let arc = shadow_arc(DiskPoint::ORIGIN, 4.0, v.forward_endpoint()).unwrap();
    c.bench_function("measure_arc", |b| b.iter(|| measure_arc(black_box(&m), black_box(&arc))));
    let grid = [2.0, 3.0, 4.0, 5.0, 6.0];
    c.bench_function("decay_slope", |b| b.iter(|| decay_slope(black_box(&m), black_box(&v), &grid).unwrap()));
}

criterion_group!(kernels, geometry, enumeration, quadrature, measures);
criterion_main!(kernels);
