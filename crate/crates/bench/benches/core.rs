use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use dw_bench::sphere;
use dw_core::behavior::delta_min_ns_lp;
use dw_core::npa::{delta_min_quantum, NpaConfig};
use dw_core::photonics::ExperimentBox;
use dw_core::quantum::{born_behavior, make_max_violation_realization, swap_selftest};
use dw_core::snm::protocol::{abinitio_protocol, ProtocolConfig};
use dw_core::snm::{snm_minimize, SnmConfig};
use dw_core::{ExperimentModel, NpaLevel};

fn behavior(c: &mut Criterion) {
    let r = make_max_violation_realization();
    c.bench_function("born_behavior", |b| b.iter(|| born_behavior(black_box(&r))));
    c.bench_function("swap_selftest", |b| b.iter(|| swap_selftest(black_box(&r))));
    c.bench_function("delta_min_ns_lp", |b| b.iter(|| delta_min_ns_lp(black_box(2.6), black_box(0.1))));
}

fn optimizers(c: &mut Criterion) {
    let cfg = SnmConfig::new(vec![(-2.0, 2.0); 4], 350, 1);
    c.bench_function("snm_sphere_350", |b| b.iter(|| snm_minimize(sphere, black_box(&cfg))));
    let model = ExperimentModel::with_overlap(1.0, 10_000, 0).unwrap();
    c.bench_function("abinitio_protocol", |b| {
        b.iter(|| {
            let mut source = ExperimentBox::new(model.clone());
            abinitio_protocol(&mut source, 0.022, &ProtocolConfig::new(0))
        })
    });
}

fn relaxations(c: &mut Criterion) {
    let cfg = NpaConfig::default();
    let mut g = c.benchmark_group("npa");
    g.sample_size(10);
    g.bench_function("delta_level2_local_edge", |b| {
        b.iter(|| delta_min_quantum(black_box(2.0), black_box(0.1), NpaLevel::Two, &cfg))
    });
    g.finish();
}

criterion_group!(benches, behavior, optimizers, relaxations);
criterion_main!(benches);
