use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use reline_bench::{ec_sweep_iq, hole_cloud, lab};
use reline_core::dsp::{modulus, moving_average, DEFAULT_MA_WINDOW};
use reline_core::mission::{run_pass1, MissionConfig};
use reline_core::motion::{delta_fk, delta_ik, plan_bore, DeltaGeometry, Material};
use reline_core::perception::{fit_hole, HoleFitParams};
use reline_core::world::templates;
use reline_core::MachiningDefaults;

fn dsp(c: &mut Criterion) {
    let (iq, _) = ec_sweep_iq(1);
    c.bench_function("modulus_ma15_8k_blocks", |b| {
        b.iter(|| moving_average(&modulus(black_box(&iq)).values, DEFAULT_MA_WINDOW).unwrap())
    });
}

fn perception(c: &mut Criterion) {
    let cloud = hole_cloud(3);
    let radius = lab().inner_radius_cast();
    let params = HoleFitParams::default();
    c.bench_function("fit_hole_60deg_sweep", |b| {
        b.iter(|| fit_hole(black_box(&cloud), radius, &params).unwrap())
    });
}

fn motion(c: &mut Criterion) {
    let g = DeltaGeometry::default();
    c.bench_function("delta_ik_fk", |b| {
        b.iter(|| delta_fk(&g, delta_ik(&g, black_box([3.0, -4.0, 7.5])).unwrap()).unwrap())
    });
    let d = MachiningDefaults::default();
    c.bench_function("plan_bore_cast_iron", |b| {
        b.iter(|| plan_bore(black_box(20.0), 24.4, Material::CastIron, &d).unwrap())
    });
}

fn mission(c: &mut Criterion) {
    let cfg = templates::lab8m();
    let scenario = lab();
    let config = MissionConfig::from_scenario_config(&cfg, 7);
    let mut group = c.benchmark_group("mission");
    group.sample_size(10);
    group.bench_function("pass1_lab8m", |b| {
        b.iter(|| run_pass1(black_box(&scenario), &config).unwrap())
    });
    group.finish();
}

criterion_group!(benches, dsp, perception, motion, mission);
criterion_main!(benches);
