use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use flapsim_core::aero::{aero_step, AeroModel, AeroParams, AeroState};
use flapsim_core::config::Config;
use flapsim_core::control::{
    allocate_saturating, observer_step, place_observer_poles, ObserverState, PlantModel,
};
use flapsim_core::dynamics::{hover_motors, CoupledModel, GuardParams, GuardState};
use flapsim_core::kinematics::{
    forward_kinematics, sample_targets, LinkageDesign, TrackingObjective,
};
use flapsim_core::sim::{run_scenario, FourierGait, Scenario};

fn kinematics(c: &mut Criterion) {
    let d = LinkageDesign::default();
    c.bench_function("forward_kinematics", |b| {
        b.iter(|| forward_kinematics(black_box(&d), black_box(1.3)))
    });
    let targets = sample_targets(128);
    let objective = TrackingObjective::new(d, &targets);
    let x = d.to_vector();
    c.bench_function("tracking_objective_128", |b| {
        b.iter(|| objective.value(black_box(&x)))
    });
}

fn aero(c: &mut Criterion) {
    let m = AeroModel::new(&AeroParams::default()).unwrap();
    let s = AeroState::zeros(&m);
    let y1 = vec![0.3; m.geometry.strips.len()];
    c.bench_function("aero_step", |b| {
        b.iter(|| aero_step(black_box(&s), &m, black_box(&y1), 2.5e-4))
    });
}

fn dynamics(c: &mut Criterion) {
    let cfg = Config::default();
    let model = CoupledModel::new(cfg.dynamics.clone(), &cfg.aero).unwrap();
    let gait = FourierGait::from_design(&cfg.kinematics.design, 256, 16, 8.0).unwrap();
    let g = gait.sample(0.01);
    let guard = GuardState::default();
    let aerobat = model.static_equilibrium(&guard, &g).unwrap();
    let x = model.pack(&model.initial_state(guard, aerobat));
    let motors = hover_motors(&cfg.dynamics);
    let mut dx = vec![0.0; x.len()];
    c.bench_function("coupled_derivatives", |b| {
        b.iter(|| {
            model
                .derivatives(black_box(&x), 0.01, &motors, &g, &mut dx)
                .unwrap()
        })
    });
}

fn control(c: &mut Criterion) {
    let cfg = Config::default();
    let plant = PlantModel::from_params(&cfg.dynamics);
    let gains = place_observer_poles(&cfg.control.observer_poles, plant.disturbance_gain).unwrap();
    let y = nalgebra::Vector6::new(0.01, -0.02, 0.005, 0.01, 0.0, -0.01);
    let obs = ObserverState::at(y);
    let u = nalgebra::Vector4::new(3.0, 0.01, -0.01, 0.0);
    c.bench_function("observer_step", |b| {
        b.iter(|| observer_step(black_box(&obs), &y, &y, &u, &plant, &gains, 2.5e-4))
    });
    let p = GuardParams::default();
    c.bench_function("allocate_saturating", |b| {
        b.iter(|| allocate_saturating(black_box(&u), &p, 0.3))
    });
}

fn scenarios(c: &mut Criterion) {
    let mut g = c.benchmark_group("scenario");
    g.sample_size(10);
    let mut hover = Config::default();
    hover.sim.duration = 0.5;
    hover.sim.transient = 0.0;
    g.bench_function("hover_0.5s", |b| {
        b.iter(|| run_scenario(black_box(&hover)).unwrap())
    });
    let mut trace = Config::default();
    trace.sim.scenario = Scenario::WingtipTrace;
    g.bench_function("wingtip_trace", |b| {
        b.iter(|| run_scenario(black_box(&trace)).unwrap())
    });
    g.finish();
}

criterion_group!(benches, kinematics, aero, dynamics, control, scenarios);
criterion_main!(benches);
