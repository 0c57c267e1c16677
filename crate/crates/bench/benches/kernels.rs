//! Timings for the hot kernels: elliptic integrals, actions, trajectory
//! integration and the phase evaluation along a trajectory.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use superint_core::actions::{actions, angular_action_closed, angular_action_quadrature, SeparationConstants};
use superint_core::dynamics::{initial_condition, integrate, radial_period};
use superint_core::specfun::ellip_pi;
use superint_core::superconstants::{phase_along, z_closed, z_integral};
use superint_core::{
    AngularFamily, Curvature, EllipticArgs, IntegratorControl, Method, Model, PhasePath, Placement, RadialLink,
    RadialPotential,
};

fn ttw() -> (Model, SeparationConstants) {
    let fam = AngularFamily::new(0.3, -0.7, 3, 2, 0.5, RadialLink::Oscillator { gamma: 0.2 }).unwrap();
    let model = Model::with_family(Curvature::new(0.0).unwrap(), RadialPotential::oscillator(0.2, 1.0), fam).unwrap();
    (model, SeparationConstants::new(10.0, 2.5))
}

fn bench_ellip_pi(c: &mut Criterion) {
    let args: Vec<_> = (0..64)
        .map(|i| {
            let t = i as f64 / 64.0;
            EllipticArgs::new(0.1 + 1.4 * t, -2.0 + 2.8 * t, 0.95 * (1.0 - t))
        })
        .collect();
    c.bench_function("ellip_pi/64", |b| b.iter(|| args.iter().map(|&a| ellip_pi(black_box(a)).unwrap()).sum::<f64>()));
}

fn bench_actions(c: &mut Criterion) {
    let (model, consts) = ttw();
    let fam = *model.family().unwrap();
    let mut g = c.benchmark_group("actions");
    g.bench_function("angular_closed", |b| b.iter(|| angular_action_closed(&fam, black_box(2.5)).unwrap()));
    g.bench_function("angular_quadrature", |b| b.iter(|| angular_action_quadrature(&fam, black_box(2.5)).unwrap()));
    g.bench_function("both", |b| b.iter(|| actions(&model, black_box(consts)).unwrap()));
    g.bench_function("z_closed", |b| b.iter(|| z_closed(&fam, black_box(1.6), 2.5).unwrap()));
    g.bench_function("z_quadrature", |b| b.iter(|| z_integral(&fam, black_box(1.6), 2.5).unwrap()));
    g.finish();
}

fn bench_integrate(c: &mut Criterion) {
    let (model, consts) = ttw();
    let s = initial_condition(&model, consts, Placement::default()).unwrap();
    let t_r = radial_period(&model, &s).unwrap();
    let mut g = c.benchmark_group("integrate_3_periods");
    g.sample_size(20);
    for (name, method) in [("gauss6", Method::Gauss6), ("dopri5", Method::Dopri5)] {
        let ctl = IntegratorControl { method, ..IntegratorControl::default() };
        g.bench_function(name, |b| b.iter(|| integrate(&model, s, black_box(3.0 * t_r), ctl).unwrap()));
    }
    g.finish();
}

fn bench_phase(c: &mut Criterion) {
    let (model, consts) = ttw();
    let s = initial_condition(&model, consts, Placement::default()).unwrap();
    let t_r = radial_period(&model, &s).unwrap();
    let traj = integrate(&model, s, t_r, IntegratorControl::default()).unwrap();
    let mut g = c.benchmark_group("phase_one_period");
    g.sample_size(10);
    g.bench_function("closed", |b| b.iter(|| phase_along(&model, &traj, PhasePath::Closed).unwrap()));
    g.bench_function("quadrature", |b| b.iter(|| phase_along(&model, &traj, PhasePath::Quadrature).unwrap()));
    g.finish();
}

criterion_group!(benches, bench_ellip_pi, bench_actions, bench_integrate, bench_phase);
criterion_main!(benches);
