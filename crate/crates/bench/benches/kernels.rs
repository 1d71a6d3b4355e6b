use std::hint::black_box;

use amt_core::closed::{
    numeric_floquet_modes, propagate_exact, rabi_family, rabi_sweep_protocol, FloquetSolver,
    NormalModes, RabiModes, SweepConvention,
};
use amt_core::numerics::linalg::{svd_of, CMatrix};
use amt_core::numerics::linspace;
use amt_core::open::jordan::DEFAULT_CLUSTER_TOL;
use amt_core::open::{
    jordan_decompose, lvn_propagate, DensityMatrix, LiouvillianFamily, VSystemParams,
};
use amt_core::TimeGrid;
use criterion::{criterion_group, criterion_main, Criterion};
use num_complex::Complex64 as C64;

fn jordan(c: &mut Criterion) {
    let params = VSystemParams::desk_scale(0.0194, f64::INFINITY);
    let family = params.family().unwrap();
    let l = family.liouvillian(1.0, params.nbar).matrix;
    c.bench_function("jordan_decompose/vsystem_9x9", |b| {
        b.iter(|| jordan_decompose(black_box(&l), DEFAULT_CLUSTER_TOL).unwrap())
    });
}

fn svd(c: &mut Criterion) {
    let n = 9;
    let a = CMatrix::from_fn(n, n, |i, j| {
        C64::new(
            ((i * 7 + j * 3) % 11) as f64 - 5.0,
            (i as f64 - j as f64) * 0.1,
        )
    });
    c.bench_function("svd/9x9", |b| {
        b.iter(|| svd_of(black_box(&a), true, true).unwrap())
    });
}

fn floquet(c: &mut Criterion) {
    let family = rabi_family(1.0, C64::new(0.5, 0.0));
    let solver = FloquetSolver::default();
    c.bench_function("floquet/rabi_spectrum", |b| {
        b.iter(|| numeric_floquet_modes(&family, black_box(1.5), 0.3, None, &solver).unwrap())
    });
}

fn closed_sweep(c: &mut Criterion) {
    let family = rabi_family(1.0, C64::new(0.5, 0.0));
    let modes = RabiModes::new(family);
    let protocol = rabi_sweep_protocol(1.0, 1.0, SweepConvention::Detuning).unwrap();
    let tau = protocol.tau();
    let grid = TimeGrid::with_max_step(0.0, tau, 0.002).unwrap();
    let samples = linspace(0.0, tau, 101);
    let psi0 = modes.modes(0.0, protocol.lambda(0.0)).unwrap().mode(0);
    let mut g = c.benchmark_group("rk4");
    g.sample_size(20);
    g.bench_function("rabi_sweep_rate_1", |b| {
        b.iter(|| propagate_exact(&family, &protocol, &modes, &psi0, &grid, &samples).unwrap())
    });
    g.finish();
}

fn open_turn_on(c: &mut Criterion) {
    let params = VSystemParams::desk_scale(0.0194, 0.1);
    let family = params.family().unwrap();
    let t_end = 200.0;
    let protocol = params.turn_on(t_end);
    let samples = linspace(0.0, t_end, 51);
    let rho0 = DensityMatrix::basis_state(3, 0);
    let fixed = TimeGrid::with_max_step(0.0, t_end, 0.05).unwrap();
    let adaptive = TimeGrid::adaptive(0.0, t_end, 1e-9, 1e-12).unwrap();
    let mut g = c.benchmark_group("lvn");
    g.sample_size(20);
    g.bench_function("vsystem_rk4", |b| {
        b.iter(|| lvn_propagate(&family, &protocol, &rho0, &fixed, &samples).unwrap())
    });
    g.bench_function("vsystem_adaptive", |b| {
        b.iter(|| lvn_propagate(&family, &protocol, &rho0, &adaptive, &samples).unwrap())
    });
    g.finish();
}

criterion_group!(kernels, jordan, svd, floquet, closed_sweep, open_turn_on);
criterion_main!(kernels);
