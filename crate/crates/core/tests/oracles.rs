//! Hand-computed reference values.

use amt_core::closed::{avoided_crossing, propagate_exact, EigenModes, NormalModes};
use amt_core::numerics::linspace;
use amt_core::open::{
    bose_einstein_occupation, instantaneous_steady_state, trace_distance, DensityMatrix,
    VSystemParams,
};
use amt_core::{ModulationProtocol, TimeGrid};

#[test]
fn solar_occupation_at_the_red_line() {
    // 1.98 eV / (k_B 5800 K) = 3.9615, 1 / (e^x - 1) = 0.019402
    let n = bose_einstein_occupation(5800.0, 1.98).unwrap();
    assert!((n - 0.019402).abs() < 5e-6, "{n}");
}

#[test]
fn orthogonal_pure_states_are_maximally_distant() {
    let a = DensityMatrix::basis_state(3, 0);
    let b = DensityMatrix::basis_state(3, 2);
    assert!((trace_distance(&a.0, &b.0) - 1.0).abs() < 1e-12);
    assert!(trace_distance(&a.0, &a.0) < 1e-14);
}

#[test]
fn landau_zener_retention_at_unit_rate() {
    // retention 1 - exp(-pi g^2 / (4 v)) = 0.54406 for g = v = 1
    let family = avoided_crossing(1.0);
    let modes = EigenModes::new(&family);
    let (lmax, rate) = (5.0, 1.0);
    let tau = 2.0 * lmax / rate;
    let protocol = ModulationProtocol::linear(tau, -lmax, lmax);
    let grid = TimeGrid::with_max_step(0.0, tau, 0.002).unwrap();
    let psi0 = modes.modes(0.0, -lmax).unwrap().mode(0);
    let rec = propagate_exact(
        &family,
        &protocol,
        &modes,
        &psi0,
        &grid,
        &linspace(0.0, tau, 11),
    )
    .unwrap();
    let p = rec.final_populations()[0];
    assert!((p - 0.54406).abs() < 5e-3, "{p}");
}

#[test]
fn thermal_steady_state_has_boltzmann_populations() {
    let nbar = 0.1;
    let params = VSystemParams::desk_scale(nbar, f64::INFINITY);
    let family = params.family().unwrap();
    let ss = instantaneous_steady_state(&family, 1.0, nbar).unwrap();
    let ratio = nbar / (1.0 + nbar);
    for e in [1, 2] {
        let r = ss.0[(e, e)].re / ss.0[(0, 0)].re;
        assert!((r - ratio).abs() < 1e-9, "level {e}: {r}");
    }
    assert!((ss.trace().re - 1.0).abs() < 1e-12);
}
