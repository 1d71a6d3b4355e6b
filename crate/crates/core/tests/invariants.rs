use amt_core::closed::floquet::{fold, unfold};
use amt_core::closed::{avoided_crossing, propagate_exact, EigenModes, NormalModes};
use amt_core::numerics::linalg::{c, identity, CMatrix};
use amt_core::numerics::linspace;
use amt_core::open::{jordan_decompose, lvn_propagate, DensityMatrix, VSystemParams};
use amt_core::{ModulationProtocol, TimeGrid};
use num_complex::Complex64 as C64;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn crossing_sweep_keeps_the_norm(gap in 0.5f64..2.0, rate in 0.1f64..5.0) {
        let family = avoided_crossing(gap);
        let modes = EigenModes::new(&family);
        let tau = 6.0 / rate;
        let protocol = ModulationProtocol::linear(tau, -3.0, 3.0);
        let grid = TimeGrid::with_max_step(0.0, tau, 0.002).unwrap();
        let psi0 = modes.modes(0.0, -3.0).unwrap().mode(0);
        let rec = propagate_exact(&family, &protocol, &modes, &psi0, &grid, &linspace(0.0, tau, 21)).unwrap();
        prop_assert!(rec.max_norm_drift < 1e-8);
        for pops in &rec.mode_populations {
            prop_assert!((pops.iter().sum::<f64>() - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn turn_on_stays_a_density_matrix(nbar in 0.0f64..1.0, alpha in 1e-2f64..10.0) {
        let params = VSystemParams::desk_scale(nbar, alpha);
        let family = params.family().unwrap();
        let t_end = 20.0;
        let grid = TimeGrid::adaptive(0.0, t_end, 1e-9, 1e-12).unwrap();
        let rho0 = DensityMatrix::basis_state(3, 0);
        let rec = lvn_propagate(&family, &params.turn_on(t_end), &rho0, &grid, &linspace(0.0, t_end, 21)).unwrap();
        prop_assert!(rec.max_trace_drift < 1e-8);
        prop_assert!(rec.min_eigenvalue > -1e-8);
        for rho in &rec.states {
            prop_assert!((rho - rho.adjoint()).norm() < 1e-10);
        }
    }

    #[test]
    fn similar_jordan_matrices_give_their_chains(
        sizes in prop::collection::vec(1usize..=3, 1..=3),
        entries in prop::collection::vec(-0.2f64..0.2, 81),
    ) {
        let n: usize = sizes.iter().sum();
        let mut j = CMatrix::zeros(n, n);
        let mut at = 0;
        for (b, &size) in sizes.iter().enumerate() {
            let ev = c(-(b as f64) - 0.5, 0.7 * b as f64);
            for k in 0..size {
                j[(at + k, at + k)] = ev;
                if k + 1 < size {
                    j[(at + k, at + k + 1)] = c(1.0, 0.0);
                }
            }
            at += size;
        }
        let s = identity(n) + CMatrix::from_fn(n, n, |r, q| C64::new(entries[r * 9 + q], entries[80 - r * 9 - q]));
        let inv = s.clone().try_inverse().unwrap();
        let dec = jordan_decompose(&(&s * j * inv), 1e-4).unwrap();
        let mut got = dec.chain_lengths();
        let mut want = sizes.clone();
        got.sort_unstable();
        want.sort_unstable();
        prop_assert_eq!(got, want);
        prop_assert!(dec.max_residual() < 1e-6);
    }

    #[test]
    fn unfold_inverts_fold(eps in -50.0f64..50.0, period in 0.1f64..10.0) {
        prop_assert!((unfold(fold(eps, period), period, eps) - eps).abs() < 1e-9);
    }
}
