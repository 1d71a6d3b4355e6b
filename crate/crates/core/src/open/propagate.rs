use num_complex::Complex64 as C64;

use super::family::LiouvillianFamily;
use super::jordan::{block_coefficients, jordan_decompose, DEFAULT_CLUSTER_TOL};
use super::liouville::{devectorize, vectorize, DensityMatrix};
use crate::error::{AmtError, Result};
use crate::numerics::linalg::CMatrix;
use crate::numerics::ode::{ode_integrate, TimeGrid};
use crate::protocol::ModulationProtocol;

/// Abort when `|Tr rho - 1|` exceeds this at a sample.
pub const TRACE_DRIFT_LIMIT: f64 = 1e-6;
/// Abort when the smallest eigenvalue drops below this at a sample.
pub const POSITIVITY_LIMIT: f64 = -1e-4;

#[derive(Debug, Clone, Default)]
pub struct OpenTrajectoryRecord {
    pub times: Vec<f64>,
    pub lambdas: Vec<f64>,
    pub states: Vec<CMatrix>,
    /// Diagonal of each sample.
    pub populations: Vec<Vec<f64>>,
    /// `rho[0, 1]` for a two-level system, `rho[1, 2]` otherwise.
    pub coherence: Vec<C64>,
    /// Per sample, per chain, per chain link.
    pub block_coefficients: Option<Vec<Vec<Vec<C64>>>>,
    pub max_trace_drift: f64,
    pub min_eigenvalue: f64,
}

impl OpenTrajectoryRecord {
    pub fn final_state(&self) -> Option<&CMatrix> {
        self.states.last()
    }

    /// Decomposes the generator at each sample's `lambda` and stores the
    /// block coefficients of the state.
    pub fn attach_block_coefficients<F: LiouvillianFamily + ?Sized>(
        &mut self,
        family: &F,
    ) -> Result<()> {
        let mut all = Vec::with_capacity(self.times.len());
        for ((t, lambda), rho) in self.times.iter().zip(&self.lambdas).zip(&self.states) {
            let dec =
                jordan_decompose(&family.liouvillian(*t, *lambda).matrix, DEFAULT_CLUSTER_TOL)?;
            dec.require_certified()?;
            all.push(block_coefficients(&dec, &vectorize(rho)));
        }
        self.block_coefficients = Some(all);
        Ok(())
    }
}

/// Integrates `d rho / dt = L(t, lambda(t)) rho` and records `rho` at
/// `samples`.
pub fn lvn_propagate<F: LiouvillianFamily + ?Sized>(
    family: &F,
    protocol: &ModulationProtocol,
    rho0: &DensityMatrix,
    grid: &TimeGrid,
    samples: &[f64],
) -> Result<OpenTrajectoryRecord> {
    let dim = family.hilbert_dim();
    if rho0.dim() != dim {
        return Err(AmtError::DimensionMismatch {
            expected: dim,
            got: rho0.dim(),
        });
    }
    rho0.validate()?;
    let v0 = vectorize(&rho0.0);
    let out = if family.time_independent_at_fixed_lambda()
        && protocol.tau() > 0.0
        && is_constant(protocol, grid)
    {
        let l = family.liouvillian(grid.t0, protocol.lambda(grid.t0)).matrix;
        ode_integrate(|_, v| &l * v, &v0, grid, samples)?
    } else {
        ode_integrate(
            |t, v| family.liouvillian(t, protocol.lambda(t)).matrix * v,
            &v0,
            grid,
            samples,
        )?
    };

    let mut rec = OpenTrajectoryRecord {
        min_eigenvalue: f64::INFINITY,
        ..Default::default()
    };
    for (t, v) in out {
        let rho = devectorize(&v, dim)?;
        let drift = (rho.trace() - 1.0).norm();
        if drift > TRACE_DRIFT_LIMIT {
            return Err(AmtError::TraceDrift { t, drift });
        }
        let dm = DensityMatrix(rho);
        let min_eigenvalue = dm.min_eigenvalue();
        if min_eigenvalue < POSITIVITY_LIMIT {
            return Err(AmtError::Positivity { t, min_eigenvalue });
        }
        rec.max_trace_drift = rec.max_trace_drift.max(drift);
        rec.min_eigenvalue = rec.min_eigenvalue.min(min_eigenvalue);
        rec.populations
            .push((0..dim).map(|k| dm.0[(k, k)].re).collect());
        rec.coherence.push(match dim {
            0 | 1 => C64::new(0.0, 0.0),
            2 => dm.0[(0, 1)],
            _ => dm.0[(1, 2)],
        });
        rec.times.push(t);
        rec.lambdas.push(protocol.lambda(t));
        rec.states.push(dm.0);
    }
    Ok(rec)
}

// Cheap probe: a frozen protocol lets the generator be built once.
fn is_constant(protocol: &ModulationProtocol, grid: &TimeGrid) -> bool {
    let probes = [grid.t0, 0.5 * (grid.t0 + grid.t1), grid.t1];
    probes
        .iter()
        .all(|&t| protocol.rate(t) == 0.0 && protocol.lambda(t) == protocol.lambda(grid.t0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::linalg::{c, CVector};
    use crate::numerics::linspace;
    use crate::open::jordan::{evolve_block_coefficients, reconstruct};
    use crate::open::liouville::Superoperator;
    use crate::open::steady::instantaneous_steady_state;
    use crate::open::vsystem::{VSystemParams, E1, E2, G};

    struct Fixed(Superoperator);

    impl LiouvillianFamily for Fixed {
        fn hilbert_dim(&self) -> usize {
            self.0.hilbert_dim
        }
        fn liouvillian(&self, _: f64, _: f64) -> Superoperator {
            self.0.clone()
        }
        fn d_dlambda(&self, _: f64, _: f64) -> Superoperator {
            Superoperator::zeros(self.0.hilbert_dim)
        }
        fn time_independent_at_fixed_lambda(&self) -> bool {
            true
        }
    }

    #[test]
    fn zero_generator_keeps_state() {
        let f = Fixed(Superoperator::zeros(2));
        let rho = DensityMatrix::basis_state(2, 1);
        let grid = TimeGrid::fixed(0.0, 3.0, 30).unwrap();
        let rec = lvn_propagate(
            &f,
            &ModulationProtocol::constant(3.0, 0.0),
            &rho,
            &grid,
            &[0.0, 1.5, 3.0],
        )
        .unwrap();
        for s in &rec.states {
            assert_eq!(*s, rho.0);
        }
    }

    #[test]
    fn unitary_generator_conserves_purity() {
        let h = CMatrix::from_row_slice(
            2,
            2,
            &[c(0.5, 0.0), c(0.2, 0.3), c(0.2, -0.3), c(-0.5, 0.0)],
        );
        let f = Fixed(Superoperator::commutator(&h));
        let psi = CVector::from_vec(vec![c(1.0, 0.0), c(0.0, 0.0)]);
        let grid = TimeGrid::fixed(0.0, 20.0, 4000).unwrap();
        let rec = lvn_propagate(
            &f,
            &ModulationProtocol::constant(20.0, 0.0),
            &DensityMatrix::pure(&psi),
            &grid,
            &linspace(0.0, 20.0, 11),
        )
        .unwrap();
        for s in rec.states {
            assert!((DensityMatrix(s).purity() - 1.0).abs() < 1e-8);
        }
        assert!(rec.max_trace_drift < 1e-12);
    }

    #[test]
    fn slow_turn_on_relaxes_to_steady_state() {
        let params = VSystemParams::desk_scale(0.05, 1.0);
        let f = params.family().unwrap();
        // several lifetimes of the slow coherence mode
        let tau = 3000.0;
        let grid = TimeGrid::fixed(0.0, tau, 30000).unwrap();
        let rec = lvn_propagate(
            &f,
            &params.turn_on(tau),
            &DensityMatrix::basis_state(3, G),
            &grid,
            &[tau],
        )
        .unwrap();
        let rho = &rec.states[0];
        let ss = instantaneous_steady_state(&f, tau, rec.lambdas[0]).unwrap();
        assert!((rho[(E1, E1)] - ss.0[(E1, E1)]).norm() < 1e-6);
        assert!((rho[(E2, E2)] - ss.0[(E2, E2)]).norm() < 1e-6);
        assert!(rec.min_eigenvalue > -1e-6);
        assert!(rec.max_trace_drift < 1e-10);
    }

    #[test]
    fn block_propagation_matches_integration() {
        let params = VSystemParams::desk_scale(0.1, 1.0);
        let f = params.family().unwrap();
        let protocol = ModulationProtocol::constant(40.0, params.nbar);
        let rho0 = DensityMatrix::basis_state(3, G);
        let grid = TimeGrid::fixed(0.0, 40.0, 8000).unwrap();
        let times = [5.0, 20.0, 40.0];
        let rec = lvn_propagate(&f, &protocol, &rho0, &grid, &times).unwrap();
        let dec =
            jordan_decompose(&f.liouvillian(0.0, params.nbar).matrix, DEFAULT_CLUSTER_TOL).unwrap();
        assert!(dec.certified);
        let r0 = block_coefficients(&dec, &vectorize(&rho0.0));
        for (k, &t) in times.iter().enumerate() {
            let v = reconstruct(&dec, &evolve_block_coefficients(&dec, &r0, t));
            assert!((v - vectorize(&rec.states[k])).norm() < 1e-6);
        }
        // with the steady-state chain scaled to unit trace its coefficient is the trace
        let mut dec = dec;
        dec.normalize_steady_state(3).unwrap();
        assert!((block_coefficients(&dec, &vectorize(&rec.states[2]))[0][0] - 1.0).norm() < 1e-10);
    }

    #[test]
    fn no_light_stays_in_ground() {
        let params = VSystemParams::desk_scale(0.02, 0.0);
        let f = params.family().unwrap();
        let grid = TimeGrid::fixed(0.0, 10.0, 100).unwrap();
        let rec = lvn_propagate(
            &f,
            &params.turn_on(10.0),
            &DensityMatrix::basis_state(3, G),
            &grid,
            &[10.0],
        )
        .unwrap();
        assert!((rec.states[0][(G, G)].re - 1.0).abs() < 1e-15);
    }
}
