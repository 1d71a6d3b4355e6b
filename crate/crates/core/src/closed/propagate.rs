//! Exact, adiabatic and mode-coefficient propagation along a protocol.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::family::HamiltonianFamily;
use super::margin::pointwise_margin;
use super::modes::NormalModes;
use crate::error::{AmtError, Result};
use crate::numerics::linalg::{c, CMatrix, CVector, I};
use crate::numerics::ode::{ode_integrate, TimeGrid};
use crate::numerics::quadrature::CumulativeIntegral;
use crate::protocol::ModulationProtocol;

/// Abort threshold on `| ||psi|| - 1 |`.
pub const NORM_DRIFT_LIMIT: f64 = 1e-6;

/// Node cap for the phase quadrature; quasienergies vary on the protocol
/// time scale, so a coarser grid than the integrator's is enough.
const PHASE_NODES: usize = 1 << 16;

#[derive(Debug, Clone, Default)]
pub struct ClosedTrajectoryRecord {
    pub times: Vec<f64>,
    pub lambdas: Vec<f64>,
    pub states: Vec<CVector>,
    pub quasienergies: Vec<Vec<f64>>,
    /// `theta_n(t) = int_0^t eps_n(s; lambda_s) ds`.
    pub thetas: Vec<Vec<f64>>,
    /// `|<n(t; lambda_t)|psi(t)>|^2`.
    pub mode_populations: Vec<Vec<f64>>,
    /// `<n|psi> exp(+i theta_n)`.
    pub mode_coefficients: Vec<Vec<C64>>,
    /// Largest modulation coupling over mode pairs at each sample.
    pub margin_lhs: Vec<f64>,
    /// Smallest quasienergy gap at each sample.
    pub margin_rhs: Vec<f64>,
    pub max_norm_drift: f64,
    pub step: f64,
}

impl ClosedTrajectoryRecord {
    pub fn final_populations(&self) -> &[f64] {
        self.mode_populations
            .last()
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }
}

fn check_normalized(psi: &CVector) -> Result<()> {
    let drift = (psi.norm() - 1.0).abs();
    if drift > 1e-9 {
        return Err(AmtError::InvalidParameter(format!(
            "initial state not normalized (|norm - 1| = {drift:e})"
        )));
    }
    Ok(())
}

fn phase_integrals<M: NormalModes + ?Sized>(
    modes: &M,
    protocol: &ModulationProtocol,
    grid: &TimeGrid,
) -> Result<Vec<CumulativeIntegral>> {
    let nodes = if grid.adaptive {
        PHASE_NODES
    } else {
        grid.num_steps.min(PHASE_NODES)
    };
    let phase_grid = TimeGrid::fixed(grid.t0, grid.t1, nodes.max(2))?;
    let dim = modes.dim();
    let mut table = vec![Vec::with_capacity(phase_grid.num_steps + 1); dim];
    for t in phase_grid.nodes() {
        let eps = modes.quasienergies(t, protocol.lambda(t))?;
        for (col, e) in table.iter_mut().zip(eps) {
            col.push(e);
        }
    }
    let times = phase_grid.nodes();
    Ok(table
        .into_iter()
        .map(|values| CumulativeIntegral::from_samples(times.clone(), values, phase_grid.step()))
        .collect())
}

fn observe<F, M>(
    family: &F,
    modes: &M,
    protocol: &ModulationProtocol,
    phases: &[CumulativeIntegral],
    t: f64,
    psi: &CVector,
    record: &mut ClosedTrajectoryRecord,
) -> Result<()>
where
    F: HamiltonianFamily + ?Sized,
    M: NormalModes + ?Sized,
{
    let lambda = protocol.lambda(t);
    let set = modes.modes(t, lambda)?;
    let amps = set.amplitudes(psi);
    let thetas: Vec<f64> = phases.iter().map(|p| p.at(t)).collect();
    let (mut lhs, mut rhs) = (0.0f64, f64::INFINITY);
    let rate = protocol.rate(t).abs();
    for m in 0..set.len() {
        for n in m + 1..set.len() {
            let (l, r) = pointwise_margin(family, modes, t, lambda, rate, m, n)?;
            lhs = lhs.max(l);
            rhs = rhs.min(r);
        }
    }
    record.times.push(t);
    record.lambdas.push(lambda);
    record
        .mode_populations
        .push(amps.iter().map(|a| a.norm_sqr()).collect());
    record.mode_coefficients.push(
        amps.iter()
            .zip(&thetas)
            .map(|(a, th)| a * C64::from_polar(1.0, *th))
            .collect(),
    );
    record.quasienergies.push(set.quasienergies);
    record.thetas.push(thetas);
    record.states.push(psi.clone());
    record.margin_lhs.push(lhs);
    record.margin_rhs.push(rhs);
    Ok(())
}

/// Integrates `i dpsi/dt = H(t; lambda_t) psi` and records mode populations
/// and coefficients against `modes` at each sample time.
pub fn propagate_exact<F, M>(
    family: &F,
    protocol: &ModulationProtocol,
    modes: &M,
    psi0: &CVector,
    grid: &TimeGrid,
    samples: &[f64],
) -> Result<ClosedTrajectoryRecord>
where
    F: HamiltonianFamily + ?Sized,
    M: NormalModes + ?Sized,
{
    check_normalized(psi0)?;
    if psi0.len() != family.dim() {
        return Err(AmtError::DimensionMismatch {
            expected: family.dim(),
            got: psi0.len(),
        });
    }
    let rhs = |t: f64, psi: &CVector| -> CVector {
        family.hamiltonian(t, protocol.lambda(t)) * psi * (-I)
    };
    let path = ode_integrate(rhs, psi0, grid, samples)?;
    let phases = phase_integrals(modes, protocol, grid)?;
    let mut record = ClosedTrajectoryRecord {
        step: grid.step(),
        ..Default::default()
    };
    for (t, psi) in &path {
        let drift = (psi.norm() - 1.0).abs();
        record.max_norm_drift = record.max_norm_drift.max(drift);
        if drift > NORM_DRIFT_LIMIT {
            return Err(AmtError::NormDrift {
                t: *t,
                drift,
                step: grid.step(),
            });
        }
        observe(family, modes, protocol, &phases, *t, psi, &mut record)?;
    }
    Ok(record)
}

/// `psi_ad(t) = exp(-i theta_n(t)) |n(t; lambda_t)>`, the infinitely slow
/// limit starting in mode `n`.
pub fn propagate_adiabatic<F, M>(
    family: &F,
    protocol: &ModulationProtocol,
    modes: &M,
    n: usize,
    grid: &TimeGrid,
    samples: &[f64],
) -> Result<ClosedTrajectoryRecord>
where
    F: HamiltonianFamily + ?Sized,
    M: NormalModes + ?Sized,
{
    if n >= modes.dim() {
        return Err(AmtError::IndexOutOfRange(format!(
            "mode {n} of {}",
            modes.dim()
        )));
    }
    let phases = phase_integrals(modes, protocol, grid)?;
    // crossing scan on the phase-quadrature nodes
    for &t in &phases[n].times {
        let q = modes.quasienergies(t, protocol.lambda(t))?;
        for (m, &e) in q.iter().enumerate() {
            if m != n && (e - q[n]).abs() < 1e-10 {
                return Err(AmtError::ModeCrossing {
                    t,
                    gap: (e - q[n]).abs(),
                });
            }
        }
    }
    let mut record = ClosedTrajectoryRecord {
        step: grid.step(),
        ..Default::default()
    };
    for &t in samples {
        let set = modes.modes(t, protocol.lambda(t))?;
        let psi = set.mode(n) * C64::from_polar(1.0, -phases[n].at(t));
        observe(family, modes, protocol, &phases, t, &psi, &mut record)?;
    }
    Ok(record)
}

/// How the off-diagonal mode coupling `<m|d/dlambda|n>` is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CouplingScheme {
    /// `<m|d/dlambda|n>` straight from the mode provider. Exact for any
    /// family.
    #[default]
    Exact,
    /// `<m|dH/dlambda|n> / (eps_n - eps_m)` for `m != n`. Exact only when the
    /// family is `t`-independent; for periodic families it drops the
    /// `i d/dt <m|d/dlambda n>` correction.
    HellmannFeynman,
}

/// Mode-coefficient trajectories.
#[derive(Debug, Clone, Default)]
pub struct CoefficientTrajectory {
    pub times: Vec<f64>,
    pub coefficients: Vec<CVector>,
    pub thetas: Vec<Vec<f64>>,
    /// `sum_n c_n exp(-i theta_n) |n(t; lambda_t)>`.
    pub states: Vec<CVector>,
}

/// Integrates the coupled equations for `c_n(t)`, defined by
/// `psi = sum_n c_n exp(-i theta_n) |n(t; lambda_t)>`:
/// `dc_m/dt = -lambda_dot sum_n exp(-i (theta_n - theta_m)) <m|d/dlambda n> c_n`,
/// with the phases `theta_n` integrated alongside.
pub fn propagate_mode_coefficients<F, M>(
    family: &F,
    protocol: &ModulationProtocol,
    modes: &M,
    c0: &CVector,
    grid: &TimeGrid,
    samples: &[f64],
    scheme: CouplingScheme,
) -> Result<CoefficientTrajectory>
where
    F: HamiltonianFamily + ?Sized,
    M: NormalModes + ?Sized,
{
    let dim = modes.dim();
    if c0.len() != dim {
        return Err(AmtError::DimensionMismatch {
            expected: dim,
            got: c0.len(),
        });
    }
    let coupling = |t: f64, lambda: f64| -> Result<(Vec<f64>, CMatrix)> {
        match scheme {
            CouplingScheme::Exact => {
                let eps = modes.quasienergies(t, lambda)?;
                Ok((eps, modes.derivative_overlaps(t, lambda)?))
            }
            CouplingScheme::HellmannFeynman => {
                let set = modes.modes(t, lambda)?;
                let mut x = modes.derivative_overlaps(t, lambda)?;
                let dh = set.matrix_elements(&family.d_dlambda(t, lambda));
                for m in 0..dim {
                    for n in 0..dim {
                        if m != n {
                            let gap = set.quasienergies[n] - set.quasienergies[m];
                            if gap.abs() < 1e-12 {
                                return Err(AmtError::ModeCrossing { t, gap: gap.abs() });
                            }
                            x[(m, n)] = dh[(m, n)] / gap;
                        }
                    }
                }
                Ok((set.quasienergies, x))
            }
        }
    };

    // state layout: [c_0..c_{d-1}, theta_0..theta_{d-1}] with real thetas
    let mut y0 = CVector::zeros(2 * dim);
    y0.rows_mut(0, dim).copy_from(c0);
    let failure = std::cell::RefCell::new(None);
    let rhs = |t: f64, y: &CVector| -> CVector {
        let mut dy = CVector::zeros(2 * dim);
        let lambda = protocol.lambda(t);
        let (eps, x) = match coupling(t, lambda) {
            Ok(v) => v,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                return dy;
            }
        };
        let rate = protocol.rate(t);
        for m in 0..dim {
            dy[dim + m] = c(eps[m], 0.0);
            if rate == 0.0 {
                continue;
            }
            let mut acc = C64::new(0.0, 0.0);
            for n in 0..dim {
                let dtheta = y[dim + n].re - y[dim + m].re;
                acc += C64::from_polar(1.0, -dtheta) * x[(m, n)] * y[n];
            }
            dy[m] = -acc * rate;
        }
        dy
    };
    let path = ode_integrate(rhs, &y0, grid, samples)?;
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    let mut out = CoefficientTrajectory::default();
    for (t, y) in path {
        let coeffs: CVector = y.rows(0, dim).into_owned();
        let thetas: Vec<f64> = (0..dim).map(|k| y[dim + k].re).collect();
        let set = modes.modes(t, protocol.lambda(t))?;
        let mut psi = CVector::zeros(family.dim());
        for n in 0..dim {
            psi += set.mode(n) * (coeffs[n] * C64::from_polar(1.0, -thetas[n]));
        }
        out.times.push(t);
        out.coefficients.push(coeffs);
        out.thetas.push(thetas);
        out.states.push(psi);
    }
    Ok(out)
}
