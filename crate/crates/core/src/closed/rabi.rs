//! Frequency-modulated two-level (Rabi) family with the drive frequency as
//! the modulation parameter.
//!
//! `H(t; omega) = [[-delta0, V e^{i omega t}], [V* e^{-i omega t}, delta0]]`.
//! Its normal modes are known in closed form: with detuning
//! `Delta = delta0 - omega/2` and generalized Rabi frequency
//! `Omega = sqrt(Delta^2 + |V|^2)` the quasienergies are `+-Omega`.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::family::HamiltonianFamily;
use super::margin::ClosedMargin;
use super::modes::{FloquetMode, ModeSet, NormalModes};
use crate::error::{AmtError, Result};
use crate::numerics::linalg::{c, CMatrix, CVector, I};
use crate::protocol::ModulationProtocol;

/// Column of the `-Omega` mode in [`RabiModes`] output.
pub const MINUS: usize = 0;
/// Column of the `+Omega` mode in [`RabiModes`] output.
pub const PLUS: usize = 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RabiParams {
    pub delta0: f64,
    pub coupling: C64,
    pub omega: f64,
}

impl RabiParams {
    pub fn new(delta0: f64, coupling: C64, omega: f64) -> Self {
        Self {
            delta0,
            coupling,
            omega,
        }
    }

    /// Coupling phase `arg V`.
    pub fn phi(&self) -> f64 {
        self.coupling.arg()
    }

    pub fn detuning(&self) -> f64 {
        self.delta0 - 0.5 * self.omega
    }

    pub fn rabi_frequency(&self) -> f64 {
        self.detuning().hypot(self.coupling.norm())
    }

    /// `arccos(Delta / Omega)`, in `[0, pi]`.
    pub fn mixing_angle(&self) -> Result<f64> {
        let big = self.rabi_frequency();
        if big == 0.0 {
            return Err(AmtError::DegenerateRabi);
        }
        Ok((self.detuning() / big).clamp(-1.0, 1.0).acos())
    }

    /// Orthonormal mode vectors `(|+>, |->)` at time `t`. The second entry of
    /// `|->` carries a minus sign so the pair is orthogonal.
    pub fn mode_vectors(&self, t: f64) -> Result<(CVector, CVector)> {
        let theta = self.mixing_angle()?;
        let (s, co) = (0.5 * theta).sin_cos();
        let upper = C64::from_polar(1.0, 0.5 * self.omega * t);
        let lower = C64::from_polar(1.0, -self.phi() - 0.5 * self.omega * t);
        let plus = CVector::from_vec(vec![upper * s, lower * co]);
        let minus = CVector::from_vec(vec![upper * co, -lower * s]);
        Ok((plus, minus))
    }

    /// `|->` with both entries positive-signed, i.e. without the
    /// orthogonalizing sign. Only useful for diagnostics.
    pub fn unsigned_minus_vector(&self, t: f64) -> Result<CVector> {
        let theta = self.mixing_angle()?;
        let (s, co) = (0.5 * theta).sin_cos();
        let upper = C64::from_polar(1.0, 0.5 * self.omega * t);
        let lower = C64::from_polar(1.0, -self.phi() - 0.5 * self.omega * t);
        Ok(CVector::from_vec(vec![upper * co, lower * s]))
    }

    /// `(|+>, |->)` with quasienergies `+-Omega` and phases accumulated at
    /// fixed `omega`.
    pub fn floquet_modes(&self, t: f64) -> Result<(FloquetMode, FloquetMode)> {
        let (plus, minus) = self.mode_vectors(t)?;
        let big = self.rabi_frequency();
        Ok((
            FloquetMode {
                index: PLUS,
                quasienergy: big,
                state: plus,
                theta: big * t,
            },
            FloquetMode {
                index: MINUS,
                quasienergy: -big,
                state: minus,
                theta: -big * t,
            },
        ))
    }

    /// The closed-form element `i V Delta t / Omega`.
    pub fn closed_form_element(&self, t: f64) -> C64 {
        I * self.coupling * (self.detuning() * t / self.rabi_frequency())
    }
}

/// The Rabi family at fixed `delta0` and `V`; `lambda` is the drive
/// frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RabiFamily {
    pub delta0: f64,
    pub coupling: C64,
}

pub fn rabi_family(delta0: f64, coupling: C64) -> RabiFamily {
    RabiFamily { delta0, coupling }
}

impl RabiFamily {
    pub fn params(&self, omega: f64) -> RabiParams {
        RabiParams::new(self.delta0, self.coupling, omega)
    }
}

impl HamiltonianFamily for RabiFamily {
    fn dim(&self) -> usize {
        2
    }

    fn hamiltonian(&self, t: f64, omega: f64) -> CMatrix {
        let off = self.coupling * C64::from_polar(1.0, omega * t);
        CMatrix::from_row_slice(
            2,
            2,
            &[c(-self.delta0, 0.0), off, off.conj(), c(self.delta0, 0.0)],
        )
    }

    fn d_dlambda(&self, t: f64, omega: f64) -> CMatrix {
        let off = I * t * self.coupling * C64::from_polar(1.0, omega * t);
        CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), off, off.conj(), c(0.0, 0.0)])
    }

    fn period(&self, omega: f64) -> Result<Option<f64>> {
        if omega == 0.0 {
            return Err(AmtError::PeriodUndefined { lambda: omega });
        }
        Ok(Some(2.0 * PI / omega.abs()))
    }
}

/// Analytic normal modes of the Rabi family, ordered `[-, +]`.
#[derive(Debug, Clone, Copy)]
pub struct RabiModes {
    pub family: RabiFamily,
}

impl RabiModes {
    pub fn new(family: RabiFamily) -> Self {
        Self { family }
    }
}

impl NormalModes for RabiModes {
    fn dim(&self) -> usize {
        2
    }

    fn modes(&self, t: f64, omega: f64) -> Result<ModeSet> {
        let p = self.family.params(omega);
        let (plus, minus) = p.mode_vectors(t)?;
        let big = p.rabi_frequency();
        let mut vectors = CMatrix::zeros(2, 2);
        vectors.set_column(MINUS, &minus);
        vectors.set_column(PLUS, &plus);
        Ok(ModeSet {
            quasienergies: vec![-big, big],
            vectors,
        })
    }

    fn quasienergies(&self, _t: f64, omega: f64) -> Result<Vec<f64>> {
        let big = self.family.params(omega).rabi_frequency();
        if big == 0.0 {
            return Err(AmtError::DegenerateRabi);
        }
        Ok(vec![-big, big])
    }

    /// Closed form of `<m| d/domega |n>` in the gauge of
    /// [`RabiParams::mode_vectors`].
    fn derivative_overlaps(&self, t: f64, omega: f64) -> Result<CMatrix> {
        let p = self.family.params(omega);
        let big = p.rabi_frequency();
        if big == 0.0 {
            return Err(AmtError::DegenerateRabi);
        }
        let v = p.coupling.norm();
        let delta = p.detuning();
        let diag = c(0.0, t * delta / (2.0 * big));
        // d(mixing angle)/d(omega) = |V| / (2 Omega^2)
        let rot = v / (4.0 * big * big);
        let phase = t * v / (2.0 * big);
        let mut x = CMatrix::zeros(2, 2);
        x[(MINUS, MINUS)] = diag;
        x[(PLUS, PLUS)] = -diag;
        x[(MINUS, PLUS)] = c(rot, phase);
        x[(PLUS, MINUS)] = c(-rot, phase);
        Ok(x)
    }
}

/// Which reading of the linear frequency sweep to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum SweepConvention {
    /// Detuning swept linearly `0 -> 4 delta0`, `omega_t = 2 (delta0 - Delta_t)`,
    /// so `omega_t = 2 delta0 - rate t` and `tau = 8 delta0 / rate`.
    #[default]
    Detuning,
    /// `omega_t = delta0 + rate t` up to `5 delta0`, `tau = 4 delta0 / rate`.
    Caption,
}

/// Linear drive-frequency sweep at `|d omega / dt| = rate`.
pub fn rabi_sweep_protocol(
    delta0: f64,
    rate: f64,
    convention: SweepConvention,
) -> Result<ModulationProtocol> {
    if !(rate > 0.0) || !(delta0 > 0.0) {
        return Err(AmtError::InvalidParameter(format!(
            "sweep needs positive delta0 and rate, got {delta0} and {rate}"
        )));
    }
    Ok(match convention {
        SweepConvention::Detuning => {
            let tau = 8.0 * delta0 / rate;
            ModulationProtocol::linear(tau, 2.0 * delta0, -6.0 * delta0)
        }
        SweepConvention::Caption => {
            let tau = 4.0 * delta0 / rate;
            ModulationProtocol::linear(tau, delta0, 5.0 * delta0)
        }
    })
}

/// The two-level condition written with the closed-form element: left side
/// `max_t |omega_dot| |V| |Delta_t| t / (2 Omega_t^2)`, right side
/// `min_t 2 Omega_t`.
pub fn closed_form_condition(
    family: &RabiFamily,
    protocol: &ModulationProtocol,
    times: &[f64],
) -> Result<ClosedMargin> {
    let mut out = ClosedMargin::empty();
    for &t in times {
        let p = family.params(protocol.lambda(t));
        let big = p.rabi_frequency();
        if big == 0.0 {
            return Err(AmtError::DegenerateRabi);
        }
        let lhs =
            (protocol.rate(t) * p.coupling.norm() * p.detuning() * t).abs() / (2.0 * big * big);
        out.absorb(t, lhs, 2.0 * big);
    }
    Ok(out.finish())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closed::family::derivative_consistency;
    use crate::closed::modes::floquet_residual;

    fn family() -> RabiFamily {
        rabi_family(1.0, C64::from_polar(0.5, 0.7))
    }

    #[test]
    fn resonance_values() {
        let p = RabiParams::new(1.0, c(0.5, 0.0), 2.0);
        assert_eq!(p.detuning(), 0.0);
        assert_eq!(p.rabi_frequency(), 0.5);
        assert!((p.mixing_angle().unwrap() - PI / 2.0).abs() < 1e-15);
        let (plus, minus) = p.floquet_modes(0.3).unwrap();
        assert_eq!((plus.quasienergy, minus.quasienergy), (0.5, -0.5));
        for z in plus.state.iter().chain(minus.state.iter()) {
            assert!((z.norm() - 0.5f64.sqrt()).abs() < 1e-15);
        }
    }

    #[test]
    fn degenerate_rejected() {
        let p = RabiParams::new(1.0, c(0.0, 0.0), 2.0);
        assert_eq!(p.mixing_angle(), Err(AmtError::DegenerateRabi));
        assert!(family().period(0.0).is_err());
    }

    #[test]
    fn decoupled_limit_gives_bare_ground_mode() {
        let p = RabiParams::new(1.0, c(1e-9, 0.0), 0.4);
        let (_, minus) = p.mode_vectors(1.3).unwrap();
        assert!((minus[0] - C64::from_polar(1.0, 0.2 * 1.3)).norm() < 1e-8);
        assert!(minus[1].norm() < 1e-8);
    }

    #[test]
    fn derivative_of_hamiltonian_is_consistent() {
        let f = family();
        for &(t, w) in &[(0.0, 1.0), (2.0, 1.0), (7.5, -0.3), (15.0, 3.1)] {
            assert!(derivative_consistency(&f, t, w, 1e-4) < 1e-6);
        }
        let d = rabi_family(1.0, c(0.5, 0.0)).d_dlambda(2.0, 1.0);
        assert!((d[(0, 1)].norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn modes_are_orthonormal_and_solve_the_floquet_equation() {
        let f = family();
        let modes = RabiModes::new(f);
        for &(t, w) in &[(0.0, 1.3), (1.7, 0.2), (4.0, 2.0), (9.0, -1.0)] {
            let m = modes.modes(t, w).unwrap();
            let gram = m.vectors.adjoint() * &m.vectors;
            assert!((gram - CMatrix::identity(2, 2)).norm() < 1e-14);
            assert!(floquet_residual(&f, &modes, t, w).unwrap() < 1e-8);
        }
    }

    #[test]
    fn unsigned_minus_vector_is_not_orthogonal() {
        let p = family().params(1.3);
        let (plus, _) = p.mode_vectors(0.4).unwrap();
        let overlap = plus.dotc(&p.unsigned_minus_vector(0.4).unwrap()).norm();
        assert!((overlap - p.mixing_angle().unwrap().sin()).abs() < 1e-14);
    }

    #[test]
    fn analytic_derivative_overlaps_match_finite_differences() {
        let modes = RabiModes::new(family());
        for &(t, w) in &[(0.0, 1.3), (1.7, 0.2), (4.0, 2.0), (9.0, -1.0)] {
            let analytic = modes.derivative_overlaps(t, w).unwrap();
            let h = 1e-5;
            let up = modes.modes(t, w + h).unwrap().vectors;
            let down = modes.modes(t, w - h).unwrap().vectors;
            let here = modes.modes(t, w).unwrap().vectors;
            let fd = here.adjoint() * (up - down) / c(2.0 * h, 0.0);
            assert!((analytic - fd).norm() < 1e-8);
        }
    }

    #[test]
    fn sweep_protocols_hit_their_endpoints() {
        let det = rabi_sweep_protocol(1.0, 0.1, SweepConvention::Detuning).unwrap();
        assert!((det.tau() - 80.0).abs() < 1e-12);
        assert_eq!(det.lambda(0.0), 2.0);
        assert!((family().params(det.lambda(det.tau())).detuning() - 4.0).abs() < 1e-12);
        assert!((det.rate(3.0) + 0.1).abs() < 1e-15);

        let cap = rabi_sweep_protocol(1.0, 0.1, SweepConvention::Caption).unwrap();
        assert!((cap.tau() - 40.0).abs() < 1e-12);
        assert_eq!(cap.lambda(0.0), 1.0);
        assert!((cap.lambda(cap.tau()) - 5.0).abs() < 1e-12);
        assert!(rabi_sweep_protocol(1.0, 0.0, SweepConvention::Caption).is_err());
    }
}
