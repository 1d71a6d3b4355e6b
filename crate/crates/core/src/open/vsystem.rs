//! Three-level V-system pumped by incoherent light of slowly varying
//! intensity, in partial-secular Bloch-Redfield form.
//!
//! Basis `{g, e1, e2}`. Pump rates are `r_i = gamma_i nbar(t)`, so the
//! generator is affine in `nbar`, which serves as the modulation parameter.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::family::LiouvillianFamily;
use super::liouville::Superoperator;
use crate::error::{AmtError, Result};
use crate::numerics::linalg::{c, CMatrix};
use crate::protocol::ModulationProtocol;

/// Boltzmann constant in eV/K.
pub const BOLTZMANN_EV: f64 = 8.617333262e-5;

pub const G: usize = 0;
pub const E1: usize = 1;
pub const E2: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VSystemParams {
    pub gamma1: f64,
    pub gamma2: f64,
    /// Excited-state splitting.
    pub delta: f64,
    /// Transition-dipole alignment, `|p| <= 1`.
    pub p: f64,
    /// Asymptotic mean photon occupation.
    pub nbar: f64,
    /// Turn-on rate; infinite for a sudden switch.
    pub alpha: f64,
}

impl VSystemParams {
    /// `gamma1 = gamma2 = 1`, `p = 1`, splitting `0.1`.
    pub fn desk_scale(nbar: f64, alpha: f64) -> Self {
        Self {
            gamma1: 1.0,
            gamma2: 1.0,
            delta: 0.1,
            p: 1.0,
            nbar,
            alpha,
        }
    }

    /// As [`VSystemParams::desk_scale`] with splitting `1e-3`.
    pub fn narrow_splitting(nbar: f64, alpha: f64) -> Self {
        Self {
            delta: 1e-3,
            ..Self::desk_scale(nbar, alpha)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma1 > 0.0 && self.gamma2 > 0.0) {
            return Err(AmtError::InvalidParameter(format!(
                "emission rates must be positive, got {} and {}",
                self.gamma1, self.gamma2
            )));
        }
        if !(self.p.abs() <= 1.0) {
            return Err(AmtError::InvalidParameter(format!(
                "alignment |p| must be <= 1, got {}",
                self.p
            )));
        }
        if !(self.nbar >= 0.0) || !(self.alpha >= 0.0) {
            return Err(AmtError::InvalidParameter(format!(
                "occupation and turn-on rate must be non-negative, got {} and {}",
                self.nbar, self.alpha
            )));
        }
        if !self.delta.is_finite() {
            return Err(AmtError::InvalidParameter(
                "splitting must be finite".into(),
            ));
        }
        Ok(())
    }

    pub fn gamma_bar(&self) -> f64 {
        0.5 * (self.gamma1 + self.gamma2)
    }

    /// `sqrt(Delta^2 + (1 - p^2) gamma1 gamma2)`.
    pub fn delta_p(&self) -> f64 {
        (self.delta * self.delta + (1.0 - self.p * self.p) * self.gamma1 * self.gamma2).sqrt()
    }

    /// Slow decay rate of the quasi-stationary coherence, `Delta_p^2 / (2 gamma_bar)`.
    pub fn slow_rate(&self) -> f64 {
        let dp = self.delta_p();
        dp * dp / (2.0 * self.gamma_bar())
    }

    /// Fast rate `2 gamma_bar`.
    pub fn fast_rate(&self) -> f64 {
        2.0 * self.gamma_bar()
    }

    pub fn coherence_lifetime(&self) -> f64 {
        1.0 / self.slow_rate()
    }

    /// `gamma_bar / Delta_p`; the quasi-stationary regime needs this large.
    pub fn regime_ratio(&self) -> f64 {
        self.gamma_bar() / self.delta_p()
    }

    pub fn family(&self) -> Result<VSystemFamily> {
        vsystem_family(self)
    }

    /// `nbar(t) = nbar (1 - exp(-alpha t))` on `[0, tau]`.
    pub fn turn_on(&self, tau: f64) -> ModulationProtocol {
        ModulationProtocol::exponential_turn_on(tau, self.nbar, self.alpha)
    }
}

/// Mean occupation of a bosonic mode of energy `energy_ev` at temperature
/// `temperature_k`.
pub fn bose_einstein_occupation(temperature_k: f64, energy_ev: f64) -> Result<f64> {
    if !(temperature_k > 0.0) || !(energy_ev > 0.0) {
        return Err(AmtError::InvalidParameter(format!(
            "temperature and energy must be positive, got {temperature_k} K and {energy_ev} eV"
        )));
    }
    Ok(1.0 / (energy_ev / (BOLTZMANN_EV * temperature_k)).exp_m1())
}

/// The V-system generator family with `lambda = nbar(t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VSystemFamily {
    gamma1: f64,
    gamma2: f64,
    delta: f64,
    p: f64,
}

pub fn vsystem_family(params: &VSystemParams) -> Result<VSystemFamily> {
    params.validate()?;
    Ok(VSystemFamily {
        gamma1: params.gamma1,
        gamma2: params.gamma2,
        delta: params.delta,
        p: params.p,
    })
}

#[inline]
fn idx(i: usize, j: usize) -> usize {
    i + 3 * j
}

impl VSystemFamily {
    /// `nbar`-proportional part (`with_pump`) and/or the spontaneous part
    /// (`with_decay`) of the generator.
    fn build(&self, nbar: f64, with_decay: bool, with_pump: bool) -> CMatrix {
        let (d, q) = (with_decay as u8 as f64, with_pump as u8 as f64);
        let r1 = q * self.gamma1 * nbar;
        let r2 = q * self.gamma2 * nbar;
        let (g1, g2) = (d * self.gamma1, d * self.gamma2);
        let s = q * nbar * (self.gamma1 * self.gamma2).sqrt();
        let sg = d * (self.gamma1 * self.gamma2).sqrt();
        let p = self.p;
        let mut l = CMatrix::zeros(9, 9);
        let mut set = |row: (usize, usize), col: (usize, usize), v: C64| {
            l[(idx(row.0, row.1), idx(col.0, col.1))] += v
        };

        // ground population; the real part of the excited coherence enters
        // through (rho_12 + rho_21) / 2
        set((G, G), (G, G), c(-(r1 + r2), 0.0));
        set((G, G), (E1, E1), c(r1 + g1, 0.0));
        set((G, G), (E2, E2), c(r2 + g2, 0.0));
        set((G, G), (E1, E2), c(p * (s + sg), 0.0));
        set((G, G), (E2, E1), c(p * (s + sg), 0.0));

        for (e, r, g) in [(E1, r1, g1), (E2, r2, g2)] {
            set((e, e), (G, G), c(r, 0.0));
            set((e, e), (e, e), c(-(r + g), 0.0));
            set((e, e), (E1, E2), c(-0.5 * p * (s + sg), 0.0));
            set((e, e), (E2, E1), c(-0.5 * p * (s + sg), 0.0));
        }

        let damp = 0.5 * (r1 + r2 + g1 + g2);
        for ((a, b), sign) in [((E1, E2), 1.0), ((E2, E1), -1.0)] {
            set((a, b), (a, b), c(-damp, -sign * d * self.delta));
            set((a, b), (G, G), c(p * s, 0.0));
            set((a, b), (E1, E1), c(-0.5 * p * (s + sg), 0.0));
            set((a, b), (E2, E2), c(-0.5 * p * (s + sg), 0.0));
        }

        // ground-excited coherences: bare decay only
        for (e, r, g) in [(E1, r1, g1), (E2, r2, g2)] {
            set((G, e), (G, e), c(-0.5 * (r + g), 0.0));
            set((e, G), (e, G), c(-0.5 * (r + g), 0.0));
        }
        l
    }
}

impl LiouvillianFamily for VSystemFamily {
    fn hilbert_dim(&self) -> usize {
        3
    }

    fn liouvillian(&self, _t: f64, nbar: f64) -> Superoperator {
        Superoperator {
            hilbert_dim: 3,
            matrix: self.build(nbar, true, true),
        }
    }

    fn d_dlambda(&self, _t: f64, _nbar: f64) -> Superoperator {
        Superoperator {
            hilbert_dim: 3,
            matrix: self.build(1.0, false, true),
        }
    }

    fn time_independent_at_fixed_lambda(&self) -> bool {
        true
    }
}

/// Sign in front of the slow bracket of the closed-form coherence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoherenceSign {
    /// Slow and fast brackets subtract; the coherence vanishes at late times.
    #[default]
    Corrected,
    /// Both brackets added.
    AsPrinted,
}

/// Closed-form weak-driving populations and coherence.
#[derive(Debug, Clone, Default)]
pub struct VSystemAnalytic {
    pub times: Vec<f64>,
    pub rho_e1e1: Vec<f64>,
    pub rho_e2e2: Vec<f64>,
    pub coherence: Vec<f64>,
}

/// `[k (1 - e^{-alpha t}) - alpha (1 - e^{-k t})] / (k - alpha)`, the
/// response of a mode decaying at rate `k` to an exponential turn-on.
pub fn turn_on_bracket(k: f64, alpha: f64, t: f64) -> f64 {
    if alpha.is_infinite() {
        return -(-k * t).exp_m1();
    }
    if (alpha - k).abs() <= 1e-9 * k.abs().max(alpha.abs()) {
        let kt = k * t;
        return -(-kt).exp_m1() - kt * (-kt).exp();
    }
    (k * -(-alpha * t).exp_m1() - alpha * -(-k * t).exp_m1()) / (k - alpha)
}

pub fn vsystem_analytic(
    params: &VSystemParams,
    times: &[f64],
    sign: CoherenceSign,
) -> Result<VSystemAnalytic> {
    params.validate()?;
    let gb = params.gamma_bar();
    let (k_slow, k_fast) = (params.slow_rate(), params.fast_rate());
    let r1 = params.gamma1 * params.nbar;
    let r2 = params.gamma2 * params.nbar;
    let slow_sign = match sign {
        CoherenceSign::Corrected => -1.0,
        CoherenceSign::AsPrinted => 1.0,
    };
    let mut out = VSystemAnalytic {
        times: times.to_vec(),
        ..Default::default()
    };
    for &t in times {
        let slow = turn_on_bracket(k_slow, params.alpha, t);
        let fast = turn_on_bracket(k_fast, params.alpha, t);
        out.rho_e1e1.push((r2 * slow + r1 * fast) / (2.0 * gb));
        out.rho_e2e2.push((r1 * slow + r2 * fast) / (2.0 * gb));
        out.coherence
            .push(params.p * (r1 * r2).sqrt() / (2.0 * gb) * (slow_sign * slow + fast));
    }
    Ok(out)
}
