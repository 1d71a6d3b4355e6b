//! Closed-system adiabaticity margin: the largest modulation-induced
//! coupling `|lambda_dot <m|dH/dlambda|n> / eps_nm|` against the smallest
//! quasienergy gap `|eps_nm|`.

use serde::Serialize;

use super::family::HamiltonianFamily;
use super::modes::NormalModes;
use crate::error::{AmtError, Result};
use crate::protocol::ModulationProtocol;

/// Gaps below this are treated as a crossing.
pub const CROSSING_GAP: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClosedMargin {
    /// Maximum of the coupling side over the sampled times.
    pub lhs: f64,
    /// Minimum gap over the sampled times.
    pub rhs: f64,
    /// `lhs / rhs`.
    pub ratio: f64,
    pub lhs_time: f64,
    pub rhs_time: f64,
    /// Set when a gap closed somewhere; `lhs` and `ratio` are then infinite.
    pub crossing: bool,
}

impl ClosedMargin {
    pub(crate) fn empty() -> Self {
        Self {
            lhs: 0.0,
            rhs: f64::INFINITY,
            ratio: 0.0,
            lhs_time: f64::NAN,
            rhs_time: f64::NAN,
            crossing: false,
        }
    }

    pub(crate) fn absorb(&mut self, t: f64, lhs: f64, rhs: f64) {
        if lhs > self.lhs || (lhs.is_nan() && !self.lhs.is_nan()) {
            self.lhs = lhs;
            self.lhs_time = t;
        }
        if rhs < self.rhs {
            self.rhs = rhs;
            self.rhs_time = t;
        }
        if rhs < CROSSING_GAP {
            self.crossing = true;
        }
    }

    pub(crate) fn finish(mut self) -> Self {
        if self.crossing {
            self.lhs = f64::INFINITY;
            self.ratio = f64::INFINITY;
        } else if self.lhs == 0.0 {
            self.ratio = 0.0;
        } else {
            self.ratio = self.lhs / self.rhs;
        }
        self
    }
}

/// Coupling side and gap for the pair `(m, n)` at one instant.
pub fn pointwise_margin<F, M>(
    family: &F,
    modes: &M,
    t: f64,
    lambda: f64,
    lambda_dot: f64,
    m: usize,
    n: usize,
) -> Result<(f64, f64)>
where
    F: HamiltonianFamily + ?Sized,
    M: NormalModes + ?Sized,
{
    let set = modes.modes(t, lambda)?;
    if m >= set.len() || n >= set.len() || m == n {
        return Err(AmtError::IndexOutOfRange(format!(
            "mode pair ({m}, {n}) for {} modes",
            set.len()
        )));
    }
    let gap = (set.quasienergies[n] - set.quasienergies[m]).abs();
    if lambda_dot == 0.0 {
        return Ok((0.0, gap));
    }
    let element = set
        .mode(m)
        .dotc(&(family.d_dlambda(t, lambda) * set.mode(n)));
    let lhs = if gap < CROSSING_GAP {
        f64::INFINITY
    } else {
        (lambda_dot * element.norm()) / gap
    };
    Ok((lhs, gap))
}

/// Margin over the sampled `times` for the mode pair `(m, n)`.
pub fn closed_adiabatic_margin<F, M>(
    family: &F,
    protocol: &ModulationProtocol,
    modes: &M,
    pair: (usize, usize),
    times: &[f64],
) -> Result<ClosedMargin>
where
    F: HamiltonianFamily + ?Sized,
    M: NormalModes + ?Sized,
{
    let mut out = ClosedMargin::empty();
    for &t in times {
        let (lhs, rhs) = pointwise_margin(
            family,
            modes,
            t,
            protocol.lambda(t),
            protocol.rate(t).abs(),
            pair.0,
            pair.1,
        )?;
        out.absorb(t, lhs, rhs);
    }
    Ok(out.finish())
}
