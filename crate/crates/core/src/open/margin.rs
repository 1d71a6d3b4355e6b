//! Open-system adiabaticity margin: the largest projected mode change
//! `|<<Q_a^(i)|d/dlambda P_b^(j)>>|` against the smallest `1 / |lambda_dot|`.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::family::LiouvillianFamily;
use super::jordan::{jordan_decompose, projected_mode_change, JordanDecomposition};
use crate::error::{AmtError, Result};
use crate::protocol::ModulationProtocol;

/// Picks a chain out of a decomposition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlockSelector {
    /// The chain with eigenvalue closest to zero.
    SteadyState,
    /// The non-steady chain with the largest real part.
    SlowestDecay,
    NearestTo {
        re: f64,
        im: f64,
    },
    Index(usize),
}

impl BlockSelector {
    pub fn select(&self, dec: &JordanDecomposition) -> Result<usize> {
        match *self {
            BlockSelector::SteadyState => Ok(dec.nearest(C64::new(0.0, 0.0))),
            BlockSelector::SlowestDecay => {
                let steady = dec.nearest(C64::new(0.0, 0.0));
                (0..dec.chains.len())
                    .filter(|&k| k != steady)
                    .max_by(|&a, &b| {
                        dec.chains[a]
                            .eigenvalue
                            .re
                            .total_cmp(&dec.chains[b].eigenvalue.re)
                    })
                    .ok_or_else(|| AmtError::IndexOutOfRange("no decaying chain".into()))
            }
            BlockSelector::NearestTo { re, im } => Ok(dec.nearest(C64::new(re, im))),
            BlockSelector::Index(k) if k < dec.chains.len() => Ok(k),
            BlockSelector::Index(k) => Err(AmtError::IndexOutOfRange(format!(
                "chain {k} of {}",
                dec.chains.len()
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OpenMargin {
    /// Maximum of `|<<Q_a^(i)|d/dlambda P_b^(j)>>|` over the sampled times.
    pub lhs: f64,
    /// Minimum of `1 / |lambda_dot|`; infinite for a frozen protocol.
    pub rhs: f64,
    /// `lhs / rhs`, zero when `rhs` is infinite.
    pub ratio: f64,
    pub lhs_time: f64,
    pub rhs_time: f64,
    /// Times where the decomposition failed or was not certified.
    pub unavailable: Vec<f64>,
}

/// Margin over `times` for the chain entries `a = (selector, link)` and
/// `b = (selector, link)`. The chains are chosen afresh at every sample.
pub fn open_adiabatic_margin<F: LiouvillianFamily + ?Sized>(
    family: &F,
    protocol: &ModulationProtocol,
    a: (BlockSelector, usize),
    b: (BlockSelector, usize),
    times: &[f64],
    cluster_tol: f64,
) -> Result<OpenMargin> {
    let mut out = OpenMargin {
        lhs: 0.0,
        rhs: f64::INFINITY,
        ratio: 0.0,
        lhs_time: f64::NAN,
        rhs_time: f64::NAN,
        unavailable: Vec::new(),
    };
    for &t in times {
        let lambda = protocol.lambda(t);
        let rate = protocol.rate(t).abs();
        if rate > 0.0 && 1.0 / rate < out.rhs {
            out.rhs = 1.0 / rate;
            out.rhs_time = t;
        }
        let dec = match jordan_decompose(&family.liouvillian(t, lambda).matrix, cluster_tol) {
            Ok(d) if d.certified => d,
            _ => {
                out.unavailable.push(t);
                continue;
            }
        };
        let (ca, cb) = (a.0.select(&dec)?, b.0.select(&dec)?);
        if ca == cb {
            return Err(AmtError::InvalidParameter(format!(
                "both selectors pick chain {ca} at t = {t}"
            )));
        }
        let x = projected_mode_change(
            &dec,
            &family.d_dlambda(t, lambda).matrix,
            (ca, a.1),
            (cb, b.1),
        )?;
        if x.norm() > out.lhs || out.lhs_time.is_nan() {
            out.lhs = x.norm();
            out.lhs_time = t;
        }
    }
    out.ratio = if out.rhs.is_infinite() {
        0.0
    } else {
        out.lhs / out.rhs
    };
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::linspace;
    use crate::open::jordan::DEFAULT_CLUSTER_TOL;
    use crate::open::vsystem::VSystemParams;

    #[test]
    fn frozen_protocol_has_zero_ratio() {
        let params = VSystemParams::desk_scale(0.05, 0.0);
        let f = params.family().unwrap();
        let m = open_adiabatic_margin(
            &f,
            &ModulationProtocol::constant(10.0, 0.05),
            (BlockSelector::SteadyState, 0),
            (BlockSelector::SlowestDecay, 0),
            &linspace(0.0, 10.0, 5),
            DEFAULT_CLUSTER_TOL,
        )
        .unwrap();
        assert!(m.rhs.is_infinite());
        assert_eq!(m.ratio, 0.0);
        assert!(m.lhs > 0.0);
        assert!(m.unavailable.is_empty());
    }

    #[test]
    fn slow_turn_on_is_adiabatic() {
        let params = VSystemParams::desk_scale(0.019, 1e-4);
        let f = params.family().unwrap();
        let tau = 5e4;
        let margin = |alpha: f64| {
            let p = VSystemParams { alpha, ..params };
            open_adiabatic_margin(
                &f,
                &p.turn_on(tau),
                (BlockSelector::SteadyState, 0),
                (BlockSelector::SlowestDecay, 0),
                &linspace(0.0, tau, 41),
                DEFAULT_CLUSTER_TOL,
            )
            .unwrap()
        };
        let slow = margin(1e-4);
        let fast = margin(1.0);
        assert!(slow.ratio < 1e-2, "{slow:?}");
        assert!(fast.ratio > 100.0 * slow.ratio);
    }

    #[test]
    fn selectors_pick_expected_chains() {
        let params = VSystemParams::desk_scale(0.05, 1.0);
        let dec = jordan_decompose(
            &params.family().unwrap().liouvillian(0.0, 0.05).matrix,
            DEFAULT_CLUSTER_TOL,
        )
        .unwrap();
        let s = BlockSelector::SteadyState.select(&dec).unwrap();
        assert!(dec.chains[s].eigenvalue.norm() < 1e-10);
        let d = BlockSelector::SlowestDecay.select(&dec).unwrap();
        // the slow coherence mode, about Delta_p^2 / (2 gamma_bar)
        assert!(dec.chains[d].eigenvalue.re < 0.0 && dec.chains[d].eigenvalue.re > -0.05);
        assert!(BlockSelector::Index(99).select(&dec).is_err());
    }
}
