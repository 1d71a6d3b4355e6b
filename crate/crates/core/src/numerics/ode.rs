//! Explicit Runge-Kutta integration of complex linear and non-linear ODEs.
//!
//! Fixed-step mode is classical RK4 on a uniform grid. Adaptive mode is the
//! Dormand-Prince 5(4) pair with an elementary step controller. In both modes
//! the integrator lands exactly on every requested sample time.

use serde::{Deserialize, Serialize};

use super::linalg::CVector;
use crate::error::{AmtError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub t0: f64,
    pub t1: f64,
    /// Fixed-step count, or the initial step guess `(t1 - t0) / num_steps`
    /// when adaptive.
    pub num_steps: usize,
    pub adaptive: bool,
    pub rel_tol: f64,
    pub abs_tol: f64,
}

impl TimeGrid {
    pub fn fixed(t0: f64, t1: f64, num_steps: usize) -> Result<Self> {
        let grid = Self {
            t0,
            t1,
            num_steps,
            adaptive: false,
            rel_tol: 0.0,
            abs_tol: 0.0,
        };
        grid.validate()?;
        Ok(grid)
    }

    /// Fixed grid whose step is at most `max_step`.
    pub fn with_max_step(t0: f64, t1: f64, max_step: f64) -> Result<Self> {
        if !(max_step > 0.0) {
            return Err(AmtError::InvalidGrid(format!(
                "step {max_step} must be positive"
            )));
        }
        let n = ((t1 - t0) / max_step).ceil().max(1.0) as usize;
        Self::fixed(t0, t1, n)
    }

    pub fn adaptive(t0: f64, t1: f64, rel_tol: f64, abs_tol: f64) -> Result<Self> {
        let grid = Self {
            t0,
            t1,
            num_steps: 1000,
            adaptive: true,
            rel_tol,
            abs_tol,
        };
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t1 > self.t0) || !self.t0.is_finite() || !self.t1.is_finite() {
            return Err(AmtError::InvalidGrid(format!(
                "need finite t1 > t0, got [{}, {}]",
                self.t0, self.t1
            )));
        }
        if self.num_steps == 0 {
            return Err(AmtError::InvalidGrid("num_steps must be >= 1".into()));
        }
        if self.adaptive && !(self.rel_tol > 0.0 && self.abs_tol > 0.0) {
            return Err(AmtError::InvalidGrid(
                "adaptive tolerances must be positive".into(),
            ));
        }
        Ok(())
    }

    pub fn step(&self) -> f64 {
        (self.t1 - self.t0) / self.num_steps as f64
    }

    /// The `num_steps + 1` uniform nodes.
    pub fn nodes(&self) -> Vec<f64> {
        let h = self.step();
        (0..=self.num_steps)
            .map(|k| {
                if k == self.num_steps {
                    self.t1
                } else {
                    self.t0 + k as f64 * h
                }
            })
            .collect()
    }

    /// `count` evenly spaced times covering `[t0, t1]` inclusive.
    pub fn uniform_samples(&self, count: usize) -> Vec<f64> {
        linspace(self.t0, self.t1, count)
    }
}

pub fn linspace(a: f64, b: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![a],
        _ => (0..count)
            .map(|k| {
                if k + 1 == count {
                    b
                } else {
                    a + (b - a) * k as f64 / (count - 1) as f64
                }
            })
            .collect(),
    }
}

fn axpy(y: &CVector, h: f64, k: &CVector) -> CVector {
    let mut out = y.clone();
    out.axpy(h.into(), k, 1.0.into());
    out
}

fn rk4_step<F>(f: &F, t: f64, y: &CVector, h: f64) -> CVector
where
    F: Fn(f64, &CVector) -> CVector,
{
    let k1 = f(t, y);
    let k2 = f(t + 0.5 * h, &axpy(y, 0.5 * h, &k1));
    let k3 = f(t + 0.5 * h, &axpy(y, 0.5 * h, &k2));
    let k4 = f(t + h, &axpy(y, h, &k3));
    let mut out = y.clone();
    let w = h / 6.0;
    out.axpy(w.into(), &k1, 1.0.into());
    out.axpy((2.0 * w).into(), &k2, 1.0.into());
    out.axpy((2.0 * w).into(), &k3, 1.0.into());
    out.axpy(w.into(), &k4, 1.0.into());
    out
}

fn check_samples(grid: &TimeGrid, samples: &[f64]) -> Result<()> {
    let span = grid.t1 - grid.t0;
    let slack = 1e-12 * span;
    for w in samples.windows(2) {
        if w[1] < w[0] {
            return Err(AmtError::InvalidGrid("sample times must be sorted".into()));
        }
    }
    if let (Some(first), Some(last)) = (samples.first(), samples.last()) {
        if *first < grid.t0 - slack || *last > grid.t1 + slack {
            return Err(AmtError::InvalidGrid(format!(
                "samples [{first}, {last}] outside [{}, {}]",
                grid.t0, grid.t1
            )));
        }
    }
    Ok(())
}

/// Integrates `dy/dt = f(t, y)` from `grid.t0`, returning `y` at each
/// requested sample time.
pub fn ode_integrate<F>(
    f: F,
    y0: &CVector,
    grid: &TimeGrid,
    sample_times: &[f64],
) -> Result<Vec<(f64, CVector)>>
where
    F: Fn(f64, &CVector) -> CVector,
{
    grid.validate()?;
    check_samples(grid, sample_times)?;
    if grid.adaptive {
        integrate_dopri(&f, y0, grid, sample_times)
    } else {
        integrate_rk4(&f, y0, grid, sample_times)
    }
}

fn integrate_rk4<F>(
    f: &F,
    y0: &CVector,
    grid: &TimeGrid,
    samples: &[f64],
) -> Result<Vec<(f64, CVector)>>
where
    F: Fn(f64, &CVector) -> CVector,
{
    let h = grid.step();
    let mut out = Vec::with_capacity(samples.len());
    let mut next = 0;
    let mut y = y0.clone();
    for k in 0..grid.num_steps {
        let t = grid.t0 + k as f64 * h;
        let t_next = if k + 1 == grid.num_steps {
            grid.t1
        } else {
            grid.t0 + (k + 1) as f64 * h
        };
        while next < samples.len() && samples[next] < t_next {
            let s = samples[next].max(t);
            let ys = if s == t {
                y.clone()
            } else {
                rk4_step(f, t, &y, s - t)
            };
            out.push((samples[next], ys));
            next += 1;
        }
        y = rk4_step(f, t, &y, t_next - t);
    }
    while next < samples.len() {
        out.push((samples[next], y.clone()));
        next += 1;
    }
    Ok(out)
}

// Dormand-Prince 5(4) tableau.
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

fn combo(y: &CVector, h: f64, terms: &[(f64, &CVector)]) -> CVector {
    let mut out = y.clone();
    for (w, k) in terms {
        out.axpy((h * w).into(), k, 1.0.into());
    }
    out
}

fn integrate_dopri<F>(
    f: &F,
    y0: &CVector,
    grid: &TimeGrid,
    samples: &[f64],
) -> Result<Vec<(f64, CVector)>>
where
    F: Fn(f64, &CVector) -> CVector,
{
    let span = grid.t1 - grid.t0;
    let h_min = 1e-14 * span;
    let mut out = Vec::with_capacity(samples.len());
    let mut next = 0;
    let mut t = grid.t0;
    let mut y = y0.clone();
    let mut h = grid.step();
    let mut k1 = f(t, &y);

    while next < samples.len() && samples[next] <= t {
        out.push((samples[next], y.clone()));
        next += 1;
    }

    while t < grid.t1 {
        let target = if next < samples.len() {
            samples[next].min(grid.t1)
        } else {
            grid.t1
        };
        let remaining = target - t;
        let landing = h >= remaining;
        let step = if landing { remaining } else { h };
        if step < h_min && !landing {
            return Err(AmtError::StepUnderflow { t, step });
        }

        let k2 = f(t + step / 5.0, &combo(&y, step, &[(A21, &k1)]));
        let k3 = f(t + 0.3 * step, &combo(&y, step, &[(A31, &k1), (A32, &k2)]));
        let k4 = f(
            t + 0.8 * step,
            &combo(&y, step, &[(A41, &k1), (A42, &k2), (A43, &k3)]),
        );
        let k5 = f(
            t + 8.0 / 9.0 * step,
            &combo(&y, step, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
        );
        let k6 = f(
            t + step,
            &combo(
                &y,
                step,
                &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
            ),
        );
        let y_new = combo(
            &y,
            step,
            &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)],
        );
        let t_new = if landing { target } else { t + step };
        let k7 = f(t_new, &y_new);
        let err_vec = combo(
            &CVector::zeros(y.len()),
            step,
            &[
                (E1, &k1),
                (E3, &k3),
                (E4, &k4),
                (E5, &k5),
                (E6, &k6),
                (E7, &k7),
            ],
        );
        let mut acc = 0.0;
        for i in 0..y.len() {
            let sc = grid.abs_tol + grid.rel_tol * y[i].norm().max(y_new[i].norm());
            acc += (err_vec[i].norm() / sc).powi(2);
        }
        let err = (acc / y.len().max(1) as f64).sqrt();
        let err = if err.is_finite() { err } else { f64::INFINITY };

        if err <= 1.0 {
            t = t_new;
            y = y_new;
            k1 = k7;
            while next < samples.len() && samples[next] <= t {
                out.push((samples[next], y.clone()));
                next += 1;
            }
            let grow = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            };
            // a landing step may be artificially short; do not let it shrink h
            h = if landing {
                h.max(step * grow)
            } else {
                step * grow
            };
        } else {
            h = step * (0.9 * err.powf(-0.2)).clamp(0.1, 1.0);
            if h < h_min {
                return Err(AmtError::StepUnderflow { t, step: h });
            }
        }
    }
    while next < samples.len() {
        out.push((samples[next], y.clone()));
        next += 1;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::linalg::{c, I};
    use std::f64::consts::PI;

    #[test]
    fn scalar_phase_rk4() {
        let y0 = CVector::from_vec(vec![c(1.0, 0.0)]);
        let grid = TimeGrid::fixed(0.0, PI, 2000).unwrap();
        let out = ode_integrate(|_, y| y * (-I), &y0, &grid, &[PI]).unwrap();
        assert!((out[0].1[0] - c(-1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn scalar_phase_adaptive() {
        let y0 = CVector::from_vec(vec![c(1.0, 0.0)]);
        let grid = TimeGrid::adaptive(0.0, PI, 1e-11, 1e-13).unwrap();
        let out = ode_integrate(|_, y| y * (-I), &y0, &grid, &[PI / 2.0, PI]).unwrap();
        assert!((out[0].1[0] - c(0.0, -1.0)).norm() < 1e-9);
        assert!((out[1].1[0] - c(-1.0, 0.0)).norm() < 1e-9);
    }

    #[test]
    fn zero_rhs_is_constant() {
        let y0 = CVector::from_vec(vec![c(0.3, -0.2), c(1.0, 4.0)]);
        for grid in [
            TimeGrid::fixed(0.0, 5.0, 17).unwrap(),
            TimeGrid::adaptive(0.0, 5.0, 1e-8, 1e-10).unwrap(),
        ] {
            let samples = linspace(0.0, 5.0, 9);
            let out = ode_integrate(
                |_, y: &CVector| CVector::zeros(y.len()),
                &y0,
                &grid,
                &samples,
            )
            .unwrap();
            assert_eq!(out.len(), 9);
            for (_, y) in out {
                assert_eq!(y, y0);
            }
        }
    }

    #[test]
    fn off_grid_samples_are_fourth_order() {
        // y' = y, y(0)=1; sample at points not on the grid
        let y0 = CVector::from_vec(vec![c(1.0, 0.0)]);
        let grid = TimeGrid::fixed(0.0, 1.0, 100).unwrap();
        let s = [0.123, 0.5555, 0.999];
        let out = ode_integrate(|_, y| y.clone(), &y0, &grid, &s).unwrap();
        for (t, y) in out {
            assert!((y[0].re - t.exp()).abs() < 1e-9, "t={t}");
        }
    }

    #[test]
    fn invalid_grids() {
        assert!(TimeGrid::fixed(1.0, 1.0, 10).is_err());
        assert!(TimeGrid::fixed(0.0, 1.0, 0).is_err());
        assert!(TimeGrid::adaptive(0.0, 1.0, 0.0, 1e-9).is_err());
        let grid = TimeGrid::fixed(0.0, 1.0, 10).unwrap();
        let y0 = CVector::from_vec(vec![c(1.0, 0.0)]);
        assert!(ode_integrate(|_, y| y.clone(), &y0, &grid, &[2.0]).is_err());
        assert!(ode_integrate(|_, y| y.clone(), &y0, &grid, &[0.5, 0.1]).is_err());
    }

    #[test]
    fn underflow_reports_last_good_time() {
        // blows up at t = 1
        let y0 = CVector::from_vec(vec![c(1.0, 0.0)]);
        let grid = TimeGrid::adaptive(0.0, 2.0, 1e-10, 1e-12).unwrap();
        let err = ode_integrate(|_, y: &CVector| y.map(|z| z * z), &y0, &grid, &[2.0]).unwrap_err();
        match err {
            AmtError::StepUnderflow { t, .. } => assert!(t > 0.9 && t < 1.0 + 1e-9),
            other => panic!("unexpected {other:?}"),
        }
    }
}
