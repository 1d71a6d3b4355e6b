//! Numerical Floquet modes from the one-period propagator.
//!
//! `U(T; lambda)` has eigenvalues `exp(-i eps_n T)`. The quasienergies are
//! first folded into `(-pi/T, pi/T]`; a mode built as
//! `exp(i eps t) U(t) v_n` solves the Floquet eigenproblem for every `eps` in
//! `eps_folded + k pi / T` (odd `k` gives antiperiodic modes), so the branch
//! is picked against a reference value when one is available.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;

use super::family::HamiltonianFamily;
use super::modes::{FloquetMode, ModeSet, NormalModes};
use crate::error::{AmtError, Result};
use crate::numerics::linalg::{c, fix_gauge, max_abs, schur_form, CMatrix, CVector, I};

/// Fixed-step RK4 settings for the period propagator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FloquetSolver {
    pub min_steps: usize,
    /// Upper bound on `h * (||H|| + 2 pi / T)`.
    pub phase_per_step: f64,
}

impl Default for FloquetSolver {
    fn default() -> Self {
        Self {
            min_steps: 2000,
            phase_per_step: 2e-3,
        }
    }
}

/// Folded spectrum of one period propagator.
#[derive(Debug, Clone)]
pub struct FloquetSpectrum {
    pub lambda: f64,
    pub period: f64,
    /// Quasienergies folded into `(-pi/T, pi/T]`.
    pub folded: Vec<f64>,
    /// Floquet multipliers `exp(-i eps T)`.
    pub multipliers: Vec<C64>,
    /// Mode vectors at `t = 0` as columns, gauge-fixed.
    pub initial_modes: CMatrix,
    steps_per_period: usize,
}

impl FloquetSolver {
    fn steps_for(
        &self,
        family: &(impl HamiltonianFamily + ?Sized),
        lambda: f64,
        span: f64,
        period: f64,
    ) -> usize {
        let scale =
            max_abs(&family.hamiltonian(0.0, lambda)) * family.dim() as f64 + 2.0 * PI / period;
        let n = (span * scale / self.phase_per_step).ceil() as usize;
        n.max(((span / period) * self.min_steps as f64).ceil() as usize)
            .max(1)
    }

    /// `U(t; lambda)` from `0` to `t` by RK4 on all columns at once.
    pub fn propagator<F>(&self, family: &F, lambda: f64, t: f64, steps: usize) -> CMatrix
    where
        F: HamiltonianFamily + ?Sized,
    {
        let n = family.dim();
        let mut u = CMatrix::identity(n, n);
        if t == 0.0 {
            return u;
        }
        let h = t / steps as f64;
        let rhs = |s: f64, u: &CMatrix| -> CMatrix { family.hamiltonian(s, lambda) * u * (-I) };
        for k in 0..steps {
            let s = k as f64 * h;
            let k1 = rhs(s, &u);
            let k2 = rhs(s + 0.5 * h, &(&u + &k1 * c(0.5 * h, 0.0)));
            let k3 = rhs(s + 0.5 * h, &(&u + &k2 * c(0.5 * h, 0.0)));
            let k4 = rhs(s + h, &(&u + &k3 * c(h, 0.0)));
            u += (k1 + k2 * c(2.0, 0.0) + k3 * c(2.0, 0.0) + k4) * c(h / 6.0, 0.0);
        }
        u
    }

    pub fn spectrum<F>(&self, family: &F, lambda: f64) -> Result<FloquetSpectrum>
    where
        F: HamiltonianFamily + ?Sized,
    {
        let period = family
            .period(lambda)?
            .ok_or(AmtError::PeriodUndefined { lambda })?;
        let steps = self.steps_for(family, lambda, period, period);
        let u = self.propagator(family, lambda, period, steps);
        // U is unitary, hence normal: its Schur vectors are eigenvectors.
        let (q, t) = schur_form(&u)?;
        let dim = q.ncols();
        let multipliers: Vec<C64> = (0..dim).map(|k| t[(k, k)]).collect();
        for i in 0..dim {
            for j in i + 1..dim {
                let separation = (multipliers[i] - multipliers[j]).norm();
                if separation < 1e-8 {
                    return Err(AmtError::DegenerateFloquet { separation });
                }
            }
        }
        let mut folded: Vec<f64> = multipliers
            .iter()
            .map(|m| fold(-m.arg() / period, period))
            .collect();
        let mut order: Vec<usize> = (0..dim).collect();
        order.sort_by(|&a, &b| folded[a].total_cmp(&folded[b]));
        folded = order.iter().map(|&k| folded[k]).collect();
        let multipliers = order.iter().map(|&k| multipliers[k]).collect();
        let mut initial_modes = CMatrix::zeros(dim, dim);
        for (col, &k) in order.iter().enumerate() {
            let mut v: CVector = q.column(k).into_owned();
            fix_gauge(&mut v);
            initial_modes.set_column(col, &v);
        }
        Ok(FloquetSpectrum {
            lambda,
            period,
            folded,
            multipliers,
            initial_modes,
            steps_per_period: steps,
        })
    }

    /// Mode vectors `exp(i eps_n t) U(t) v_n` at time `t` for the given
    /// (unfolded) quasienergies.
    pub fn evolve_modes<F>(
        &self,
        family: &F,
        spectrum: &FloquetSpectrum,
        quasienergies: &[f64],
        t: f64,
    ) -> CMatrix
    where
        F: HamiltonianFamily + ?Sized,
    {
        let steps = ((t.abs() / spectrum.period) * spectrum.steps_per_period as f64)
            .ceil()
            .max(1.0) as usize;
        let u = self.propagator(family, spectrum.lambda, t, steps);
        let mut out = u * &spectrum.initial_modes;
        for (k, &eps) in quasienergies.iter().enumerate() {
            let phase = C64::from_polar(1.0, eps * t);
            for z in out.column_mut(k).iter_mut() {
                *z *= phase;
            }
        }
        out
    }
}

/// Folds into `(-pi/T, pi/T]`.
pub fn fold(eps: f64, period: f64) -> f64 {
    let zone = 2.0 * PI / period;
    let mut e = eps - zone * (eps / zone).round();
    if e <= -0.5 * zone {
        e += zone;
    }
    if e > 0.5 * zone {
        e -= zone;
    }
    e
}

/// The branch `folded + k pi / T` closest to `reference`.
pub fn unfold(folded: f64, period: f64, reference: f64) -> f64 {
    let half = PI / period;
    folded + half * ((reference - folded) / half).round()
}

/// Numerical Floquet modes at `(t, lambda)`. With `reference` quasienergies
/// each numerical branch is unfolded towards, and labelled by, its nearest
/// reference value; without, the folded values are kept in ascending order.
pub fn numeric_floquet_modes<F>(
    family: &F,
    lambda: f64,
    t: f64,
    reference: Option<&[f64]>,
    solver: &FloquetSolver,
) -> Result<Vec<FloquetMode>>
where
    F: HamiltonianFamily + ?Sized,
{
    let spectrum = solver.spectrum(family, lambda)?;
    let eps = match reference {
        Some(r) => assign_branches(&spectrum, r)?,
        None => spectrum.folded.clone(),
    };
    let vectors = solver.evolve_modes(family, &spectrum, &eps, t);
    let mut modes: Vec<FloquetMode> = eps
        .iter()
        .enumerate()
        .map(|(k, &e)| FloquetMode {
            index: k,
            quasienergy: e,
            state: vectors.column(k).into_owned(),
            theta: e * t,
        })
        .collect();
    modes.sort_by(|a, b| a.quasienergy.total_cmp(&b.quasienergy));
    for (k, m) in modes.iter_mut().enumerate() {
        m.index = k;
    }
    Ok(modes)
}

/// Unfolds every folded value towards a distinct reference value, greedily by
/// smallest distance.
fn assign_branches(spectrum: &FloquetSpectrum, reference: &[f64]) -> Result<Vec<f64>> {
    let dim = spectrum.folded.len();
    if reference.len() != dim {
        return Err(AmtError::DimensionMismatch {
            expected: dim,
            got: reference.len(),
        });
    }
    let mut candidates = Vec::with_capacity(dim * dim);
    for (i, &f) in spectrum.folded.iter().enumerate() {
        for (j, &r) in reference.iter().enumerate() {
            let e = unfold(f, spectrum.period, r);
            candidates.push(((e - r).abs(), i, j, e));
        }
    }
    candidates.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out = vec![f64::NAN; dim];
    let mut used_ref = vec![false; dim];
    for (_, i, j, e) in candidates {
        if out[i].is_nan() && !used_ref[j] {
            out[i] = e;
            used_ref[j] = true;
        }
    }
    Ok(out)
}

/// Follows Floquet branches along a sequence of `lambda` values: each step
/// matches modes to the previous step by overlap of their `t = 0` vectors and
/// unfolds towards the previous quasienergy.
#[derive(Debug, Clone)]
pub struct FloquetContinuation {
    solver: FloquetSolver,
    quasienergies: Vec<f64>,
    initial_modes: CMatrix,
}

impl FloquetContinuation {
    /// Seeds the branches at `lambda` against `reference` quasienergies.
    pub fn seed<F>(
        family: &F,
        lambda: f64,
        reference: &[f64],
        solver: FloquetSolver,
    ) -> Result<Self>
    where
        F: HamiltonianFamily + ?Sized,
    {
        let spectrum = solver.spectrum(family, lambda)?;
        let eps = assign_branches(&spectrum, reference)?;
        let mut order: Vec<usize> = (0..eps.len()).collect();
        order.sort_by(|&a, &b| eps[a].total_cmp(&eps[b]));
        Ok(Self {
            solver,
            quasienergies: order.iter().map(|&k| eps[k]).collect(),
            initial_modes: CMatrix::from_fn(eps.len(), eps.len(), |i, j| {
                spectrum.initial_modes[(i, order[j])]
            }),
        })
    }

    pub fn quasienergies(&self) -> &[f64] {
        &self.quasienergies
    }

    /// Moves to `lambda`, keeping the branch labels.
    pub fn advance<F>(&mut self, family: &F, lambda: f64) -> Result<&[f64]>
    where
        F: HamiltonianFamily + ?Sized,
    {
        let spectrum = self.solver.spectrum(family, lambda)?;
        let dim = self.quasienergies.len();
        let overlaps = self.initial_modes.adjoint() * &spectrum.initial_modes;
        let mut next_eps = vec![f64::NAN; dim];
        let mut next_modes = CMatrix::zeros(dim, dim);
        let mut taken = vec![false; dim];
        for old in 0..dim {
            let mut best = None;
            let mut best_mag = -1.0;
            for new in (0..dim).filter(|&k| !taken[k]) {
                let mag = overlaps[(old, new)].norm();
                if mag > best_mag {
                    best_mag = mag;
                    best = Some(new);
                }
            }
            let new = best.ok_or(AmtError::DegenerateFloquet { separation: 0.0 })?;
            taken[new] = true;
            next_eps[old] = unfold(
                spectrum.folded[new],
                spectrum.period,
                self.quasienergies[old],
            );
            next_modes.set_column(old, &spectrum.initial_modes.column(new));
        }
        self.quasienergies = next_eps;
        self.initial_modes = next_modes;
        Ok(&self.quasienergies)
    }
}

/// Normal-mode provider backed by [`numeric_floquet_modes`], with branches
/// chosen against `reference(t, lambda)`.
pub struct NumericFloquetModes<'a, F: ?Sized, R> {
    pub family: &'a F,
    pub reference: R,
    pub solver: FloquetSolver,
}

impl<F, R> NormalModes for NumericFloquetModes<'_, F, R>
where
    F: HamiltonianFamily + ?Sized,
    R: Fn(f64, f64) -> Vec<f64> + Send + Sync,
{
    fn dim(&self) -> usize {
        self.family.dim()
    }

    fn modes(&self, t: f64, lambda: f64) -> Result<ModeSet> {
        let reference = (self.reference)(t, lambda);
        let modes = numeric_floquet_modes(self.family, lambda, t, Some(&reference), &self.solver)?;
        let dim = modes.len();
        let mut vectors = CMatrix::zeros(dim, dim);
        for (k, m) in modes.iter().enumerate() {
            vectors.set_column(k, &m.state);
        }
        Ok(ModeSet {
            quasienergies: modes.iter().map(|m| m.quasienergy).collect(),
            vectors,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closed::modes::floquet_residual;
    use crate::closed::rabi::{rabi_family, RabiModes};

    #[test]
    fn folding_and_unfolding() {
        let period = 2.0;
        assert!((fold(PI, period) - 0.0).abs() < 1e-15);
        assert!((fold(0.5 * PI, period) - 0.5 * PI).abs() < 1e-15);
        assert!((fold(-0.5 * PI, period) - 0.5 * PI).abs() < 1e-15);
        assert!((unfold(0.1, period, 0.1 + 1.6).abs() - (0.1 + 0.5 * PI)).abs() < 1e-15);
    }

    #[test]
    fn decoupled_family_gives_bare_quasienergies() {
        let f = rabi_family(1.0, C64::new(0.0, 0.0));
        let omega = 0.7;
        let period = 2.0 * PI / omega;
        let spec = FloquetSolver::default().spectrum(&f, omega).unwrap();
        // the period propagator is diag(e^{i T}, e^{-i T})
        let mut expected = vec![fold(-1.0, period), fold(1.0, period)];
        expected.sort_by(f64::total_cmp);
        for (a, b) in spec.folded.iter().zip(&expected) {
            assert!((a - b).abs() < 1e-10, "{a} vs {b}");
        }
        let detuning = 1.0 - 0.5 * omega;
        let modes = numeric_floquet_modes(
            &f,
            omega,
            0.9,
            Some(&[-detuning, detuning]),
            &FloquetSolver::default(),
        )
        .unwrap();
        assert!((modes[0].quasienergy + detuning).abs() < 1e-10);
        assert!((modes[1].quasienergy - detuning).abs() < 1e-10);
        assert!((modes[0].state[0].norm() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn rabi_modes_recovered() {
        let f = rabi_family(1.0, C64::from_polar(0.5, 0.3));
        let omega = 1.3;
        let analytic = RabiModes::new(f);
        let reference = analytic.quasienergies(0.0, omega).unwrap();
        let t = 0.8;
        let modes =
            numeric_floquet_modes(&f, omega, t, Some(&reference), &FloquetSolver::default())
                .unwrap();
        let exact = analytic.modes(t, omega).unwrap();
        for (k, m) in modes.iter().enumerate() {
            assert!((m.quasienergy - exact.quasienergies[k]).abs() < 1e-9);
            assert!(m.state.dotc(&exact.mode(k)).norm() > 1.0 - 1e-9);
        }
        let provider = NumericFloquetModes {
            family: &f,
            reference: move |_, _| reference.clone(),
            solver: FloquetSolver::default(),
        };
        assert!(floquet_residual(&f, &provider, t, omega).unwrap() < 1e-6);
    }

    #[test]
    fn continuation_tracks_branches() {
        let f = rabi_family(1.0, C64::new(0.5, 0.0));
        let analytic = RabiModes::new(f);
        let start = 1.0;
        let mut cont = FloquetContinuation::seed(
            &f,
            start,
            &analytic.quasienergies(0.0, start).unwrap(),
            FloquetSolver::default(),
        )
        .unwrap();
        for k in 1..=10 {
            let w = start + 0.1 * k as f64;
            let eps = cont.advance(&f, w).unwrap().to_vec();
            let exact = analytic.quasienergies(0.0, w).unwrap();
            for (a, b) in eps.iter().zip(&exact) {
                assert!((a - b).abs() < 1e-9, "omega {w}: {a} vs {b}");
            }
        }
    }
}
