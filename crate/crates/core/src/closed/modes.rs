//! Instantaneous normal modes `|n(t; lambda)>` and their quasienergies.

use num_complex::Complex64 as C64;

use super::family::HamiltonianFamily;
use crate::error::Result;
use crate::numerics::linalg::{c, fix_gauge, hermitian_eigensystem, CMatrix, CVector};

/// One sampled normal mode with its quasienergy and accumulated phase.
#[derive(Debug, Clone)]
pub struct FloquetMode {
    pub index: usize,
    pub quasienergy: f64,
    pub state: CVector,
    /// Dynamical phase accumulated from 0 at fixed `lambda`.
    pub theta: f64,
}

/// All normal modes at one `(t, lambda)`, ordered by quasienergy branch.
#[derive(Debug, Clone)]
pub struct ModeSet {
    pub quasienergies: Vec<f64>,
    /// Mode `n` is column `n`.
    pub vectors: CMatrix,
}

impl ModeSet {
    pub fn len(&self) -> usize {
        self.quasienergies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.quasienergies.is_empty()
    }

    pub fn mode(&self, n: usize) -> CVector {
        self.vectors.column(n).into_owned()
    }

    /// `<n|psi>` for every mode.
    pub fn amplitudes(&self, psi: &CVector) -> CVector {
        self.vectors.adjoint() * psi
    }

    /// `<m|A|n>` in the mode basis.
    pub fn matrix_elements(&self, a: &CMatrix) -> CMatrix {
        self.vectors.adjoint() * a * &self.vectors
    }
}

/// Source of instantaneous normal modes along a family.
pub trait NormalModes: Send + Sync {
    fn dim(&self) -> usize;

    fn modes(&self, t: f64, lambda: f64) -> Result<ModeSet>;

    fn quasienergies(&self, t: f64, lambda: f64) -> Result<Vec<f64>> {
        Ok(self.modes(t, lambda)?.quasienergies)
    }

    /// `X_mn = <m| d/dlambda |n>` at fixed `t`, in the gauge returned by
    /// [`NormalModes::modes`]. The default is a centered difference in
    /// `lambda`, which is only meaningful when that gauge is smooth.
    fn derivative_overlaps(&self, t: f64, lambda: f64) -> Result<CMatrix> {
        let h = 1e-5 * lambda.abs().max(1.0);
        let here = self.modes(t, lambda)?;
        let up = self.modes(t, lambda + h)?;
        let down = self.modes(t, lambda - h)?;
        let diff = (up.vectors - down.vectors) / c(2.0 * h, 0.0);
        Ok(here.vectors.adjoint() * diff)
    }
}

/// Energy eigenstates of a `t`-independent family; the normal modes of a
/// static Hamiltonian. Gauge: largest component real and positive.
pub struct EigenModes<'a, F: ?Sized> {
    family: &'a F,
}

impl<'a, F: HamiltonianFamily + ?Sized> EigenModes<'a, F> {
    pub fn new(family: &'a F) -> Self {
        Self { family }
    }
}

impl<F: HamiltonianFamily + ?Sized> NormalModes for EigenModes<'_, F> {
    fn dim(&self) -> usize {
        self.family.dim()
    }

    fn modes(&self, t: f64, lambda: f64) -> Result<ModeSet> {
        let (values, mut vectors) = hermitian_eigensystem(&self.family.hamiltonian(t, lambda))?;
        for k in 0..vectors.ncols() {
            let mut v = vectors.column(k).into_owned();
            fix_gauge(&mut v);
            vectors.set_column(k, &v);
        }
        Ok(ModeSet {
            quasienergies: values,
            vectors,
        })
    }
}

/// Residual `max_n ||(H - i d/dt)|n> - eps_n |n>||` with the time derivative
/// taken as a centered difference of `modes` in `t`.
pub fn floquet_residual<F, M>(family: &F, modes: &M, t: f64, lambda: f64) -> Result<f64>
where
    F: HamiltonianFamily + ?Sized,
    M: NormalModes + ?Sized,
{
    let h = 1e-5;
    let here = modes.modes(t, lambda)?;
    let up = modes.modes(t + h, lambda)?;
    let down = modes.modes(t - h, lambda)?;
    let dt = (up.vectors - down.vectors) / c(2.0 * h, 0.0);
    let hf = family.hamiltonian(t, lambda) * &here.vectors - dt * C64::new(0.0, 1.0);
    let mut worst: f64 = 0.0;
    for n in 0..here.len() {
        let r = hf.column(n) - here.vectors.column(n) * c(here.quasienergies[n], 0.0);
        worst = worst.max(r.norm());
    }
    Ok(worst)
}
