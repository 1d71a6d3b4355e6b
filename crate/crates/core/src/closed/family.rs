use crate::error::Result;
use crate::numerics::linalg::{max_abs, CMatrix};

/// A parameterized family of reference Hamiltonians `H0(t; lambda)` with its
/// analytic `lambda`-derivative.
pub trait HamiltonianFamily: Send + Sync {
    fn dim(&self) -> usize;

    fn hamiltonian(&self, t: f64, lambda: f64) -> CMatrix;

    fn d_dlambda(&self, t: f64, lambda: f64) -> CMatrix;

    /// Period of `H0(.; lambda)`, or `None` when the family does not depend on
    /// `t` at all.
    fn period(&self, lambda: f64) -> Result<Option<f64>>;

    fn is_time_independent(&self) -> bool {
        false
    }
}

/// A family `H(lambda)` with no explicit time dependence.
pub struct StaticFamily<H, D> {
    dim: usize,
    h: H,
    dh: D,
}

impl<H, D> StaticFamily<H, D>
where
    H: Fn(f64) -> CMatrix + Send + Sync,
    D: Fn(f64) -> CMatrix + Send + Sync,
{
    pub fn new(dim: usize, h: H, dh: D) -> Self {
        Self { dim, h, dh }
    }
}

impl<H, D> HamiltonianFamily for StaticFamily<H, D>
where
    H: Fn(f64) -> CMatrix + Send + Sync,
    D: Fn(f64) -> CMatrix + Send + Sync,
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn hamiltonian(&self, _t: f64, lambda: f64) -> CMatrix {
        (self.h)(lambda)
    }

    fn d_dlambda(&self, _t: f64, lambda: f64) -> CMatrix {
        (self.dh)(lambda)
    }

    fn period(&self, _lambda: f64) -> Result<Option<f64>> {
        Ok(None)
    }

    fn is_time_independent(&self) -> bool {
        true
    }
}

/// Two-level avoided crossing `H(lambda) = lambda sigma_z + gap/2 sigma_x`.
pub fn avoided_crossing(
    gap: f64,
) -> StaticFamily<impl Fn(f64) -> CMatrix + Send + Sync, impl Fn(f64) -> CMatrix + Send + Sync> {
    use crate::numerics::linalg::c;
    let g = 0.5 * gap;
    StaticFamily::new(
        2,
        move |l| CMatrix::from_row_slice(2, 2, &[c(l, 0.0), c(g, 0.0), c(g, 0.0), c(-l, 0.0)]),
        |_| CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)]),
    )
}

/// Relative deviation between the analytic `dH/dlambda` and a centered
/// difference with step `h`.
pub fn derivative_consistency<F: HamiltonianFamily + ?Sized>(
    family: &F,
    t: f64,
    lambda: f64,
    h: f64,
) -> f64 {
    let fd = (family.hamiltonian(t, lambda + h) - family.hamiltonian(t, lambda - h))
        / crate::numerics::linalg::c(2.0 * h, 0.0);
    let analytic = family.d_dlambda(t, lambda);
    max_abs(&(fd - &analytic)) / max_abs(&analytic).max(1e-300)
}
