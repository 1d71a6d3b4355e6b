use super::liouville::Superoperator;
use crate::numerics::linalg::{c, max_abs};

/// A parameterized family of generators `L0(t; lambda)` with analytic
/// `lambda`-derivative.
pub trait LiouvillianFamily: Send + Sync {
    fn hilbert_dim(&self) -> usize;

    fn liouvillian(&self, t: f64, lambda: f64) -> Superoperator;

    fn d_dlambda(&self, t: f64, lambda: f64) -> Superoperator;

    /// When true, `L(t, lambda) = L(0, lambda)` for all `t`, so the modified
    /// generator `L - d/dt` acts on fixed-`lambda` modes as `L` itself.
    fn time_independent_at_fixed_lambda(&self) -> bool;
}

/// Relative deviation between the analytic `dL/dlambda` and a centered
/// difference with step `h`.
pub fn derivative_consistency<F: LiouvillianFamily + ?Sized>(
    family: &F,
    t: f64,
    lambda: f64,
    h: f64,
) -> f64 {
    let fd = (family.liouvillian(t, lambda + h).matrix - family.liouvillian(t, lambda - h).matrix)
        / c(2.0 * h, 0.0);
    let analytic = family.d_dlambda(t, lambda).matrix;
    max_abs(&(fd - &analytic)) / max_abs(&analytic).max(1e-300)
}
