use super::family::LiouvillianFamily;
use super::liouville::{devectorize, DensityMatrix};
use crate::error::{AmtError, Result};
use crate::numerics::linalg::{c, null_space, CMatrix, CVector};

/// Relative singular-value threshold for the generator kernel.
pub const KERNEL_TOL: f64 = 1e-10;

/// Kernel of `L(t, lambda)` as a density matrix: Hermitized and
/// trace-normalized. Fails unless the kernel is one-dimensional.
pub fn instantaneous_steady_state<F: LiouvillianFamily + ?Sized>(
    family: &F,
    t: f64,
    lambda: f64,
) -> Result<DensityMatrix> {
    steady_state_of(&family.liouvillian(t, lambda).matrix, family.hilbert_dim())
}

pub fn steady_state_of(l: &CMatrix, hilbert_dim: usize) -> Result<DensityMatrix> {
    let kernel = null_space(l, KERNEL_TOL)?;
    if kernel.ncols() != 1 {
        return Err(AmtError::AmbiguousSteadyState(kernel.ncols()));
    }
    let v: CVector = kernel.column(0).into_owned();
    let rho = devectorize(&v, hilbert_dim)?;
    let rho = (&rho + rho.adjoint()) * c(0.5, 0.0);
    let tr = rho.trace();
    if tr.norm() < 1e-14 {
        return Err(AmtError::InvalidParameter(
            "kernel vector is traceless".into(),
        ));
    }
    Ok(DensityMatrix(rho / tr))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::open::liouville::Superoperator;
    use crate::open::vsystem::{VSystemParams, E1, E2, G};

    #[test]
    fn no_pumping_gives_ground_state() {
        let params = VSystemParams::desk_scale(0.0, 1.0);
        let rho = instantaneous_steady_state(&params.family().unwrap(), 0.0, 0.0).unwrap();
        assert!((rho.0[(G, G)].re - 1.0).abs() < 1e-12);
        rho.validate().unwrap();
    }

    #[test]
    fn unaligned_dipoles_give_diagonal_balance() {
        let mut params = VSystemParams::desk_scale(0.05, 1.0);
        params.p = 0.0;
        let rho = instantaneous_steady_state(&params.family().unwrap(), 0.0, params.nbar).unwrap();
        let n = params.nbar;
        assert!(rho.0[(E1, E2)].norm() < 1e-12);
        assert!((rho.0[(E1, E1)].re - n / (1.0 + 3.0 * n)).abs() < 1e-12);
        assert!((rho.0[(G, G)].re - (1.0 + n) / (1.0 + 3.0 * n)).abs() < 1e-12);
    }

    #[test]
    fn aligned_dipoles_leave_small_coherence() {
        let params = VSystemParams::desk_scale(0.019, 1.0);
        let rho = instantaneous_steady_state(&params.family().unwrap(), 0.0, params.nbar).unwrap();
        rho.validate().unwrap();
        // small but not zero: the Bloch-Redfield steady state is not the
        // Gibbs state
        assert!(rho.0[(E1, E2)].norm() < 0.01);
    }

    #[test]
    fn pure_dephasing_is_ambiguous() {
        let h = CMatrix::from_diagonal(&CVector::from_vec(vec![c(0.0, 0.0), c(1.0, 0.0)]));
        let l = Superoperator::commutator(&h);
        assert!(matches!(
            steady_state_of(&l.matrix, 2),
            Err(AmtError::AmbiguousSteadyState(2))
        ));
    }
}
