//! Interaction picture with respect to a static diagonal reference `H0`.

use num_complex::Complex64 as C64;

use crate::error::{AmtError, Result};
use crate::numerics::linalg::{CMatrix, CVector};

/// `H_I(t) = exp(i H0 t) (H(t) - H0) exp(-i H0 t)` for diagonal `H0`.
pub struct InteractionPicture<H> {
    h: H,
    energies: Vec<f64>,
}

/// Builds the interaction-picture generator. `h0` must be diagonal with a
/// real diagonal.
pub fn interaction_picture_transform<H>(h: H, h0: &CMatrix) -> Result<InteractionPicture<H>>
where
    H: Fn(f64) -> CMatrix,
{
    if !h0.is_square() {
        return Err(AmtError::NotSquare {
            rows: h0.nrows(),
            cols: h0.ncols(),
        });
    }
    let mut off = 0.0f64;
    for ((i, j), z) in h0
        .iter()
        .enumerate()
        .map(|(k, z)| ((k % h0.nrows(), k / h0.nrows()), z))
    {
        if i != j {
            off = off.max(z.norm());
        } else {
            off = off.max(z.im.abs());
        }
    }
    if off > 0.0 {
        return Err(AmtError::NonDiagonalReference(off));
    }
    Ok(InteractionPicture {
        h,
        energies: (0..h0.nrows()).map(|k| h0[(k, k)].re).collect(),
    })
}

impl<H> InteractionPicture<H>
where
    H: Fn(f64) -> CMatrix,
{
    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    /// Entries `(H_ij(t) - E_i delta_ij) exp(i (E_i - E_j) t)`.
    pub fn hamiltonian(&self, t: f64) -> CMatrix {
        let h = (self.h)(t);
        let n = self.energies.len();
        CMatrix::from_fn(n, n, |i, j| {
            let base = if i == j {
                h[(i, j)] - self.energies[i]
            } else {
                h[(i, j)]
            };
            base * C64::from_polar(1.0, (self.energies[i] - self.energies[j]) * t)
        })
    }

    /// `exp(-i H0 t) psi_I`.
    pub fn to_lab(&self, t: f64, psi: &CVector) -> CVector {
        CVector::from_fn(psi.len(), |k, _| {
            psi[k] * C64::from_polar(1.0, -self.energies[k] * t)
        })
    }

    /// `exp(i H0 t) psi`.
    pub fn to_interaction(&self, t: f64, psi: &CVector) -> CVector {
        CVector::from_fn(psi.len(), |k, _| {
            psi[k] * C64::from_polar(1.0, self.energies[k] * t)
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closed::family::HamiltonianFamily;
    use crate::closed::rabi::rabi_family;
    use crate::numerics::linalg::{c, fidelity, I};
    use crate::numerics::ode::{ode_integrate, TimeGrid};

    #[test]
    fn static_reference_vanishes() {
        let h0 = CMatrix::from_diagonal(&CVector::from_vec(vec![c(-0.3, 0.0), c(1.1, 0.0)]));
        let h0c = h0.clone();
        let ip = interaction_picture_transform(move |_| h0c.clone(), &h0).unwrap();
        assert_eq!(ip.hamiltonian(2.7).norm(), 0.0);
    }

    #[test]
    fn non_diagonal_reference_rejected() {
        let h0 =
            CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.1, 0.0), c(0.1, 0.0), c(0.0, 0.0)]);
        let err = interaction_picture_transform(|_| CMatrix::zeros(2, 2), &h0)
            .err()
            .unwrap();
        assert_eq!(err, AmtError::NonDiagonalReference(0.1));
    }

    #[test]
    fn rabi_rotating_frame_is_static() {
        let (delta0, omega) = (1.0, 1.4);
        let v = C64::from_polar(0.5, 0.6);
        let f = rabi_family(delta0, v);
        let h0 = CMatrix::from_diagonal(&CVector::from_vec(vec![
            c(-0.5 * omega, 0.0),
            c(0.5 * omega, 0.0),
        ]));
        let ip = interaction_picture_transform(move |t| f.hamiltonian(t, omega), &h0).unwrap();
        let detuning = delta0 - 0.5 * omega;
        let expected =
            CMatrix::from_row_slice(2, 2, &[c(-detuning, 0.0), v, v.conj(), c(detuning, 0.0)]);
        for t in [0.0, 0.7, 5.3, 40.0] {
            assert!((ip.hamiltonian(t) - &expected).norm() < 1e-13);
        }
    }

    #[test]
    fn frames_agree_after_restoration() {
        let f = rabi_family(1.0, C64::new(0.4, 0.2));
        let lambda = |t: f64| 1.2 + 0.05 * t;
        let h0 = CMatrix::from_diagonal(&CVector::from_vec(vec![c(-0.6, 0.0), c(0.6, 0.0)]));
        let ip = interaction_picture_transform(move |t| f.hamiltonian(t, lambda(t)), &h0).unwrap();
        let grid = TimeGrid::fixed(0.0, 10.0, 4000).unwrap();
        let psi0 = CVector::from_vec(vec![c(1.0, 0.0), c(0.0, 0.0)]);
        let samples = [2.5, 5.0, 10.0];
        let lab = ode_integrate(
            |t, y| f.hamiltonian(t, lambda(t)) * y * (-I),
            &psi0,
            &grid,
            &samples,
        )
        .unwrap();
        let rot =
            ode_integrate(|t, y| ip.hamiltonian(t) * y * (-I), &psi0, &grid, &samples).unwrap();
        for ((t, a), (_, b)) in lab.iter().zip(&rot) {
            assert!(fidelity(a, &ip.to_lab(*t, b)) > 1.0 - 1e-10);
            assert!((ip.to_interaction(*t, &ip.to_lab(*t, b)) - b).norm() < 1e-14);
        }
    }
}
