//! Liouville space: column-stacked density matrices and superoperators.
//!
//! `vec(rho)[i + j N] = rho[i, j]`, so `vec(A X B) = (B^T ⊗ A) vec(X)` and
//! `<<A|B>> = Tr(A^H B)` is the ordinary complex dot product.

use num_complex::Complex64 as C64;

use crate::error::{AmtError, Result};
use crate::numerics::linalg::{c, hermitian_eigensystem, kron, max_abs, CMatrix, CVector, I};

pub fn vectorize(rho: &CMatrix) -> CVector {
    CVector::from_column_slice(rho.as_slice())
}

pub fn devectorize(v: &CVector, dim: usize) -> Result<CMatrix> {
    if v.len() != dim * dim {
        return Err(AmtError::DimensionMismatch {
            expected: dim * dim,
            got: v.len(),
        });
    }
    Ok(CMatrix::from_column_slice(dim, dim, v.as_slice()))
}

/// `<<A|B>> = Tr(A^H B)`.
pub fn liouville_inner(a: &CVector, b: &CVector) -> C64 {
    a.dotc(b)
}

/// `<<1|`, the vectorized identity; `<<1|rho>>` is the trace.
pub fn trace_functional(dim: usize) -> CVector {
    vectorize(&CMatrix::identity(dim, dim))
}

/// A density matrix with validation helpers.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix(pub CMatrix);

impl DensityMatrix {
    pub fn pure(psi: &CVector) -> Self {
        Self(psi * psi.adjoint())
    }

    /// `|k><k|` in dimension `dim`.
    pub fn basis_state(dim: usize, k: usize) -> Self {
        let mut m = CMatrix::zeros(dim, dim);
        m[(k, k)] = c(1.0, 0.0);
        Self(m)
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn trace(&self) -> C64 {
        self.0.trace()
    }

    pub fn purity(&self) -> f64 {
        let v = vectorize(&self.0);
        v.dotc(&v).re
    }

    /// Smallest eigenvalue of the Hermitian part.
    pub fn min_eigenvalue(&self) -> f64 {
        let h = (&self.0 + self.0.adjoint()) * c(0.5, 0.0);
        hermitian_eigensystem(&h)
            .map(|(v, _)| v[0])
            .unwrap_or(f64::NAN)
    }

    /// Checks Hermiticity (1e-10), unit trace (1e-10) and positivity
    /// (eigenvalues >= -1e-8).
    pub fn validate(&self) -> Result<()> {
        if !self.0.is_square() {
            return Err(AmtError::NotSquare {
                rows: self.0.nrows(),
                cols: self.0.ncols(),
            });
        }
        let deviation = max_abs(&(&self.0 - self.0.adjoint()));
        if deviation > 1e-10 {
            return Err(AmtError::NotHermitian {
                deviation,
                scale: max_abs(&self.0),
            });
        }
        let drift = (self.trace() - 1.0).norm();
        if drift > 1e-10 {
            return Err(AmtError::TraceDrift { t: 0.0, drift });
        }
        let min_eigenvalue = self.min_eigenvalue();
        if min_eigenvalue < -1e-8 {
            return Err(AmtError::Positivity {
                t: 0.0,
                min_eigenvalue,
            });
        }
        Ok(())
    }
}

/// `(1/2) sum |eig(a - b)|` for Hermitian `a`, `b`.
pub fn trace_distance(a: &CMatrix, b: &CMatrix) -> f64 {
    let d = a - b;
    let h = (&d + d.adjoint()) * c(0.5, 0.0);
    hermitian_eigensystem(&h)
        .map(|(v, _)| 0.5 * v.iter().map(|x| x.abs()).sum::<f64>())
        .unwrap_or(f64::NAN)
}

/// A superoperator on `hilbert_dim x hilbert_dim` matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct Superoperator {
    pub hilbert_dim: usize,
    pub matrix: CMatrix,
}

impl Superoperator {
    pub fn new(hilbert_dim: usize, matrix: CMatrix) -> Result<Self> {
        let n = hilbert_dim * hilbert_dim;
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(AmtError::DimensionMismatch {
                expected: n,
                got: matrix.nrows(),
            });
        }
        Ok(Self {
            hilbert_dim,
            matrix,
        })
    }

    pub fn zeros(hilbert_dim: usize) -> Self {
        let n = hilbert_dim * hilbert_dim;
        Self {
            hilbert_dim,
            matrix: CMatrix::zeros(n, n),
        }
    }

    /// `X -> A X B`.
    pub fn sandwich(a: &CMatrix, b: &CMatrix) -> Self {
        Self {
            hilbert_dim: a.nrows(),
            matrix: kron(&b.transpose(), a),
        }
    }

    /// `X -> -i [H, X]`.
    pub fn commutator(h: &CMatrix) -> Self {
        let n = h.nrows();
        let id = CMatrix::identity(n, n);
        Self {
            hilbert_dim: n,
            matrix: (kron(&id, h) - kron(&h.transpose(), &id)) * (-I),
        }
    }

    /// `X -> L X L^H - (1/2) {L^H L, X}`.
    pub fn dissipator(l: &CMatrix) -> Self {
        let n = l.nrows();
        let id = CMatrix::identity(n, n);
        let ldl = l.adjoint() * l;
        Self {
            hilbert_dim: n,
            matrix: kron(&l.conjugate(), l)
                - (kron(&id, &ldl) + kron(&ldl.transpose(), &id)) * c(0.5, 0.0),
        }
    }

    pub fn apply(&self, rho: &CMatrix) -> CMatrix {
        let v = &self.matrix * vectorize(rho);
        CMatrix::from_column_slice(self.hilbert_dim, self.hilbert_dim, v.as_slice())
    }

    /// `max |<<1| L|` over columns: zero for a trace-preserving generator.
    pub fn trace_residual(&self) -> f64 {
        let row = trace_functional(self.hilbert_dim).adjoint() * &self.matrix;
        row.iter().fold(0.0, |m, z| m.max(z.norm()))
    }
}

impl std::ops::Add for Superoperator {
    type Output = Superoperator;
    fn add(self, rhs: Superoperator) -> Superoperator {
        Superoperator {
            hilbert_dim: self.hilbert_dim,
            matrix: self.matrix + rhs.matrix,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::ode::{ode_integrate, TimeGrid};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(rng: &mut ChaCha8Rng, n: usize) -> CMatrix {
        CMatrix::from_fn(n, n, |_, _| {
            c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        })
    }

    #[test]
    fn round_trip_and_purity() {
        let rho = CMatrix::identity(2, 2) * c(0.5, 0.0);
        let v = vectorize(&rho);
        assert_eq!(devectorize(&v, 2).unwrap(), rho);
        assert!((DensityMatrix(rho).purity() - 0.5).abs() < 1e-15);
        assert!(devectorize(&v, 3).is_err());
    }

    #[test]
    fn inner_product_is_trace() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..10 {
            let a = random_matrix(&mut rng, 3);
            let b = random_matrix(&mut rng, 3);
            let (a, b) = (&a + a.adjoint(), &b + b.adjoint());
            let direct = (a.adjoint() * &b).trace();
            assert!((liouville_inner(&vectorize(&a), &vectorize(&b)) - direct).norm() < 1e-12);
        }
    }

    #[test]
    fn sandwich_and_generators_match_direct_products() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let (a, b, x) = (
            random_matrix(&mut rng, 3),
            random_matrix(&mut rng, 3),
            random_matrix(&mut rng, 3),
        );
        assert!((Superoperator::sandwich(&a, &b).apply(&x) - &a * &x * &b).norm() < 1e-12);
        let h = &a + a.adjoint();
        let comm = (&h * &x - &x * &h) * (-I);
        assert!((Superoperator::commutator(&h).apply(&x) - comm).norm() < 1e-12);
        let d = Superoperator::dissipator(&b);
        let direct =
            &b * &x * b.adjoint() - (b.adjoint() * &b * &x + &x * b.adjoint() * &b) * c(0.5, 0.0);
        assert!((d.apply(&x) - direct).norm() < 1e-12);
        assert!(d.trace_residual() < 1e-12);
        assert!(Superoperator::commutator(&h).trace_residual() < 1e-12);
    }

    #[test]
    fn unitary_generator_conserves_purity() {
        let h = CMatrix::from_row_slice(
            2,
            2,
            &[c(1.0, 0.0), c(0.3, 0.1), c(0.3, -0.1), c(-0.5, 0.0)],
        );
        let l = Superoperator::commutator(&h);
        let psi = CVector::from_vec(vec![c(0.6, 0.0), c(0.0, 0.8)]);
        let rho0 = vectorize(&DensityMatrix::pure(&psi).0);
        let grid = TimeGrid::fixed(0.0, 10.0, 5000).unwrap();
        let out = ode_integrate(|_, v| &l.matrix * v, &rho0, &grid, &[5.0, 10.0]).unwrap();
        for (_, v) in out {
            let rho = DensityMatrix(devectorize(&v, 2).unwrap());
            assert!((rho.purity() - 1.0).abs() < 1e-8);
            rho.validate().unwrap();
        }
    }

    #[test]
    fn trace_distance_of_orthogonal_states() {
        let a = DensityMatrix::basis_state(2, 0).0;
        let b = DensityMatrix::basis_state(2, 1).0;
        assert!((trace_distance(&a, &b) - 1.0).abs() < 1e-15);
        assert_eq!(trace_distance(&a, &a), 0.0);
    }

    #[test]
    fn invalid_density_matrices_rejected() {
        let mut m = DensityMatrix::basis_state(2, 0);
        m.0[(1, 1)] = c(-0.5, 0.0);
        assert!(m.validate().is_err());
        let mut n = DensityMatrix::basis_state(2, 0);
        n.0[(0, 1)] = c(0.2, 0.0);
        assert!(matches!(n.validate(), Err(AmtError::NotHermitian { .. })));
    }
}
