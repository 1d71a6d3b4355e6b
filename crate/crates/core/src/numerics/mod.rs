//! Numerical substrate: dense complex linear algebra, ODE integration,
//! quadrature and kernels.

pub mod linalg;
pub mod ode;
pub mod quadrature;

pub use linalg::{
    general_eigensystem, hermitian_eigensystem, null_space, CMatrix, CVector, Eigensystem,
};
pub use ode::{linspace, ode_integrate, TimeGrid};
pub use quadrature::{quadrature_accumulate, CumulativeIntegral};
