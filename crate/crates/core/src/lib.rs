//! Adiabatic modulation theorem engine.
//!
//! * [`numerics`]: dense complex linear algebra, RK4 / Dormand-Prince
//!   integration, cumulative quadrature, kernels.
//! * [`closed`]: Hamiltonian families, instantaneous normal (Floquet) modes,
//!   exact / adiabatic / mode-coefficient propagation, adiabaticity margins.
//! * [`open`]: Liouville space, Jordan chains, the V-system Bloch-Redfield
//!   family, steady states and open-system margins.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod closed;
pub mod error;
pub mod numerics;
pub mod open;
pub mod protocol;

pub use error::{AmtError, Result};
pub use numerics::linalg::{CMatrix, CVector};
pub use numerics::TimeGrid;
pub use protocol::ModulationProtocol;
