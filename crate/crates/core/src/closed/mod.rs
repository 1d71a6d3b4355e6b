//! Closed systems: Hamiltonian families, normal modes and propagation.

pub mod family;
pub mod floquet;
pub mod interaction;
pub mod margin;
pub mod modes;
pub mod propagate;
pub mod rabi;

pub use family::{avoided_crossing, HamiltonianFamily, StaticFamily};
pub use floquet::{numeric_floquet_modes, FloquetContinuation, FloquetSolver, NumericFloquetModes};
pub use interaction::{interaction_picture_transform, InteractionPicture};
pub use margin::{closed_adiabatic_margin, ClosedMargin};
pub use modes::{EigenModes, FloquetMode, ModeSet, NormalModes};
pub use propagate::{
    propagate_adiabatic, propagate_exact, propagate_mode_coefficients, ClosedTrajectoryRecord,
    CoefficientTrajectory, CouplingScheme,
};
pub use rabi::{
    rabi_family, rabi_sweep_protocol, RabiFamily, RabiModes, RabiParams, SweepConvention,
};
