//! Open systems: Liouville space, Jordan chains and propagation.

pub mod family;
pub mod jordan;
pub mod liouville;
pub mod margin;
pub mod propagate;
pub mod steady;
pub mod vsystem;

pub use family::LiouvillianFamily;
pub use jordan::{
    block_coefficients, evolve_block_coefficients, jordan_decompose, projected_mode_change,
    projected_mode_change_recursive, reconstruct, JordanChain, JordanDecomposition,
};
pub use liouville::{devectorize, trace_distance, vectorize, DensityMatrix, Superoperator};
pub use margin::{open_adiabatic_margin, BlockSelector, OpenMargin};
pub use propagate::{lvn_propagate, OpenTrajectoryRecord};
pub use steady::instantaneous_steady_state;
pub use vsystem::{
    bose_einstein_occupation, vsystem_analytic, vsystem_family, CoherenceSign, VSystemAnalytic,
    VSystemFamily, VSystemParams,
};
