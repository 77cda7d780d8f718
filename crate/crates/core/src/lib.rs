//! Qudit shortcut circuits, heralded linear-optics simulation, and the
//! tomography/metrics pipeline used to characterize them.

pub mod circuit;
pub mod circuit_text;
pub mod density;
pub mod error;
pub mod gate;
pub mod linalg;
pub mod optics;
pub mod register;
pub mod shortcut;
pub mod tomo;

pub use circuit::{
    apply, equal_up_to_global_phase, local_phase_equivalence, unitary_of, Circuit, CostReport,
    LocalPhases,
};
pub use density::DensityMatrix;
pub use error::{Error, Result};
pub use gate::{embed_gate, Control, GateKind, GateMatrix, LevelSwap, PlacedGate};
pub use register::{RegisterShape, StateVector};
