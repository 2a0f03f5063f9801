//! Dense complex states over explicit subsystem layouts.

pub mod layout;
pub mod linalg;
pub mod ops;
pub mod state;

pub use layout::{Slot, SlotRole, SubsystemLayout};
pub use linalg::{hermitian_eig, CMatrix, CVector, HermitianEigen, C64};
pub use ops::{MonomialOp, OpSum};
pub use state::{DensityOperator, MatrixParts, PureState, QuantumState};
