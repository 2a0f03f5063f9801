//! Entangling two non-interacting qubits through a collectively controlled
//! mesoscopic system (MS).
//!
//! The crate simulates the indirect parity / Hamming-weight measurement
//! protocol (conditional evolution, collective measurement of the MS,
//! post-selection, optional disentangling gate) and computes the upper bound on
//! the achievable two-qubit Bell fidelity when the MS starts out only partially
//! polarized.
//!
//! * [`qstate`]: dense states, layouts, partial traces, Hermitian eigensolver.
//! * [`collective`]: Dicke-ladder representation of the MS and its collective gates.
//! * [`circuits`]: the protocol circuits and the general conditioned evolution.
//! * [`measurement`]: collective POVMs, the square-root update rule, the apparatus qubit.
//! * [`metrics`]: fidelities, trace distances and the polarization bound.
//! * [`harness`]: scenario configs, sweeps, verification suites, CSV/JSON/SVG output.

pub mod circuits;
pub mod collective;
pub mod error;
pub mod harness;
pub mod measurement;
pub mod metrics;
pub mod qstate;
pub mod tolerance;

pub use error::{Error, Result};
