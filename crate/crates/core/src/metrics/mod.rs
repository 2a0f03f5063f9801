//! Fidelities, trace distances and the polarization bound.

pub mod binomial;
pub mod bound;
pub mod fidelity;
pub mod search;

pub use bound::{
    bound, bound_closed_form, bound_coefficient_program, bound_sum_form, optimal_strategy, BoundResult,
    CoefficientProgram, OptimalStrategy,
};
pub use fidelity::{
    average_fidelity, average_fidelity_from_distributions, classical_trace_distance, eigenbasis_distributions,
    fidelity, quantum_trace_distance, BellTarget, OutcomeDistribution,
};
pub use search::{bound_violation_search, score_strategy, SearchReport, StrategyScore};
