//! Stochastic-approximation instrumentation: round decomposition, condition
//! checks and convergence metrics.

mod conditions;
mod decompose;
mod metrics;

use thiserror::Error;

use crate::protocol::ProtocolError;

pub use conditions::{
    check_conditions, limiting_check_for, ConditionMonitor, ConditionReport, LimitingCheck, MassCheck, MixingCheck, PerturbationCheck,
    StepSizeCheck, MASS_TOLERANCE, ZERO_EIGENVALUE_TOLERANCE,
};
pub use decompose::{
    conditional_mean_noise, conditional_mean_perturbation, conditional_means_enumerated, decompose,
    StepDecomposition, ENUMERATION_LIMIT, RECONSTRUCTION_TOLERANCE,
};
pub use metrics::{
    absorbed_atom, disagreement, mass_drift, mse_per_node, rate_fit, time_to_threshold, TraceMetrics,
    ABSORPTION_TOLERANCE,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error("reconstruction of round {t} off by {error:e}")]
    ReconstructionMismatch { t: u64, error: f64 },
    #[error("{outcomes} joint outcomes exceed the enumeration limit")]
    TooLargeToEnumerate { outcomes: u128 },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("degenerate fit window: {0}")]
    DegenerateWindow(String),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
}
