//! Simulation and analysis of social sampling: networked agents that learn
//! the histogram of their initial opinions by exchanging single randomly
//! drawn opinions (or silence) with their neighbors.
//!
//! * [`simplex`]: distributions, messages and histograms.
//! * [`topology`]: interaction graphs and their spectra.
//! * [`protocol`]: the linear update, its three built-in instances and the trial simulator.
//! * [`analysis`]: the drift / perturbation / martingale-noise split of a round,
//!   convergence-condition checks and error metrics.
//! * [`harness`]: seeded ensembles, sweeps, result files and the `socsamp` command line.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod harness;
pub mod linalg;
pub mod protocol;
pub mod simplex;
pub mod topology;

pub use linalg::Matrix;
pub use protocol::{AlgorithmVariant, NetworkState, RoundRecord, Simulator, StepSchedule};
pub use simplex::{Distribution, Message, OpinionSample, SubDistribution};
pub use topology::{Graph, TopologyKind, TopologySpec};
