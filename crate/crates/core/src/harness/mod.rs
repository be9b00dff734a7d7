//! Experiment orchestration: configuration, seeded trial ensembles, sweeps and
//! result files.

pub mod cli;
mod config;
mod emit;
mod replicate;
mod run;

use thiserror::Error;

use crate::analysis::AnalysisError;
use crate::protocol::ProtocolError;
use crate::simplex::SimplexError;
use crate::topology::TopologyError;

pub use config::{ExperimentConfig, InitialLaw, Stride, SweepAxis};
pub use emit::{emit_results, emit_sweep, summary_json, write_csv, write_trial_csv, EmitOptions, Summary, CSV_HEADER};
pub use replicate::{bundled, bundled_names, Bundled};
pub use run::{
    run_ensemble, run_trial, sweep, trial_rng, EnsembleResult, Provenance, TrialResult, STREAM_GRAPH,
    STREAM_OPINIONS, STREAM_PROTOCOL,
};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("{}field `{field}`: {msg}", line.map(|l| format!("line {l}: ")).unwrap_or_default())]
    Config {
        line: Option<usize>,
        field: String,
        msg: String,
    },
    #[error("trial {index}: {source}")]
    Trial {
        index: usize,
        #[source]
        source: Box<HarnessError>,
    },
    #[error("i/o failure: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Topology(#[from] TopologyError),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error(transparent)]
    Simplex(#[from] SimplexError),
}

impl HarnessError {
    pub fn is_config(&self) -> bool {
        matches!(self, HarnessError::Config { .. })
    }
}
