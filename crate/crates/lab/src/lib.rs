//! Experiment harness for the diluted-lattice Q-learning prisoner's dilemma:
//! configuration, replicated runs and sweeps, CSV and grid file formats.

pub mod config;
pub mod error;
pub mod output;
pub mod runner;
pub mod seeds;
pub mod snapshot;

pub use config::SimConfig;
pub use dilemma_core;
pub use error::{ConfigError, OutputError, SweepError};
pub use runner::{
    run_observed, run_replicated, run_single, run_sweep, ReplicaStats, RunResult, RunSummary,
    SweepRow, SweepSpec,
};
pub use seeds::derive_seed;
