//! Data generators, CSV/JSON formats and experiment drivers built on
//! [`mmdalign_core`].

pub mod error;
pub mod experiment;
pub mod generate;
pub mod io;
pub mod report;
pub mod sweep;

pub use error::{AppError, Result};
pub use experiment::{
    align_pair, baseline_accuracy, derive_seed, embedding_experiment, mirror_experiment, run_simulated_experiment,
    simulate_domains, simulated_experiment, AlignSettings, EmbedConfig, MirrorConfig, PairOutcome, SimConfig, SimRun,
    SimSeeds,
};
pub use report::{ExperimentReport, RestartSummary, ScenarioResult, TaskResult, TaskStatus, SCHEMA_VERSION};
pub use sweep::{angle_sweep, global_minimum, local_minima, Family, SweepRow};
