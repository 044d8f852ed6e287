//! Experiment driver behind the `ldp-distance` command line.
//!
//! [`cmd_run`] and [`cmd_sweep`] load a dataset, compute its true distances
//! once, execute a protocol for every trial and score the result. Output is
//! a CSV with a fixed column order ([`CSV_COLUMNS`]). [`cmd_simulate`]
//! drives the analysis simulators and [`cmd_stats`] summarizes a dataset.

mod cache;
mod experiment;
mod simulate;

pub use cache::{truth_cache_key, TruthCache};
pub use experiment::{
    cmd_run, cmd_stats, cmd_sweep, load_dataset, run_method, run_trials, sweep_dataset, write_records, Dataset,
    DatasetStats, ExperimentConfig, Method, MethodOutput, ResultRecord, TrialLabel, CSV_COLUMNS,
};
pub use simulate::{cmd_simulate, MinLaplaceRow, SimulateConfig, SimulationMode, SimulationOutput, SimulationRow};
