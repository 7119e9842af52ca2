//! Experiment configuration, orchestration and result files.

mod compare;
mod config;
mod output;
mod pipeline;

use thiserror::Error;

pub use compare::{compare, ebn0_at_ber, gain_at_ber, read_results, BerSample, CompareRow, ResultKind, Series};
pub use config::{
    builtin_recipes, CapacityConfig, ChannelConfig, CodeConfig, Coupling, DecoderConfig, ExitConfig, ExperimentConfig,
    ExperimentKind, Grid, InterleaverConfig, MiddleOrderConfig, ModulationConfig, StopConfig,
};
pub use output::{run, run_to_dir, RunOutput, Table, TextFile};
pub use pipeline::{
    parse_constellation, run_ber, run_capacity, run_design_mapper, run_exit, run_threshold, run_wave, BerRow, BerRun,
    CapacityRow, ExitRow, MapperEntry, MapperRow, Setup, ThresholdRow, WaveRow,
};

/// A config problem tied to the offending field.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{field}: {message}")]
pub struct ConfigError {
    pub field: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(field: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            field: field.into(),
            message: message.into(),
        }
    }
}

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config error: {0}")]
    Config(#[from] ConfigError),
    #[error("{path}: expected {expected} results, found {found}")]
    KindMismatch {
        expected: String,
        found: String,
        path: String,
    },
    #[error("{0}")]
    Runtime(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

/// Runs `f` on a dedicated pool of `workers` threads (0 = rayon default).
pub fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T, HarnessError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| HarnessError::Runtime(e.to_string()))?;
    Ok(pool.install(f))
}
