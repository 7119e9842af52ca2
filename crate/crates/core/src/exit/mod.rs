//! Hierarchical EXIT analysis: a Monte-Carlo demapper stage nested with
//! analytic MI propagation on the base matrix.

mod jfun;
mod mc;
mod pexit;
mod threshold;

use thiserror::Error;

pub use jfun::{j_fun, j_inv, j_inv_sat, j_quadrature, JTable, MI_CEILING};
pub use mc::demapper_transfer_mc;
pub use pexit::{
    exit_app, exit_cn_update, exit_feedback, exit_vn_update, hierarchical_exit, ExitOptions, ExitProblem, ExitResult,
    ExitState,
};
pub use threshold::{first_crossing, probe, threshold_search, wave_matrix, Probe, ThresholdOptions, ThresholdResult};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExitError {
    #[error("mutual information {0} outside [0, 1)")]
    Domain(f64),
    #[error("{cols} base-matrix columns cannot be split into {m} blocks")]
    BlockMismatch { cols: usize, m: usize },
    #[error("iteration counts must be at least 1")]
    Iterations,
    #[error("[{lo_db}, {hi_db}] dB does not bracket the threshold")]
    Bracket { lo_db: f64, hi_db: f64 },
}
