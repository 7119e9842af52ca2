//! Decoding-threshold search and decoding-wave traces.

use rayon::prelude::*;

use super::pexit::{ExitProblem, ExitResult};
use super::ExitError;
use crate::seeding::{derive_seed, stream};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdOptions {
    pub lo_db: f64,
    pub hi_db: f64,
    pub resolution_db: f64,
    /// Independent MC repetitions per probe; a probe converges when a
    /// strict majority does.
    pub trials: usize,
}

impl Default for ThresholdOptions {
    fn default() -> Self {
        Self {
            lo_db: 0.0,
            hi_db: 8.0,
            resolution_db: 0.01,
            trials: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Probe {
    pub ebn0_db: f64,
    pub converged_trials: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdResult {
    pub threshold_db: f64,
    pub probes: Vec<Probe>,
}

/// Majority vote over trials. Trial `t` uses the same seed at every SNR so
/// that probes share their random numbers.
pub fn probe(problem: &ExitProblem, ebn0_db: f64, trials: usize, seed: u64) -> Result<Probe, ExitError> {
    let trials = trials.max(1);
    let results: Vec<Result<ExitResult, ExitError>> = (0..trials)
        .into_par_iter()
        .map(|t| problem.run(ebn0_db, derive_seed(seed, stream::EXIT_TRIAL, t as u64)))
        .collect();
    let mut ok = 0;
    for r in results {
        ok += usize::from(r?.converged);
    }
    Ok(Probe {
        ebn0_db,
        converged_trials: ok,
        converged: 2 * ok > trials,
    })
}

/// Bisection for the smallest converging Eb/N0. Returns the upper end of
/// the final bracket.
pub fn threshold_search(
    problem: &ExitProblem,
    opts: &ThresholdOptions,
    seed: u64,
) -> Result<ThresholdResult, ExitError> {
    problem.validate()?;
    let mut probes = Vec::new();
    let lo_probe = probe(problem, opts.lo_db, opts.trials, seed)?;
    let hi_probe = probe(problem, opts.hi_db, opts.trials, seed)?;
    let bracketed = !lo_probe.converged && hi_probe.converged;
    probes.push(lo_probe);
    probes.push(hi_probe);
    if !bracketed || opts.lo_db >= opts.hi_db {
        return Err(ExitError::Bracket {
            lo_db: opts.lo_db,
            hi_db: opts.hi_db,
        });
    }
    let (mut lo, mut hi) = (opts.lo_db, opts.hi_db);
    while hi - lo > opts.resolution_db {
        let mid = 0.5 * (lo + hi);
        let p = probe(problem, mid, opts.trials, seed)?;
        if p.converged {
            hi = mid;
        } else {
            lo = mid;
        }
        probes.push(p);
    }
    Ok(ThresholdResult {
        threshold_db: hi,
        probes,
    })
}

/// Mean a-posteriori MI per coupling position after each outer iteration:
/// `wave[t][p]` averages the `cols_per_position` columns of position `p`.
pub fn wave_matrix(result: &ExitResult, cols_per_position: usize) -> Vec<Vec<f64>> {
    result
        .app_trace
        .iter()
        .map(|app| {
            app.chunks(cols_per_position)
                .map(|c| c.iter().sum::<f64>() / c.len() as f64)
                .collect()
        })
        .collect()
}

/// First outer iteration (1-based) at which each position reaches `level`,
/// or `None` if it never does.
pub fn first_crossing(wave: &[Vec<f64>], level: f64) -> Vec<Option<usize>> {
    let positions = wave.first().map_or(0, Vec::len);
    (0..positions)
        .map(|p| wave.iter().position(|row| row[p] >= level).map(|t| t + 1))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wave_and_crossing() {
        let r = ExitResult {
            converged: true,
            outer_iters: 2,
            app_trace: vec![vec![0.99, 1.0, 0.5, 0.6, 1.0, 0.995], vec![1.0; 6]],
        };
        let w = wave_matrix(&r, 2);
        assert_eq!(w.len(), 2);
        assert!((w[0][0] - 0.995).abs() < 1e-12);
        assert_eq!(first_crossing(&w, 0.99), vec![Some(1), Some(2), Some(1)]);
    }
}
