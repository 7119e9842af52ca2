//! Protograph-level MI propagation and the hierarchical EXIT loop.

use super::jfun::{j_fun, j_inv_sat};
use super::mc::demapper_transfer_mc;
use super::ExitError;
use crate::constellation::{Constellation, LabelMap};
use crate::interleave::InterleaverSpec;
use crate::phy::ChannelParams;
use crate::protograph::BaseMatrix;

/// Edge MIs are stored densely as `m_p x n_p` matrices; entries where the
/// base matrix is zero are unused.
#[derive(Debug, Clone, PartialEq)]
pub struct ExitState {
    pub rows: usize,
    pub cols: usize,
    /// Check-to-variable MI (`I_Av = I_Ec`).
    pub i_av: Vec<f64>,
    /// Variable-to-check MI (`I_Ac = I_Ev`).
    pub i_ev: Vec<f64>,
    pub i_ch: Vec<f64>,
    pub i_ed: Vec<f64>,
    pub i_ad: Vec<f64>,
    pub i_app: Vec<f64>,
}

impl ExitState {
    pub fn new(b: &BaseMatrix, m: usize) -> Self {
        let (rows, cols) = b.shape();
        Self {
            rows,
            cols,
            i_av: vec![0.0; rows * cols],
            i_ev: vec![0.0; rows * cols],
            i_ch: vec![0.0; cols],
            i_ed: vec![0.0; m],
            i_ad: vec![0.0; m],
            i_app: vec![0.0; cols],
        }
    }

    pub fn av(&self, i: usize, j: usize) -> f64 {
        self.i_av[i * self.cols + j]
    }

    pub fn ev(&self, i: usize, j: usize) -> f64 {
        self.i_ev[i * self.cols + j]
    }
}

/// Variable-node update: `I_Ev(i,j)` from the other incoming check MIs,
/// the `b_ij - 1` parallel copies of edge `(i,j)` and the channel MI.
pub fn exit_vn_update(state: &mut ExitState, b: &BaseMatrix) {
    let (rows, cols) = (state.rows, state.cols);
    for j in 0..cols {
        let ch = j_inv_sat(state.i_ch[j]).powi(2);
        let sq: Vec<f64> = (0..rows).map(|i| j_inv_sat(state.av(i, j)).powi(2)).collect();
        for i in 0..rows {
            let bij = b.get(i, j);
            if bij == 0 {
                continue;
            }
            let mut acc = ch + (bij as f64 - 1.0) * sq[i];
            for s in (0..rows).filter(|&s| s != i) {
                acc += b.get(s, j) as f64 * sq[s];
            }
            state.i_ev[i * cols + j] = j_fun(acc.sqrt());
        }
    }
}

/// Check-node update in the complement form: `I_Ec(i,j)` from the other
/// incoming variable MIs and the `b_ij - 1` parallel copies of `(i,j)`.
/// The result becomes the new `I_Av`.
pub fn exit_cn_update(state: &mut ExitState, b: &BaseMatrix) {
    let (rows, cols) = (state.rows, state.cols);
    for i in 0..rows {
        let sq: Vec<f64> = (0..cols).map(|s| j_inv_sat(1.0 - state.ev(i, s)).powi(2)).collect();
        for j in 0..cols {
            let bij = b.get(i, j);
            if bij == 0 {
                continue;
            }
            let mut acc = (bij as f64 - 1.0) * sq[j];
            for s in (0..cols).filter(|&s| s != j) {
                acc += b.get(i, s) as f64 * sq[s];
            }
            state.i_av[i * cols + j] = 1.0 - j_fun(acc.sqrt());
        }
    }
}

/// MI a variable node returns to the demapper: all incoming check MIs,
/// without its own channel term.
fn vn_feedback(state: &ExitState, b: &BaseMatrix, j: usize) -> f64 {
    let acc: f64 = (0..state.rows)
        .map(|i| b.get(i, j) as f64 * j_inv_sat(state.av(i, j)).powi(2))
        .sum();
    j_fun(acc.sqrt())
}

/// Block-averaged decoder-to-demapper MI: block `k` covers the `n_p / m`
/// consecutive columns starting at `k * n_p / m`.
pub fn exit_feedback(state: &ExitState, b: &BaseMatrix, m: usize) -> Result<Vec<f64>, ExitError> {
    let cols = state.cols;
    if m == 0 || !cols.is_multiple_of(m) {
        return Err(ExitError::BlockMismatch { cols, m });
    }
    let per = cols / m;
    Ok((0..m)
        .map(|k| (k * per..(k + 1) * per).map(|j| vn_feedback(state, b, j)).sum::<f64>() / per as f64)
        .collect())
}

/// A-posteriori MI of every variable node.
pub fn exit_app(state: &ExitState, b: &BaseMatrix) -> Vec<f64> {
    (0..state.cols)
        .map(|j| {
            let acc: f64 = (0..state.rows)
                .map(|i| b.get(i, j) as f64 * j_inv_sat(state.av(i, j)).powi(2))
                .sum::<f64>()
                + j_inv_sat(state.i_ch[j]).powi(2);
            j_fun(acc.sqrt())
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExitOptions {
    pub outer_iters: usize,
    pub inner_iters: usize,
    pub mc_symbols: usize,
    /// Convergence when every a-posteriori MI reaches `1 - epsilon`.
    pub epsilon: f64,
    /// Carry the edge MIs from one outer iteration into the next instead
    /// of restarting the inner decoder from zero.
    pub keep_edge_state: bool,
}

impl Default for ExitOptions {
    fn default() -> Self {
        Self {
            outer_iters: 8,
            inner_iters: 25,
            mc_symbols: 100_000,
            epsilon: 1e-4,
            keep_edge_state: true,
        }
    }
}

/// Everything that stays fixed while the SNR varies.
#[derive(Debug, Clone)]
pub struct ExitProblem {
    pub base: BaseMatrix,
    pub constellation: Constellation,
    pub map: LabelMap,
    pub interleaver: InterleaverSpec,
    /// Rate used for the Eb/N0 conversion.
    pub rate: f64,
    pub options: ExitOptions,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExitResult {
    pub converged: bool,
    pub outer_iters: usize,
    /// A-posteriori MI of every base-matrix column after each outer
    /// iteration.
    pub app_trace: Vec<Vec<f64>>,
}

impl ExitProblem {
    pub fn validate(&self) -> Result<(), ExitError> {
        let m = self.constellation.bits();
        if self.interleaver.kind().is_block_matched() && !self.base.cols().is_multiple_of(m) {
            return Err(ExitError::BlockMismatch {
                cols: self.base.cols(),
                m,
            });
        }
        if self.options.outer_iters == 0 || self.options.inner_iters == 0 {
            return Err(ExitError::Iterations);
        }
        Ok(())
    }

    /// Runs the nested demapper / decoder MI recursion at one SNR.
    pub fn run(&self, ebn0_db: f64, seed: u64) -> Result<ExitResult, ExitError> {
        self.validate()?;
        let b = &self.base;
        let m = self.constellation.bits();
        let cols = b.cols();
        let opts = &self.options;
        let sigma2 = ChannelParams::new(ebn0_db, self.rate, m).sigma2;
        let blocked = self.interleaver.kind().is_block_matched();
        let live: Vec<usize> = (0..cols).filter(|&j| !b.is_punctured(j)).collect();
        let mut st = ExitState::new(b, m);
        let mut trace = Vec::new();
        let mut converged = false;
        for outer in 0..opts.outer_iters {
            let mc_seed = crate::seeding::derive_seed(seed, 0, outer as u64);
            st.i_ed = demapper_transfer_mc(
                &self.constellation,
                &self.map,
                &self.interleaver,
                sigma2,
                &st.i_ad,
                opts.mc_symbols,
                mc_seed,
            );
            let mean_ed = st.i_ed.iter().sum::<f64>() / m as f64;
            let per = cols / m.max(1);
            for j in 0..cols {
                st.i_ch[j] = if b.is_punctured(j) {
                    0.0
                } else if blocked {
                    st.i_ed[j / per]
                } else {
                    mean_ed
                };
            }
            if !opts.keep_edge_state {
                st.i_av.iter_mut().for_each(|x| *x = 0.0);
            }
            for _ in 0..opts.inner_iters {
                exit_vn_update(&mut st, b);
                exit_cn_update(&mut st, b);
            }
            st.i_ad = if blocked {
                exit_feedback(&st, b, m)?
            } else {
                let avg = live.iter().map(|&j| vn_feedback(&st, b, j)).sum::<f64>() / live.len().max(1) as f64;
                vec![avg; m]
            };
            st.i_app = exit_app(&st, b);
            trace.push(st.i_app.clone());
            if st.i_app.iter().all(|&x| x >= 1.0 - opts.epsilon) {
                converged = true;
                break;
            }
        }
        Ok(ExitResult {
            converged,
            outer_iters: trace.len(),
            app_trace: trace,
        })
    }
}

/// Free-function form of [`ExitProblem::run`].
pub fn hierarchical_exit(problem: &ExitProblem, ebn0_db: f64, seed: u64) -> Result<ExitResult, ExitError> {
    problem.run(ebn0_db, seed)
}
