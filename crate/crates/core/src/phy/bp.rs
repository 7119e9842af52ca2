//! Flooding belief propagation over a sparse parity-check matrix.

use super::clamp_llr;
use crate::lifting::SparseMatrix;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BpOptions {
    pub max_iters: usize,
    pub early_stop: bool,
    /// Min-sum check update instead of the tanh rule.
    pub min_sum: bool,
}

impl Default for BpOptions {
    fn default() -> Self {
        Self {
            max_iters: 25,
            early_stop: true,
            min_sum: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BpOutput {
    pub posterior: Vec<f64>,
    /// Posterior minus the channel input.
    pub extrinsic: Vec<f64>,
    pub hard_bits: Vec<u8>,
    pub converged: bool,
    pub iterations: usize,
}

/// Edge layout of a parity-check matrix. Edges are numbered check-major.
#[derive(Debug, Clone)]
pub struct BpDecoder {
    num_vars: usize,
    check_start: Vec<usize>,
    edge_var: Vec<usize>,
    var_start: Vec<usize>,
    var_edges: Vec<usize>,
}

impl BpDecoder {
    pub fn new(h: &SparseMatrix) -> Self {
        let mut check_start = vec![0];
        let mut edge_var = Vec::with_capacity(h.num_edges());
        for row in h.rows() {
            edge_var.extend_from_slice(row);
            check_start.push(edge_var.len());
        }
        let n = h.num_cols();
        let mut counts = vec![0usize; n + 1];
        for &v in &edge_var {
            counts[v + 1] += 1;
        }
        for j in 0..n {
            counts[j + 1] += counts[j];
        }
        let var_start = counts.clone();
        let mut fill = counts;
        let mut var_edges = vec![0; edge_var.len()];
        for (e, &v) in edge_var.iter().enumerate() {
            var_edges[fill[v]] = e;
            fill[v] += 1;
        }
        Self {
            num_vars: n,
            check_start,
            edge_var,
            var_start,
            var_edges,
        }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn num_edges(&self) -> usize {
        self.edge_var.len()
    }

    /// Decodes from scratch.
    pub fn decode(&self, channel: &[f64], opts: &BpOptions) -> BpOutput {
        let mut c2v = vec![0.0; self.num_edges()];
        self.decode_from(channel, opts, &mut c2v)
    }

    /// Decodes starting from the check-to-variable messages in `c2v`, and
    /// leaves the final messages there.
    pub fn decode_from(&self, channel: &[f64], opts: &BpOptions, c2v: &mut [f64]) -> BpOutput {
        assert_eq!(channel.len(), self.num_vars);
        let mut v2c = vec![0.0; self.num_edges()];
        let mut posterior = vec![0.0; self.num_vars];
        let mut hard = vec![0u8; self.num_vars];
        let mut buf = Vec::new();
        self.variable_update(channel, c2v, &mut v2c, &mut posterior, &mut hard);
        let mut converged = opts.early_stop && self.syndrome_ok(&hard);
        let mut iterations = 0;
        while !converged && iterations < opts.max_iters {
            iterations += 1;
            self.check_update(&v2c, c2v, opts.min_sum, &mut buf);
            self.variable_update(channel, c2v, &mut v2c, &mut posterior, &mut hard);
            if opts.early_stop && self.syndrome_ok(&hard) {
                converged = true;
            }
        }
        if !opts.early_stop {
            converged = self.syndrome_ok(&hard);
        }
        let extrinsic = posterior.iter().zip(channel).map(|(p, c)| clamp_llr(p - c)).collect();
        BpOutput {
            posterior,
            extrinsic,
            hard_bits: hard,
            converged,
            iterations,
        }
    }

    fn variable_update(&self, channel: &[f64], c2v: &[f64], v2c: &mut [f64], posterior: &mut [f64], hard: &mut [u8]) {
        for v in 0..self.num_vars {
            let edges = &self.var_edges[self.var_start[v]..self.var_start[v + 1]];
            let total = channel[v] + edges.iter().map(|&e| c2v[e]).sum::<f64>();
            for &e in edges {
                v2c[e] = clamp_llr(total - c2v[e]);
            }
            posterior[v] = clamp_llr(total);
            hard[v] = u8::from(total < 0.0);
        }
    }

    fn check_update(&self, v2c: &[f64], c2v: &mut [f64], min_sum: bool, buf: &mut Vec<f64>) {
        for c in 0..self.check_start.len() - 1 {
            let (lo, hi) = (self.check_start[c], self.check_start[c + 1]);
            let msgs = &v2c[lo..hi];
            let out = &mut c2v[lo..hi];
            if min_sum {
                min_sum_rule(msgs, out);
            } else {
                tanh_rule(msgs, out, buf);
            }
        }
    }

    fn syndrome_ok(&self, hard: &[u8]) -> bool {
        (0..self.check_start.len() - 1).all(|c| {
            self.edge_var[self.check_start[c]..self.check_start[c + 1]]
                .iter()
                .fold(0u8, |acc, &v| acc ^ hard[v])
                == 0
        })
    }
}

/// Sum-product check rule with forward-backward products, so no division by
/// a vanishing message is ever needed.
fn tanh_rule(msgs: &[f64], out: &mut [f64], buf: &mut Vec<f64>) {
    let d = msgs.len();
    buf.clear();
    buf.extend(msgs.iter().map(|&x| (0.5 * x).tanh()));
    let mut forward = 1.0;
    for (o, &t) in out.iter_mut().zip(buf.iter()) {
        *o = forward;
        forward *= t;
    }
    let mut backward = 1.0;
    for k in (0..d).rev() {
        out[k] = clamp_llr(2.0 * (out[k] * backward).atanh());
        backward *= buf[k];
    }
}

fn min_sum_rule(msgs: &[f64], out: &mut [f64]) {
    let mut min1 = f64::INFINITY;
    let mut min2 = f64::INFINITY;
    let mut arg = 0;
    let mut sign = false;
    for (k, &x) in msgs.iter().enumerate() {
        sign ^= x < 0.0;
        let a = x.abs();
        if a < min1 {
            min2 = min1;
            min1 = a;
            arg = k;
        } else if a < min2 {
            min2 = a;
        }
    }
    for (k, (o, &x)) in out.iter_mut().zip(msgs).enumerate() {
        let mag = if k == arg { min2 } else { min1 };
        let s = sign ^ (x < 0.0);
        *o = if s { -mag } else { mag };
    }
}
