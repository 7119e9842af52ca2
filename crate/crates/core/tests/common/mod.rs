//! Exhaustive reference computations shared by the test targets.

use num_complex::Complex64;

use scp_bicm::constellation::{Constellation, LabelMap};
use scp_bicm::lifting::SparseMatrix;

/// Five checks over ten bits with no cycles in the Tanner graph.
pub fn tree_code() -> SparseMatrix {
    SparseMatrix::from_rows(
        10,
        vec![vec![0, 1, 2], vec![2, 3, 4], vec![4, 5, 6], vec![1, 7], vec![6, 8, 9]],
    )
}

/// Posterior LLRs by summing over every codeword of `h`.
pub fn brute_force_posterior(h: &SparseMatrix, channel: &[f64]) -> Vec<f64> {
    let n = h.num_cols();
    let mut p0 = vec![0.0; n];
    let mut p1 = vec![0.0; n];
    for w in 0u32..1 << n {
        let word: Vec<u8> = (0..n).map(|i| ((w >> i) & 1) as u8).collect();
        if !h.is_codeword(&word) {
            continue;
        }
        // P(y | c) is proportional to exp(-sum over ones of L_j) with L = ln P0/P1.
        let weight: f64 = (-word.iter().zip(channel).map(|(&b, &l)| f64::from(b) * l).sum::<f64>()).exp();
        for i in 0..n {
            if word[i] == 0 {
                p0[i] += weight;
            } else {
                p1[i] += weight;
            }
        }
    }
    p0.iter().zip(&p1).map(|(a, b)| (a / b).ln()).collect()
}

/// Max-log extrinsic LLRs computed from first principles: for every bit,
/// search labels with that bit fixed and add the other bits' a-priori.
pub fn demap_oracle(c: &Constellation, map: &LabelMap, y: Complex64, sigma2: f64, la: &[f64]) -> Vec<f64> {
    let m = c.bits();
    (0..m)
        .map(|i| {
            let metric = |bit: u32| {
                (0..c.size() as u32)
                    .filter(|l| (l >> (m - 1 - i)) & 1 == bit)
                    .map(|l| {
                        let x = c.point(map.point(l));
                        let prior: f64 = (0..m)
                            .filter(|&k| k != i && (l >> (m - 1 - k)) & 1 == 1)
                            .map(|k| -la[k])
                            .sum();
                        -(y - x).norm_sqr() / (2.0 * sigma2) + prior
                    })
                    .fold(f64::NEG_INFINITY, f64::max)
            };
            (metric(0) - metric(1)).clamp(-50.0, 50.0)
        })
        .collect()
}
