//! Monte-Carlo transfer characteristic of the soft demapper.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use super::jfun::{j_inv_sat, log2_one_plus_exp_neg};
use crate::constellation::{Constellation, LabelMap};
use crate::interleave::InterleaverSpec;
use crate::phy::{clamp_llr, Demapper};
use crate::seeding::unit_rng;

/// Symbols per independently seeded chunk.
const CHUNK: usize = 2048;
const MC_STREAM: u64 = 0x4d43;

/// Extrinsic MI of the demapper for each codeword block.
///
/// A random word of `m * num_symbols` bits is split into `m` blocks; bits
/// of block `k` receive consistent Gaussian a-priori LLRs of MI `i_ad[k]`.
/// The word goes through `interleaver` (resized to the word length), the
/// mapper and the AWGN channel, is demapped, and `I_Ed(k)` is the
/// time-average estimate over the extrinsic LLRs of block `k`.
pub fn demapper_transfer_mc(
    c: &Constellation,
    map: &LabelMap,
    interleaver: &InterleaverSpec,
    sigma2: f64,
    i_ad: &[f64],
    num_symbols: usize,
    seed: u64,
) -> Vec<f64> {
    let m = c.bits();
    assert_eq!(i_ad.len(), m);
    let n = m * num_symbols;
    let spec = interleaver.resized(n, seed).expect("word length is a multiple of m");
    let per_block = num_symbols;
    let sigma_a: Vec<f64> = i_ad.iter().map(|&i| j_inv_sat(i)).collect();
    let demapper = Demapper::new(c, map);
    let chunks = num_symbols.div_ceil(CHUNK);
    let sums: Vec<Vec<f64>> = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let lo = chunk * CHUNK;
            let hi = (lo + CHUNK).min(num_symbols);
            let mut rng = unit_rng(seed, MC_STREAM, chunk as u64);
            let mut acc = vec![0.0; m];
            let mut bits = vec![0u8; m];
            let mut apriori = vec![0.0; m];
            let mut blocks = vec![0usize; m];
            let mut ext = vec![0.0; m];
            let mut scratch = vec![0.0; c.size()];
            let noise = sigma2.sqrt();
            for s in lo..hi {
                for p in 0..m {
                    let k = spec.permutation()[s * m + p] as usize / per_block;
                    let b = rng.random_range(0..2u8);
                    let u = if b == 0 { 1.0 } else { -1.0 };
                    let sa = sigma_a[k];
                    let z: f64 = rng.sample(StandardNormal);
                    blocks[p] = k;
                    bits[p] = b;
                    apriori[p] = clamp_llr(u * sa * sa / 2.0 + sa * z);
                }
                let nr: f64 = rng.sample(StandardNormal);
                let ni: f64 = rng.sample(StandardNormal);
                let y = demapper.modulate(&bits) + num_complex::Complex64::new(nr, ni) * noise;
                demapper.demap(y, sigma2, &apriori, &mut ext, &mut scratch);
                for p in 0..m {
                    let u = if bits[p] == 0 { 1.0 } else { -1.0 };
                    acc[blocks[p]] += log2_one_plus_exp_neg(u * ext[p]);
                }
            }
            acc
        })
        .collect();
    let mut total = vec![0.0; m];
    for s in sums {
        for (t, v) in total.iter_mut().zip(s) {
            *t += v;
        }
    }
    total
        .into_iter()
        .map(|s| (1.0 - s / per_block as f64).clamp(0.0, 1.0))
        .collect()
}
