//! Labeling-bit-partial-match (LBPM) mapper design.
//!
//! Step 1 takes a seed labeling (Gray by default), measures the protection
//! degree of each of its positions and moves the `m'` most protected
//! positions to the front. Step 2 discards the remaining positions and
//! rebuilds them one at a time: each new position gets the bit pattern over
//! all points that maximizes the minimum, then the total, Hamming distance
//! between adjacent labels, subject to the labeling staying bijective.

use std::cmp::Ordering;

use rand::seq::SliceRandom;

use super::capacity::bit_protection_profile;
use super::mappers::builtin_mapper;
use super::{Constellation, LabelMap};
use crate::seeding::{stream, unit_rng};

#[derive(Debug, Clone)]
pub struct LbpmOptions {
    /// MC samples for the protection profile.
    pub samples: usize,
    /// Name of the seed labeling for Step 1.
    pub seed_mapper: String,
    /// Largest candidate count searched exhaustively in Step 2.
    pub exhaustive_limit: u64,
    /// Restarts of the swap local search used above the exhaustive limit.
    pub restarts: usize,
}

impl Default for LbpmOptions {
    fn default() -> Self {
        Self {
            samples: 200_000,
            seed_mapper: "gray".to_string(),
            exhaustive_limit: 2_000_000,
            restarts: 48,
        }
    }
}

/// Minimum and total Hamming distance over adjacent label pairs.
pub fn adjacent_hamming_stats(c: &Constellation, map: &LabelMap) -> (u32, u32) {
    let mut min = u32::MAX;
    let mut total = 0;
    for (a, b) in c.adjacent_pairs() {
        let d = (map.label(a) ^ map.label(b)).count_ones();
        min = min.min(d);
        total += d;
    }
    (min, total)
}

/// Designs an LBPM labeling at the reference Es/N0 `esn0_ref_db`.
pub fn design_lbpm(c: &Constellation, esn0_ref_db: f64, seed: u64, opts: &LbpmOptions) -> LabelMap {
    let m = c.bits();
    let seed_map = builtin_mapper(&opts.seed_mapper, c).expect("seed mapper must exist");
    let profile = bit_protection_profile(c, &seed_map, esn0_ref_db, opts.samples, seed);
    let m_prime = profile.m_prime;
    let reordered = seed_map.permute_positions(&profile.ranking);

    let mut prefix: Vec<u32> = (0..c.size()).map(|p| reordered.label(p) >> (m - m_prime)).collect();
    let pairs = c.adjacent_pairs();
    for level in m_prime..m {
        let free = m - level;
        let bits = assign_position(&prefix, &pairs, free, seed ^ level as u64, opts);
        for (p, b) in prefix.iter_mut().zip(bits) {
            *p = (*p << 1) | u32::from(b);
        }
    }
    LabelMap::from_point_labels("lbpm", m, prefix).expect("balanced assignment is bijective")
}

/// Objective of a candidate bit pattern: (min distance, total distance).
fn score(prefix: &[u32], pairs: &[(usize, usize)], bits: &[u8]) -> (u32, u32) {
    let mut min = u32::MAX;
    let mut total = 0;
    for &(a, b) in pairs {
        let d = (prefix[a] ^ prefix[b]).count_ones() + u32::from(bits[a] != bits[b]);
        min = min.min(d);
        total += d;
    }
    (min, total)
}

/// Higher score wins; equal scores prefer the lexicographically smaller
/// pattern, which yields the lexicographically smaller label sequence.
fn better(a: ((u32, u32), &[u8]), b: ((u32, u32), &[u8])) -> bool {
    match a.0.cmp(&b.0) {
        Ordering::Greater => true,
        Ordering::Less => false,
        Ordering::Equal => a.1 < b.1,
    }
}

/// Chooses the next labeling bit for every point. Points sharing a prefix
/// form a class; each class must be split evenly so that the `free - 1`
/// remaining positions can still complete a bijection.
fn assign_position(prefix: &[u32], pairs: &[(usize, usize)], free: usize, seed: u64, opts: &LbpmOptions) -> Vec<u8> {
    let mut classes: Vec<Vec<usize>> = Vec::new();
    let mut keys: Vec<u32> = prefix.to_vec();
    keys.sort_unstable();
    keys.dedup();
    for k in keys {
        classes.push((0..prefix.len()).filter(|&p| prefix[p] == k).collect());
    }
    debug_assert!(classes.iter().all(|c| c.len() == 1 << free));
    let candidates: f64 = classes.iter().map(|c| binomial(c.len(), c.len() / 2)).product();
    if candidates <= opts.exhaustive_limit as f64 {
        exhaustive(prefix, pairs, &classes)
    } else {
        local_search(prefix, pairs, &classes, seed, opts.restarts)
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn exhaustive(prefix: &[u32], pairs: &[(usize, usize)], classes: &[Vec<usize>]) -> Vec<u8> {
    let subsets: Vec<Vec<u64>> = classes
        .iter()
        .map(|c| {
            let n = c.len();
            (0u64..1 << n)
                .filter(|mask| mask.count_ones() as usize == n / 2)
                .collect()
        })
        .collect();
    let mut bits = vec![0u8; prefix.len()];
    let mut best: Option<((u32, u32), Vec<u8>)> = None;
    let mut idx = vec![0usize; classes.len()];
    loop {
        for (ci, class) in classes.iter().enumerate() {
            let mask = subsets[ci][idx[ci]];
            for (t, &p) in class.iter().enumerate() {
                bits[p] = ((mask >> t) & 1) as u8;
            }
        }
        let s = score(prefix, pairs, &bits);
        if best.as_ref().is_none_or(|(bs, bb)| better((s, &bits), (*bs, bb))) {
            best = Some((s, bits.clone()));
        }
        let mut k = 0;
        loop {
            if k == classes.len() {
                return best.expect("nonempty").1;
            }
            idx[k] += 1;
            if idx[k] < subsets[k].len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

fn local_search(
    prefix: &[u32],
    pairs: &[(usize, usize)],
    classes: &[Vec<usize>],
    seed: u64,
    restarts: usize,
) -> Vec<u8> {
    let mut best: Option<((u32, u32), Vec<u8>)> = None;
    for r in 0..restarts {
        let mut rng = unit_rng(seed, stream::LBPM, r as u64);
        let mut bits = vec![0u8; prefix.len()];
        for class in classes {
            let mut order = class.clone();
            order.shuffle(&mut rng);
            for (t, &p) in order.iter().enumerate() {
                bits[p] = u8::from(t < class.len() / 2);
            }
        }
        let mut current = score(prefix, pairs, &bits);
        loop {
            let mut best_swap: Option<((u32, u32), usize, usize)> = None;
            for class in classes {
                for &a in class {
                    if bits[a] != 0 {
                        continue;
                    }
                    for &b in class {
                        if bits[b] != 1 {
                            continue;
                        }
                        bits.swap(a, b);
                        let s = score(prefix, pairs, &bits);
                        bits.swap(a, b);
                        if s > best_swap.map_or(current, |x| x.0) {
                            best_swap = Some((s, a, b));
                        }
                    }
                }
            }
            match best_swap {
                Some((s, a, b)) => {
                    bits.swap(a, b);
                    current = s;
                }
                None => break,
            }
        }
        if best.as_ref().is_none_or(|(bs, bb)| better((current, &bits), (*bs, bb))) {
            best = Some((current, bits));
        }
    }
    best.expect("at least one restart").1
}
