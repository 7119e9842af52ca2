//! Monte-Carlo estimates of the CM and BICM capacities.
//!
//! Samples are drawn in fixed-size chunks, each with its own derived seed,
//! and averaged in chunk order, so the estimate does not depend on the
//! number of worker threads. Each draw is used twice with antithetic noise
//! `+n` and `-n`.

use std::f64::consts::LN_2;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use super::{Constellation, LabelMap};
use crate::seeding::{stream, unit_rng};

/// Two labeling positions whose AMIs differ by less than this are treated
/// as equally protected.
pub const AMI_TIE_TOLERANCE: f64 = 0.005;

const CHUNK: usize = 4096;

/// CM capacity and per-position BICM AMIs for a set of labelings, all from
/// the same channel draws.
#[derive(Debug, Clone, PartialEq)]
pub struct CapacityEstimate {
    pub cm: f64,
    /// `per_position[k][i]` is `I(x^{b_i}; y)` for the `k`-th labeling.
    pub per_position: Vec<Vec<f64>>,
}

impl CapacityEstimate {
    pub fn bicm(&self, map_index: usize) -> f64 {
        self.per_position[map_index].iter().sum()
    }
}

/// Per-position protection degrees of a labeling.
#[derive(Debug, Clone, PartialEq)]
pub struct ProtectionProfile {
    pub per_position_ami: Vec<f64>,
    /// Positions sorted by AMI, most protected first; ties keep index order.
    pub ranking: Vec<usize>,
    /// Number of highly protected positions.
    pub m_prime: usize,
}

impl ProtectionProfile {
    /// Builds a profile from per-position AMIs. `m_prime` counts positions
    /// within [`AMI_TIE_TOLERANCE`] of the best one, capped at `m - 1`.
    pub fn from_amis(per_position_ami: Vec<f64>) -> Self {
        let m = per_position_ami.len();
        let mut ranking: Vec<usize> = (0..m).collect();
        ranking.sort_by(|&a, &b| {
            per_position_ami[b]
                .partial_cmp(&per_position_ami[a])
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(a.cmp(&b))
        });
        let best = per_position_ami[ranking[0]];
        let tied = per_position_ami
            .iter()
            .filter(|&&a| best - a < AMI_TIE_TOLERANCE)
            .count();
        // Tied positions must lead the ranking even if MC noise reordered them.
        let mut lead: Vec<usize> = ranking
            .iter()
            .copied()
            .filter(|&p| best - per_position_ami[p] < AMI_TIE_TOLERANCE)
            .collect();
        lead.sort_unstable();
        let rest: Vec<usize> = ranking.iter().copied().filter(|p| !lead.contains(p)).collect();
        let ranking = lead.into_iter().chain(rest).collect();
        Self {
            per_position_ami,
            ranking,
            m_prime: tied.clamp(1, m.saturating_sub(1).max(1)),
        }
    }

    pub fn bits(&self) -> usize {
        self.per_position_ami.len()
    }

    /// Positions grouped into classes of equal protection (within the tie
    /// tolerance of the class leader), best class first.
    pub fn classes(&self) -> Vec<Vec<usize>> {
        let mut classes: Vec<Vec<usize>> = Vec::new();
        for &p in &self.ranking {
            match classes.last_mut() {
                Some(last) if self.per_position_ami[last[0]] - self.per_position_ami[p] < AMI_TIE_TOLERANCE => {
                    last.push(p)
                }
                _ => classes.push(vec![p]),
            }
        }
        classes
    }
}

/// Noise variance per real dimension for unit symbol energy.
pub fn sigma2_from_esn0_db(esn0_db: f64) -> f64 {
    0.5 * 10f64.powf(-esn0_db / 10.0)
}

/// Joint CM / BICM estimate over `samples` channel uses.
pub fn estimate_capacities(
    c: &Constellation,
    maps: &[&LabelMap],
    esn0_db: f64,
    samples: usize,
    seed: u64,
) -> CapacityEstimate {
    let m = c.bits();
    let n0 = 2.0 * sigma2_from_esn0_db(esn0_db);
    let chunks = samples.div_ceil(CHUNK).max(1);
    let sums: Vec<(f64, Vec<Vec<f64>>, usize)> = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let count = if chunk + 1 == chunks {
                samples - chunk * CHUNK
            } else {
                CHUNK
            };
            chunk_sums(c, maps, n0, count, seed, chunk as u64)
        })
        .collect();
    let mut cm = 0.0;
    let mut per = vec![vec![0.0; m]; maps.len()];
    let mut total = 0usize;
    for (s, p, n) in sums {
        cm += s;
        for (acc, v) in per.iter_mut().zip(p) {
            for (a, x) in acc.iter_mut().zip(v) {
                *a += x;
            }
        }
        total += n;
    }
    let total = total.max(1) as f64;
    CapacityEstimate {
        cm: m as f64 - cm / total,
        per_position: per
            .into_iter()
            .map(|v| v.into_iter().map(|s| 1.0 - s / total).collect())
            .collect(),
    }
}

fn chunk_sums(
    c: &Constellation,
    maps: &[&LabelMap],
    n0: f64,
    count: usize,
    seed: u64,
    chunk: u64,
) -> (f64, Vec<Vec<f64>>, usize) {
    let m = c.bits();
    let size = c.size();
    let sigma = (n0 / 2.0).sqrt();
    let mut rng = unit_rng(seed, stream::CAPACITY, chunk);
    let mut cm = 0.0;
    let mut per = vec![vec![0.0; m]; maps.len()];
    let mut metric = vec![0.0; size];
    let mut weight = vec![0.0; size];
    let mut used = 0;
    let mut remaining = count;
    while remaining > 0 {
        let x = rng.random_range(0..size);
        let nr: f64 = rng.sample(StandardNormal);
        let ni: f64 = rng.sample(StandardNormal);
        let noise = Complex64::new(nr, ni) * sigma;
        for sign in [1.0, -1.0] {
            if remaining == 0 {
                break;
            }
            remaining -= 1;
            used += 1;
            let y = c.point(x) + noise * sign;
            let mut best = f64::NEG_INFINITY;
            for (z, mz) in metric.iter_mut().enumerate() {
                *mz = -(y - c.point(z)).norm_sqr() / n0;
                best = best.max(*mz);
            }
            let mut all = 0.0;
            for (w, &mz) in weight.iter_mut().zip(&metric) {
                *w = (mz - best).exp();
                all += *w;
            }
            cm += (all.ln() - (metric[x] - best)) / LN_2;
            for (map, acc) in maps.iter().zip(per.iter_mut()) {
                for (i, a) in acc.iter_mut().enumerate() {
                    let b = map.bit(x, i);
                    let mut same = 0.0;
                    for (z, &w) in weight.iter().enumerate() {
                        if map.bit(z, i) == b {
                            same += w;
                        }
                    }
                    *a += (all / same).ln() / LN_2;
                }
            }
        }
    }
    (cm, per, used)
}

/// CM capacity (bits per symbol) at the given Es/N0.
pub fn cm_capacity(c: &Constellation, esn0_db: f64, samples: usize, seed: u64) -> f64 {
    estimate_capacities(c, &[], esn0_db, samples, seed).cm
}

/// BICM capacity (bits per symbol) of a labeling at the given Es/N0.
pub fn bicm_capacity(c: &Constellation, map: &LabelMap, esn0_db: f64, samples: usize, seed: u64) -> f64 {
    estimate_capacities(c, &[map], esn0_db, samples, seed).bicm(0)
}

/// Per-position AMIs of a labeling at the reference Es/N0.
pub fn bit_protection_profile(
    c: &Constellation,
    map: &LabelMap,
    esn0_db: f64,
    samples: usize,
    seed: u64,
) -> ProtectionProfile {
    let est = estimate_capacities(c, &[map], esn0_db, samples, seed);
    ProtectionProfile::from_amis(est.per_position[0].clone())
}

/// Es/N0 (dB) at which the CM capacity equals `rate * m` bits, found by
/// bisection on common random numbers.
pub fn reference_esn0_db(c: &Constellation, rate: f64, samples: usize, seed: u64) -> f64 {
    let target = rate * c.bits() as f64;
    let (mut lo, mut hi) = (-20.0, 40.0);
    while hi - lo > 1e-3 {
        let mid = 0.5 * (lo + hi);
        if cm_capacity(c, mid, samples, seed) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// One row of a capacity sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct CapacityPoint {
    pub esn0_db: f64,
    pub cm: f64,
    pub bicm: Vec<f64>,
    pub per_position: Vec<Vec<f64>>,
}

/// Capacities over a grid of Es/N0 values.
pub fn capacity_sweep(
    c: &Constellation,
    maps: &[&LabelMap],
    esn0_grid: &[f64],
    samples: usize,
    seed: u64,
) -> Vec<CapacityPoint> {
    esn0_grid
        .iter()
        .map(|&snr| {
            let est = estimate_capacities(c, maps, snr, samples, seed);
            CapacityPoint {
                esn0_db: snr,
                cm: est.cm,
                bicm: (0..maps.len()).map(|k| est.bicm(k)).collect(),
                per_position: est.per_position,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constellation::{builtin_mapper, make_psk, make_qam};

    /// Independent oracle: CM capacity by a fine 2-D grid over the received
    /// plane, integrating the Gaussian mixture directly.
    fn cm_grid_oracle(c: &Constellation, esn0_db: f64) -> f64 {
        let s2 = sigma2_from_esn0_db(esn0_db);
        let sigma = s2.sqrt();
        let half = 1.2 + 7.0 * sigma;
        let steps = 700;
        let h = 2.0 * half / steps as f64;
        let size = c.size() as f64;
        let pdf =
            |y: Complex64, z: Complex64| (-(y - z).norm_sqr() / (2.0 * s2)).exp() / (2.0 * std::f64::consts::PI * s2);
        let mut acc = 0.0;
        for a in 0..steps {
            for b in 0..steps {
                let y = Complex64::new(-half + (a as f64 + 0.5) * h, -half + (b as f64 + 0.5) * h);
                let ps: Vec<f64> = c.points().iter().map(|&z| pdf(y, z)).collect();
                let mix: f64 = ps.iter().sum::<f64>() / size;
                for &p in &ps {
                    if p > 0.0 {
                        acc += p / size * (p / mix).log2() * h * h;
                    }
                }
            }
        }
        acc
    }

    #[test]
    fn cm_matches_grid_oracle_8psk() {
        let c = make_psk(3).unwrap();
        let oracle = cm_grid_oracle(&c, 10.0);
        let mc = cm_capacity(&c, 10.0, 400_000, 5);
        assert!((oracle - mc).abs() < 0.005, "oracle {oracle} mc {mc}");
    }

    #[test]
    fn capacity_limits() {
        let c = make_qam(4).unwrap();
        assert!((cm_capacity(&c, 40.0, 100_000, 1) - 4.0).abs() < 1e-3);
        assert!(cm_capacity(&c, -30.0, 100_000, 1) < 0.01);
        let g = builtin_mapper("gray", &c).unwrap();
        assert!((bicm_capacity(&c, &g, 40.0, 100_000, 1) - 4.0).abs() < 1e-3);
    }

    #[test]
    fn profile_sums_to_bicm() {
        let c = make_psk(3).unwrap();
        let g = builtin_mapper("sp", &c).unwrap();
        let prof = bit_protection_profile(&c, &g, 5.0, 100_000, 9);
        let bicm = bicm_capacity(&c, &g, 5.0, 100_000, 9);
        assert!((prof.per_position_ami.iter().sum::<f64>() - bicm).abs() < 1e-12);
    }

    #[test]
    fn worker_count_invariance() {
        let c = make_psk(3).unwrap();
        let g = builtin_mapper("gray", &c).unwrap();
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let a = one.install(|| estimate_capacities(&c, &[&g], 3.0, 50_000, 3));
        let b = four.install(|| estimate_capacities(&c, &[&g], 3.0, 50_000, 3));
        assert_eq!(a, b);
    }

    #[test]
    fn profile_ties_and_cap() {
        let p = ProtectionProfile::from_amis(vec![0.5, 0.7, 0.698, 0.2]);
        assert_eq!(p.m_prime, 2);
        assert_eq!(p.ranking, vec![1, 2, 0, 3]);
        assert_eq!(p.classes(), vec![vec![1, 2], vec![0], vec![3]]);
        let q = ProtectionProfile::from_amis(vec![0.5, 0.5]);
        assert_eq!(q.m_prime, 1);
    }
}
