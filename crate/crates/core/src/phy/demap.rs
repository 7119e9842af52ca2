//! Max-log soft demapper with a-priori feedback.

use num_complex::Complex64;

use super::clamp_llr;
use crate::constellation::{Constellation, LabelMap};

/// Per-point bit table of a labeled constellation, ready for demapping.
#[derive(Debug, Clone)]
pub struct Demapper {
    bits_per_symbol: usize,
    points: Vec<Complex64>,
    /// `bits[p * m + i]` is labeling bit `i` of point `p`.
    bits: Vec<bool>,
    /// Points in label order, for modulation.
    by_label: Vec<Complex64>,
}

impl Demapper {
    pub fn new(c: &Constellation, map: &LabelMap) -> Self {
        let m = c.bits();
        let mut bits = Vec::with_capacity(c.size() * m);
        for p in 0..c.size() {
            for i in 0..m {
                bits.push(map.bit(p, i) == 1);
            }
        }
        let by_label = (0..c.size() as u32).map(|l| c.point(map.point(l))).collect();
        Self {
            bits_per_symbol: m,
            points: c.points().to_vec(),
            bits,
            by_label,
        }
    }

    pub fn bits_per_symbol(&self) -> usize {
        self.bits_per_symbol
    }

    /// Symbol carrying `bits` (position 0 first).
    pub fn modulate(&self, bits: &[u8]) -> Complex64 {
        self.by_label[LabelMap::label_from_bits(bits) as usize]
    }

    /// Extrinsic LLRs of one received symbol. `scratch` must hold one value
    /// per constellation point.
    pub fn demap(&self, y: Complex64, sigma2: f64, apriori: &[f64], out: &mut [f64], scratch: &mut [f64]) {
        let m = self.bits_per_symbol;
        let scale = 1.0 / (2.0 * sigma2);
        for (p, metric) in scratch.iter_mut().enumerate() {
            let mut v = -(y - self.points[p]).norm_sqr() * scale;
            for (k, &b) in self.bits[p * m..(p + 1) * m].iter().enumerate() {
                if b {
                    v -= apriori[k];
                }
            }
            *metric = v;
        }
        for (i, o) in out.iter_mut().enumerate().take(m) {
            let mut best0 = f64::NEG_INFINITY;
            let mut best1 = f64::NEG_INFINITY;
            for (p, &metric) in scratch.iter().enumerate() {
                if self.bits[p * m + i] {
                    // Remove the bit's own a-priori term.
                    best1 = best1.max(metric + apriori[i]);
                } else {
                    best0 = best0.max(metric);
                }
            }
            *o = clamp_llr(best0 - best1);
        }
    }
}

/// Convenience wrapper around [`Demapper::demap`] for a single symbol.
pub fn maxlog_demap(c: &Constellation, map: &LabelMap, y: Complex64, sigma2: f64, apriori: &[f64]) -> Vec<f64> {
    let d = Demapper::new(c, map);
    let mut out = vec![0.0; c.bits()];
    let mut scratch = vec![0.0; c.size()];
    d.demap(y, sigma2, apriori, &mut out, &mut scratch);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constellation::{builtin_mapper, make_psk, make_qam};
    use crate::seeding::unit_rng;
    use rand::Rng;

    /// Independent evaluation: enumerate labels, not points, and form both
    /// maxima from scratch for every position.
    fn oracle(c: &Constellation, map: &LabelMap, y: Complex64, sigma2: f64, la: &[f64]) -> Vec<f64> {
        let m = c.bits();
        (0..m)
            .map(|i| {
                let mut best = [f64::NEG_INFINITY; 2];
                for label in 0..c.size() as u32 {
                    let z = c.point(map.point(label));
                    let mut v = -(y - z).norm_sqr() / (2.0 * sigma2);
                    for (k, &a) in la.iter().enumerate() {
                        let bit = (label >> (m - 1 - k)) & 1;
                        if k != i && bit == 1 {
                            v += -a;
                        }
                    }
                    let bi = ((label >> (m - 1 - i)) & 1) as usize;
                    best[bi] = best[bi].max(v);
                }
                (best[0] - best[1]).clamp(-50.0, 50.0)
            })
            .collect()
    }

    #[test]
    fn bpsk_like_two_point_case() {
        // QPSK Gray labels the axes independently; with no a-priori each bit
        // is a BPSK LLR on its own axis.
        let c = make_psk(2).unwrap();
        let map = builtin_mapper("gray", &c).unwrap();
        let mut rng = unit_rng(3, 0, 0);
        for _ in 0..100 {
            let y = Complex64::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
            let l = maxlog_demap(&c, &map, y, 0.4, &[0.0, 0.0]);
            for (i, &li) in l.iter().enumerate() {
                // Points where bit i is 0 and 1 differ along one axis.
                let (p0, p1) = (0..4)
                    .flat_map(|a| (0..4).map(move |b| (a, b)))
                    .find(|&(a, b)| {
                        map.bit(a, i) == 0 && map.bit(b, i) == 1 && (map.label(a) ^ map.label(b)).count_ones() == 1
                    })
                    .unwrap();
                let d = c.point(p0) - c.point(p1);
                let expected = ((y - c.point(p1)).norm_sqr() - (y - c.point(p0)).norm_sqr()) / 0.8;
                let along = (y.re * d.re + y.im * d.im) / 0.4;
                assert!((li - expected).abs() < 1e-9);
                assert!((li - along).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn matches_exhaustive_oracle() {
        let mut rng = unit_rng(4, 0, 0);
        for c in [make_psk(3).unwrap(), make_qam(4).unwrap()] {
            for name in ["gray", "sp", "msew", "antigray"] {
                let map = builtin_mapper(name, &c).unwrap();
                for _ in 0..200 {
                    let y = Complex64::new(rng.random_range(-1.5..1.5), rng.random_range(-1.5..1.5));
                    let la: Vec<f64> = (0..c.bits()).map(|_| rng.random_range(-8.0..8.0)).collect();
                    let s2 = rng.random_range(0.02..1.0);
                    let got = maxlog_demap(&c, &map, y, s2, &la);
                    for (g, w) in got.iter().zip(oracle(&c, &map, y, s2, &la)) {
                        // Equal up to summation order.
                        assert!((g - w).abs() <= 1e-9 * w.abs().max(1.0), "{g} vs {w}");
                    }
                }
            }
        }
    }

    #[test]
    fn low_noise_signs() {
        let c = make_qam(4).unwrap();
        let map = builtin_mapper("sp", &c).unwrap();
        for p in 0..c.size() {
            let l = maxlog_demap(&c, &map, c.point(p), 1e-4, &[0.0; 4]);
            for (i, &li) in l.iter().enumerate() {
                assert_eq!(li > 0.0, map.bit(p, i) == 0);
            }
        }
    }
}
