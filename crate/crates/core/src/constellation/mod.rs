//! Constellations, bit labelings and constellation-constrained capacities.
//!
//! Labels are integers in `0..2^m`; labeling position `b_1` is the most
//! significant bit. [`LabelMap::bit`] uses zero-based positions, so position
//! `0` is `b_1`.

mod capacity;
mod lbpm;
mod mappers;

use std::f64::consts::PI;
use std::fmt::Write as _;

use num_complex::Complex64;
use thiserror::Error;

pub use capacity::{
    bicm_capacity, bit_protection_profile, capacity_sweep, cm_capacity, estimate_capacities, reference_esn0_db,
    sigma2_from_esn0_db, CapacityEstimate, CapacityPoint, ProtectionProfile, AMI_TIE_TOLERANCE,
};
pub use lbpm::{adjacent_hamming_stats, design_lbpm, LbpmOptions};
pub use mappers::{builtin_mapper, squared_euclidean_weight, MapperName};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConstellationError {
    #[error("unsupported constellation order m = {0}")]
    UnsupportedOrder(usize),
    #[error("unknown mapper '{0}'")]
    UnknownMapper(String),
    #[error("labeling is not a bijection over {0} labels")]
    NotBijective(usize),
    #[error("mapper file: {0}")]
    Parse(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Geometry {
    Psk,
    Qam,
}

/// Unit-energy constellation with its geometric neighbor relation.
#[derive(Debug, Clone, PartialEq)]
pub struct Constellation {
    geometry: Geometry,
    bits: usize,
    points: Vec<Complex64>,
    adjacency: Vec<Vec<usize>>,
}

impl Constellation {
    /// `2^m`-PSK on the unit circle; point `k` sits at angle `2 pi k / M`.
    pub fn psk(m: usize) -> Result<Self, ConstellationError> {
        if !(1..=12).contains(&m) {
            return Err(ConstellationError::UnsupportedOrder(m));
        }
        let size = 1usize << m;
        let points = (0..size)
            .map(|k| Complex64::from_polar(1.0, 2.0 * PI * k as f64 / size as f64))
            .collect();
        let adjacency = (0..size)
            .map(|k| {
                let mut v = vec![(k + size - 1) % size, (k + 1) % size];
                v.sort_unstable();
                v.dedup();
                v
            })
            .collect();
        Ok(Self {
            geometry: Geometry::Psk,
            bits: m,
            points,
            adjacency,
        })
    }

    /// Square `2^m`-QAM scaled to unit average energy. Point `i * side + q`
    /// has in-phase level `i` and quadrature level `q`.
    pub fn qam(m: usize) -> Result<Self, ConstellationError> {
        if m < 2 || !m.is_multiple_of(2) || m > 12 {
            return Err(ConstellationError::UnsupportedOrder(m));
        }
        let side = 1usize << (m / 2);
        let size = side * side;
        let scale = (3.0 / (2.0 * (size as f64 - 1.0))).sqrt();
        let level = |k: usize| (2.0 * k as f64 - side as f64 + 1.0) * scale;
        let mut points = Vec::with_capacity(size);
        let mut adjacency = Vec::with_capacity(size);
        for i in 0..side {
            for q in 0..side {
                points.push(Complex64::new(level(i), level(q)));
                let mut nb = Vec::with_capacity(4);
                if i > 0 {
                    nb.push((i - 1) * side + q);
                }
                if q > 0 {
                    nb.push(i * side + q - 1);
                }
                if q + 1 < side {
                    nb.push(i * side + q + 1);
                }
                if i + 1 < side {
                    nb.push((i + 1) * side + q);
                }
                adjacency.push(nb);
            }
        }
        Ok(Self {
            geometry: Geometry::Qam,
            bits: m,
            points,
            adjacency,
        })
    }

    pub fn geometry(&self) -> Geometry {
        self.geometry
    }

    /// Bits per symbol.
    pub fn bits(&self) -> usize {
        self.bits
    }

    pub fn size(&self) -> usize {
        self.points.len()
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn point(&self, index: usize) -> Complex64 {
        self.points[index]
    }

    pub fn neighbors(&self, index: usize) -> &[usize] {
        &self.adjacency[index]
    }

    /// Unordered adjacent pairs `(a, b)` with `a < b`.
    pub fn adjacent_pairs(&self) -> Vec<(usize, usize)> {
        let mut pairs = Vec::new();
        for (a, nb) in self.adjacency.iter().enumerate() {
            for &b in nb {
                if a < b {
                    pairs.push((a, b));
                }
            }
        }
        pairs
    }

    /// Points of a square QAM grid as (in-phase, quadrature) level indices.
    pub fn grid_position(&self, index: usize) -> Option<(usize, usize)> {
        match self.geometry {
            Geometry::Qam => {
                let side = 1usize << (self.bits / 2);
                Some((index / side, index % side))
            }
            Geometry::Psk => None,
        }
    }

    pub fn mean_energy(&self) -> f64 {
        self.points.iter().map(|p| p.norm_sqr()).sum::<f64>() / self.size() as f64
    }

    /// Short identifier such as `8psk` or `16qam`.
    pub fn name(&self) -> String {
        match self.geometry {
            Geometry::Psk => format!("{}psk", self.size()),
            Geometry::Qam => format!("{}qam", self.size()),
        }
    }
}

/// `make_psk` under its operation name.
pub fn make_psk(m: usize) -> Result<Constellation, ConstellationError> {
    Constellation::psk(m)
}

/// `make_qam` under its operation name.
pub fn make_qam(m: usize) -> Result<Constellation, ConstellationError> {
    Constellation::qam(m)
}

/// Bijection between `m`-bit labels and constellation point indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelMap {
    name: String,
    bits: usize,
    label_of_point: Vec<u32>,
    point_of_label: Vec<u32>,
}

impl LabelMap {
    /// Builds a labeling from the label assigned to each point index.
    pub fn from_point_labels(
        name: impl Into<String>,
        bits: usize,
        labels: Vec<u32>,
    ) -> Result<Self, ConstellationError> {
        let size = 1usize << bits;
        if labels.len() != size {
            return Err(ConstellationError::NotBijective(size));
        }
        let mut point_of_label = vec![u32::MAX; size];
        for (p, &l) in labels.iter().enumerate() {
            let l = l as usize;
            if l >= size || point_of_label[l] != u32::MAX {
                return Err(ConstellationError::NotBijective(size));
            }
            point_of_label[l] = p as u32;
        }
        Ok(Self {
            name: name.into(),
            bits,
            label_of_point: labels,
            point_of_label,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn bits(&self) -> usize {
        self.bits
    }

    pub fn size(&self) -> usize {
        self.label_of_point.len()
    }

    #[inline]
    pub fn label(&self, point: usize) -> u32 {
        self.label_of_point[point]
    }

    #[inline]
    pub fn point(&self, label: u32) -> usize {
        self.point_of_label[label as usize] as usize
    }

    pub fn labels(&self) -> &[u32] {
        &self.label_of_point
    }

    /// Bit at zero-based labeling position `pos` (position 0 is the MSB).
    #[inline]
    pub fn bit(&self, point: usize, pos: usize) -> u8 {
        ((self.label_of_point[point] >> (self.bits - 1 - pos)) & 1) as u8
    }

    /// Label assembled from bits in labeling-position order.
    pub fn label_from_bits(bits: &[u8]) -> u32 {
        bits.iter().fold(0u32, |acc, &b| (acc << 1) | u32::from(b & 1))
    }

    /// Point carrying the given bits.
    pub fn point_of_bits(&self, bits: &[u8]) -> usize {
        self.point(Self::label_from_bits(bits))
    }

    /// Reorders labeling positions: new position `k` takes old position
    /// `order[k]`.
    pub fn permute_positions(&self, order: &[usize]) -> LabelMap {
        let m = self.bits;
        let labels = (0..self.size())
            .map(|p| {
                let bits: Vec<u8> = order.iter().map(|&o| self.bit(p, o)).collect();
                Self::label_from_bits(&bits)
            })
            .collect();
        LabelMap::from_point_labels(self.name.clone(), m, labels).expect("position permutation is bijective")
    }

    /// Export format: one line per label, `bits point_index re im`.
    pub fn to_text(&self, constellation: &Constellation) -> String {
        let mut out = String::new();
        for label in 0..self.size() as u32 {
            let p = self.point(label);
            let z = constellation.point(p);
            let _ = writeln!(out, "{:0width$b} {} {} {}", label, p, z.re, z.im, width = self.bits);
        }
        out
    }

    /// Parses the export format. Coordinates are checked against the given
    /// constellation to within `1e-6`.
    pub fn parse(name: &str, text: &str, constellation: &Constellation) -> Result<Self, ConstellationError> {
        let m = constellation.bits();
        let mut labels = vec![u32::MAX; constellation.size()];
        for line in text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
        {
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 4 && fields.len() != 2 {
                return Err(ConstellationError::Parse(format!("bad line '{line}'")));
            }
            if fields[0].len() != m {
                return Err(ConstellationError::Parse(format!(
                    "label '{}' is not {m} bits",
                    fields[0]
                )));
            }
            let label = u32::from_str_radix(fields[0], 2)
                .map_err(|_| ConstellationError::Parse(format!("bad label '{}'", fields[0])))?;
            let p: usize = fields[1]
                .parse()
                .map_err(|_| ConstellationError::Parse(format!("bad point index '{}'", fields[1])))?;
            if p >= labels.len() {
                return Err(ConstellationError::Parse(format!("point index {p} out of range")));
            }
            if fields.len() == 4 {
                let re: f64 = fields[2]
                    .parse()
                    .map_err(|_| ConstellationError::Parse("bad re".into()))?;
                let im: f64 = fields[3]
                    .parse()
                    .map_err(|_| ConstellationError::Parse("bad im".into()))?;
                if (constellation.point(p) - Complex64::new(re, im)).norm() > 1e-6 {
                    return Err(ConstellationError::Parse(format!(
                        "coordinates of point {p} do not match {}",
                        constellation.name()
                    )));
                }
            }
            labels[p] = label;
        }
        LabelMap::from_point_labels(name, m, labels)
    }
}
