//! Classic labelings: Gray, set partitioning, MSEW and anti-Gray.

use std::str::FromStr;

use super::{Constellation, ConstellationError, Geometry, LabelMap};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MapperName {
    Gray,
    SetPartition,
    Msew,
    AntiGray,
}

impl MapperName {
    pub fn as_str(self) -> &'static str {
        match self {
            MapperName::Gray => "gray",
            MapperName::SetPartition => "sp",
            MapperName::Msew => "msew",
            MapperName::AntiGray => "antigray",
        }
    }
}

impl FromStr for MapperName {
    type Err = ConstellationError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "gray" => Ok(MapperName::Gray),
            "sp" | "set-partition" => Ok(MapperName::SetPartition),
            "msew" => Ok(MapperName::Msew),
            "antigray" | "anti-gray" => Ok(MapperName::AntiGray),
            other => Err(ConstellationError::UnknownMapper(other.to_string())),
        }
    }
}

/// Builds a named labeling for the constellation.
pub fn builtin_mapper(name: &str, constellation: &Constellation) -> Result<LabelMap, ConstellationError> {
    let which: MapperName = name.parse()?;
    let m = constellation.bits();
    let labels = match (which, constellation.geometry()) {
        (MapperName::Gray, Geometry::Psk) => (0..constellation.size() as u32).map(gray).collect(),
        (MapperName::Gray, Geometry::Qam) => qam_product(constellation, |k, _| gray(k)),
        (MapperName::SetPartition, Geometry::Psk) => (0..constellation.size() as u32).collect(),
        (MapperName::SetPartition, Geometry::Qam) => qam_set_partition(constellation),
        (MapperName::AntiGray, Geometry::Psk) => anti_gray_sequence(m),
        (MapperName::AntiGray, Geometry::Qam) => {
            let axis = anti_gray_sequence(m / 2);
            qam_product(constellation, |k, _| axis[k as usize])
        }
        (MapperName::Msew, _) => msew(constellation),
    };
    LabelMap::from_point_labels(which.as_str(), m, labels)
}

fn gray(k: u32) -> u32 {
    k ^ (k >> 1)
}

/// Alternates a Gray sequence with its complements: `g(0), !g(0), g(1),
/// !g(1), ...`, so neighbors differ in `m` and `m - 1` bits alternately.
fn anti_gray_sequence(m: usize) -> Vec<u32> {
    let size = 1u32 << m;
    let mask = size - 1;
    let mut out = Vec::with_capacity(size as usize);
    for t in 0..size / 2 {
        out.push(gray(t));
        out.push(gray(t) ^ mask);
    }
    out
}

/// Labels a square QAM as the concatenation of per-axis labels.
fn qam_product(c: &Constellation, axis: impl Fn(u32, usize) -> u32) -> Vec<u32> {
    let half = c.bits() / 2;
    (0..c.size())
        .map(|p| {
            let (i, q) = c.grid_position(p).expect("qam");
            (axis(i as u32, half) << half) | axis(q as u32, half)
        })
        .collect()
}

/// Ungerboeck partitioning of the square lattice: label bit `k` (counted from
/// the least significant end) alternately splits cosets along the diagonal
/// checkerboard and along the in-phase axis, doubling the squared
/// intra-subset distance at every level.
fn qam_set_partition(c: &Constellation) -> Vec<u32> {
    let half = c.bits() / 2;
    (0..c.size())
        .map(|p| {
            let (i, q) = c.grid_position(p).expect("qam");
            let mut label = 0u32;
            for level in 0..half {
                let (a, b) = ((i >> level) as u32, (q >> level) as u32);
                label |= ((a + b) & 1) << (2 * level);
                label |= (a & 1) << (2 * level + 1);
            }
            label
        })
        .collect()
}

/// Total squared Euclidean distance between each point and its single-bit
/// flipped partners, and the harmonic mean of those distances.
pub fn squared_euclidean_weight(c: &Constellation, map: &LabelMap) -> (f64, f64) {
    let m = map.bits();
    let mut total = 0.0;
    let mut inv = 0.0;
    for p in 0..c.size() {
        let l = map.label(p);
        for i in 0..m {
            let q = map.point(l ^ (1 << i));
            let d2 = (c.point(p) - c.point(q)).norm_sqr();
            total += d2;
            inv += 1.0 / d2;
        }
    }
    let pairs = (c.size() * m) as f64;
    (total, pairs / inv)
}

fn weight_of(c: &Constellation, labels: &[u32], point_of: &[usize]) -> f64 {
    let m = c.bits();
    let mut total = 0.0;
    for (p, &l) in labels.iter().enumerate() {
        for i in 0..m {
            total += (c.point(p) - c.point(point_of[(l ^ (1 << i)) as usize])).norm_sqr();
        }
    }
    total
}

/// Maximum squared Euclidean weight labeling: maximizes the summed squared
/// distance between labels one bit apart, breaking ties by the harmonic
/// mean of those distances and then by the lexicographically smallest label
/// sequence. Exhaustive for up to 8 points, binary switching from the
/// set-partition labeling otherwise.
fn msew(c: &Constellation) -> Vec<u32> {
    let size = c.size();
    if size <= 8 {
        return msew_exhaustive(c);
    }
    let mut labels = match c.geometry() {
        Geometry::Qam => qam_set_partition(c),
        Geometry::Psk => (0..size as u32).collect(),
    };
    let mut point_of = vec![0usize; size];
    for (p, &l) in labels.iter().enumerate() {
        point_of[l as usize] = p;
    }
    let mut current = weight_of(c, &labels, &point_of);
    loop {
        let mut best = (current, usize::MAX, usize::MAX);
        for a in 0..size {
            for b in a + 1..size {
                swap_labels(&mut labels, &mut point_of, a, b);
                let w = weight_of(c, &labels, &point_of);
                if w > best.0 + 1e-9 {
                    best = (w, a, b);
                }
                swap_labels(&mut labels, &mut point_of, a, b);
            }
        }
        if best.1 == usize::MAX {
            break;
        }
        swap_labels(&mut labels, &mut point_of, best.1, best.2);
        current = best.0;
    }
    labels
}

fn swap_labels(labels: &mut [u32], point_of: &mut [usize], a: usize, b: usize) {
    labels.swap(a, b);
    point_of[labels[a] as usize] = a;
    point_of[labels[b] as usize] = b;
}

fn msew_exhaustive(c: &Constellation) -> Vec<u32> {
    let size = c.size();
    let m = c.bits();
    let mut best: Option<(f64, f64, Vec<u32>)> = None;
    // Label 0 sits on point 0 without loss of generality: XOR-ing every
    // label with a constant preserves both criteria.
    let mut rest: Vec<u32> = (1..size as u32).collect();
    loop {
        let mut labels = Vec::with_capacity(size);
        labels.push(0);
        labels.extend_from_slice(&rest);
        let map = LabelMap::from_point_labels("msew", m, labels.clone()).expect("permutation");
        let (w, h) = squared_euclidean_weight(c, &map);
        let better = match &best {
            None => true,
            Some((bw, bh, bl)) => {
                if (w - bw).abs() > 1e-9 {
                    w > *bw
                } else if (h - bh).abs() > 1e-9 {
                    h > *bh
                } else {
                    labels < *bl
                }
            }
        };
        if better {
            best = Some((w, h, labels));
        }
        if !next_permutation(&mut rest) {
            break;
        }
    }
    best.expect("at least one labeling").2
}

fn next_permutation(v: &mut [u32]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let mut i = v.len() - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = v.len() - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}
