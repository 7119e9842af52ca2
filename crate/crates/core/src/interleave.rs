//! Bit interleavers between the codeword and the labeling positions.
//!
//! The interleaved stream is grouped into symbols of `m` bits in labeling
//! position order, so stream index `s * m + p` is position `p` of symbol `s`.
//! `permutation[t]` names the codeword bit placed at stream index `t`.
//!
//! The VNMM interleavers cut the codeword into `m` consecutive blocks of
//! `n / m` bits; symbol `s` takes bit `s` of every block, and the blocks at
//! the two ends of the codeword go to the most protected positions.

use std::fmt::Write as _;
use std::str::FromStr;

use rand::seq::SliceRandom;
use thiserror::Error;

use crate::constellation::ProtectionProfile;
use crate::seeding::{stream, unit_rng};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum InterleaveError {
    #[error("codeword length {n} is not a multiple of {m} bits per symbol")]
    BlockMismatch { n: usize, m: usize },
    #[error("VNMM needs exactly two highly protected positions, profile has {0}")]
    ProfileMismatch(usize),
    #[error("VNMM needs at least {need} bits per symbol, got {got}")]
    TooFewBits { need: usize, got: usize },
    #[error("expected {expected} values, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("unknown interleaver '{0}'")]
    UnknownKind(String),
    #[error("interleaver file: {0}")]
    Parse(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum InterleaverKind {
    Vnmm,
    VnmmOpt,
    Random,
    Identity,
}

impl InterleaverKind {
    pub fn as_str(self) -> &'static str {
        match self {
            InterleaverKind::Vnmm => "vnmm",
            InterleaverKind::VnmmOpt => "vnmm_opt",
            InterleaverKind::Random => "random",
            InterleaverKind::Identity => "identity",
        }
    }

    /// Block-structured kinds tie codeword blocks to labeling positions.
    pub fn is_block_matched(self) -> bool {
        matches!(self, InterleaverKind::Vnmm | InterleaverKind::VnmmOpt)
    }
}

impl FromStr for InterleaverKind {
    type Err = InterleaveError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "vnmm" => Ok(Self::Vnmm),
            "vnmm_opt" | "vnmm-opt" => Ok(Self::VnmmOpt),
            "random" => Ok(Self::Random),
            "identity" => Ok(Self::Identity),
            other => Err(InterleaveError::UnknownKind(other.to_string())),
        }
    }
}

/// Order in which the middle blocks of a VNMM interleaver are matched to
/// the generally protected positions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MiddleOrder {
    /// Blocks `2..m-1` take the remaining positions in index order.
    #[default]
    Sequential,
    /// Blocks `2..m-1` take the remaining positions by decreasing AMI.
    ByProtection,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InterleaverSpec {
    kind: InterleaverKind,
    n: usize,
    m: usize,
    block_to_position: Option<Vec<usize>>,
    permutation: Vec<u32>,
    inverse: Vec<u32>,
}

impl InterleaverSpec {
    fn from_permutation(
        kind: InterleaverKind,
        n: usize,
        m: usize,
        block_to_position: Option<Vec<usize>>,
        permutation: Vec<u32>,
    ) -> Self {
        let mut inverse = vec![0u32; n];
        for (t, &c) in permutation.iter().enumerate() {
            inverse[c as usize] = t as u32;
        }
        Self {
            kind,
            n,
            m,
            block_to_position,
            permutation,
            inverse,
        }
    }

    fn check_blocks(n: usize, m: usize) -> Result<(), InterleaveError> {
        if m == 0 || !n.is_multiple_of(m) {
            return Err(InterleaveError::BlockMismatch { n, m });
        }
        Ok(())
    }

    pub fn identity(n: usize, m: usize) -> Result<Self, InterleaveError> {
        Self::check_blocks(n, m)?;
        Ok(Self::from_permutation(
            InterleaverKind::Identity,
            n,
            m,
            None,
            (0..n as u32).collect(),
        ))
    }

    /// Fisher-Yates shuffle driven by `seed`.
    pub fn random(n: usize, m: usize, seed: u64) -> Result<Self, InterleaveError> {
        Self::check_blocks(n, m)?;
        let mut perm: Vec<u32> = (0..n as u32).collect();
        perm.shuffle(&mut unit_rng(seed, stream::INTERLEAVER, n as u64));
        Ok(Self::from_permutation(InterleaverKind::Random, n, m, None, perm))
    }

    /// Block interleaver from an explicit block-to-position assignment.
    pub fn block_matched(
        kind: InterleaverKind,
        n: usize,
        block_to_position: Vec<usize>,
    ) -> Result<Self, InterleaveError> {
        let m = block_to_position.len();
        Self::check_blocks(n, m)?;
        let mut seen = vec![false; m];
        for &p in &block_to_position {
            if p >= m || seen[p] {
                return Err(InterleaveError::Parse("block assignment is not a permutation".into()));
            }
            seen[p] = true;
        }
        let per_block = n / m;
        let mut perm = vec![0u32; n];
        for (block, &pos) in block_to_position.iter().enumerate() {
            for s in 0..per_block {
                perm[s * m + pos] = (block * per_block + s) as u32;
            }
        }
        Ok(Self::from_permutation(kind, n, m, Some(block_to_position), perm))
    }

    /// Same kind and block assignment at a different codeword length.
    pub fn resized(&self, n: usize, seed: u64) -> Result<Self, InterleaveError> {
        match self.kind {
            InterleaverKind::Identity => Self::identity(n, self.m),
            InterleaverKind::Random => Self::random(n, self.m, seed),
            kind => Self::block_matched(kind, n, self.block_to_position.clone().expect("block matched")),
        }
    }

    pub fn kind(&self) -> InterleaverKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn bits_per_symbol(&self) -> usize {
        self.m
    }

    /// Labeling position (zero-based) fed by each block, for block-matched
    /// kinds.
    pub fn block_to_position(&self) -> Option<&[usize]> {
        self.block_to_position.as_deref()
    }

    pub fn permutation(&self) -> &[u32] {
        &self.permutation
    }

    /// Stream index of codeword bit `c`.
    pub fn stream_index(&self, c: usize) -> usize {
        self.inverse[c] as usize
    }

    fn check_len(&self, len: usize) -> Result<(), InterleaveError> {
        if len != self.n {
            return Err(InterleaveError::LengthMismatch {
                expected: self.n,
                got: len,
            });
        }
        Ok(())
    }

    /// Codeword order to symbol-stream order.
    pub fn apply<T: Copy>(&self, input: &[T]) -> Result<Vec<T>, InterleaveError> {
        self.check_len(input.len())?;
        Ok(self.permutation.iter().map(|&c| input[c as usize]).collect())
    }

    /// Symbol-stream order back to codeword order.
    pub fn deinterleave<T: Copy>(&self, input: &[T]) -> Result<Vec<T>, InterleaveError> {
        self.check_len(input.len())?;
        Ok(self.inverse.iter().map(|&t| input[t as usize]).collect())
    }

    /// In-place variants on caller-owned buffers.
    pub fn apply_into<T: Copy>(&self, input: &[T], out: &mut [T]) {
        for (o, &c) in out.iter_mut().zip(&self.permutation) {
            *o = input[c as usize];
        }
    }

    pub fn deinterleave_into<T: Copy>(&self, input: &[T], out: &mut [T]) {
        for (o, &t) in out.iter_mut().zip(&self.inverse) {
            *o = input[t as usize];
        }
    }

    /// Audit format: `kind n m` header and one permutation index per line.
    pub fn to_text(&self) -> String {
        let mut out = format!("{} {} {}\n", self.kind.as_str(), self.n, self.m);
        for &p in &self.permutation {
            let _ = writeln!(out, "{p}");
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self, InterleaveError> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
        let header = lines
            .next()
            .ok_or_else(|| InterleaveError::Parse("empty file".into()))?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(InterleaveError::Parse(format!("bad header '{header}'")));
        }
        let kind: InterleaverKind = fields[0].parse()?;
        let parse_usize = |s: &str| {
            s.parse::<usize>()
                .map_err(|_| InterleaveError::Parse(format!("bad number '{s}'")))
        };
        let n = parse_usize(fields[1])?;
        let m = parse_usize(fields[2])?;
        Self::check_blocks(n, m)?;
        let perm = lines
            .map(|l| {
                l.parse::<u32>()
                    .map_err(|_| InterleaveError::Parse(format!("bad index '{l}'")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        if perm.len() != n {
            return Err(InterleaveError::LengthMismatch {
                expected: n,
                got: perm.len(),
            });
        }
        let mut seen = vec![false; n];
        for &p in &perm {
            if p as usize >= n || seen[p as usize] {
                return Err(InterleaveError::Parse("not a permutation".into()));
            }
            seen[p as usize] = true;
        }
        // Recover the block assignment when the permutation has VNMM shape.
        let block_to_position = if kind.is_block_matched() {
            let per_block = n / m;
            let b2p: Vec<usize> = (0..m).map(|p| perm[p] as usize / per_block).collect::<Vec<_>>();
            let mut inv = vec![0; m];
            for (p, &b) in b2p.iter().enumerate() {
                inv[b] = p;
            }
            Some(inv)
        } else {
            None
        };
        Ok(Self::from_permutation(kind, n, m, block_to_position, perm))
    }
}

/// VNMM: block 1 and block `m` go to the two highly protected positions
/// (block 1 to the lower-indexed one), blocks `2..m-1` to the generally
/// protected positions.
pub fn vnmm(
    n: usize,
    m: usize,
    profile: &ProtectionProfile,
    order: MiddleOrder,
) -> Result<InterleaverSpec, InterleaveError> {
    InterleaverSpec::check_blocks(n, m)?;
    if m < 3 {
        return Err(InterleaveError::TooFewBits { need: 3, got: m });
    }
    if profile.m_prime != 2 || profile.bits() != m {
        return Err(InterleaveError::ProfileMismatch(profile.m_prime));
    }
    let mut high = [profile.ranking[0], profile.ranking[1]];
    high.sort_unstable();
    let mut general: Vec<usize> = match order {
        MiddleOrder::Sequential => (0..m).filter(|p| !high.contains(p)).collect(),
        MiddleOrder::ByProtection => profile.ranking[2..].to_vec(),
    };
    let mut b2p = Vec::with_capacity(m);
    b2p.push(high[0]);
    b2p.append(&mut general);
    b2p.push(high[1]);
    InterleaverSpec::block_matched(InterleaverKind::Vnmm, n, b2p)
}

/// Optimized VNMM: positions are split into `ceil(m / 2)` priority classes
/// of two by decreasing AMI, and block pairs taken from both ends of the
/// codeword toward the middle go to successive classes.
pub fn vnmm_optimized(n: usize, m: usize, profile: &ProtectionProfile) -> Result<InterleaverSpec, InterleaveError> {
    InterleaverSpec::check_blocks(n, m)?;
    if m < 4 {
        return Err(InterleaveError::TooFewBits { need: 4, got: m });
    }
    if profile.bits() != m {
        return Err(InterleaveError::ProfileMismatch(profile.m_prime));
    }
    let mut b2p = vec![0usize; m];
    for class in 0..m.div_ceil(2) {
        let mut positions: Vec<usize> = profile.ranking[2 * class..(2 * class + 2).min(m)].to_vec();
        positions.sort_unstable();
        b2p[class] = positions[0];
        if m - 1 - class != class {
            b2p[m - 1 - class] = positions[1];
        }
    }
    InterleaverSpec::block_matched(InterleaverKind::VnmmOpt, n, b2p)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn profile(amis: &[f64]) -> ProtectionProfile {
        ProtectionProfile::from_amis(amis.to_vec())
    }

    #[test]
    fn vnmm_8psk_example() {
        let prof = profile(&[0.6, 0.6, 0.3]);
        let spec = vnmm(24, 3, &prof, MiddleOrder::Sequential).unwrap();
        assert_eq!(spec.block_to_position(), Some(&[0, 2, 1][..]));
        // Symbol 0: b1 <- bit 0, b2 <- bit 16, b3 <- bit 8.
        assert_eq!(&spec.permutation()[0..3], &[0, 16, 8]);
    }

    #[test]
    fn vnmm_16qam_sequential_and_by_protection() {
        let prof = profile(&[0.7, 0.7, 0.3, 0.5]);
        let seq = vnmm(24, 4, &prof, MiddleOrder::Sequential).unwrap();
        assert_eq!(seq.block_to_position(), Some(&[0, 2, 3, 1][..]));
        let by = vnmm(24, 4, &prof, MiddleOrder::ByProtection).unwrap();
        assert_eq!(by.block_to_position(), Some(&[0, 3, 2, 1][..]));
    }

    #[test]
    fn vnmm_errors() {
        let prof = profile(&[0.7, 0.7, 0.3, 0.5]);
        assert_eq!(
            vnmm(25, 4, &prof, MiddleOrder::Sequential),
            Err(InterleaveError::BlockMismatch { n: 25, m: 4 })
        );
        let one = profile(&[0.9, 0.7, 0.3, 0.5]);
        assert_eq!(
            vnmm(24, 4, &one, MiddleOrder::Sequential),
            Err(InterleaveError::ProfileMismatch(1))
        );
    }

    #[test]
    fn optimized_vnmm_classes() {
        let prof = profile(&[0.8, 0.8, 0.6, 0.6, 0.4, 0.4]);
        let spec = vnmm_optimized(24, 6, &prof).unwrap();
        assert_eq!(spec.block_to_position(), Some(&[0, 2, 4, 5, 3, 1][..]));
        let prof = profile(&[0.7, 0.7, 0.3, 0.5]);
        let spec = vnmm_optimized(24, 4, &prof).unwrap();
        // Blocks (1,4) -> class {b1,b2}; blocks (2,3) -> class {b4,b3}.
        assert_eq!(spec.block_to_position(), Some(&[0, 2, 3, 1][..]));
    }

    #[test]
    fn every_symbol_takes_one_bit_per_block() {
        let prof = profile(&[0.7, 0.7, 0.3, 0.5]);
        let spec = vnmm(48, 4, &prof, MiddleOrder::Sequential).unwrap();
        let b2p = spec.block_to_position().unwrap().to_vec();
        for s in 0..12 {
            let mut blocks: Vec<usize> = (0..4).map(|p| spec.permutation()[s * 4 + p] as usize / 12).collect();
            for (p, &b) in blocks.iter().enumerate() {
                assert_eq!(b2p[b], p);
            }
            blocks.sort_unstable();
            assert_eq!(blocks, vec![0, 1, 2, 3]);
        }
    }

    #[test]
    fn identity_and_random() {
        let id = InterleaverSpec::identity(12, 3).unwrap();
        let x: Vec<u32> = (0..12).collect();
        assert_eq!(id.apply(&x).unwrap(), x);
        let a = InterleaverSpec::random(120, 3, 9).unwrap();
        let b = InterleaverSpec::random(120, 3, 9).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, InterleaverSpec::random(120, 3, 10).unwrap());
        assert!(matches!(a.apply(&x), Err(InterleaveError::LengthMismatch { .. })));
    }

    #[test]
    fn text_round_trip() {
        let prof = profile(&[0.7, 0.7, 0.3, 0.5]);
        let spec = vnmm(48, 4, &prof, MiddleOrder::Sequential).unwrap();
        assert_eq!(InterleaverSpec::parse(&spec.to_text()).unwrap(), spec);
        let r = InterleaverSpec::random(30, 3, 1).unwrap();
        assert_eq!(InterleaverSpec::parse(&r.to_text()).unwrap(), r);
        assert!(InterleaverSpec::parse("random 3 3\n0\n0\n1\n").is_err());
    }
}
