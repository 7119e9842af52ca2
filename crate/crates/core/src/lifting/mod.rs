//! Lifting a base matrix into a finite-length LDPC code.
//!
//! [`lift_peg`] expands every protograph edge bundle into `Z` single edges
//! using a progressive-edge-growth search restricted to the protograph
//! structure. The resulting [`LiftedCode`] carries the sparse parity-check
//! matrix, the bit-to-protograph map and a systematic [`Encoder`].
//!
//! Coded bits are ordered by (protograph column, lift index). For coupled
//! base matrices the columns are already ordered by coupling position, so the
//! first `n / L` bits of a codeword belong to the first position of the chain.

mod alist;
mod encoder;
mod gf2;
mod peg;

use thiserror::Error;

use crate::protograph::BaseMatrix;

pub use alist::{read_alist, write_alist};
pub use encoder::Encoder;
pub use gf2::{gf2_rank, BitRows};
pub use peg::lift_peg;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LiftingError {
    #[error("lift factor {lift} is smaller than the largest base entry {max_entry}")]
    LiftTooSmall { lift: usize, max_entry: u32 },
    #[error("PEG construction could not avoid parallel edges after {0} attempts")]
    PegStuck(usize),
    #[error("Gaussian elimination left no systematic positions")]
    RankDeficiencyUnresolved,
    #[error("expected {expected} information bits, got {got}")]
    InfoLength { expected: usize, got: usize },
    #[error("alist parse error: {0}")]
    Alist(String),
}

/// Sparse binary parity-check matrix stored as row and column adjacency.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparseMatrix {
    rows: Vec<Vec<usize>>,
    cols: Vec<Vec<usize>>,
}

impl SparseMatrix {
    /// Builds a matrix from per-row column lists. Column lists are sorted.
    pub fn from_rows(num_cols: usize, rows: Vec<Vec<usize>>) -> Self {
        let mut cols = vec![Vec::new(); num_cols];
        let mut rows = rows;
        for (i, row) in rows.iter_mut().enumerate() {
            row.sort_unstable();
            for &j in row.iter() {
                cols[j].push(i);
            }
        }
        Self { rows, cols }
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn num_cols(&self) -> usize {
        self.cols.len()
    }

    pub fn row(&self, i: usize) -> &[usize] {
        &self.rows[i]
    }

    pub fn col(&self, j: usize) -> &[usize] {
        &self.cols[j]
    }

    pub fn rows(&self) -> &[Vec<usize>] {
        &self.rows
    }

    pub fn num_edges(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    /// True when some row lists a column twice.
    pub fn has_parallel_edges(&self) -> bool {
        self.rows.iter().any(|r| r.windows(2).any(|w| w[0] == w[1]))
    }

    /// `H c` over GF(2).
    pub fn syndrome(&self, word: &[u8]) -> Vec<u8> {
        self.rows
            .iter()
            .map(|r| r.iter().fold(0u8, |acc, &j| acc ^ (word[j] & 1)))
            .collect()
    }

    pub fn is_codeword(&self, word: &[u8]) -> bool {
        self.rows
            .iter()
            .all(|r| r.iter().fold(0u8, |acc, &j| acc ^ (word[j] & 1)) == 0)
    }

    /// Dense bit-packed copy of the matrix.
    pub fn to_bit_rows(&self) -> BitRows {
        let mut dense = BitRows::zeros(self.num_rows(), self.num_cols());
        for (i, r) in self.rows.iter().enumerate() {
            for &j in r {
                dense.flip(i, j);
            }
        }
        dense
    }
}

/// A lifted protograph code.
#[derive(Debug, Clone)]
pub struct LiftedCode {
    h: SparseMatrix,
    base: BaseMatrix,
    lift: usize,
    encoder: Encoder,
}

impl LiftedCode {
    pub(crate) fn new(h: SparseMatrix, base: BaseMatrix, lift: usize) -> Result<Self, LiftingError> {
        let encoder = Encoder::new(&h)?;
        Ok(Self { h, base, lift, encoder })
    }

    /// Wraps an arbitrary parity-check matrix (for example one read from an
    /// alist file) as a single-column protograph with lift factor `N`.
    pub fn from_parity_check(h: SparseMatrix) -> Result<Self, LiftingError> {
        let n = h.num_cols();
        let base = BaseMatrix::from_rows_unchecked(vec![vec![1]]).expect("1x1");
        let encoder = Encoder::new(&h)?;
        Ok(Self {
            h,
            base,
            lift: n,
            encoder,
        })
    }

    pub fn parity_check(&self) -> &SparseMatrix {
        &self.h
    }

    pub fn base(&self) -> &BaseMatrix {
        &self.base
    }

    pub fn lift_factor(&self) -> usize {
        self.lift
    }

    /// Codeword length `N`.
    pub fn len(&self) -> usize {
        self.h.num_cols()
    }

    pub fn is_empty(&self) -> bool {
        self.h.num_cols() == 0
    }

    /// Number of information bits `K = N - rank(H)`.
    pub fn info_len(&self) -> usize {
        self.encoder.info_len()
    }

    pub fn rank(&self) -> usize {
        self.encoder.rank()
    }

    pub fn encoder(&self) -> &Encoder {
        &self.encoder
    }

    /// (protograph column, lift index) of a coded bit.
    pub fn vn_of_bit(&self, bit: usize) -> (usize, usize) {
        (bit / self.lift, bit % self.lift)
    }

    /// Inverse of [`LiftedCode::vn_of_bit`].
    pub fn bit_of_vn(&self, col: usize, lift_index: usize) -> usize {
        col * self.lift + lift_index
    }

    /// True for bits whose protograph column is punctured.
    pub fn is_punctured_bit(&self, bit: usize) -> bool {
        let col = bit / self.lift;
        col < self.base.cols() && self.base.is_punctured(col)
    }

    pub fn encode(&self, info: &[u8]) -> Result<Vec<u8>, LiftingError> {
        self.encoder.encode(info)
    }

    /// Information bits read back from a codeword.
    pub fn extract_info(&self, word: &[u8]) -> Vec<u8> {
        self.encoder.extract_info(word)
    }
}

/// Brute-force count of 4-cycles: pairs of rows sharing two or more columns.
pub fn count_four_cycles(h: &SparseMatrix) -> usize {
    let mut count = 0;
    let mut seen = vec![usize::MAX; h.num_rows()];
    let mut shared = vec![0usize; h.num_rows()];
    for i in 0..h.num_rows() {
        for &j in h.row(i) {
            for &k in h.col(j) {
                if k <= i {
                    continue;
                }
                if seen[k] != i {
                    seen[k] = i;
                    shared[k] = 0;
                }
                shared[k] += 1;
            }
        }
        for &j in h.row(i) {
            for &k in h.col(j) {
                if k > i && seen[k] == i && shared[k] >= 2 {
                    count += shared[k] * (shared[k] - 1) / 2;
                    shared[k] = 0;
                }
            }
        }
    }
    count
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn four_cycle_counter() {
        let h = SparseMatrix::from_rows(4, vec![vec![0, 1, 2], vec![0, 1, 3], vec![2, 3]]);
        assert_eq!(count_four_cycles(&h), 1);
        let h = SparseMatrix::from_rows(4, vec![vec![0, 1, 2, 3], vec![0, 1, 2, 3]]);
        assert_eq!(count_four_cycles(&h), 6);
        let h = SparseMatrix::from_rows(3, vec![vec![0, 1], vec![1, 2]]);
        assert_eq!(count_four_cycles(&h), 0);
    }

    #[test]
    fn syndrome_basics() {
        let h = SparseMatrix::from_rows(3, vec![vec![0, 1], vec![1, 2]]);
        assert!(h.is_codeword(&[1, 1, 1]));
        assert_eq!(h.syndrome(&[1, 0, 0]), vec![1, 0]);
        assert!(!h.has_parallel_edges());
    }
}
