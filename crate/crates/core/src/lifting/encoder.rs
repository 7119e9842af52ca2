use super::gf2::{dot, BitRows};
use super::{LiftingError, SparseMatrix};

/// Systematic encoder obtained from one GF(2) elimination of `H`.
///
/// Pivot columns of the reduced matrix carry parity bits, all other columns
/// carry information bits. Dependent rows of `H` drop out of the reduction,
/// so `K = N - rank(H)` for any `H`.
#[derive(Debug, Clone)]
pub struct Encoder {
    n: usize,
    info_positions: Vec<usize>,
    parity_positions: Vec<usize>,
    /// Row `r` selects the information bits summed into parity bit `r`.
    parity_rows: BitRows,
}

impl Encoder {
    pub fn new(h: &SparseMatrix) -> Result<Self, LiftingError> {
        let n = h.num_cols();
        let mut dense = h.to_bit_rows();
        let pivots = dense.reduce();
        let mut is_pivot = vec![false; n];
        for &p in &pivots {
            is_pivot[p] = true;
        }
        let info_positions: Vec<usize> = (0..n).filter(|&j| !is_pivot[j]).collect();
        if info_positions.is_empty() {
            return Err(LiftingError::RankDeficiencyUnresolved);
        }
        let k = info_positions.len();
        let mut parity_rows = BitRows::zeros(pivots.len(), k);
        for r in 0..pivots.len() {
            for (t, &j) in info_positions.iter().enumerate() {
                if dense.get(r, j) {
                    parity_rows.flip(r, t);
                }
            }
        }
        Ok(Self {
            n,
            info_positions,
            parity_positions: pivots,
            parity_rows,
        })
    }

    pub fn info_len(&self) -> usize {
        self.info_positions.len()
    }

    pub fn rank(&self) -> usize {
        self.parity_positions.len()
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Codeword positions holding the information bits, in order.
    pub fn info_positions(&self) -> &[usize] {
        &self.info_positions
    }

    pub fn encode(&self, info: &[u8]) -> Result<Vec<u8>, LiftingError> {
        if info.len() != self.info_len() {
            return Err(LiftingError::InfoLength {
                expected: self.info_len(),
                got: info.len(),
            });
        }
        let mut packed = vec![0u64; info.len().div_ceil(64)];
        for (t, &b) in info.iter().enumerate() {
            if b & 1 == 1 {
                packed[t / 64] |= 1 << (t % 64);
            }
        }
        let mut word = vec![0u8; self.n];
        for (&pos, &b) in self.info_positions.iter().zip(info) {
            word[pos] = b & 1;
        }
        for (r, &pos) in self.parity_positions.iter().enumerate() {
            word[pos] = dot(self.parity_rows.row(r), &packed);
        }
        Ok(word)
    }

    pub fn extract_info(&self, word: &[u8]) -> Vec<u8> {
        self.info_positions.iter().map(|&p| word[p]).collect()
    }
}
