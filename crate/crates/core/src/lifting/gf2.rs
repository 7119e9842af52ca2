/// Dense GF(2) matrix with rows packed into `u64` words.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitRows {
    cols: usize,
    words: usize,
    data: Vec<u64>,
}

impl BitRows {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        let words = cols.div_ceil(64);
        Self {
            cols,
            words,
            data: vec![0; rows * words],
        }
    }

    pub fn num_rows(&self) -> usize {
        self.data.len().checked_div(self.words).unwrap_or(0)
    }

    pub fn num_cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> bool {
        (self.data[row * self.words + col / 64] >> (col % 64)) & 1 == 1
    }

    #[inline]
    pub fn flip(&mut self, row: usize, col: usize) {
        self.data[row * self.words + col / 64] ^= 1 << (col % 64);
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: bool) {
        if self.get(row, col) != value {
            self.flip(row, col);
        }
    }

    pub fn row(&self, row: usize) -> &[u64] {
        &self.data[row * self.words..(row + 1) * self.words]
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for w in 0..self.words {
            self.data.swap(a * self.words + w, b * self.words + w);
        }
    }

    /// `row[dst] ^= row[src]`.
    pub fn xor_row_into(&mut self, src: usize, dst: usize) {
        let (s, d) = (src * self.words, dst * self.words);
        for w in 0..self.words {
            let v = self.data[s + w];
            self.data[d + w] ^= v;
        }
    }

    /// Reduces to reduced row-echelon form in place, scanning columns left to
    /// right, and returns the pivot column of each nonzero row in order.
    pub fn reduce(&mut self) -> Vec<usize> {
        let rows = self.num_rows();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..self.cols {
            if r == rows {
                break;
            }
            let Some(p) = (r..rows).find(|&i| self.get(i, c)) else {
                continue;
            };
            self.swap_rows(r, p);
            for i in 0..rows {
                if i != r && self.get(i, c) {
                    self.xor_row_into(r, i);
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }
}

/// Rank of a dense GF(2) matrix.
pub fn gf2_rank(m: &BitRows) -> usize {
    m.clone().reduce().len()
}

/// Parity of the AND of two equal-length packed bit vectors.
#[inline]
pub(crate) fn dot(a: &[u64], b: &[u64]) -> u8 {
    let ones: u32 = a.iter().zip(b).map(|(x, y)| (x & y).count_ones()).sum();
    (ones & 1) as u8
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_of_small_matrices() {
        let mut m = BitRows::zeros(3, 3);
        for (i, j) in [(0, 0), (0, 1), (1, 1), (1, 2), (2, 0), (2, 2)] {
            m.flip(i, j);
        }
        // Third row is the sum of the first two.
        assert_eq!(gf2_rank(&m), 2);
        let mut id = BitRows::zeros(70, 70);
        for i in 0..70 {
            id.flip(i, i);
        }
        assert_eq!(gf2_rank(&id), 70);
    }

    #[test]
    fn dot_parity() {
        assert_eq!(dot(&[0b1011], &[0b0011]), 0);
        assert_eq!(dot(&[0b1011, 1], &[0b0001, 1]), 0);
        assert_eq!(dot(&[0b1011, 1], &[0b0001, 0]), 1);
    }
}
