use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{LiftedCode, LiftingError, SparseMatrix};
use crate::protograph::BaseMatrix;

const MAX_ATTEMPTS: usize = 32;

/// Lifts `base` by a factor `lift` with a protograph-constrained PEG search.
///
/// Every check copy in row group `i` ends up with exactly `b[i][j]` neighbors
/// in column group `j`. Each new edge goes to an eligible check that is
/// unreachable from the current variable, or otherwise as far away as
/// possible in the current graph; remaining ties prefer checks with the most
/// unused capacity, then the lowest degree, then a uniformly random choice.
pub fn lift_peg(base: &BaseMatrix, lift: usize, seed: u64) -> Result<LiftedCode, LiftingError> {
    let max_entry = base.max_entry();
    if lift < max_entry as usize || lift == 0 {
        return Err(LiftingError::LiftTooSmall { lift, max_entry });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..MAX_ATTEMPTS {
        if let Some(mut peg) = Peg::new(base, lift).run(&mut rng) {
            peg.repair_four_cycles(&mut rng);
            let rows = peg.check_adj;
            let h = SparseMatrix::from_rows(base.cols() * lift, rows);
            return LiftedCode::new(h, base.clone(), lift);
        }
    }
    Err(LiftingError::PegStuck(MAX_ATTEMPTS))
}

struct Peg<'a> {
    base: &'a BaseMatrix,
    lift: usize,
    var_adj: Vec<Vec<usize>>,
    check_adj: Vec<Vec<usize>>,
    /// Remaining edges each check may still take from each column group,
    /// indexed `check * cols + col`.
    capacity: Vec<u32>,
    check_depth: Vec<u32>,
    check_stamp: Vec<u32>,
    var_stamp: Vec<u32>,
    stamp: u32,
}

impl<'a> Peg<'a> {
    fn new(base: &'a BaseMatrix, lift: usize) -> Self {
        let (mp, np) = base.shape();
        let checks = mp * lift;
        let mut capacity = vec![0; checks * np];
        for c in 0..checks {
            let i = c / lift;
            for j in 0..np {
                capacity[c * np + j] = base.get(i, j);
            }
        }
        Self {
            base,
            lift,
            var_adj: vec![Vec::new(); np * lift],
            check_adj: vec![Vec::new(); checks],
            capacity,
            check_depth: vec![0; checks],
            check_stamp: vec![0; checks],
            var_stamp: vec![0; np * lift],
            stamp: 0,
        }
    }

    fn run(mut self, rng: &mut impl Rng) -> Option<Self> {
        let (mp, np) = self.base.shape();
        for l in 0..self.lift {
            for j in 0..np {
                let v = j * self.lift + l;
                for i in 0..mp {
                    for _ in 0..self.base.get(i, j) {
                        let c = self.choose_check(v, i, j, rng)?;
                        self.var_adj[v].push(c);
                        self.check_adj[c].push(v);
                        self.capacity[c * np + j] -= 1;
                    }
                }
            }
        }
        Some(self)
    }

    /// Number of 4-cycles passing through variable `v`.
    fn cycles_through(&mut self, v: usize) -> usize {
        let mut count = 0;
        let checks = &self.var_adj[v];
        for (a_idx, &a) in checks.iter().enumerate() {
            self.stamp = self.stamp.wrapping_add(1).max(1);
            for &u in &self.check_adj[a] {
                self.var_stamp[u] = self.stamp;
            }
            for &b in &checks[a_idx + 1..] {
                count += self.check_adj[b]
                    .iter()
                    .filter(|&&u| u != v && self.var_stamp[u] == self.stamp)
                    .count();
            }
        }
        count
    }

    fn swap_edges(&mut self, v1: usize, c1: usize, v2: usize, c2: usize) {
        let replace = |list: &mut Vec<usize>, from: usize, to: usize| {
            let pos = list.iter().position(|&x| x == from).expect("edge present");
            list[pos] = to;
        };
        replace(&mut self.var_adj[v1], c1, c2);
        replace(&mut self.var_adj[v2], c2, c1);
        replace(&mut self.check_adj[c1], v1, v2);
        replace(&mut self.check_adj[c2], v2, v1);
    }

    /// Greedy placement is forced for the last copies of every edge bundle,
    /// which can close 4-cycles. Those are removed by exchanging check
    /// endpoints between two edges of the same bundle, which keeps every
    /// bundle's multiplicities intact.
    fn repair_four_cycles(&mut self, rng: &mut impl Rng) {
        let np = self.base.cols();
        let nvars = self.var_adj.len();
        for _ in 0..4 {
            let mut clean = true;
            for v in 0..nvars {
                if self.cycles_through(v) == 0 {
                    continue;
                }
                clean = false;
                let j = v / self.lift;
                let edges = self.var_adj[v].clone();
                'edges: for c1 in edges {
                    let group = c1 / self.lift;
                    let start = rng.random_range(0..self.lift);
                    for off in 0..self.lift {
                        let v2 = j * self.lift + (start + off) % self.lift;
                        if v2 == v {
                            continue;
                        }
                        let partners: Vec<usize> = self.var_adj[v2]
                            .iter()
                            .copied()
                            .filter(|&c| c / self.lift == group && c != c1)
                            .collect();
                        for c2 in partners {
                            if self.var_adj[v].contains(&c2) || self.var_adj[v2].contains(&c1) {
                                continue;
                            }
                            let before = self.cycles_through(v) + self.cycles_through(v2);
                            self.swap_edges(v, c1, v2, c2);
                            let after = self.cycles_through(v) + self.cycles_through(v2);
                            if after < before && self.cycles_through(v2) == 0 {
                                if self.cycles_through(v) == 0 {
                                    break 'edges;
                                }
                                continue 'edges;
                            }
                            self.swap_edges(v, c2, v2, c1);
                        }
                    }
                }
            }
            if clean {
                break;
            }
        }
        debug_assert!(self.capacity.iter().all(|&c| c == 0) || np == 0);
    }

    /// Breadth-first search from `v`, recording the depth at which each
    /// check is first reached. Stops once every eligible check in the target
    /// group has been reached or the tree stops growing.
    fn expand(&mut self, v: usize, group: usize, col: usize) {
        self.stamp = self.stamp.wrapping_add(1);
        if self.stamp == 0 {
            self.check_stamp.fill(0);
            self.var_stamp.fill(0);
            self.stamp = 1;
        }
        let np = self.base.cols();
        let lo = group * self.lift;
        let hi = lo + self.lift;
        let mut remaining = (lo..hi)
            .filter(|&c| self.capacity[c * np + col] > 0 && !self.var_adj[v].contains(&c))
            .count();
        if remaining == 0 {
            return;
        }
        let mut frontier = VecDeque::new();
        self.var_stamp[v] = self.stamp;
        frontier.push_back(v);
        let mut depth = 0;
        while !frontier.is_empty() {
            let mut next = VecDeque::new();
            for &u in &frontier {
                for &c in &self.var_adj[u] {
                    if self.check_stamp[c] == self.stamp {
                        continue;
                    }
                    self.check_stamp[c] = self.stamp;
                    self.check_depth[c] = depth;
                    if (lo..hi).contains(&c) && self.capacity[c * np + col] > 0 && !self.var_adj[v].contains(&c) {
                        remaining -= 1;
                    }
                    for &w in &self.check_adj[c] {
                        if self.var_stamp[w] != self.stamp {
                            self.var_stamp[w] = self.stamp;
                            next.push_back(w);
                        }
                    }
                }
            }
            if remaining == 0 {
                return;
            }
            frontier = next;
            depth += 1;
        }
    }

    fn choose_check(&mut self, v: usize, group: usize, col: usize, rng: &mut impl Rng) -> Option<usize> {
        let np = self.base.cols();
        let lo = group * self.lift;
        let hi = lo + self.lift;
        if !self.var_adj[v].is_empty() {
            self.expand(v, group, col);
        }
        let fresh = self.var_adj[v].is_empty();
        let mut best: Vec<usize> = Vec::new();
        let mut best_key = (0u32, 0u32, usize::MAX);
        for c in lo..hi {
            let cap = self.capacity[c * np + col];
            if cap == 0 || self.var_adj[v].contains(&c) {
                continue;
            }
            let distance = if fresh || self.check_stamp[c] != self.stamp {
                u32::MAX
            } else {
                self.check_depth[c]
            };
            let degree = self.check_adj[c].len();
            let better = (distance, cap) > (best_key.0, best_key.1)
                || ((distance, cap) == (best_key.0, best_key.1) && degree < best_key.2);
            if best.is_empty() || better {
                best.clear();
                best.push(c);
                best_key = (distance, cap, degree);
            } else if (distance, cap, degree) == best_key {
                best.push(c);
            }
        }
        if best.is_empty() {
            return None;
        }
        Some(best[rng.random_range(0..best.len())])
    }
}
