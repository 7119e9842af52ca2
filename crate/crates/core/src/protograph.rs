//! Protograph base matrices and spatially coupled constructions.
//!
//! A [`BaseMatrix`] holds the edge multiplicities of a protograph together
//! with a per-column puncture flag. A [`CouplingSpec`] splits a base matrix
//! into `w + 1` edge-spreading components, from which the terminated and
//! tail-biting coupled base matrices are assembled.

use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use thiserror::Error;

/// Errors raised while building or parsing protographs.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ProtographError {
    #[error("edge spreading does not sum to the base matrix at ({row}, {col}): {got} != {want}")]
    SpreadingMismatch {
        row: usize,
        col: usize,
        got: u32,
        want: u32,
    },
    #[error("component {index} has shape {got:?}, expected {want:?}")]
    ShapeMismatch {
        index: usize,
        got: (usize, usize),
        want: (usize, usize),
    },
    #[error("coupling length {length} must exceed coupling width {width}")]
    InvalidLength { length: usize, width: usize },
    #[error("coupling width must be at least 1")]
    InvalidWidth,
    #[error("row {0} has no edges")]
    EmptyRow(usize),
    #[error("column {0} has no edges")]
    EmptyColumn(usize),
    #[error("base matrix must have at least one row and one column")]
    Empty,
    #[error("parse error: {0}")]
    Parse(String),
}

/// Protograph base matrix with per-column puncture flags.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BaseMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<u32>,
    punctured: Vec<bool>,
}

impl BaseMatrix {
    /// Builds a base matrix from row vectors, validating that every row and
    /// every column carries at least one edge.
    pub fn new(rows: Vec<Vec<u32>>) -> Result<Self, ProtographError> {
        let m = Self::from_rows_unchecked(rows)?;
        m.validate()?;
        Ok(m)
    }

    /// Same as [`BaseMatrix::new`] without the nonzero row/column check.
    /// Edge-spreading components are allowed to have empty rows or columns.
    pub fn from_rows_unchecked(rows: Vec<Vec<u32>>) -> Result<Self, ProtographError> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        if nrows == 0 || ncols == 0 {
            return Err(ProtographError::Empty);
        }
        let mut entries = Vec::with_capacity(nrows * ncols);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != ncols {
                return Err(ProtographError::Parse(format!(
                    "row {i} has {} entries, expected {ncols}",
                    row.len()
                )));
            }
            entries.extend(row);
        }
        Ok(Self {
            rows: nrows,
            cols: ncols,
            entries,
            punctured: vec![false; ncols],
        })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            entries: vec![0; rows * cols],
            punctured: vec![false; cols],
        }
    }

    /// The regular (3,6) protograph `[[3, 3]]`.
    pub fn regular_3_6() -> Self {
        Self::new(vec![vec![3, 3]]).expect("valid builtin")
    }

    fn validate(&self) -> Result<(), ProtographError> {
        for i in 0..self.rows {
            if (0..self.cols).all(|j| self.get(i, j) == 0) {
                return Err(ProtographError::EmptyRow(i));
            }
        }
        for j in 0..self.cols {
            if (0..self.rows).all(|i| self.get(i, j) == 0) {
                return Err(ProtographError::EmptyColumn(j));
            }
        }
        Ok(())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> u32 {
        self.entries[row * self.cols + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: u32) {
        self.entries[row * self.cols + col] = value;
    }

    pub fn is_punctured(&self, col: usize) -> bool {
        self.punctured[col]
    }

    pub fn punctured(&self) -> &[bool] {
        &self.punctured
    }

    /// Marks the given columns as punctured (not transmitted).
    pub fn with_punctured(mut self, cols: &[usize]) -> Self {
        for &c in cols {
            self.punctured[c] = true;
        }
        self
    }

    pub fn max_entry(&self) -> u32 {
        self.entries.iter().copied().max().unwrap_or(0)
    }

    pub fn column_sum(&self, col: usize) -> u32 {
        (0..self.rows).map(|i| self.get(i, col)).sum()
    }

    pub fn row_sum(&self, row: usize) -> u32 {
        (0..self.cols).map(|j| self.get(row, j)).sum()
    }

    pub fn column_sums(&self) -> Vec<u32> {
        (0..self.cols).map(|j| self.column_sum(j)).collect()
    }

    pub fn row_sums(&self) -> Vec<u32> {
        (0..self.rows).map(|i| self.row_sum(i)).collect()
    }

    pub fn num_edges(&self) -> u32 {
        self.entries.iter().sum()
    }

    /// Rows as nested vectors.
    pub fn to_rows(&self) -> Vec<Vec<u32>> {
        self.entries.chunks(self.cols).map(<[u32]>::to_vec).collect()
    }

    /// Design rate `1 - m_p / n_tx`, where punctured columns are excluded
    /// from the transmitted length. Requires more transmitted columns than
    /// rows.
    pub fn code_rate(&self) -> Ratio<i64> {
        let transmitted = self.punctured.iter().filter(|p| !**p).count() as i64;
        let info = self.cols as i64 - self.rows as i64;
        Ratio::new(info, transmitted)
    }

    /// Entrywise sum of two equal-shaped matrices.
    fn add_assign_block(&mut self, other: &BaseMatrix, row0: usize, col0: usize) {
        for i in 0..other.rows {
            for j in 0..other.cols {
                let v = self.get(row0 + i, col0 + j) + other.get(i, j);
                self.set(row0 + i, col0 + j, v);
            }
        }
    }

    /// Serializes to the plain-text base matrix format.
    pub fn to_text(&self) -> String {
        let mut out = format!("{} {}\n", self.rows, self.cols);
        for row in self.entries.chunks(self.cols) {
            let line: Vec<String> = row.iter().map(u32::to_string).collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
        let punct: Vec<String> = self
            .punctured
            .iter()
            .enumerate()
            .filter(|(_, p)| **p)
            .map(|(j, _)| j.to_string())
            .collect();
        if !punct.is_empty() {
            out.push_str("punctured: ");
            out.push_str(&punct.join(" "));
            out.push('\n');
        }
        out
    }

    /// Parses a matrix from a line iterator, leaving trailing lines unread.
    fn parse_lines<'a, I>(lines: &mut std::iter::Peekable<I>) -> Result<Self, ProtographError>
    where
        I: Iterator<Item = &'a str>,
    {
        let header = lines
            .next()
            .ok_or_else(|| ProtographError::Parse("missing header".into()))?;
        let dims = parse_ints::<usize>(header)?;
        if dims.len() != 2 {
            return Err(ProtographError::Parse(format!(
                "header must be 'rows cols', got '{header}'"
            )));
        }
        let (m, n) = (dims[0], dims[1]);
        let mut rows = Vec::with_capacity(m);
        for i in 0..m {
            let line = lines
                .next()
                .ok_or_else(|| ProtographError::Parse(format!("missing row {i}")))?;
            let row = parse_ints::<u32>(line)?;
            if row.len() != n {
                return Err(ProtographError::Parse(format!(
                    "row {i} has {} entries, expected {n}",
                    row.len()
                )));
            }
            rows.push(row);
        }
        let mut matrix = Self::from_rows_unchecked(rows)?;
        if let Some(line) = lines.peek() {
            if let Some(rest) = line.strip_prefix("punctured:") {
                let cols = parse_ints::<usize>(rest)?;
                lines.next();
                for c in cols {
                    if c >= n {
                        return Err(ProtographError::Parse(format!("punctured column {c} out of range")));
                    }
                    matrix.punctured[c] = true;
                }
            }
        }
        Ok(matrix)
    }
}

fn parse_ints<T: FromStr>(line: &str) -> Result<Vec<T>, ProtographError> {
    line.split_whitespace()
        .map(|t| {
            t.parse::<T>()
                .map_err(|_| ProtographError::Parse(format!("bad integer '{t}'")))
        })
        .collect()
}

fn content_lines(text: &str) -> impl Iterator<Item = &str> {
    text.lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty())
}

impl FromStr for BaseMatrix {
    type Err = ProtographError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut lines = content_lines(s).peekable();
        let m = Self::parse_lines(&mut lines)?;
        if let Some(extra) = lines.next() {
            return Err(ProtographError::Parse(format!("unexpected line '{extra}'")));
        }
        m.validate()?;
        Ok(m)
    }
}

impl fmt::Debug for BaseMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "BaseMatrix {}x{}", self.rows, self.cols)?;
        for row in self.entries.chunks(self.cols) {
            writeln!(f, "  {row:?}")?;
        }
        Ok(())
    }
}

/// Edge-spreading decomposition `B = B_0 + ... + B_w`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CouplingSpec {
    base: BaseMatrix,
    components: Vec<BaseMatrix>,
}

/// How a base matrix is split across coupling positions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SpreadingRule {
    /// Explicit components `B_0..B_w`.
    Explicit(Vec<BaseMatrix>),
    /// Spread every entry as evenly as possible over `w + 1` components,
    /// putting the remainder on the lowest-index components. For `[[3, 3]]`
    /// with `w = 2` this gives `B_0 = B_1 = B_2 = [[1, 1]]`.
    Uniform,
}

impl CouplingSpec {
    pub fn base(&self) -> &BaseMatrix {
        &self.base
    }

    pub fn components(&self) -> &[BaseMatrix] {
        &self.components
    }

    /// Coupling width `w`.
    pub fn width(&self) -> usize {
        self.components.len() - 1
    }

    /// The default (3,6) spreading: `B_0 = B_1 = B_2 = [[1, 1]]`, `w = 2`.
    pub fn regular_3_6() -> Self {
        decompose_edge_spreading(&BaseMatrix::regular_3_6(), 2, &SpreadingRule::Uniform).expect("valid builtin")
    }

    /// Serializes as `w` followed by the `w + 1` stacked component matrices.
    pub fn to_text(&self) -> String {
        let mut out = format!("{}\n", self.width());
        for c in &self.components {
            out.push_str(&c.to_text());
        }
        out
    }

    /// Parses the coupling text format. The base matrix is the sum of the
    /// components; puncture flags are taken from the first component.
    pub fn parse(text: &str) -> Result<Self, ProtographError> {
        let mut lines = content_lines(text).peekable();
        let w_line = lines
            .next()
            .ok_or_else(|| ProtographError::Parse("missing coupling width".into()))?;
        let w: usize = w_line
            .parse()
            .map_err(|_| ProtographError::Parse(format!("bad coupling width '{w_line}'")))?;
        let mut components = Vec::with_capacity(w + 1);
        for _ in 0..=w {
            components.push(BaseMatrix::parse_lines(&mut lines)?);
        }
        if let Some(extra) = lines.next() {
            return Err(ProtographError::Parse(format!("unexpected line '{extra}'")));
        }
        let (m, n) = components[0].shape();
        let mut base = BaseMatrix::zeros(m, n);
        for (k, c) in components.iter().enumerate() {
            if c.shape() != (m, n) {
                return Err(ProtographError::ShapeMismatch {
                    index: k,
                    got: c.shape(),
                    want: (m, n),
                });
            }
            base.add_assign_block(c, 0, 0);
        }
        base.punctured = components[0].punctured.clone();
        base.validate()?;
        decompose_edge_spreading(&base, w, &SpreadingRule::Explicit(components))
    }
}

/// Splits `base` into `w + 1` components following `rule` and checks that
/// they sum back to `base`.
pub fn decompose_edge_spreading(
    base: &BaseMatrix,
    w: usize,
    rule: &SpreadingRule,
) -> Result<CouplingSpec, ProtographError> {
    if w == 0 {
        return Err(ProtographError::InvalidWidth);
    }
    let (m, n) = base.shape();
    let components = match rule {
        SpreadingRule::Explicit(parts) => {
            if parts.len() != w + 1 {
                return Err(ProtographError::Parse(format!(
                    "expected {} components, got {}",
                    w + 1,
                    parts.len()
                )));
            }
            parts.clone()
        }
        SpreadingRule::Uniform => {
            let parts = w as u32 + 1;
            (0..=w as u32)
                .map(|k| {
                    let mut c = BaseMatrix::zeros(m, n);
                    for i in 0..m {
                        for j in 0..n {
                            let b = base.get(i, j);
                            c.set(i, j, b / parts + u32::from(k < b % parts));
                        }
                    }
                    c
                })
                .collect()
        }
    };
    for (k, c) in components.iter().enumerate() {
        if c.shape() != (m, n) {
            return Err(ProtographError::ShapeMismatch {
                index: k,
                got: c.shape(),
                want: (m, n),
            });
        }
    }
    for i in 0..m {
        for j in 0..n {
            let got: u32 = components.iter().map(|c| c.get(i, j)).sum();
            if got != base.get(i, j) {
                return Err(ProtographError::SpreadingMismatch {
                    row: i,
                    col: j,
                    got,
                    want: base.get(i, j),
                });
            }
        }
    }
    Ok(CouplingSpec {
        base: base.clone(),
        components,
    })
}

fn check_length(spec: &CouplingSpec, length: usize) -> Result<(), ProtographError> {
    if length <= spec.width() {
        return Err(ProtographError::InvalidLength {
            length,
            width: spec.width(),
        });
    }
    Ok(())
}

/// Terminated coupled base matrix of size `m_p (L + w) x n_p L`: block column
/// `t` holds `B_0..B_w` in block rows `t..t+w`.
pub fn build_terminated(spec: &CouplingSpec, length: usize) -> Result<BaseMatrix, ProtographError> {
    check_length(spec, length)?;
    let (m, n) = spec.base.shape();
    let w = spec.width();
    let mut out = BaseMatrix::zeros(m * (length + w), n * length);
    for t in 0..length {
        for (k, c) in spec.components.iter().enumerate() {
            out.add_assign_block(c, (t + k) * m, t * n);
        }
        for j in 0..n {
            out.punctured[t * n + j] = spec.base.punctured[j];
        }
    }
    Ok(out)
}

/// Tail-biting coupled base matrix of size `m_p L x n_p L`, obtained by
/// folding the last `m_p w` rows of the terminated matrix onto its first
/// `m_p w` rows.
pub fn build_tailbiting(spec: &CouplingSpec, length: usize) -> Result<BaseMatrix, ProtographError> {
    check_length(spec, length)?;
    let (m, n) = spec.base.shape();
    let mut out = BaseMatrix::zeros(m * length, n * length);
    for t in 0..length {
        for (k, c) in spec.components.iter().enumerate() {
            out.add_assign_block(c, ((t + k) % length) * m, t * n);
        }
        for j in 0..n {
            out.punctured[t * n + j] = spec.base.punctured[j];
        }
    }
    Ok(out)
}

/// Design rate of a base matrix (puncture-adjusted).
pub fn code_rate(base: &BaseMatrix) -> Ratio<i64> {
    base.code_rate()
}

/// Rate of the terminated chain: `1 - ((L + w) / L)(1 - R)`.
pub fn te_rate(spec: &CouplingSpec, length: usize) -> Ratio<i64> {
    let one = Ratio::from_integer(1);
    let r = spec.base.code_rate();
    let l = length as i64;
    let w = spec.width() as i64;
    one - Ratio::new(l + w, l) * (one - r)
}
