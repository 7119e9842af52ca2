//! MacKay alist import/export.

use std::fmt::Write as _;

use super::{LiftingError, SparseMatrix};

/// Writes `h` in alist format (1-based indices, zero-padded lists).
pub fn write_alist(h: &SparseMatrix) -> String {
    let n = h.num_cols();
    let m = h.num_rows();
    let max_col = (0..n).map(|j| h.col(j).len()).max().unwrap_or(0);
    let max_row = (0..m).map(|i| h.row(i).len()).max().unwrap_or(0);
    let mut out = String::new();
    let _ = writeln!(out, "{n} {m}");
    let _ = writeln!(out, "{max_col} {max_row}");
    let col_degs: Vec<String> = (0..n).map(|j| h.col(j).len().to_string()).collect();
    let _ = writeln!(out, "{}", col_degs.join(" "));
    let row_degs: Vec<String> = (0..m).map(|i| h.row(i).len().to_string()).collect();
    let _ = writeln!(out, "{}", row_degs.join(" "));
    let list = |xs: &[usize], width: usize| {
        let mut v: Vec<String> = xs.iter().map(|x| (x + 1).to_string()).collect();
        v.resize(width, "0".to_string());
        v.join(" ")
    };
    for j in 0..n {
        let _ = writeln!(out, "{}", list(h.col(j), max_col));
    }
    for i in 0..m {
        let _ = writeln!(out, "{}", list(h.row(i), max_row));
    }
    out
}

/// Parses an alist file. Only the row lists are used to build the matrix;
/// the column lists are checked for consistency.
pub fn read_alist(text: &str) -> Result<SparseMatrix, LiftingError> {
    let err = |msg: &str| LiftingError::Alist(msg.to_string());
    let mut nums = text.split_whitespace().map(|t| {
        t.parse::<usize>()
            .map_err(|_| LiftingError::Alist(format!("bad token '{t}'")))
    });
    let mut next = || nums.next().unwrap_or_else(|| Err(err("unexpected end of file")));
    let n = next()?;
    let m = next()?;
    let max_col = next()?;
    let max_row = next()?;
    let col_degs = (0..n).map(|_| next()).collect::<Result<Vec<_>, _>>()?;
    let row_degs = (0..m).map(|_| next()).collect::<Result<Vec<_>, _>>()?;
    let mut cols = Vec::with_capacity(n);
    for &d in &col_degs {
        let entries = (0..max_col).map(|_| next()).collect::<Result<Vec<_>, _>>()?;
        let list: Vec<usize> = entries.into_iter().filter(|&x| x != 0).map(|x| x - 1).collect();
        if list.len() != d {
            return Err(err("column degree mismatch"));
        }
        cols.push(list);
    }
    let mut rows = Vec::with_capacity(m);
    for &d in &row_degs {
        let entries = (0..max_row).map(|_| next()).collect::<Result<Vec<_>, _>>()?;
        let list: Vec<usize> = entries.into_iter().filter(|&x| x != 0).map(|x| x - 1).collect();
        if list.len() != d || list.iter().any(|&j| j >= n) {
            return Err(err("row list mismatch"));
        }
        rows.push(list);
    }
    let h = SparseMatrix::from_rows(n, rows);
    for (j, list) in cols.iter_mut().enumerate() {
        list.sort_unstable();
        if list.as_slice() != h.col(j) {
            return Err(err("row and column lists disagree"));
        }
    }
    Ok(h)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let h = SparseMatrix::from_rows(5, vec![vec![0, 1, 3], vec![1, 2, 4], vec![0, 4]]);
        let text = write_alist(&h);
        assert_eq!(read_alist(&text).unwrap(), h);
    }

    #[test]
    fn rejects_inconsistent() {
        let text = "2 1\n1 2\n1 1\n2\n1\n2\n1 1\n";
        assert!(read_alist(text).is_err());
        assert!(read_alist("2 1\n1").is_err());
    }
}
