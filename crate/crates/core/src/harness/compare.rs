//! Side-by-side comparison of threshold or BER result files.

use std::path::Path;

use super::HarnessError;

/// One measured BER point as read back from a result file.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BerSample {
    pub ebn0_db: f64,
    pub ber: f64,
}

/// Eb/N0 at which a measured curve first falls to `target`.
///
/// Points are sorted by Eb/N0 and the crossing is interpolated linearly in
/// (dB, log10 BER) between the bracketing pair. A bracketing point with no
/// errors only bounds the crossing, so its own Eb/N0 is returned.
pub fn ebn0_at_ber(points: &[BerSample], target: f64) -> Option<f64> {
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a.ebn0_db.total_cmp(&b.ebn0_db));
    if let Some(first) = pts.first() {
        if first.ber <= target {
            return None;
        }
    }
    for w in pts.windows(2) {
        let (a, b) = (w[0], w[1]);
        if a.ber > target && b.ber <= target {
            if b.ber <= 0.0 {
                return Some(b.ebn0_db);
            }
            let (la, lb, lt) = (a.ber.log10(), b.ber.log10(), target.log10());
            return Some(a.ebn0_db + (la - lt) / (la - lb) * (b.ebn0_db - a.ebn0_db));
        }
    }
    None
}

/// Gain of curve `b` over curve `a` at `target`: positive when `b` needs
/// less Eb/N0.
pub fn gain_at_ber(a: &[BerSample], b: &[BerSample], target: f64) -> Option<f64> {
    Some(ebn0_at_ber(a, target)? - ebn0_at_ber(b, target)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResultKind {
    Threshold,
    Ber,
}

impl ResultKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ResultKind::Threshold => "threshold",
            ResultKind::Ber => "ber",
        }
    }
}

/// A labeled series from one result file.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub source: String,
    pub mapper: String,
    pub interleaver: String,
    /// Threshold files hold one value; BER files hold a curve.
    pub threshold_db: Option<f64>,
    pub ber: Vec<BerSample>,
}

impl Series {
    pub fn label(&self) -> String {
        format!("{}:{}/{}", self.source, self.mapper, self.interleaver)
    }
}

/// Reads a `thresholds.csv` or `ber.csv` file.
pub fn read_results(path: &Path) -> Result<(ResultKind, Vec<Series>), HarnessError> {
    let mut reader =
        csv::Reader::from_path(path).map_err(|e| HarnessError::Runtime(format!("{}: {e}", path.display())))?;
    let header = reader
        .headers()
        .map_err(|e| HarnessError::Runtime(e.to_string()))?
        .clone();
    let col = |name: &str| header.iter().position(|h| h == name);
    let kind = if col("threshold_db").is_some() {
        ResultKind::Threshold
    } else if col("ber").is_some() && col("ebn0_db").is_some() {
        ResultKind::Ber
    } else {
        return Err(HarnessError::Runtime(format!(
            "{}: neither a threshold nor a BER result file",
            path.display()
        )));
    };
    let source = path
        .parent()
        .and_then(Path::file_name)
        .map_or_else(|| path.display().to_string(), |s| s.to_string_lossy().into_owned());
    let (mi, ii) = (col("mapper"), col("interleaver"));
    let mut series: Vec<Series> = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| HarnessError::Runtime(e.to_string()))?;
        let get = |i: Option<usize>| i.and_then(|i| rec.get(i)).unwrap_or("").to_string();
        let num = |name: &str| -> Result<f64, HarnessError> {
            col(name)
                .and_then(|i| rec.get(i))
                .and_then(|v| v.parse().ok())
                .ok_or_else(|| HarnessError::Runtime(format!("{}: bad '{name}' value", path.display())))
        };
        let (mapper, interleaver) = (get(mi), get(ii));
        let idx = match series
            .iter()
            .position(|s| s.mapper == mapper && s.interleaver == interleaver)
        {
            Some(i) => i,
            None => {
                series.push(Series {
                    source: source.clone(),
                    mapper,
                    interleaver,
                    threshold_db: None,
                    ber: Vec::new(),
                });
                series.len() - 1
            }
        };
        match kind {
            ResultKind::Threshold => series[idx].threshold_db = Some(num("threshold_db")?),
            ResultKind::Ber => series[idx].ber.push(BerSample {
                ebn0_db: num("ebn0_db")?,
                ber: num("ber")?,
            }),
        }
    }
    Ok((kind, series))
}

/// One line of a comparison: the series value and its offset from the
/// first series, both in dB.
#[derive(Debug, Clone, PartialEq)]
pub struct CompareRow {
    pub label: String,
    pub value_db: Option<f64>,
    pub delta_db: Option<f64>,
}

/// Compares result files of one kind. For BER files the value is the
/// Eb/N0 at `target_ber`.
pub fn compare(paths: &[&Path], target_ber: f64) -> Result<(ResultKind, Vec<CompareRow>), HarnessError> {
    let mut kind = None;
    let mut all = Vec::new();
    for p in paths {
        let (k, s) = read_results(p)?;
        match kind {
            None => kind = Some(k),
            Some(prev) if prev != k => {
                return Err(HarnessError::KindMismatch {
                    expected: prev.as_str().to_string(),
                    found: k.as_str().to_string(),
                    path: p.display().to_string(),
                })
            }
            _ => {}
        }
        all.extend(s);
    }
    let kind = kind.ok_or_else(|| HarnessError::Runtime("nothing to compare".into()))?;
    let values: Vec<Option<f64>> = all
        .iter()
        .map(|s| match kind {
            ResultKind::Threshold => s.threshold_db,
            ResultKind::Ber => ebn0_at_ber(&s.ber, target_ber),
        })
        .collect();
    let reference = values.first().copied().flatten();
    let rows = all
        .iter()
        .zip(&values)
        .map(|(s, &v)| CompareRow {
            label: s.label(),
            value_db: v,
            delta_db: v.zip(reference).map(|(v, r)| v - r),
        })
        .collect();
    Ok((kind, rows))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn curve(pts: &[(f64, f64)]) -> Vec<BerSample> {
        pts.iter().map(|&(ebn0_db, ber)| BerSample { ebn0_db, ber }).collect()
    }

    #[test]
    fn log_linear_interpolation() {
        let c = curve(&[(3.0, 1e-3), (3.5, 1e-5)]);
        let x = ebn0_at_ber(&c, 1e-4).unwrap();
        assert!((x - 3.25).abs() < 1e-12);
        assert_eq!(ebn0_at_ber(&c, 1e-6), None);
        assert_eq!(ebn0_at_ber(&c, 1e-2), None);
    }

    #[test]
    fn zero_error_point_bounds_the_crossing() {
        let c = curve(&[(3.0, 1e-3), (3.2, 0.0)]);
        assert_eq!(ebn0_at_ber(&c, 1e-5), Some(3.2));
    }

    #[test]
    fn identical_curves_have_zero_gain() {
        let c = curve(&[(2.0, 1e-1), (2.5, 1e-3), (3.0, 1e-6)]);
        assert_eq!(gain_at_ber(&c, &c, 1e-4), Some(0.0));
    }

    #[test]
    fn kind_mismatch() {
        let dir = tempfile::tempdir().unwrap();
        let a = dir.path().join("thresholds.csv");
        let b = dir.path().join("ber.csv");
        std::fs::write(&a, "mapper,interleaver,threshold_db\nlbpm,random,2.5\n").unwrap();
        std::fs::write(&b, "mapper,interleaver,ebn0_db,ber\nlbpm,random,3,0.001\n").unwrap();
        assert!(matches!(
            compare(&[&a, &b], 1e-4),
            Err(HarnessError::KindMismatch { .. })
        ));
        let (kind, rows) = compare(&[&a, &a], 1e-4).unwrap();
        assert_eq!(kind, ResultKind::Threshold);
        assert_eq!(rows[1].delta_db, Some(0.0));
    }
}
