//! CSV tables and the run manifest.

use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde_json::json;

use super::config::{ExperimentConfig, ExperimentKind};
use super::pipeline::{run_ber, run_capacity, run_design_mapper, run_exit, run_threshold, run_wave};
use super::HarnessError;

/// One CSV file. Floats are written with `{}`, which is the shortest
/// decimal that parses back to the same value.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(name: &str, header: &[&str]) -> Self {
        Self {
            name: name.to_string(),
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header).expect("in-memory write");
        for r in &self.rows {
            w.write_record(r).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
    }
}

/// Extra non-CSV file, such as an exported labeling.
#[derive(Debug, Clone, PartialEq)]
pub struct TextFile {
    pub name: String,
    pub contents: String,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub kind: ExperimentKind,
    pub tables: Vec<Table>,
    pub files: Vec<TextFile>,
    /// Run facts beyond the config echo (code length, thresholds, ...).
    pub summary: serde_json::Value,
}

fn f(x: f64) -> String {
    format!("{x}")
}

/// Runs one experiment and collects its tables.
pub fn run(cfg: &ExperimentConfig, kind: ExperimentKind) -> Result<RunOutput, HarnessError> {
    let mut tables = Vec::new();
    let mut files = Vec::new();
    let mut summary = json!({});
    match kind {
        ExperimentKind::Capacity => {
            let rows = run_capacity(cfg)?;
            let m = rows.first().map_or(0, |r| r.per_bit_ami.len());
            let mut header = vec!["mapper", "esn0_db", "ebn0_db", "cm_bits", "bicm_bits"]
                .into_iter()
                .map(String::from)
                .collect::<Vec<_>>();
            header.extend((1..=m).map(|i| format!("ami_b{i}")));
            let mut t = Table {
                name: "capacity.csv".into(),
                header,
                rows: Vec::new(),
            };
            for r in rows {
                let mut row = vec![r.mapper, f(r.esn0_db), f(r.ebn0_db), f(r.cm_bits), f(r.bicm_bits)];
                row.extend(r.per_bit_ami.into_iter().map(f));
                t.rows.push(row);
            }
            tables.push(t);
        }
        ExperimentKind::DesignMapper => {
            let (setup, rows) = run_design_mapper(cfg)?;
            let m = setup.constellation.bits();
            let mut header: Vec<String> = ["mapper", "m_prime", "min_adjacent_hamming", "total_adjacent_hamming"]
                .into_iter()
                .map(String::from)
                .collect();
            header.extend((1..=m).map(|i| format!("ami_b{i}")));
            let mut t = Table {
                name: "mappers.csv".into(),
                header,
                rows: Vec::new(),
            };
            for r in &rows {
                let mut row = vec![
                    r.mapper.clone(),
                    r.profile.m_prime.to_string(),
                    r.min_adjacent_hamming.to_string(),
                    r.total_adjacent_hamming.to_string(),
                ];
                row.extend(r.profile.per_position_ami.iter().copied().map(f));
                t.rows.push(row);
                files.push(TextFile {
                    name: format!("mapper-{}.txt", file_stem(&r.mapper)),
                    contents: r.labels.to_text(&setup.constellation),
                });
            }
            tables.push(t);
            summary = json!({ "reference_esn0_db": setup.reference_esn0_db });
        }
        ExperimentKind::Threshold => {
            let rows = run_threshold(cfg)?;
            let mut t = Table::new("thresholds.csv", &["mapper", "interleaver", "threshold_db"]);
            let mut p = Table::new(
                "probes.csv",
                &[
                    "mapper",
                    "interleaver",
                    "ebn0_db",
                    "converged_trials",
                    "trials",
                    "converged",
                ],
            );
            for r in &rows {
                t.rows.push(vec![
                    r.mapper.clone(),
                    r.interleaver.as_str().into(),
                    f(r.result.threshold_db),
                ]);
                for pr in &r.result.probes {
                    p.rows.push(vec![
                        r.mapper.clone(),
                        r.interleaver.as_str().into(),
                        f(pr.ebn0_db),
                        pr.converged_trials.to_string(),
                        cfg.exit.trials.to_string(),
                        pr.converged.to_string(),
                    ]);
                }
            }
            tables.push(t);
            tables.push(p);
        }
        ExperimentKind::Exit => {
            let rows = run_exit(cfg)?;
            let mut s = Table::new(
                "exit.csv",
                &["mapper", "interleaver", "ebn0_db", "converged", "outer_iters"],
            );
            let mut t = Table::new(
                "app_trace.csv",
                &["mapper", "interleaver", "ebn0_db", "outer_iter", "vn_index", "i_app"],
            );
            for r in &rows {
                let lead = [r.mapper.clone(), r.interleaver.as_str().to_string(), f(r.ebn0_db)];
                let mut srow = lead.to_vec();
                srow.extend([r.converged.to_string(), r.app_trace.len().to_string()]);
                s.rows.push(srow);
                for (it, app) in r.app_trace.iter().enumerate() {
                    for (j, &v) in app.iter().enumerate() {
                        let mut row = lead.to_vec();
                        row.extend([(it + 1).to_string(), j.to_string(), f(v)]);
                        t.rows.push(row);
                    }
                }
            }
            tables.push(s);
            tables.push(t);
        }
        ExperimentKind::Wave => {
            let rows = run_wave(cfg)?;
            let mut w = Table::new(
                "wave.csv",
                &["mapper", "interleaver", "ebn0_db", "outer_iter", "position", "i_app"],
            );
            let mut s = Table::new(
                "wave_summary.csv",
                &[
                    "mapper",
                    "interleaver",
                    "threshold_db",
                    "ebn0_db",
                    "position",
                    "first_iter_at_level",
                ],
            );
            for r in &rows {
                for (it, row) in r.wave.iter().enumerate() {
                    for (p, &v) in row.iter().enumerate() {
                        w.rows.push(vec![
                            r.mapper.clone(),
                            r.interleaver.as_str().into(),
                            f(r.ebn0_db),
                            (it + 1).to_string(),
                            p.to_string(),
                            f(v),
                        ]);
                    }
                }
                for (p, c) in r.first_crossing.iter().enumerate() {
                    s.rows.push(vec![
                        r.mapper.clone(),
                        r.interleaver.as_str().into(),
                        f(r.threshold_db),
                        f(r.ebn0_db),
                        p.to_string(),
                        c.map_or_else(String::new, |t| t.to_string()),
                    ]);
                }
            }
            tables.push(w);
            tables.push(s);
        }
        ExperimentKind::Ber => {
            let run = run_ber(cfg)?;
            let mut t = Table::new(
                "ber.csv",
                &[
                    "mapper",
                    "interleaver",
                    "ebn0_db",
                    "frames",
                    "bit_errors",
                    "frame_errors",
                    "ber",
                    "fer",
                    "elapsed_s",
                ],
            );
            for r in &run.rows {
                for p in &r.points {
                    t.rows.push(vec![
                        r.mapper.clone(),
                        r.interleaver.as_str().into(),
                        f(p.ebn0_db),
                        p.frames.to_string(),
                        p.bit_errors.to_string(),
                        p.frame_errors.to_string(),
                        f(p.ber),
                        f(p.fer),
                        f(p.elapsed_s),
                    ]);
                }
            }
            tables.push(t);
            summary = json!({ "code_length": run.code_len, "info_length": run.info_len });
        }
    }
    Ok(RunOutput {
        kind,
        tables,
        files,
        summary,
    })
}

fn file_stem(name: &str) -> String {
    name.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '_' {
                c
            } else {
                '_'
            }
        })
        .collect()
}

/// Runs an experiment and writes its tables plus `manifest.json` to `dir`.
pub fn run_to_dir(
    cfg: &ExperimentConfig,
    kind: ExperimentKind,
    workers: usize,
    dir: &Path,
) -> Result<Vec<PathBuf>, HarnessError> {
    let started = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0.0, |d| d.as_secs_f64());
    let clock = Instant::now();
    let out = super::with_workers(workers, || run(cfg, kind))??;
    let wall = clock.elapsed().as_secs_f64();
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    for t in &out.tables {
        let p = dir.join(&t.name);
        std::fs::write(&p, t.to_csv())?;
        written.push(p);
    }
    for file in &out.files {
        let p = dir.join(&file.name);
        std::fs::write(&p, &file.contents)?;
        written.push(p);
    }
    let manifest = json!({
        "kind": kind.as_str(),
        "target": cfg.target,
        "seed": cfg.seed,
        "version": env!("CARGO_PKG_VERSION"),
        "workers": workers,
        "started_unix_s": started,
        "wall_time_s": wall,
        "files": out.tables.iter().map(|t| t.name.clone()).chain(out.files.iter().map(|f| f.name.clone())).collect::<Vec<_>>(),
        "summary": out.summary,
        "config": cfg,
    });
    let p = dir.join("manifest.json");
    std::fs::write(
        &p,
        serde_json::to_string_pretty(&manifest).expect("json value serializes"),
    )?;
    written.push(p);
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_floats_round_trip() {
        let mut t = Table::new("x.csv", &["a", "b"]);
        let vals = [0.1 + 0.2, 1e-5, 2.0 / 3.0, 123456.789];
        for v in vals {
            t.rows.push(vec!["m".into(), f(v)]);
        }
        let text = t.to_csv();
        let mut r = csv::Reader::from_reader(text.as_bytes());
        for (rec, v) in r.records().zip(vals) {
            let got: f64 = rec.unwrap()[1].parse().unwrap();
            assert_eq!(got.to_bits(), v.to_bits());
        }
    }
}
