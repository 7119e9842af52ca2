//! Monte-Carlo BER measurement.

use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;

use super::receiver::{Receiver, ReceiverOptions, Transmitter};
use super::{awgn, ChannelParams};
use crate::constellation::{Constellation, LabelMap};
use crate::interleave::InterleaverSpec;
use crate::lifting::LiftedCode;
use crate::seeding::{stream, unit_rng};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StopRule {
    /// Stop a point once this many bit errors have been seen.
    pub bit_errors: u64,
    /// Hard cap on frames per point.
    pub max_frames: u64,
}

impl Default for StopRule {
    fn default() -> Self {
        Self {
            bit_errors: 100,
            max_frames: 1_000_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BerConfig {
    pub ebn0_db: Vec<f64>,
    /// Rate used to convert Eb/N0 into noise variance.
    pub rate: f64,
    pub receiver: ReceiverOptions,
    pub stop: StopRule,
    pub seed: u64,
    /// Frames simulated in parallel before the stop rule is checked.
    pub batch: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BerPoint {
    pub ebn0_db: f64,
    pub frames: u64,
    pub bit_errors: u64,
    pub frame_errors: u64,
    pub ber: f64,
    pub fer: f64,
    pub elapsed_s: f64,
}

/// Simulates every grid point. Frame `f` uses the same seed at every point,
/// and frames are tallied in index order, so the counts do not depend on
/// the worker count or the batch size.
pub fn ber_experiment(
    code: &LiftedCode,
    c: &Constellation,
    map: &LabelMap,
    interleaver: &InterleaverSpec,
    cfg: &BerConfig,
) -> Vec<BerPoint> {
    let tx = Transmitter::new(code, c, map, interleaver);
    let rx = Receiver::new(code, c, map, interleaver);
    let k = code.info_len();
    let batch = cfg.batch.max(1) as u64;
    let mut points = Vec::with_capacity(cfg.ebn0_db.len());
    for &ebn0 in &cfg.ebn0_db {
        let start = Instant::now();
        let params = ChannelParams::new(ebn0, cfg.rate, c.bits());
        let (mut frames, mut bit_errors, mut frame_errors) = (0u64, 0u64, 0u64);
        'outer: while frames < cfg.stop.max_frames && bit_errors < cfg.stop.bit_errors {
            let hi = (frames + batch).min(cfg.stop.max_frames);
            let results: Vec<u64> = (frames..hi)
                .into_par_iter()
                .map(|f| simulate_frame(&tx, &rx, k, params.sigma2, &cfg.receiver, cfg.seed, f))
                .collect();
            for errors in results {
                frames += 1;
                bit_errors += errors;
                frame_errors += u64::from(errors > 0);
                if bit_errors >= cfg.stop.bit_errors {
                    break 'outer;
                }
            }
        }
        let info_bits = (frames * k as u64).max(1) as f64;
        points.push(BerPoint {
            ebn0_db: ebn0,
            frames,
            bit_errors,
            frame_errors,
            ber: if frames == 0 {
                0.0
            } else {
                bit_errors as f64 / info_bits
            },
            fer: if frames == 0 {
                0.0
            } else {
                frame_errors as f64 / frames as f64
            },
            elapsed_s: start.elapsed().as_secs_f64(),
        });
    }
    points
}

/// Information-bit errors of one frame.
fn simulate_frame(
    tx: &Transmitter<'_>,
    rx: &Receiver<'_>,
    k: usize,
    sigma2: f64,
    opts: &ReceiverOptions,
    seed: u64,
    frame: u64,
) -> u64 {
    let mut rng = unit_rng(seed, stream::FRAME, frame);
    let info: Vec<u8> = (0..k).map(|_| rng.random_range(0..2u8)).collect();
    let word = tx.code().encode(&info).expect("info length matches");
    let y = awgn(&tx.modulate(&word), sigma2, &mut rng);
    let out = rx.receive(&y, sigma2, opts);
    let decoded = tx.code().extract_info(&out.hard_bits);
    decoded.iter().zip(&info).filter(|(a, b)| a != b).count() as u64
}
