//! Typed experiment pipelines. Each returns plain result rows; turning them
//! into files is left to [`super::output`].

use std::str::FromStr;

use super::config::{Coupling, ExperimentConfig, ExperimentKind, MiddleOrderConfig};
use super::{ConfigError, HarnessError};
use crate::constellation::{
    adjacent_hamming_stats, bit_protection_profile, builtin_mapper, capacity_sweep, design_lbpm, reference_esn0_db,
    Constellation, LabelMap, LbpmOptions, ProtectionProfile,
};
use crate::exit::{
    first_crossing, threshold_search, wave_matrix, ExitOptions, ExitProblem, ThresholdOptions, ThresholdResult,
};
use crate::interleave::{vnmm, vnmm_optimized, InterleaverKind, InterleaverSpec, MiddleOrder};
use crate::lifting::{lift_peg, LiftedCode};
use crate::phy::{ber_experiment, BerConfig, BerPoint, ReceiverOptions, StopRule};
use crate::protograph::{
    build_tailbiting, build_terminated, code_rate, decompose_edge_spreading, BaseMatrix, CouplingSpec, SpreadingRule,
};

/// Samples used to locate the reference SNR of protection profiling.
const REFERENCE_SAMPLES: usize = 200_000;

/// Parses `8psk`, `16qam`, `qpsk`, ... into a constellation.
pub fn parse_constellation(name: &str) -> Result<Constellation, ConfigError> {
    let lower = name.to_ascii_lowercase();
    let bad = || ConfigError::new("modulation.constellation", format!("unknown constellation '{name}'"));
    if lower == "qpsk" {
        return Constellation::psk(2).map_err(|e| ConfigError::new("modulation.constellation", e.to_string()));
    }
    let (size, build): (&str, fn(usize) -> _) = if let Some(s) = lower.strip_suffix("psk") {
        (s, Constellation::psk)
    } else if let Some(s) = lower.strip_suffix("qam") {
        (s, Constellation::qam)
    } else {
        return Err(bad());
    };
    let size: usize = size.trim_end_matches('-').parse().map_err(|_| bad())?;
    if !size.is_power_of_two() || size < 4 {
        return Err(bad());
    }
    build(size.trailing_zeros() as usize).map_err(|e| ConfigError::new("modulation.constellation", e.to_string()))
}

/// A labeling together with its protection profile at the reference SNR.
#[derive(Debug, Clone)]
pub struct MapperEntry {
    pub name: String,
    pub map: LabelMap,
    pub profile: ProtectionProfile,
}

/// Everything derived from a config before any experiment runs.
#[derive(Debug, Clone)]
pub struct Setup {
    pub constellation: Constellation,
    /// Coupled (or plain) base matrix the code is lifted from.
    pub base: BaseMatrix,
    /// Design rate of `base`, used for every Eb/N0 conversion.
    pub rate: f64,
    /// Columns per coupling position; equals the column count when uncoupled.
    pub cols_per_position: usize,
    pub reference_esn0_db: f64,
    pub mappers: Vec<MapperEntry>,
    pub interleavers: Vec<InterleaverKind>,
}

impl Setup {
    pub fn new(cfg: &ExperimentConfig, kind: ExperimentKind) -> Result<Self, HarnessError> {
        cfg.validate(kind)?;
        let constellation = parse_constellation(&cfg.modulation.constellation)?;
        let (base, cols_per_position) = coupled_base(cfg)?;
        let rate = ratio_to_f64(code_rate(&base));
        let m = constellation.bits();
        let reference = reference_esn0_db(
            &constellation,
            cfg.modulation.rate,
            REFERENCE_SAMPLES,
            cfg.modulation.mapper_seed,
        );
        let mut mappers = Vec::new();
        for name in &cfg.modulation.mappers {
            let map = load_mapper(cfg, name, &constellation, reference)?;
            let profile = bit_protection_profile(
                &constellation,
                &map,
                reference,
                cfg.modulation.profile_samples,
                cfg.modulation.mapper_seed,
            );
            mappers.push(MapperEntry {
                name: name.clone(),
                map,
                profile,
            });
        }
        let interleavers = cfg.interleaver_kinds()?;
        if matches!(
            kind,
            ExperimentKind::Exit | ExperimentKind::Threshold | ExperimentKind::Wave
        ) && interleavers.iter().any(|k| k.is_block_matched())
            && base.cols() % m != 0
        {
            return Err(ConfigError::new(
                "interleaver.kinds",
                format!(
                    "block-matched interleaving needs the {} base columns to split into {m} blocks",
                    base.cols()
                ),
            )
            .into());
        }
        if kind == ExperimentKind::Ber {
            let sent = (0..base.cols()).filter(|&j| !base.is_punctured(j)).count() * cfg.code.lift;
            if !sent.is_multiple_of(m) {
                return Err(ConfigError::new(
                    "code.Z",
                    format!("Z * transmitted columns = {sent} is not divisible by m = {m}"),
                )
                .into());
            }
        }
        Ok(Self {
            constellation,
            base,
            rate,
            cols_per_position,
            reference_esn0_db: reference,
            mappers,
            interleavers,
        })
    }

    pub fn lift(&self, cfg: &ExperimentConfig) -> Result<LiftedCode, HarnessError> {
        lift_peg(&self.base, cfg.code.lift, cfg.code.lift_seed).map_err(|e| HarnessError::Runtime(e.to_string()))
    }

    /// Interleaver of length `n` for one mapper.
    pub fn interleaver(
        &self,
        cfg: &ExperimentConfig,
        kind: InterleaverKind,
        mapper: &MapperEntry,
        n: usize,
    ) -> Result<InterleaverSpec, HarnessError> {
        let m = self.constellation.bits();
        let order = match cfg.interleaver.middle_order {
            MiddleOrderConfig::Sequential => MiddleOrder::Sequential,
            MiddleOrderConfig::ByProtection => MiddleOrder::ByProtection,
        };
        let spec = match kind {
            InterleaverKind::Identity => InterleaverSpec::identity(n, m),
            InterleaverKind::Random => InterleaverSpec::random(n, m, cfg.interleaver.seed),
            InterleaverKind::Vnmm => vnmm(n, m, &mapper.profile, order),
            InterleaverKind::VnmmOpt => vnmm_optimized(n, m, &mapper.profile),
        };
        spec.map_err(|e| HarnessError::Runtime(e.to_string()))
    }

    fn exit_problem(
        &self,
        cfg: &ExperimentConfig,
        mapper: &MapperEntry,
        kind: InterleaverKind,
    ) -> Result<ExitProblem, HarnessError> {
        let m = self.constellation.bits();
        // Only the kind and block map matter; the MC resizes the spec.
        let interleaver = self.interleaver(cfg, kind, mapper, m * m)?;
        Ok(ExitProblem {
            base: self.base.clone(),
            constellation: self.constellation.clone(),
            map: mapper.map.clone(),
            interleaver,
            rate: self.rate,
            options: ExitOptions {
                outer_iters: cfg.decoder.outer_iters,
                inner_iters: cfg.decoder.inner_iters,
                mc_symbols: cfg.exit.mc_symbols,
                epsilon: cfg.exit.epsilon,
                keep_edge_state: cfg.exit.keep_edge_state,
            },
        })
    }

    fn threshold_options(cfg: &ExperimentConfig) -> ThresholdOptions {
        ThresholdOptions {
            lo_db: cfg.exit.lo_db,
            hi_db: cfg.exit.hi_db,
            resolution_db: cfg.exit.resolution_db,
            trials: cfg.exit.trials,
        }
    }
}

fn ratio_to_f64(r: num_rational::Ratio<i64>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

fn coupled_base(cfg: &ExperimentConfig) -> Result<(BaseMatrix, usize), ConfigError> {
    let code = &cfg.code;
    let base = if code.base == "builtin:3-6" {
        BaseMatrix::regular_3_6()
    } else if code.base.starts_with("builtin:") {
        return Err(ConfigError::new(
            "code.base",
            format!("unknown builtin '{}' (known: builtin:3-6)", code.base),
        ));
    } else {
        let text = std::fs::read_to_string(cfg.resolve(&code.base))
            .map_err(|e| ConfigError::new("code.base", e.to_string()))?;
        BaseMatrix::from_str(&text).map_err(|e| ConfigError::new("code.base", e.to_string()))?
    };
    if code.coupling == Coupling::None {
        let cols = base.cols();
        return Ok((base, cols));
    }
    let spec = match &code.spreading {
        Some(file) => {
            let text = std::fs::read_to_string(cfg.resolve(file))
                .map_err(|e| ConfigError::new("code.spreading", e.to_string()))?;
            CouplingSpec::parse(&text).map_err(|e| ConfigError::new("code.spreading", e.to_string()))?
        }
        None => decompose_edge_spreading(&base, code.w, &SpreadingRule::Uniform)
            .map_err(|e| ConfigError::new("code.w", e.to_string()))?,
    };
    let coupled = match code.coupling {
        Coupling::Tailbiting => build_tailbiting(&spec, code.length),
        Coupling::Terminated => build_terminated(&spec, code.length),
        Coupling::None => unreachable!("handled above"),
    }
    .map_err(|e| ConfigError::new("code.L", e.to_string()))?;
    Ok((coupled, spec.base().cols()))
}

fn load_mapper(cfg: &ExperimentConfig, name: &str, c: &Constellation, reference: f64) -> Result<LabelMap, ConfigError> {
    if let Some(file) = name.strip_prefix("file:") {
        let text = std::fs::read_to_string(cfg.resolve(file))
            .map_err(|e| ConfigError::new("modulation.mappers", e.to_string()))?;
        return LabelMap::parse(name, &text, c).map_err(|e| ConfigError::new("modulation.mappers", e.to_string()));
    }
    if name.eq_ignore_ascii_case("lbpm") {
        let opts = LbpmOptions {
            samples: cfg.modulation.profile_samples,
            ..LbpmOptions::default()
        };
        return Ok(design_lbpm(c, reference, cfg.modulation.mapper_seed, &opts));
    }
    builtin_mapper(name, c).map_err(|e| ConfigError::new("modulation.mappers", e.to_string()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct CapacityRow {
    pub mapper: String,
    pub esn0_db: f64,
    pub ebn0_db: f64,
    pub cm_bits: f64,
    pub bicm_bits: f64,
    pub per_bit_ami: Vec<f64>,
}

pub fn run_capacity(cfg: &ExperimentConfig) -> Result<Vec<CapacityRow>, HarnessError> {
    let setup = Setup::new(cfg, ExperimentKind::Capacity)?;
    let c = &setup.constellation;
    let maps: Vec<&LabelMap> = setup.mappers.iter().map(|e| &e.map).collect();
    let grid = cfg.channel.esn0_db.values();
    let sweep = capacity_sweep(c, &maps, &grid, cfg.capacity.samples, cfg.seed);
    let spectral = 10.0 * (cfg.modulation.rate * c.bits() as f64).log10();
    let mut rows = Vec::new();
    for (k, entry) in setup.mappers.iter().enumerate() {
        for p in &sweep {
            rows.push(CapacityRow {
                mapper: entry.name.clone(),
                esn0_db: p.esn0_db,
                ebn0_db: p.esn0_db - spectral,
                cm_bits: p.cm,
                bicm_bits: p.bicm[k],
                per_bit_ami: p.per_position[k].clone(),
            });
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MapperRow {
    pub mapper: String,
    pub labels: LabelMap,
    pub profile: ProtectionProfile,
    pub min_adjacent_hamming: u32,
    pub total_adjacent_hamming: u32,
}

pub fn run_design_mapper(cfg: &ExperimentConfig) -> Result<(Setup, Vec<MapperRow>), HarnessError> {
    let setup = Setup::new(cfg, ExperimentKind::DesignMapper)?;
    let rows = setup
        .mappers
        .iter()
        .map(|e| {
            let (min, total) = adjacent_hamming_stats(&setup.constellation, &e.map);
            MapperRow {
                mapper: e.name.clone(),
                labels: e.map.clone(),
                profile: e.profile.clone(),
                min_adjacent_hamming: min,
                total_adjacent_hamming: total,
            }
        })
        .collect();
    Ok((setup, rows))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdRow {
    pub mapper: String,
    pub interleaver: InterleaverKind,
    pub result: ThresholdResult,
}

pub fn run_threshold(cfg: &ExperimentConfig) -> Result<Vec<ThresholdRow>, HarnessError> {
    let setup = Setup::new(cfg, ExperimentKind::Threshold)?;
    let opts = Setup::threshold_options(cfg);
    let mut rows = Vec::new();
    for mapper in &setup.mappers {
        for &kind in &setup.interleavers {
            let problem = setup.exit_problem(cfg, mapper, kind)?;
            let result =
                threshold_search(&problem, &opts, cfg.seed).map_err(|e| HarnessError::Runtime(e.to_string()))?;
            rows.push(ThresholdRow {
                mapper: mapper.name.clone(),
                interleaver: kind,
                result,
            });
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExitRow {
    pub mapper: String,
    pub interleaver: InterleaverKind,
    pub ebn0_db: f64,
    pub converged: bool,
    pub app_trace: Vec<Vec<f64>>,
}

pub fn run_exit(cfg: &ExperimentConfig) -> Result<Vec<ExitRow>, HarnessError> {
    let setup = Setup::new(cfg, ExperimentKind::Exit)?;
    let mut rows = Vec::new();
    for mapper in &setup.mappers {
        for &kind in &setup.interleavers {
            let problem = setup.exit_problem(cfg, mapper, kind)?;
            for ebn0 in cfg.channel.ebn0_db.values() {
                let r = problem
                    .run(ebn0, cfg.seed)
                    .map_err(|e| HarnessError::Runtime(e.to_string()))?;
                rows.push(ExitRow {
                    mapper: mapper.name.clone(),
                    interleaver: kind,
                    ebn0_db: ebn0,
                    converged: r.converged,
                    app_trace: r.app_trace,
                });
            }
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq)]
pub struct WaveRow {
    pub mapper: String,
    pub interleaver: InterleaverKind,
    pub threshold_db: f64,
    pub ebn0_db: f64,
    /// `wave[t][p]`: mean a-posteriori MI of coupling position `p` after
    /// outer iteration `t + 1`.
    pub wave: Vec<Vec<f64>>,
    /// First outer iteration (1-based) at which each position reaches the
    /// configured level.
    pub first_crossing: Vec<Option<usize>>,
}

pub fn run_wave(cfg: &ExperimentConfig) -> Result<Vec<WaveRow>, HarnessError> {
    let setup = Setup::new(cfg, ExperimentKind::Wave)?;
    let opts = Setup::threshold_options(cfg);
    let mut rows = Vec::new();
    for mapper in &setup.mappers {
        for &kind in &setup.interleavers {
            let problem = setup.exit_problem(cfg, mapper, kind)?;
            let t = threshold_search(&problem, &opts, cfg.seed).map_err(|e| HarnessError::Runtime(e.to_string()))?;
            let ebn0 = t.threshold_db + cfg.exit.wave_offset_db;
            let r = problem
                .run(ebn0, cfg.seed)
                .map_err(|e| HarnessError::Runtime(e.to_string()))?;
            let wave = wave_matrix(&r, setup.cols_per_position);
            let first = first_crossing(&wave, cfg.exit.wave_level);
            rows.push(WaveRow {
                mapper: mapper.name.clone(),
                interleaver: kind,
                threshold_db: t.threshold_db,
                ebn0_db: ebn0,
                wave,
                first_crossing: first,
            });
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BerRow {
    pub mapper: String,
    pub interleaver: InterleaverKind,
    pub points: Vec<BerPoint>,
}

/// Result of a BER run with the code it was measured on.
#[derive(Debug, Clone)]
pub struct BerRun {
    pub code_len: usize,
    pub info_len: usize,
    pub rows: Vec<BerRow>,
}

pub fn run_ber(cfg: &ExperimentConfig) -> Result<BerRun, HarnessError> {
    let setup = Setup::new(cfg, ExperimentKind::Ber)?;
    let code = setup.lift(cfg)?;
    let sent = (0..code.len()).filter(|&b| !code.is_punctured_bit(b)).count();
    let ber_cfg = BerConfig {
        ebn0_db: cfg.channel.ebn0_db.values(),
        rate: setup.rate,
        receiver: ReceiverOptions {
            outer_iters: cfg.decoder.outer_iters,
            inner_iters: cfg.decoder.inner_iters,
            early_stop: cfg.decoder.early_stop,
            min_sum: cfg.decoder.min_sum,
            keep_decoder_state: cfg.decoder.keep_state,
        },
        stop: StopRule {
            bit_errors: cfg.stop.bit_errors,
            max_frames: cfg.stop.max_frames,
        },
        seed: cfg.seed,
        batch: cfg.stop.batch,
    };
    let mut rows = Vec::new();
    for mapper in &setup.mappers {
        for &kind in &setup.interleavers {
            let spec = setup.interleaver(cfg, kind, mapper, sent)?;
            let points = ber_experiment(&code, &setup.constellation, &mapper.map, &spec, &ber_cfg);
            rows.push(BerRow {
                mapper: mapper.name.clone(),
                interleaver: kind,
                points,
            });
        }
    }
    Ok(BerRun {
        code_len: code.len(),
        info_len: code.info_len(),
        rows,
    })
}
