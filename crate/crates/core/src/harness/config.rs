//! Experiment configuration files and the builtin recipes.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::ConfigError;
use crate::interleave::InterleaverKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Capacity,
    Ber,
    Exit,
    Threshold,
    Wave,
    DesignMapper,
}

impl ExperimentKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentKind::Capacity => "capacity",
            ExperimentKind::Ber => "ber",
            ExperimentKind::Exit => "exit",
            ExperimentKind::Threshold => "threshold",
            ExperimentKind::Wave => "wave",
            ExperimentKind::DesignMapper => "design-mapper",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Coupling {
    #[default]
    None,
    Tailbiting,
    Terminated,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MiddleOrderConfig {
    #[default]
    Sequential,
    ByProtection,
}

/// An Eb/N0 or Es/N0 grid: an explicit list or an inclusive range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Grid {
    List(Vec<f64>),
    Range { start: f64, stop: f64, step: f64 },
}

impl Default for Grid {
    fn default() -> Self {
        Grid::List(Vec::new())
    }
}

impl Grid {
    pub fn values(&self) -> Vec<f64> {
        match self {
            Grid::List(v) => v.clone(),
            Grid::Range { start, stop, step } => {
                if step.is_nan() || *step <= 0.0 || stop < start {
                    return Vec::new();
                }
                let n = ((stop - start) / step + 1e-9).floor() as usize;
                // Rounded to 1e-9 so that 0.1 steps print as short decimals.
                (0..=n)
                    .map(|k| ((start + k as f64 * step) * 1e9).round() / 1e9)
                    .collect()
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CodeConfig {
    /// `builtin:3-6` or a base-matrix file.
    #[serde(default = "default_base")]
    pub base: String,
    #[serde(default)]
    pub coupling: Coupling,
    /// Optional coupling-spec file with explicit components; otherwise the
    /// base matrix is spread uniformly over `w + 1` components.
    #[serde(default)]
    pub spreading: Option<String>,
    #[serde(rename = "L", default = "default_length")]
    pub length: usize,
    #[serde(default = "default_width")]
    pub w: usize,
    #[serde(rename = "Z", default = "default_lift")]
    pub lift: usize,
    #[serde(default = "one")]
    pub lift_seed: u64,
}

impl Default for CodeConfig {
    fn default() -> Self {
        Self {
            base: default_base(),
            coupling: Coupling::None,
            spreading: None,
            length: default_length(),
            w: default_width(),
            lift: default_lift(),
            lift_seed: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModulationConfig {
    /// `8psk`, `16qam`, `64qam`, ...
    pub constellation: String,
    /// Builtin mapper names, `lbpm`, or `file:PATH`.
    #[serde(default = "default_mappers")]
    pub mappers: Vec<String>,
    /// Operating rate for the reference SNR of protection profiling.
    #[serde(default = "default_rate")]
    pub rate: f64,
    #[serde(default = "default_profile_samples")]
    pub profile_samples: usize,
    #[serde(default = "one")]
    pub mapper_seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InterleaverConfig {
    #[serde(default = "default_interleavers")]
    pub kinds: Vec<String>,
    #[serde(default)]
    pub middle_order: MiddleOrderConfig,
    #[serde(default = "one")]
    pub seed: u64,
}

impl Default for InterleaverConfig {
    fn default() -> Self {
        Self {
            kinds: default_interleavers(),
            middle_order: MiddleOrderConfig::Sequential,
            seed: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelConfig {
    #[serde(default)]
    pub ebn0_db: Grid,
    #[serde(default)]
    pub esn0_db: Grid,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecoderConfig {
    #[serde(rename = "T1", default = "default_t1")]
    pub outer_iters: usize,
    #[serde(rename = "T2", default = "default_t2")]
    pub inner_iters: usize,
    #[serde(default = "yes")]
    pub early_stop: bool,
    #[serde(default)]
    pub min_sum: bool,
    #[serde(default = "yes")]
    pub keep_state: bool,
}

impl Default for DecoderConfig {
    fn default() -> Self {
        Self {
            outer_iters: default_t1(),
            inner_iters: default_t2(),
            early_stop: true,
            min_sum: false,
            keep_state: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StopConfig {
    #[serde(default = "default_bit_errors")]
    pub bit_errors: u64,
    #[serde(default = "default_max_frames")]
    pub max_frames: u64,
    #[serde(default = "default_batch")]
    pub batch: usize,
}

impl Default for StopConfig {
    fn default() -> Self {
        Self {
            bit_errors: default_bit_errors(),
            max_frames: default_max_frames(),
            batch: default_batch(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExitConfig {
    #[serde(default = "default_mc_symbols")]
    pub mc_symbols: usize,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default = "yes")]
    pub keep_edge_state: bool,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub lo_db: f64,
    #[serde(default = "default_hi")]
    pub hi_db: f64,
    #[serde(default = "default_resolution")]
    pub resolution_db: f64,
    /// Distance above the threshold at which decoding waves are traced.
    #[serde(default = "default_offset")]
    pub wave_offset_db: f64,
    /// Level that marks a coupling position as decoded in wave summaries.
    #[serde(default = "default_wave_level")]
    pub wave_level: f64,
}

impl Default for ExitConfig {
    fn default() -> Self {
        Self {
            mc_symbols: default_mc_symbols(),
            epsilon: default_epsilon(),
            keep_edge_state: true,
            trials: default_trials(),
            lo_db: 0.0,
            hi_db: default_hi(),
            resolution_db: default_resolution(),
            wave_offset_db: default_offset(),
            wave_level: default_wave_level(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CapacityConfig {
    #[serde(default = "default_capacity_samples")]
    pub samples: usize,
}

impl Default for CapacityConfig {
    fn default() -> Self {
        Self {
            samples: default_capacity_samples(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub kind: Option<ExperimentKind>,
    /// Table or figure the experiment reproduces, echoed in the manifest.
    #[serde(default)]
    pub target: Option<String>,
    #[serde(default = "one")]
    pub seed: u64,
    #[serde(default)]
    pub code: CodeConfig,
    pub modulation: ModulationConfig,
    #[serde(default)]
    pub interleaver: InterleaverConfig,
    #[serde(default)]
    pub channel: ChannelConfig,
    #[serde(default)]
    pub decoder: DecoderConfig,
    #[serde(default)]
    pub stop: StopConfig,
    #[serde(default)]
    pub exit: ExitConfig,
    #[serde(default)]
    pub capacity: CapacityConfig,
    /// Directory that relative file paths are resolved against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

const RECIPES: &[(&str, &str)] = &[
    ("table1-8psk", include_str!("../../recipes/table1-8psk.toml")),
    ("table1-16qam", include_str!("../../recipes/table1-16qam.toml")),
    ("table2-8psk", include_str!("../../recipes/table2-8psk.toml")),
    ("table2-16qam", include_str!("../../recipes/table2-16qam.toml")),
    ("fig4a", include_str!("../../recipes/fig4a.toml")),
    ("fig4b", include_str!("../../recipes/fig4b.toml")),
    ("fig7a", include_str!("../../recipes/fig7a.toml")),
    ("fig7b", include_str!("../../recipes/fig7b.toml")),
    ("fig9a", include_str!("../../recipes/fig9a.toml")),
    ("fig9d", include_str!("../../recipes/fig9d.toml")),
    ("qam64-vnmm", include_str!("../../recipes/qam64-vnmm.toml")),
    ("lbpm-designs", include_str!("../../recipes/lbpm-designs.toml")),
];

/// Names of the builtin recipes.
pub fn builtin_recipes() -> Vec<&'static str> {
    RECIPES.iter().map(|(n, _)| *n).collect()
}

impl ExperimentConfig {
    pub fn from_toml(text: &str, base_dir: &Path) -> Result<Self, ConfigError> {
        let mut cfg: ExperimentConfig = toml::from_str(text).map_err(|e| {
            let span = e
                .span()
                .map(|s| format!(" (bytes {}..{})", s.start, s.end))
                .unwrap_or_default();
            ConfigError::new("config", format!("{}{span}", e.message()))
        })?;
        cfg.base_dir = base_dir.to_path_buf();
        Ok(cfg)
    }

    pub fn builtin(name: &str) -> Result<Self, ConfigError> {
        let text = RECIPES
            .iter()
            .find(|(n, _)| *n == name)
            .map(|(_, t)| *t)
            .ok_or_else(|| {
                ConfigError::new(
                    "config",
                    format!(
                        "unknown builtin recipe '{name}' (known: {})",
                        builtin_recipes().join(", ")
                    ),
                )
            })?;
        Self::from_toml(text, Path::new("."))
    }

    /// Loads `builtin:NAME` or a TOML file.
    pub fn load(source: &str) -> Result<Self, ConfigError> {
        if let Some(name) = source.strip_prefix("builtin:") {
            return Self::builtin(name);
        }
        let path = Path::new(source);
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::new("config", format!("cannot read '{source}': {e}")))?;
        Self::from_toml(&text, path.parent().unwrap_or(Path::new(".")))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn resolve(&self, file: &str) -> PathBuf {
        let p = Path::new(file);
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn interleaver_kinds(&self) -> Result<Vec<InterleaverKind>, ConfigError> {
        self.interleaver
            .kinds
            .iter()
            .map(|k| InterleaverKind::from_str(k).map_err(|e| ConfigError::new("interleaver.kinds", e.to_string())))
            .collect()
    }

    /// Field-level checks that do not need any computation.
    pub fn validate(&self, kind: ExperimentKind) -> Result<(), ConfigError> {
        if let Some(k) = self.kind {
            if k != kind {
                return Err(ConfigError::new(
                    "kind",
                    format!("config is for '{}', not '{}'", k.as_str(), kind.as_str()),
                ));
            }
        }
        let m = &self.modulation;
        if m.mappers.is_empty() {
            return Err(ConfigError::new(
                "modulation.mappers",
                "at least one mapper is required",
            ));
        }
        for name in &m.mappers {
            if let Some(file) = name.strip_prefix("file:") {
                if !self.resolve(file).is_file() {
                    return Err(ConfigError::new(
                        "modulation.mappers",
                        format!("file '{file}' does not exist"),
                    ));
                }
            }
        }
        if !(m.rate > 0.0 && m.rate < 1.0) {
            return Err(ConfigError::new("modulation.rate", "must lie in (0, 1)"));
        }
        if m.profile_samples == 0 {
            return Err(ConfigError::new("modulation.profile_samples", "must be positive"));
        }
        let base = &self.code.base;
        if !base.starts_with("builtin:") && !self.resolve(base).is_file() {
            return Err(ConfigError::new("code.base", format!("file '{base}' does not exist")));
        }
        if let Some(s) = &self.code.spreading {
            if !self.resolve(s).is_file() {
                return Err(ConfigError::new("code.spreading", format!("file '{s}' does not exist")));
            }
        }
        if self.code.lift == 0 {
            return Err(ConfigError::new("code.Z", "must be positive"));
        }
        if self.interleaver.kinds.is_empty() {
            return Err(ConfigError::new(
                "interleaver.kinds",
                "at least one interleaver is required",
            ));
        }
        self.interleaver_kinds()?;
        if self.decoder.outer_iters == 0 {
            return Err(ConfigError::new("decoder.T1", "must be at least 1"));
        }
        if self.decoder.inner_iters == 0 {
            return Err(ConfigError::new("decoder.T2", "must be at least 1"));
        }
        match kind {
            ExperimentKind::Capacity => {
                if self.channel.esn0_db.values().is_empty() {
                    return Err(ConfigError::new("channel.esn0_db", "grid is empty"));
                }
                if self.capacity.samples == 0 {
                    return Err(ConfigError::new("capacity.samples", "must be positive"));
                }
            }
            ExperimentKind::Ber | ExperimentKind::Exit => {
                if self.channel.ebn0_db.values().is_empty() {
                    return Err(ConfigError::new("channel.ebn0_db", "grid is empty"));
                }
            }
            ExperimentKind::Threshold | ExperimentKind::Wave => {
                let e = &self.exit;
                if e.lo_db.partial_cmp(&e.hi_db) != Some(std::cmp::Ordering::Less) {
                    return Err(ConfigError::new("exit.lo_db", "must be below exit.hi_db"));
                }
                if e.resolution_db.is_nan() || e.resolution_db <= 0.0 {
                    return Err(ConfigError::new("exit.resolution_db", "must be positive"));
                }
                if e.trials == 0 {
                    return Err(ConfigError::new("exit.trials", "must be at least 1"));
                }
            }
            ExperimentKind::DesignMapper => {}
        }
        if matches!(
            kind,
            ExperimentKind::Exit | ExperimentKind::Threshold | ExperimentKind::Wave
        ) {
            if self.exit.mc_symbols == 0 {
                return Err(ConfigError::new("exit.mc_symbols", "must be positive"));
            }
            if !(self.exit.epsilon > 0.0 && self.exit.epsilon < 1.0) {
                return Err(ConfigError::new("exit.epsilon", "must lie in (0, 1)"));
            }
        }
        if kind == ExperimentKind::Ber && self.stop.max_frames == 0 {
            return Err(ConfigError::new("stop.max_frames", "must be positive"));
        }
        Ok(())
    }
}

fn default_base() -> String {
    "builtin:3-6".to_string()
}
fn default_length() -> usize {
    12
}
fn default_width() -> usize {
    2
}
fn default_lift() -> usize {
    200
}
fn default_mappers() -> Vec<String> {
    vec!["lbpm".to_string()]
}
fn default_rate() -> f64 {
    0.5
}
fn default_profile_samples() -> usize {
    200_000
}
fn default_interleavers() -> Vec<String> {
    vec!["random".to_string()]
}
fn default_t1() -> usize {
    8
}
fn default_t2() -> usize {
    25
}
fn default_bit_errors() -> u64 {
    100
}
fn default_max_frames() -> u64 {
    1_000_000
}
fn default_batch() -> usize {
    32
}
fn default_mc_symbols() -> usize {
    100_000
}
fn default_epsilon() -> f64 {
    1e-4
}
fn default_trials() -> usize {
    5
}
fn default_hi() -> f64 {
    8.0
}
fn default_resolution() -> f64 {
    0.01
}
fn default_offset() -> f64 {
    0.1
}
fn default_wave_level() -> f64 {
    0.99
}
fn default_capacity_samples() -> usize {
    1_000_000
}
fn one() -> u64 {
    1
}
fn yes() -> bool {
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_builtin_parses_and_names_a_target() {
        for name in builtin_recipes() {
            let cfg = ExperimentConfig::builtin(name).unwrap();
            let kind = cfg.kind.expect("builtin recipes fix their kind");
            cfg.validate(kind).unwrap_or_else(|e| panic!("{name}: {e}"));
            assert!(cfg.target.is_some(), "{name}");
        }
    }

    #[test]
    fn grid_range() {
        let g = Grid::Range {
            start: 3.0,
            stop: 3.3,
            step: 0.1,
        };
        assert_eq!(g.values(), vec![3.0, 3.1, 3.2, 3.3]);
        assert!(Grid::Range {
            start: 1.0,
            stop: 0.0,
            step: 0.1
        }
        .values()
        .is_empty());
    }

    #[test]
    fn unknown_field_is_reported() {
        let err = ExperimentConfig::from_toml("[modulation]\nconstellation = \"8psk\"\nbogus = 1\n", Path::new("."))
            .unwrap_err();
        assert!(err.to_string().contains("bogus"), "{err}");
    }

    #[test]
    fn kind_mismatch_is_a_config_error() {
        let cfg = ExperimentConfig::builtin("fig4a").unwrap();
        let err = cfg.validate(ExperimentKind::Ber).unwrap_err();
        assert_eq!(err.field, "kind");
    }
}
