//! Experiment configuration: a TOML schema with one `[[filter]]` section
//! per algorithm variant, strict unknown-key rejection, and documented
//! defaults.
//!
//! ```text
//! length     = 256          # taps (required)
//! iterations = 40000        # samples per run (required)
//! runs       = 100          # ensemble size (default 100)
//! base_seed  = 2024         # master seed, 0..=i64::MAX (default 0)
//! msd_window = 4000         # steady-state window (default iterations/10)
//!
//! [input]                   # default: white
//! kind  = "ar1"             # "white" | "ar1"
//! theta = 0.9               # AR(1) pole (default 0.9)
//!
//! [noise]                   # default: 0.01 / 0.001 / 1000
//! sigma_s_sq   = 0.01
//! prob_impulse = 0.001
//! sigma_i_sq   = 1000.0
//!
//! [system]                  # required
//! kind   = "generated"      # "generated" | "clustered" | "file"
//! active = 16               # nonzero taps (generated/clustered)
//! seed   = 7                # optional; derived from base_seed if absent
//! # path = "system.txt"     # file source
//!
//! [switch]                  # optional: tracking experiments only
//! iteration = 20000
//! [switch.system]
//! kind   = "clustered"
//! active = 64
//!
//! [[filter]]
//! variant   = "ipmcc"       # "lms" | "mcc" | "pmcc" | "ipmcc"
//! mu        = 0.00097       # required
//! sigma     = 1.25          # kernel width (kernel variants; default 1.25)
//! alpha     = 0.0           # proportionate mix (pmcc/ipmcc; default 0)
//! epsilon_p = 0.01          # gain regularizer (pmcc/ipmcc; default 0.01)
//! ```
//!
//! Keys that do not apply to a variant (e.g. `sigma` on `lms`) are
//! rejected rather than ignored, as is any unknown key anywhere.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use ipmcc_core::{derive_seed, FilterParams, InputModel, NoiseModel, SparseSystem};

use crate::error::{Error, Result};

pub const DEFAULT_RUNS: usize = 100;
pub const DEFAULT_SIGMA: f64 = 1.25;
pub const DEFAULT_ALPHA: f64 = 0.0;
pub const DEFAULT_EPSILON_P: f64 = 0.01;
pub const DEFAULT_THETA: f64 = 0.9;
pub const DEFAULT_SIGMA_S_SQ: f64 = 0.01;
pub const DEFAULT_PROB_IMPULSE: f64 = 0.001;
pub const DEFAULT_SIGMA_I_SQ: f64 = 1000.0;

/// Seed stream indices hung off the base seed. Runs occupy the open range
/// starting at [`STREAM_RUN_BASE`].
pub const STREAM_SYSTEM: u64 = 0;
pub const STREAM_SWITCH_SYSTEM: u64 = 1;
pub const STREAM_RUN_BASE: u64 = 2;

/// Shortest filter length the steady-state predictions are quoted for;
/// shorter configs still run but the CLI flags them.
pub const THEORY_MIN_LENGTH: usize = 64;

/// Algorithm selector for one `[[filter]]` section.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FilterVariant {
    Lms,
    Mcc,
    Pmcc,
    Ipmcc,
}

impl FilterVariant {
    pub fn label(&self) -> &'static str {
        match self {
            FilterVariant::Lms => "lms",
            FilterVariant::Mcc => "mcc",
            FilterVariant::Pmcc => "pmcc",
            FilterVariant::Ipmcc => "ipmcc",
        }
    }

    fn parse(s: &str) -> Result<Self> {
        match s {
            "lms" => Ok(FilterVariant::Lms),
            "mcc" => Ok(FilterVariant::Mcc),
            "pmcc" => Ok(FilterVariant::Pmcc),
            "ipmcc" => Ok(FilterVariant::Ipmcc),
            other => Err(Error::Config(format!(
                "unknown filter variant {other:?}; expected lms, mcc, pmcc, or ipmcc"
            ))),
        }
    }

    fn uses_kernel(&self) -> bool {
        !matches!(self, FilterVariant::Lms)
    }

    fn uses_gains(&self) -> bool {
        matches!(self, FilterVariant::Pmcc | FilterVariant::Ipmcc)
    }
}

/// One configured filter: the variant plus its update parameters.
///
/// `sigma`, `alpha`, and `epsilon_p` carry their defaults even for
/// variants that ignore them so the struct stays plain data; validation
/// rejects configs that set them explicitly where they have no effect.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterSpec {
    pub variant: FilterVariant,
    pub mu: f64,
    pub sigma: f64,
    pub alpha: f64,
    pub epsilon_p: f64,
}

impl FilterSpec {
    pub fn new(variant: FilterVariant, mu: f64) -> Self {
        FilterSpec {
            variant,
            mu,
            sigma: DEFAULT_SIGMA,
            alpha: DEFAULT_ALPHA,
            epsilon_p: DEFAULT_EPSILON_P,
        }
    }

    pub fn label(&self) -> &'static str {
        self.variant.label()
    }

    /// Update parameters for the kernel variants.
    pub fn params(&self) -> Result<FilterParams> {
        Ok(FilterParams::new(
            self.mu,
            self.sigma,
            self.alpha,
            self.epsilon_p,
        )?)
    }

    fn validate(&self) -> Result<()> {
        if self.variant.uses_kernel() {
            self.params()?;
        } else if !self.mu.is_finite() || self.mu <= 0.0 {
            return Err(Error::Config(format!(
                "filter {}: mu must be finite and > 0, got {}",
                self.label(),
                self.mu
            )));
        }
        Ok(())
    }
}

/// Where the target system comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum SystemSource {
    /// Random positions, drawn from `seed` (or a stream derived from the
    /// base seed when absent).
    Generated { active: usize, seed: Option<u64> },
    /// One contiguous active block.
    Clustered { active: usize, seed: Option<u64> },
    /// A system file written by the system exporter.
    File { path: PathBuf },
}

impl SystemSource {
    /// Materializes the system at the configured length. `stream`
    /// disambiguates multiple sources under one base seed.
    pub fn realize(&self, length: usize, base_seed: u64, stream: u64) -> Result<SparseSystem> {
        match self {
            SystemSource::Generated { active, seed } => Ok(ipmcc_core::gen_sparse_system(
                length,
                *active,
                seed.unwrap_or_else(|| derive_seed(base_seed, stream)),
            )?),
            SystemSource::Clustered { active, seed } => Ok(ipmcc_core::gen_clustered_system(
                length,
                *active,
                seed.unwrap_or_else(|| derive_seed(base_seed, stream)),
            )?),
            SystemSource::File { path } => {
                let system = SparseSystem::read_from_path(path)?;
                if system.len() != length {
                    return Err(Error::Config(format!(
                        "system file {} holds {} taps but the config declares length {length}",
                        path.display(),
                        system.len()
                    )));
                }
                Ok(system)
            }
        }
    }

    fn validate(&self, length: usize, what: &str) -> Result<()> {
        match self {
            SystemSource::Generated { active, seed } | SystemSource::Clustered { active, seed } => {
                if *active == 0 || *active > length {
                    return Err(Error::Config(format!(
                        "{what}: active must lie in 1..={length}, got {active}"
                    )));
                }
                if let Some(seed) = seed {
                    if *seed > i64::MAX as u64 {
                        return Err(Error::Config(format!(
                            "{what}: seed must fit the config format (<= {})",
                            i64::MAX
                        )));
                    }
                }
                Ok(())
            }
            SystemSource::File { .. } => Ok(()),
        }
    }
}

/// A mid-run target change for tracking experiments.
#[derive(Debug, Clone, PartialEq)]
pub struct SwitchSpec {
    pub iteration: usize,
    pub system: SystemSource,
}

/// A fully resolved experiment description.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub length: usize,
    pub iterations: usize,
    pub runs: usize,
    pub base_seed: u64,
    pub msd_window: usize,
    pub input: InputModel,
    pub noise: NoiseModel,
    pub system: SystemSource,
    pub switch: Option<SwitchSpec>,
    pub filters: Vec<FilterSpec>,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.length < 2 {
            return Err(Error::Config(format!(
                "length must be at least 2, got {}",
                self.length
            )));
        }
        if self.msd_window == 0 || self.msd_window >= self.iterations {
            return Err(Error::Config(format!(
                "msd_window must lie in 1..iterations ({}), got {}",
                self.iterations, self.msd_window
            )));
        }
        if self.runs == 0 {
            return Err(Error::Config("runs must be at least 1".to_string()));
        }
        if self.base_seed > i64::MAX as u64 {
            return Err(Error::Config(format!(
                "base_seed must fit the config format (<= {})",
                i64::MAX
            )));
        }
        self.input.validate()?;
        self.system.validate(self.length, "system")?;
        if let Some(switch) = &self.switch {
            if switch.iteration == 0 || switch.iteration >= self.iterations {
                return Err(Error::Config(format!(
                    "switch.iteration must lie strictly inside (0, {}), got {}",
                    self.iterations, switch.iteration
                )));
            }
            switch.system.validate(self.length, "switch.system")?;
        }
        if self.filters.is_empty() {
            return Err(Error::Config(
                "at least one [[filter]] section is required".to_string(),
            ));
        }
        for (i, spec) in self.filters.iter().enumerate() {
            spec.validate()?;
            if self.filters[..i].iter().any(|s| s.variant == spec.variant) {
                return Err(Error::Config(format!(
                    "duplicate filter variant {:?}; each variant may appear once",
                    spec.label()
                )));
            }
        }
        Ok(())
    }

    /// Serializes the config back to TOML with every field populated.
    /// `parse_config_str(emit_config(c))` reproduces `c` exactly.
    pub fn emit(&self) -> String {
        let raw = RawConfig::from_config(self);
        toml::to_string(&raw).expect("config serializes")
    }
}

/// Reads and validates a config file.
pub fn parse_config(path: &Path) -> Result<ExperimentConfig> {
    parse_config_str(&fs::read_to_string(path)?)
}

/// Parses and validates config text.
pub fn parse_config_str(text: &str) -> Result<ExperimentConfig> {
    let raw: RawConfig = toml::from_str(text)?;
    let config = raw.into_config()?;
    config.validate()?;
    Ok(config)
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    length: usize,
    iterations: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    runs: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    base_seed: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    msd_window: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    input: Option<RawInput>,
    #[serde(skip_serializing_if = "Option::is_none")]
    noise: Option<RawNoise>,
    system: RawSystem,
    #[serde(skip_serializing_if = "Option::is_none")]
    switch: Option<RawSwitch>,
    filter: Vec<RawFilter>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInput {
    kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    theta: Option<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNoise {
    #[serde(skip_serializing_if = "Option::is_none")]
    sigma_s_sq: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    prob_impulse: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    sigma_i_sq: Option<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSystem {
    kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    active: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    path: Option<String>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSwitch {
    iteration: usize,
    system: RawSystem,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFilter {
    variant: String,
    mu: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    sigma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    epsilon_p: Option<f64>,
}

fn seed_from_raw(value: Option<i64>, what: &str) -> Result<Option<u64>> {
    match value {
        None => Ok(None),
        Some(s) if s >= 0 => Ok(Some(s as u64)),
        Some(s) => Err(Error::Config(format!("{what} must be >= 0, got {s}"))),
    }
}

impl RawConfig {
    fn into_config(self) -> Result<ExperimentConfig> {
        let input = match self.input {
            None => InputModel::White,
            Some(raw) => match raw.kind.as_str() {
                "white" => {
                    if raw.theta.is_some() {
                        return Err(Error::Config(
                            "input.theta only applies to kind = \"ar1\"".to_string(),
                        ));
                    }
                    InputModel::White
                }
                "ar1" => InputModel::Ar1 {
                    theta: raw.theta.unwrap_or(DEFAULT_THETA),
                },
                other => {
                    return Err(Error::Config(format!(
                        "unknown input kind {other:?}; expected \"white\" or \"ar1\""
                    )))
                }
            },
        };

        let noise = match self.noise {
            None => NoiseModel::new(
                DEFAULT_SIGMA_S_SQ,
                DEFAULT_PROB_IMPULSE,
                DEFAULT_SIGMA_I_SQ,
            )?,
            Some(raw) => NoiseModel::new(
                raw.sigma_s_sq.unwrap_or(DEFAULT_SIGMA_S_SQ),
                raw.prob_impulse.unwrap_or(DEFAULT_PROB_IMPULSE),
                raw.sigma_i_sq.unwrap_or(DEFAULT_SIGMA_I_SQ),
            )?,
        };

        let system = raw_system_into_source(self.system, "system")?;
        let switch = match self.switch {
            None => None,
            Some(raw) => Some(SwitchSpec {
                iteration: raw.iteration,
                system: raw_system_into_source(raw.system, "switch.system")?,
            }),
        };

        let mut filters = Vec::with_capacity(self.filter.len());
        for raw in self.filter {
            let variant = FilterVariant::parse(&raw.variant)?;
            if !variant.uses_kernel() && raw.sigma.is_some() {
                return Err(Error::Config(format!(
                    "filter {}: sigma does not apply",
                    variant.label()
                )));
            }
            if !variant.uses_gains() && (raw.alpha.is_some() || raw.epsilon_p.is_some()) {
                return Err(Error::Config(format!(
                    "filter {}: alpha and epsilon_p do not apply",
                    variant.label()
                )));
            }
            filters.push(FilterSpec {
                variant,
                mu: raw.mu,
                sigma: raw.sigma.unwrap_or(DEFAULT_SIGMA),
                alpha: raw.alpha.unwrap_or(DEFAULT_ALPHA),
                epsilon_p: raw.epsilon_p.unwrap_or(DEFAULT_EPSILON_P),
            });
        }

        let iterations = self.iterations;
        Ok(ExperimentConfig {
            length: self.length,
            iterations,
            runs: self.runs.unwrap_or(DEFAULT_RUNS),
            base_seed: seed_from_raw(self.base_seed, "base_seed")?.unwrap_or(0),
            msd_window: self.msd_window.unwrap_or((iterations / 10).max(1)),
            input,
            noise,
            system,
            switch,
            filters,
        })
    }

    fn from_config(config: &ExperimentConfig) -> RawConfig {
        let input = Some(match config.input {
            InputModel::White => RawInput {
                kind: "white".to_string(),
                theta: None,
            },
            InputModel::Ar1 { theta } => RawInput {
                kind: "ar1".to_string(),
                theta: Some(theta),
            },
        });
        let noise = Some(RawNoise {
            sigma_s_sq: Some(config.noise.sigma_s_sq()),
            prob_impulse: Some(config.noise.prob_impulse()),
            sigma_i_sq: Some(config.noise.sigma_i_sq()),
        });
        RawConfig {
            length: config.length,
            iterations: config.iterations,
            runs: Some(config.runs),
            base_seed: Some(config.base_seed as i64),
            msd_window: Some(config.msd_window),
            input,
            noise,
            system: raw_system_from_source(&config.system),
            switch: config.switch.as_ref().map(|s| RawSwitch {
                iteration: s.iteration,
                system: raw_system_from_source(&s.system),
            }),
            filter: config
                .filters
                .iter()
                .map(|f| RawFilter {
                    variant: f.label().to_string(),
                    mu: f.mu,
                    sigma: f.variant.uses_kernel().then_some(f.sigma),
                    alpha: f.variant.uses_gains().then_some(f.alpha),
                    epsilon_p: f.variant.uses_gains().then_some(f.epsilon_p),
                })
                .collect(),
        }
    }
}

fn raw_system_into_source(raw: RawSystem, what: &str) -> Result<SystemSource> {
    let seed = seed_from_raw(raw.seed, "system seed")?;
    match raw.kind.as_str() {
        "generated" | "clustered" => {
            if raw.path.is_some() {
                return Err(Error::Config(format!(
                    "{what}: path only applies to kind = \"file\""
                )));
            }
            let active = raw.active.ok_or_else(|| {
                Error::Config(format!("{what}: active is required for generated systems"))
            })?;
            if raw.kind == "generated" {
                Ok(SystemSource::Generated { active, seed })
            } else {
                Ok(SystemSource::Clustered { active, seed })
            }
        }
        "file" => {
            if raw.active.is_some() || seed.is_some() {
                return Err(Error::Config(format!(
                    "{what}: active and seed do not apply to kind = \"file\""
                )));
            }
            let path = raw.path.ok_or_else(|| {
                Error::Config(format!("{what}: path is required for file systems"))
            })?;
            Ok(SystemSource::File {
                path: PathBuf::from(path),
            })
        }
        other => Err(Error::Config(format!(
            "{what}: unknown kind {other:?}; expected \"generated\", \"clustered\", or \"file\""
        ))),
    }
}

fn raw_system_from_source(source: &SystemSource) -> RawSystem {
    match source {
        SystemSource::Generated { active, seed } => RawSystem {
            kind: "generated".to_string(),
            active: Some(*active),
            seed: seed.map(|s| s as i64),
            path: None,
        },
        SystemSource::Clustered { active, seed } => RawSystem {
            kind: "clustered".to_string(),
            active: Some(*active),
            seed: seed.map(|s| s as i64),
            path: None,
        },
        SystemSource::File { path } => RawSystem {
            kind: "file".to_string(),
            active: None,
            seed: None,
            path: Some(path.display().to_string()),
        },
    }
}
