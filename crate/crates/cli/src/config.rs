use std::fmt;
use std::path::{Path, PathBuf};

use contagion_core::{
    build_schedule, AccrualMode, ContagionParams, QuadConfig, SwapSchedule,
    SymmetricCompetitorParams,
};
use serde::{Deserialize, Serialize};

use crate::cli::GlobalArgs;

/// Problem with the configuration or flags; maps to exit code 2.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<contagion_core::Error> for ConfigError {
    fn from(e: contagion_core::Error) -> Self {
        Self(e.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ModelConfig {
    Symmetric(SymmetricCompetitorParams),
    General(ContagionParams),
}

impl ModelConfig {
    pub fn general(&self) -> ContagionParams {
        match self {
            Self::Symmetric(p) => p.to_general(),
            Self::General(p) => *p,
        }
    }

    pub fn symmetric(&self) -> Result<SymmetricCompetitorParams, ConfigError> {
        match self {
            Self::Symmetric(p) => Ok(*p),
            Self::General(_) => Err(ConfigError(
                "this command needs a symmetric model (kind = \"symmetric\"); general parameters are only accepted by `simulate`".into(),
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScheduleConfig {
    pub maturity: f64,
    pub interval: f64,
    pub settlement_lag: f64,
    pub rate: f64,
}

impl Default for ScheduleConfig {
    fn default() -> Self {
        Self {
            maturity: 5.0,
            interval: 0.25,
            settlement_lag: 0.1,
            rate: 0.05,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct McConfig {
    pub paths: usize,
    pub seed: u64,
}

impl Default for McConfig {
    fn default() -> Self {
        Self {
            paths: 1_000_000,
            seed: 42,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub format: Option<Format>,
    pub path: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelConfig,
    pub schedule: ScheduleConfig,
    pub mc: McConfig,
    pub quad: QuadConfig,
    pub output: OutputConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            model: ModelConfig::Symmetric(SymmetricCompetitorParams::new(0.1, 0.2, 0.05, 0.1)),
            schedule: ScheduleConfig::default(),
            mc: McConfig::default(),
            quad: QuadConfig::default(),
            output: OutputConfig::default(),
        }
    }
}

/// Fully resolved run settings.
#[derive(Debug, Clone)]
pub struct Settings {
    pub config: RunConfig,
    pub accrual: AccrualMode,
    pub workers: Option<usize>,
    pub annualized: bool,
}

impl Settings {
    pub fn schedule(&self) -> Result<SwapSchedule, ConfigError> {
        schedule_from(&self.config.schedule)
    }

    pub fn format_or(&self, default: Format) -> Format {
        self.config.output.format.unwrap_or(default)
    }
}

pub fn schedule_from(s: &ScheduleConfig) -> Result<SwapSchedule, ConfigError> {
    Ok(build_schedule(
        s.maturity,
        s.interval,
        s.settlement_lag,
        s.rate,
    )?)
}

pub fn load(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| ConfigError(format!("{}: {e}", path.display())))
}

/// Config file (if any) with flag overrides applied, then validated.
pub fn resolve(args: &GlobalArgs) -> Result<Settings, ConfigError> {
    let mut config = match &args.config {
        Some(path) => load(path)?,
        None => RunConfig::default(),
    };
    apply_overrides(&mut config, args)?;
    if let Some(0) = args.workers {
        return Err(ConfigError("--workers must be at least 1".into()));
    }
    validate(&config)?;
    Ok(Settings {
        config,
        accrual: args.accrual.map(AccrualMode::from).unwrap_or_default(),
        workers: args.workers,
        annualized: args.annualized,
    })
}

fn apply_overrides(config: &mut RunConfig, args: &GlobalArgs) -> Result<(), ConfigError> {
    match &mut config.model {
        ModelConfig::Symmetric(p) => {
            set(&mut p.base_b, args.b0);
            set(&mut p.base_c, args.c0);
            set(&mut p.atten_b, args.b);
            set(&mut p.atten_c, args.c);
        }
        ModelConfig::General(p) => {
            if args.b.is_some() || args.c.is_some() {
                return Err(ConfigError(
                    "--b and --c apply to symmetric models only; edit jump_*/atten_* in the config"
                        .into(),
                ));
            }
            set(&mut p.base_b, args.b0);
            set(&mut p.base_c, args.c0);
        }
    }
    let s = &mut config.schedule;
    set(&mut s.rate, args.r);
    set(&mut s.maturity, args.maturity);
    set(&mut s.interval, args.interval);
    set(&mut s.settlement_lag, args.delta);
    set(&mut config.mc.paths, args.paths);
    set(&mut config.mc.seed, args.seed);
    let q = &mut config.quad;
    set(&mut q.abs_tol, args.abs_tol);
    set(&mut q.rel_tol, args.rel_tol);
    set(&mut q.tail_epsilon, args.tail_epsilon);
    set(&mut q.max_subdivisions, args.max_subdivisions);
    if args.format.is_some() {
        config.output.format = args.format;
    }
    if args.out.is_some() {
        config.output.path.clone_from(&args.out);
    }
    Ok(())
}

fn set<T: Copy>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

pub fn validate(config: &RunConfig) -> Result<(), ConfigError> {
    match &config.model {
        ModelConfig::Symmetric(p) => p.validate()?,
        ModelConfig::General(p) => p.validate()?,
    }
    schedule_from(&config.schedule)?;
    config.quad.validate()?;
    if config.mc.paths == 0 {
        return Err(ConfigError("mc.paths must be at least 1".into()));
    }
    Ok(())
}

pub const SCHEMA: &str = r##"{
  "$schema": "https://json-schema.org/draft/2020-12/schema",
  "title": "RunConfig",
  "type": "object",
  "additionalProperties": false,
  "properties": {
    "model": {
      "oneOf": [
        {
          "type": "object",
          "additionalProperties": false,
          "required": ["kind", "base_b", "base_c", "atten_b", "atten_c"],
          "properties": {
            "kind": { "const": "symmetric" },
            "base_b": { "type": "number", "exclusiveMinimum": 0 },
            "base_c": { "type": "number", "exclusiveMinimum": 0 },
            "atten_b": { "type": "number", "minimum": 0, "description": "b: jump of B's intensity is -b, decay rate b; must be < base_b" },
            "atten_c": { "type": "number", "minimum": 0, "description": "c: jump of C's intensity is -c, decay rate c; must be < base_c" }
          }
        },
        {
          "type": "object",
          "additionalProperties": false,
          "required": ["kind", "base_b", "base_c", "jump_b", "jump_c", "atten_b", "atten_c"],
          "properties": {
            "kind": { "const": "general" },
            "base_b": { "type": "number", "exclusiveMinimum": 0 },
            "base_c": { "type": "number", "exclusiveMinimum": 0 },
            "jump_b": { "type": "number", "description": "base_b + jump_b > 0" },
            "jump_c": { "type": "number", "description": "base_c + jump_c > 0" },
            "atten_b": { "type": "number", "minimum": 0 },
            "atten_c": { "type": "number", "minimum": 0 }
          }
        }
      ]
    },
    "schedule": {
      "type": "object",
      "additionalProperties": false,
      "properties": {
        "maturity": { "type": "number", "exclusiveMinimum": 0, "default": 5.0 },
        "interval": { "type": "number", "exclusiveMinimum": 0, "default": 0.25, "description": "maturity / interval must be an integer" },
        "settlement_lag": { "type": "number", "minimum": 0, "default": 0.1 },
        "rate": { "type": "number", "minimum": 0, "default": 0.05 }
      }
    },
    "mc": {
      "type": "object",
      "additionalProperties": false,
      "properties": {
        "paths": { "type": "integer", "minimum": 1, "default": 1000000 },
        "seed": { "type": "integer", "minimum": 0, "default": 42 }
      }
    },
    "quad": {
      "type": "object",
      "additionalProperties": false,
      "properties": {
        "abs_tol": { "type": "number", "exclusiveMinimum": 0, "default": 1e-10 },
        "rel_tol": { "type": "number", "exclusiveMinimum": 0, "default": 1e-9 },
        "tail_epsilon": { "type": "number", "exclusiveMinimum": 0, "default": 1e-12 },
        "max_subdivisions": { "type": "integer", "minimum": 100, "default": 100000 }
      }
    },
    "output": {
      "type": "object",
      "additionalProperties": false,
      "properties": {
        "format": { "enum": ["csv", "json", null] },
        "path": { "type": ["string", "null"] }
      }
    }
  }
}
"##;
