//! Flag / config-file / environment resolution.
//!
//! Precedence, highest first: command-line flags, the `--config` TOML
//! file, the `BELL_SEED` environment variable (seed only), built-in
//! defaults. The resolved values are echoed in every report.

use std::path::Path;

use serde::Deserialize;

use bell_core::experiment::SamplingSource;
use bell_core::settings::SettingAngles;
use serde_json::{json, Value};

use crate::angle::{format_angle, parse_angle};
use crate::error::CliError;
use crate::report::{tagged, Provenance};

/// Name of the environment variable supplying the default seed.
pub const SEED_ENV_VAR: &str = "BELL_SEED";

/// Built-in default seed, used when neither flag, config file nor
/// environment provides one.
pub const DEFAULT_SEED: u64 = 0xB311;

pub const DEFAULT_RUNS: u64 = 1_000_000;
pub const DEFAULT_TRIALS: u64 = 10_000;

/// Contents of a `--config` TOML file. Every key is optional; unknown
/// keys are rejected.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub angles: Option<[String; 4]>,
    pub seed: Option<u64>,
    pub runs: Option<u64>,
    pub trials: Option<u64>,
    pub source: Option<String>,
    pub parallel: Option<bool>,
}

impl ConfigFile {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(ConfigFile::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::usage(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text)
            .map_err(|e| CliError::usage(format!("bad config {}: {e}", path.display())))
    }
}

/// Where the effective seed came from, echoed in reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeedSource {
    Flag,
    ConfigFile,
    Environment,
    Default,
}

impl SeedSource {
    fn as_str(self) -> &'static str {
        match self {
            SeedSource::Flag => "flag",
            SeedSource::ConfigFile => "config-file",
            SeedSource::Environment => "environment",
            SeedSource::Default => "default",
        }
    }
}

/// Fully resolved inputs for one invocation.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub angles: SettingAngles,
    pub angle_display: [String; 4],
    pub seed: u64,
    pub seed_source: SeedSource,
    pub runs: u64,
    pub trials: u64,
    pub source: SamplingSource,
    pub parallel: bool,
}

impl Resolved {
    pub fn from_inputs(
        flag_angles: Option<&[String]>,
        flag_seed: Option<u64>,
        flag_runs: Option<u64>,
        flag_trials: Option<u64>,
        flag_source: Option<SamplingSource>,
        flag_parallel: bool,
        file: &ConfigFile,
    ) -> Result<Self, CliError> {
        let angle_texts: [String; 4] = if let Some(flags) = flag_angles {
            flags
                .to_vec()
                .try_into()
                .map_err(|_| CliError::usage("--angles takes exactly four values"))?
        } else if let Some(from_file) = &file.angles {
            from_file.clone()
        } else {
            ["0", "pi/4", "pi/8", "3pi/8"].map(String::from)
        };
        let mut parsed = [0.0f64; 4];
        for (slot, text) in parsed.iter_mut().zip(&angle_texts) {
            *slot = parse_angle(text).map_err(CliError::usage)?;
        }
        let angles = SettingAngles::new(parsed[0], parsed[1], parsed[2], parsed[3])
            .map_err(|e| CliError::usage(e.to_string()))?;
        let angle_display = parsed.map(format_angle);

        let (seed, seed_source) = if let Some(seed) = flag_seed {
            (seed, SeedSource::Flag)
        } else if let Some(seed) = file.seed {
            (seed, SeedSource::ConfigFile)
        } else if let Ok(text) = std::env::var(SEED_ENV_VAR) {
            let seed = text.parse::<u64>().map_err(|_| {
                CliError::usage(format!("{SEED_ENV_VAR}='{text}' is not a 64-bit seed"))
            })?;
            (seed, SeedSource::Environment)
        } else {
            (DEFAULT_SEED, SeedSource::Default)
        };

        let source = match (flag_source, file.source.as_deref()) {
            (Some(s), _) => s,
            (None, Some("quantum-exact")) => SamplingSource::QuantumExact,
            (None, Some("bell-measure")) => SamplingSource::BellMeasure,
            (None, Some(other)) => {
                return Err(CliError::usage(format!(
                    "bad source '{other}': expected quantum-exact or bell-measure"
                )))
            }
            (None, None) => SamplingSource::QuantumExact,
        };

        Ok(Resolved {
            angles,
            angle_display,
            seed,
            seed_source,
            runs: flag_runs.or(file.runs).unwrap_or(DEFAULT_RUNS),
            trials: flag_trials.or(file.trials).unwrap_or(DEFAULT_TRIALS),
            source,
            parallel: flag_parallel || file.parallel.unwrap_or(false),
        })
    }

    /// The config echo carried by every report. Only the fields a command
    /// actually consumes are included.
    pub fn echo(&self, include: EchoFields) -> Value {
        let mut config = serde_json::Map::new();
        config.insert(
            "angles".into(),
            tagged(
                &json!({
                    "a1": self.angles.a(0),
                    "a2": self.angles.a(1),
                    "b1": self.angles.b(0),
                    "b2": self.angles.b(1),
                }),
                Provenance::Exact,
            ),
        );
        config.insert("angles_display".into(), json!(self.angle_display));
        if include.seed {
            config.insert("seed".into(), json!(self.seed));
            config.insert("seed_source".into(), json!(self.seed_source.as_str()));
        }
        if include.runs {
            config.insert("runs".into(), json!(self.runs));
            config.insert("source".into(), json!(self.source.to_string()));
        }
        if include.trials {
            config.insert("trials".into(), json!(self.trials));
        }
        if include.mode {
            let mode = if self.parallel {
                "parallel-batched"
            } else {
                "single-stream"
            };
            config.insert("mode".into(), json!(mode));
        }
        Value::Object(config)
    }
}

/// Which config fields a command echoes.
#[derive(Debug, Clone, Copy, Default)]
pub struct EchoFields {
    pub seed: bool,
    pub runs: bool,
    pub trials: bool,
    pub mode: bool,
}
