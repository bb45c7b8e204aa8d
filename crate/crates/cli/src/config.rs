//! Flat `key = value` run configuration. Blank lines and lines starting
//! with `#` are ignored; command-line flags override file values.

use std::path::PathBuf;
use std::time::Duration;

use rdfizer::Mode;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("config line {line}: {message}")]
pub struct ConfigError {
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Config {
    pub mapping: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub mode: Option<Mode>,
    pub report: Option<PathBuf>,
    pub seed: Option<u64>,
    pub timeout: Option<Duration>,
    pub batch_size: Option<usize>,
    pub reuse_pjtt: Option<bool>,
    pub max_materialized: Option<u64>,
}

pub const KEYS: [&str; 9] = [
    "mapping",
    "output",
    "mode",
    "report",
    "seed",
    "timeout",
    "batch_size",
    "reuse_pjtt",
    "max_materialized",
];

/// Seconds, fractional allowed.
pub fn parse_timeout(v: &str) -> Result<Duration, String> {
    let secs: f64 = v.parse().map_err(|_| format!("invalid timeout '{v}' (seconds expected)"))?;
    Duration::try_from_secs_f64(secs).map_err(|_| format!("invalid timeout '{v}'"))
}

fn number<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, String> {
    v.parse().map_err(|_| format!("invalid {key} '{v}'"))
}

impl Config {
    pub fn parse(text: &str) -> Result<Config, ConfigError> {
        let mut cfg = Config::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |message: String| ConfigError { line: i + 1, message };
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err(format!("expected key = value, found '{line}'")))?;
            let (key, value) = (key.trim(), value.trim());
            cfg.set(key, value).map_err(err)?;
        }
        Ok(cfg)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        match key {
            "mapping" => self.mapping = Some(value.into()),
            "output" => self.output = Some(value.into()),
            "report" => self.report = Some(value.into()),
            "mode" => self.mode = Some(value.parse()?),
            "seed" => self.seed = Some(number(key, value)?),
            "timeout" => self.timeout = Some(parse_timeout(value)?),
            "batch_size" => self.batch_size = Some(number(key, value)?),
            "reuse_pjtt" => self.reuse_pjtt = Some(number(key, value)?),
            "max_materialized" => self.max_materialized = Some(number(key, value)?),
            other => return Err(format!("unknown key '{other}' (known: {})", KEYS.join(", "))),
        }
        Ok(())
    }

    /// Fields set in `over` replace those in `self`.
    pub fn overridden_by(self, over: Config) -> Config {
        Config {
            mapping: over.mapping.or(self.mapping),
            output: over.output.or(self.output),
            mode: over.mode.or(self.mode),
            report: over.report.or(self.report),
            seed: over.seed.or(self.seed),
            timeout: over.timeout.or(self.timeout),
            batch_size: over.batch_size.or(self.batch_size),
            reuse_pjtt: over.reuse_pjtt.or(self.reuse_pjtt),
            max_materialized: over.max_materialized.or(self.max_materialized),
        }
    }
}
