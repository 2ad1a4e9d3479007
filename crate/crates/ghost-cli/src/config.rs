//! Defaults file and the resolved run configuration.
//!
//! A config file is a plain list of `key = value` lines whose keys mirror
//! the long flag names (`r-lo = 1e-6`, `engine = ode`, ...). Flags given on
//! the command line always win over file values, which in turn win over the
//! built-in defaults.

use std::collections::HashMap;
use std::fmt::Display;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use ghost::{Interval, ParamMap, PhaseFn, SweepEngine};

/// CLI failures split by exit code: bad invocations exit 2, failures of the
/// requested computation exit 3.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Compute(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Compute(_) => 3,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Usage(msg) | CliError::Compute(msg) => msg,
        }
    }
}

/// How a sweep-shaped command serializes its samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

/// Everything a sweep-shaped command runs with, assembled from flags, the
/// optional config file and the defaults. Validation happens here, before
/// any computation starts.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub phase: PhaseFn,
    pub param: ParamMap,
    pub r_lo: f64,
    pub r_hi: f64,
    pub points: u32,
    pub engine: SweepEngine,
    pub interval: Interval,
    pub out: Option<PathBuf>,
    pub format: OutputFormat,
}

/// Key=value pairs loaded from `--config`, or empty when the flag is absent.
#[derive(Debug, Default)]
pub struct FileConfig {
    values: HashMap<String, String>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(FileConfig::default());
        };
        let text = fs::read_to_string(path).map_err(|err| {
            CliError::Usage(format!("cannot read config {}: {err}", path.display()))
        })?;
        let mut values = HashMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(CliError::Usage(format!(
                    "config line {}: expected key = value, got `{raw}`",
                    idx + 1
                )));
            };
            values.insert(key.trim().to_string(), value.trim().to_string());
        }
        Ok(FileConfig { values })
    }

    /// Unparsed value for `key`, if the file sets one.
    pub fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    /// Parsed value for `key`; a present-but-unparsable value is a usage
    /// error naming the key.
    pub fn get<T>(&self, key: &str) -> Result<Option<T>, CliError>
    where
        T: FromStr,
        T::Err: Display,
    {
        match self.values.get(key) {
            None => Ok(None),
            Some(text) => text
                .parse()
                .map(Some)
                .map_err(|err| CliError::Usage(format!("config key {key}: {err}"))),
        }
    }
}

/// Flag beats file beats default.
pub fn resolve<T>(flag: Option<T>, file: Option<T>, default: T) -> T {
    flag.or(file).unwrap_or(default)
}

/// Like [`resolve`] but with no default: `None` means "not requested".
pub fn resolve_opt<T>(flag: Option<T>, file: Option<T>) -> Option<T> {
    flag.or(file)
}

pub fn parse_phase(text: &str) -> Result<PhaseFn, CliError> {
    text.parse()
        .map_err(|err: ghost::FieldError| CliError::Usage(err.to_string()))
}

pub fn parse_param(text: &str) -> Result<ParamMap, CliError> {
    text.parse()
        .map_err(|err: ghost::FieldError| CliError::Usage(err.to_string()))
}

pub fn parse_engine(text: &str) -> Result<SweepEngine, CliError> {
    text.parse()
        .map_err(|err: ghost::FieldError| CliError::Usage(err.to_string()))
}
