//! Config-file handling and value resolution.
//!
//! Precedence: command-line flag > config file (`key = value` lines) >
//! environment (`BOREL_EB_SEED` for the seed) > built-in default.

use std::collections::BTreeMap;
use std::path::Path;

use crate::CliFailure;

pub const SEED_ENV_VAR: &str = "BOREL_EB_SEED";

const KNOWN_KEYS: &[&str] = &[
    "r",
    "gamma",
    "theta",
    "x",
    "n",
    "reps",
    "seed",
    "prior-a",
    "prior-b",
    "xmin",
    "xmax",
    "range",
    "method",
    "estimator",
    "table",
    "n-list",
    "freq-table",
    "out",
];

/// Parsed `key = value` configuration file; empty when no file was given.
#[derive(Debug, Default)]
pub struct Settings {
    values: BTreeMap<String, String>,
}

impl Settings {
    pub fn load(path: Option<&Path>) -> Result<Self, CliFailure> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path).map_err(|e| {
            CliFailure::input_file(format!("cannot read config {}: {e}", path.display()))
        })?;
        let mut values = BTreeMap::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(CliFailure::input_file(format!(
                    "config line {} is not `key = value`: {line:?}",
                    lineno + 1
                )));
            };
            let key = key.trim().to_string();
            if !KNOWN_KEYS.contains(&key.as_str()) {
                return Err(CliFailure::input_file(format!(
                    "unknown config key {key:?} on line {}",
                    lineno + 1
                )));
            }
            values.insert(key, value.trim().to_string());
        }
        Ok(Self { values })
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    fn parsed<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>, CliFailure> {
        match self.values.get(key) {
            None => Ok(None),
            Some(text) => text.parse::<T>().map(Some).map_err(|_| {
                CliFailure::input_file(format!("config key {key} has unparsable value {text:?}"))
            }),
        }
    }

    /// flag > config > default.
    pub fn resolve<T: std::str::FromStr>(
        &self,
        flag: Option<T>,
        key: &str,
        default: T,
    ) -> Result<T, CliFailure> {
        match flag {
            Some(v) => Ok(v),
            None => Ok(self.parsed(key)?.unwrap_or(default)),
        }
    }

    /// flag > config, with no default: absence is a usage error.
    pub fn resolve_required<T: std::str::FromStr>(
        &self,
        flag: Option<T>,
        key: &str,
    ) -> Result<T, CliFailure> {
        match flag {
            Some(v) => Ok(v),
            None => self.parsed(key)?.ok_or_else(|| {
                CliFailure::usage(format!(
                    "missing required value: pass --{key} or set it in the config file"
                ))
            }),
        }
    }

    /// flag > config > BOREL_EB_SEED > default.
    pub fn resolve_seed(&self, flag: Option<u64>, default: u64) -> Result<u64, CliFailure> {
        if let Some(v) = flag {
            return Ok(v);
        }
        if let Some(v) = self.parsed("seed")? {
            return Ok(v);
        }
        match std::env::var(SEED_ENV_VAR) {
            Ok(text) => text.parse::<u64>().map_err(|_| {
                CliFailure::usage(format!("{SEED_ENV_VAR} has unparsable value {text:?}"))
            }),
            Err(_) => Ok(default),
        }
    }
}

/// Parses an `LO-HI` summation range.
pub fn parse_range(text: &str) -> Result<(u64, u64), CliFailure> {
    let Some((lo, hi)) = text.split_once('-') else {
        return Err(CliFailure::usage(format!(
            "range must look like LO-HI, got {text:?}"
        )));
    };
    let lo = lo.trim().parse::<u64>();
    let hi = hi.trim().parse::<u64>();
    match (lo, hi) {
        (Ok(lo), Ok(hi)) if lo <= hi => Ok((lo, hi)),
        _ => Err(CliFailure::usage(format!("invalid range {text:?}"))),
    }
}
