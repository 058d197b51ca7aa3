//! Layered run configuration.
//!
//! Every tunable resolves through the same precedence chain: a command-line
//! flag wins over a `key=value` line in the optional config file, which wins
//! over the built-in default. Worker-thread count additionally consults the
//! `GENOMOTIF_THREADS` environment variable between the config file and the
//! default. Each resolved value is recorded so the run manifest can state
//! the configuration the process actually used.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::fs;
use std::path::Path;
use std::str::FromStr;

/// Environment variable consulted for the worker-thread count.
pub const THREADS_ENV: &str = "GENOMOTIF_THREADS";

/// Parsed config file plus a record of every value handed out.
#[derive(Debug)]
pub struct Settings {
    values: BTreeMap<String, String>,
    resolved: BTreeMap<String, String>,
}

impl Settings {
    /// Loads `key=value` lines from `path`; `None` means no config file.
    ///
    /// Blank lines and lines starting with `#` are ignored. Keys and values
    /// are trimmed; the first `=` splits the line, so values may contain `=`.
    pub fn load(path: Option<&Path>) -> Result<Self, String> {
        let mut values = BTreeMap::new();
        if let Some(path) = path {
            let text = fs::read_to_string(path)
                .map_err(|e| format!("config {}: {e}", path.display()))?;
            for (idx, line) in text.lines().enumerate() {
                let line = line.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let Some((key, value)) = line.split_once('=') else {
                    return Err(format!(
                        "config {}: line {}: expected key=value, got {line:?}",
                        path.display(),
                        idx + 1
                    ));
                };
                values.insert(key.trim().to_string(), value.trim().to_string());
            }
        }
        Ok(Self { values, resolved: BTreeMap::new() })
    }

    fn parse_key<T>(&self, key: &str) -> Result<Option<T>, String>
    where
        T: FromStr,
        T::Err: Display,
    {
        match self.values.get(key) {
            None => Ok(None),
            Some(raw) => raw
                .parse()
                .map(Some)
                .map_err(|e| format!("config key {key}: invalid value {raw:?}: {e}")),
        }
    }

    /// Resolves one tunable: flag, then config file, then `default`.
    pub fn get<T>(&mut self, key: &str, flag: Option<T>, default: T) -> Result<T, String>
    where
        T: FromStr + Display,
        T::Err: Display,
    {
        let value = match flag {
            Some(v) => v,
            None => self.parse_key(key)?.unwrap_or(default),
        };
        self.resolved.insert(key.to_string(), value.to_string());
        Ok(value)
    }

    /// Worker threads: flag, config key `threads`, `GENOMOTIF_THREADS`,
    /// then `None` (rayon picks the core count).
    pub fn threads(&mut self, flag: Option<usize>) -> Result<Option<usize>, String> {
        let value = match flag {
            Some(v) => Some(v),
            None => match self.parse_key("threads")? {
                Some(v) => Some(v),
                None => match std::env::var(THREADS_ENV) {
                    Ok(raw) => Some(raw.parse().map_err(|e| {
                        format!("{THREADS_ENV}: invalid value {raw:?}: {e}")
                    })?),
                    Err(_) => None,
                },
            },
        };
        self.resolved.insert(
            "threads".to_string(),
            value.map_or_else(|| "auto".to_string(), |v| v.to_string()),
        );
        if value == Some(0) {
            return Err("threads: must be at least 1".to_string());
        }
        Ok(value)
    }

    /// Every value handed out so far, for the run manifest.
    pub fn resolved(&self) -> &BTreeMap<String, String> {
        &self.resolved
    }
}
