//! Flat `key = value` configuration with `#` comments.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::PathBuf;
use std::str::FromStr;

use crate::CliError;

/// Raw key/value pairs, sorted by key.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RawConfig {
    entries: BTreeMap<String, String>,
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut entries = BTreeMap::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::Invalid(format!("line {}: expected key = value", lineno + 1)))?;
            let key = k.trim().to_string();
            if key.is_empty() {
                return Err(CliError::Invalid(format!("line {}: empty key", lineno + 1)));
            }
            if entries.insert(key.clone(), v.trim().to_string()).is_some() {
                return Err(CliError::Invalid(format!("line {}: duplicate key {key}", lineno + 1)));
            }
        }
        Ok(Self { entries })
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        self.entries.insert(key.to_string(), value.into());
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub raw: RawConfig,
    pub seed: u64,
    pub output_dir: PathBuf,
}

/// Parameters of one command: declared keys with defaults, overridden by the
/// config; unknown keys are rejected.
#[derive(Debug, Clone, PartialEq)]
pub struct Params {
    values: Vec<(&'static str, String)>,
}

impl Params {
    pub fn resolve(declared: &[(&'static str, &str)], raw: &RawConfig) -> Result<Self, CliError> {
        if let Some(k) = raw.keys().find(|k| !declared.iter().any(|(d, _)| d == k)) {
            let known: Vec<&str> = declared.iter().map(|(d, _)| *d).collect();
            return Err(CliError::Invalid(format!("unknown key {k}; expected one of {}", known.join(", "))));
        }
        let values = declared
            .iter()
            .map(|&(k, d)| (k, raw.get(k).unwrap_or(d).to_string()))
            .collect();
        Ok(Self { values })
    }

    fn raw(&self, key: &str) -> &str {
        self.values
            .iter()
            .find(|(k, _)| *k == key)
            .map(|(_, v)| v.as_str())
            .unwrap_or_else(|| panic!("undeclared parameter {key}"))
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<T, CliError>
    where
        T::Err: Display,
    {
        let s = self.raw(key);
        s.parse()
            .map_err(|e| CliError::Invalid(format!("{key} = {s}: {e}")))
    }

    pub fn list<T: FromStr>(&self, key: &str) -> Result<Vec<T>, CliError>
    where
        T::Err: Display,
    {
        self.raw(key)
            .split(',')
            .map(|item| {
                let item = item.trim();
                item.parse()
                    .map_err(|e| CliError::Invalid(format!("{key} item {item}: {e}")))
            })
            .collect()
    }

    pub fn text(&self, key: &str) -> &str {
        self.raw(key)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.values.iter().map(|(k, v)| (*k, v.as_str()))
    }
}
