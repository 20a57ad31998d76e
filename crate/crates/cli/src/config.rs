//! Key-value config files. Every flag of a subcommand can also be given as a
//! top-level key in a TOML file; a flag on the command line wins.

use serde::de::DeserializeOwned;
use std::collections::BTreeSet;
use std::path::Path;

use crate::CliError;

#[derive(Debug, Default)]
pub struct Resolver {
    table: toml::Table,
    seen: BTreeSet<String>,
}

impl Resolver {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        let table: toml::Table =
            toml::from_str(&text).map_err(|e| CliError::Config(format!("config {}: {e}", path.display())))?;
        Ok(Self { table, seen: BTreeSet::new() })
    }

    /// Flag value, else the config value under `key`, else `None`.
    pub fn opt<T: DeserializeOwned>(&mut self, key: &str, flag: Option<T>) -> Result<Option<T>, CliError> {
        self.seen.insert(key.to_string());
        if flag.is_some() {
            return Ok(flag);
        }
        match self.table.get(key) {
            None => Ok(None),
            Some(v) => v
                .clone()
                .try_into()
                .map(Some)
                .map_err(|e| CliError::Config(format!("config key `{key}`: {e}"))),
        }
    }

    pub fn or<T: DeserializeOwned>(&mut self, key: &str, flag: Option<T>, default: T) -> Result<T, CliError> {
        Ok(self.opt(key, flag)?.unwrap_or(default))
    }

    pub fn require<T: DeserializeOwned>(&mut self, key: &str, flag: Option<T>) -> Result<T, CliError> {
        self.opt(key, flag)?
            .ok_or_else(|| CliError::Config(format!("missing required parameter `{key}` (flag --{})", key.replace('_', "-"))))
    }

    /// Rejects config keys the subcommand never asked for.
    pub fn finish(&self) -> Result<(), CliError> {
        let unknown: Vec<&String> = self.table.keys().filter(|k| !self.seen.contains(*k)).collect();
        if unknown.is_empty() {
            Ok(())
        } else {
            Err(CliError::Config(format!("unknown config keys for this command: {unknown:?}")))
        }
    }
}

/// A list of reals given either as a TOML array or a comma-separated string.
#[derive(Debug, Clone, serde::Deserialize)]
#[serde(untagged)]
pub enum RealList {
    List(Vec<f64>),
    Text(String),
}

impl RealList {
    pub fn into_vec(self) -> Result<Vec<f64>, CliError> {
        match self {
            RealList::List(v) => Ok(v),
            RealList::Text(s) => s
                .split(',')
                .map(|t| t.trim().parse::<f64>().map_err(|e| CliError::Config(format!("bad number `{t}`: {e}"))))
                .collect(),
        }
    }
}
