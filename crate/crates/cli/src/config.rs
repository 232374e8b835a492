//! Flag / config-file / default layering.

use std::collections::BTreeMap;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};

use crate::error::{CliError, CliResult};

/// Resolves each setting from its flag, then the `--config` file, then the
/// default, and records the outcome for the manifest.
pub struct Resolver {
    file: BTreeMap<String, toml::Value>,
    effective: Map<String, Value>,
    missing: Vec<String>,
}

impl Resolver {
    pub fn new(config: Option<&Path>) -> CliResult<Self> {
        let mut file = BTreeMap::new();
        if let Some(path) = config {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
            let table: toml::Table =
                text.parse().map_err(|e| CliError::usage(format!("config {}: {e}", path.display())))?;
            for (key, value) in table {
                if matches!(value, toml::Value::Table(_)) {
                    return Err(CliError::usage(format!("config key {key:?}: nested tables are not supported")));
                }
                file.insert(key.replace('-', "_"), value);
            }
        }
        Ok(Self {
            file,
            effective: Map::new(),
            missing: Vec::new(),
        })
    }

    fn from_file<T: DeserializeOwned>(&mut self, key: &str) -> CliResult<Option<T>> {
        match self.file.remove(key) {
            None => Ok(None),
            Some(v) => v
                .try_into()
                .map(Some)
                .map_err(|e| CliError::usage(format!("config key {key:?}: {e}"))),
        }
    }

    fn record<T: Serialize>(&mut self, key: &str, value: &T) {
        let v = serde_json::to_value(value).unwrap_or(Value::Null);
        self.effective.insert(key.to_string(), v);
    }

    pub fn get<T: DeserializeOwned + Serialize>(&mut self, key: &str, flag: Option<T>, default: T) -> CliResult<T> {
        let file = self.from_file(key)?;
        let v = flag.or(file).unwrap_or(default);
        self.record(key, &v);
        Ok(v)
    }

    pub fn optional<T: DeserializeOwned + Serialize>(&mut self, key: &str, flag: Option<T>) -> CliResult<Option<T>> {
        let file = self.from_file(key)?;
        let v = flag.or(file);
        self.record(key, &v);
        Ok(v)
    }

    /// A setting without default. Absence is reported by [`Resolver::finish`]
    /// so that unknown config keys are diagnosed first.
    pub fn required<T: DeserializeOwned + Serialize + Default>(&mut self, key: &str, flag: Option<T>) -> CliResult<T> {
        let v = self.optional(key, flag)?;
        if v.is_none() {
            self.missing.push(key.to_string());
        }
        Ok(v.unwrap_or_default())
    }

    /// Fails on config keys that no setting consumed, then on missing
    /// required settings.
    pub fn finish(self) -> CliResult<Map<String, Value>> {
        if let Some(key) = self.file.keys().next() {
            return Err(CliError::usage(format!("unknown config key {key:?}")));
        }
        if let Some(key) = self.missing.first() {
            return Err(CliError::usage(format!("--{} is required", key.replace('_', "-"))));
        }
        Ok(self.effective)
    }
}
