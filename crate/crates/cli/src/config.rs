//! `key = value` configuration files. Command-line flags take precedence.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};

/// Every key a configuration file may set.
pub const KEYS: &[&str] = &[
    "lexicon",
    "threads",
    "format",
    "order_cap",
    "threshold",
    "lemma",
    "lowercase",
    "pos_map",
    "exclude_labels",
    "multi_root",
    "strict_input",
    "scheme",
    "pipeline",
    "cds_alpha",
    "shift",
    "path_weighting",
    "merge",
    "oov",
    "schema",
    "protocol",
    "landmark",
    "top",
];

#[derive(Debug, Default)]
pub struct ConfigFile {
    source: String,
    values: BTreeMap<String, (usize, String)>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn parse(text: &str, source: &str) -> Result<Self> {
        let mut values = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split_once('#').map_or(raw, |(before, _)| before).trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                bail!("{source}:{}: expected key = value", i + 1);
            };
            let key = key.trim().replace('-', "_");
            if !KEYS.contains(&key.as_str()) {
                bail!("{source}:{}: unknown key {key:?}", i + 1);
            }
            values.insert(key, (i + 1, value.trim().to_string()));
        }
        Ok(ConfigFile {
            source: source.to_string(),
            values,
        })
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(|(_, v)| v.as_str())
    }

    /// Parse the value of `key`, if set.
    pub fn get<T>(&self, key: &str) -> Result<Option<T>>
    where
        T: FromStr,
        T::Err: Display,
    {
        match self.values.get(key) {
            None => Ok(None),
            Some((line, value)) => value
                .parse()
                .map(Some)
                .map_err(|e| anyhow!("{}:{line}: {key}: {e}", self.source)),
        }
    }

    pub fn get_bool(&self, key: &str) -> Result<Option<bool>> {
        match self.values.get(key) {
            None => Ok(None),
            Some((line, value)) => match value.to_ascii_lowercase().as_str() {
                "true" | "yes" | "on" | "1" => Ok(Some(true)),
                "false" | "no" | "off" | "0" => Ok(Some(false)),
                _ => bail!("{}:{line}: {key}: expected a boolean, got {value:?}", self.source),
            },
        }
    }

    /// A comma-separated list.
    pub fn get_list(&self, key: &str) -> Option<Vec<String>> {
        self.raw(key).map(|v| {
            v.split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(String::from)
                .collect()
        })
    }
}

/// Flag, then config file, then default.
pub fn pick<T>(flag: Option<T>, file: &ConfigFile, key: &str, default: T) -> Result<T>
where
    T: FromStr,
    T::Err: Display,
{
    Ok(match flag {
        Some(v) => v,
        None => file.get(key)?.unwrap_or(default),
    })
}

pub fn pick_bool(flag: Option<bool>, file: &ConfigFile, key: &str, default: bool) -> Result<bool> {
    Ok(match flag {
        Some(v) => v,
        None => file.get_bool(key)?.unwrap_or(default),
    })
}
