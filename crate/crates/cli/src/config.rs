//! Minimal section/key-value config files:
//!
//! ```text
//! [experiment]
//! dispersions = 0.5,1.5
//! replications = 1000
//! # comments start with #
//! ```
//!
//! Command-line flags override config values; the resolved result is
//! echoed into every run's manifest.

use std::collections::BTreeMap;
use std::path::Path;

use crashgan_core::{Error, Result};

#[derive(Debug, Clone, Default)]
pub struct Config {
    values: BTreeMap<(String, String), String>,
}

impl Config {
    pub fn parse(text: &str) -> Result<Config> {
        let mut values = BTreeMap::new();
        let mut section = String::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(name) = line.strip_prefix('[') {
                let name = name.strip_suffix(']').ok_or(Error::Parse {
                    line: lineno + 1,
                    message: "unterminated section header".into(),
                })?;
                section = name.trim().to_string();
                continue;
            }
            let (key, value) = line.split_once('=').ok_or(Error::Parse {
                line: lineno + 1,
                message: format!("expected `key = value`, found {line:?}"),
            })?;
            values.insert(
                (section.clone(), key.trim().to_string()),
                value.trim().to_string(),
            );
        }
        Ok(Config { values })
    }

    pub fn load(path: &Path) -> Result<Config> {
        Config::parse(&std::fs::read_to_string(path)?)
    }

    pub fn get(&self, section: &str, key: &str) -> Option<&str> {
        self.values
            .get(&(section.to_string(), key.to_string()))
            .map(String::as_str)
    }

    pub fn get_parsed<T: std::str::FromStr>(&self, section: &str, key: &str) -> Result<Option<T>> {
        match self.get(section, key) {
            None => Ok(None),
            Some(raw) => raw.parse::<T>().map(Some).map_err(|_| {
                Error::InvalidParameter(format!("config [{section}] {key} = {raw:?} is not valid"))
            }),
        }
    }
}
