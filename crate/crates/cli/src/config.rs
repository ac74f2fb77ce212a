//! Flat `key = value` configuration files.
//!
//! Keys match the long flag names of the subcommands (`docs`, `clustering`,
//! `learning-rate`, ...). Flags given on the command line win over the file.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use crate::CliError;

pub const KNOWN_KEYS: &[&str] = &[
    "anisotropy",
    "batch-size",
    "blob-scale",
    "blobs",
    "center-scale",
    "clustering",
    "clusters",
    "dataset",
    "dim",
    "docs",
    "epochs",
    "epsilon",
    "ell",
    "format",
    "hidden",
    "index",
    "k",
    "learning-rate",
    "loss",
    "max-iters",
    "model",
    "n-docs",
    "n-queries",
    "out",
    "out-dir",
    "pairs",
    "queries",
    "query-noise",
    "seed",
];

#[derive(Debug, Default, Clone)]
pub struct Config {
    values: BTreeMap<String, String>,
}

impl Config {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
            .map_err(|e| CliError::usage(format!("{}: {}", path.display(), e.message)))
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut values = BTreeMap::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| CliError::usage(format!("line {}: expected key = value", n + 1)))?;
            let key = key.trim().replace('_', "-");
            if !KNOWN_KEYS.contains(&key.as_str()) {
                return Err(CliError::usage(format!(
                    "line {}: unknown key {key:?}",
                    n + 1
                )));
            }
            values.insert(key, value.trim().to_string());
        }
        Ok(Config { values })
    }

    pub fn get<T>(&self, key: &str) -> Result<Option<T>, CliError>
    where
        T: FromStr,
        T::Err: Display,
    {
        self.values
            .get(key)
            .map(|v| {
                v.parse()
                    .map_err(|e| CliError::usage(format!("config key {key}: {e}")))
            })
            .transpose()
    }

    /// `flag` if given, else the config value.
    pub fn pick<T>(&self, flag: Option<T>, key: &str) -> Result<Option<T>, CliError>
    where
        T: FromStr,
        T::Err: Display,
    {
        match flag {
            Some(v) => Ok(Some(v)),
            None => self.get(key),
        }
    }

    pub fn require<T>(&self, flag: Option<T>, key: &str) -> Result<T, CliError>
    where
        T: FromStr,
        T::Err: Display,
    {
        self.pick(flag, key)?
            .ok_or_else(|| CliError::usage(format!("missing --{key} (flag or config key)")))
    }

    pub fn or<T>(&self, flag: Option<T>, key: &str, default: T) -> Result<T, CliError>
    where
        T: FromStr,
        T::Err: Display,
    {
        Ok(self.pick(flag, key)?.unwrap_or(default))
    }
}

/// Comma-separated list such as `1,2,5`.
pub fn parse_list<T>(text: &str) -> Result<Vec<T>, CliError>
where
    T: FromStr,
    T::Err: Display,
{
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse()
                .map_err(|e| CliError::usage(format!("bad list item {s:?}: {e}")))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_flat_pairs() {
        let c = Config::parse("# pipeline\nclusters = 12\nlearning_rate=0.01\n\ndocs = a b.lvec\n")
            .unwrap();
        assert_eq!(c.get::<usize>("clusters").unwrap(), Some(12));
        assert_eq!(c.get::<f64>("learning-rate").unwrap(), Some(0.01));
        assert_eq!(
            c.get::<String>("docs").unwrap().as_deref(),
            Some("a b.lvec")
        );
        assert_eq!(c.pick(Some(3usize), "clusters").unwrap(), Some(3));
        assert_eq!(c.or(None, "seed", 9u64).unwrap(), 9);
    }

    #[test]
    fn rejects_unknown_and_malformed() {
        assert!(Config::parse("colour = red").is_err());
        assert!(Config::parse("clusters 12").is_err());
        let c = Config::parse("clusters = many").unwrap();
        assert!(c.get::<usize>("clusters").is_err());
        assert!(c.require::<String>(None, "docs").is_err());
    }

    #[test]
    fn lists() {
        assert_eq!(parse_list::<usize>("1, 2,5,").unwrap(), vec![1, 2, 5]);
        assert!(parse_list::<usize>("1,x").is_err());
    }
}
