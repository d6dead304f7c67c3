//! Flat `key=value` experiment configuration.

use std::path::Path;

use covfn::experiments::ExperimentConfig;
use covfn::linalg::ScalarFunction;

use crate::error::{CliError, CliResult};

/// Accepted keys, in canonical order.
pub const KEYS: [&str; 11] = [
    "experiment",
    "d",
    "n",
    "k",
    "fn",
    "B",
    "sigma",
    "M",
    "N",
    "alpha",
    "seed",
];

/// Values for keys left unset; `experiment`, `d` and `n` are required.
const DEFAULTS: [(&str, &str); 8] = [
    ("k", "0"),
    ("fn", "identity"),
    ("B", "identity"),
    ("sigma", "identity"),
    ("M", "100"),
    ("N", "200"),
    ("alpha", "0.05"),
    ("seed", "0"),
];

/// Raw settings keyed by [`KEYS`] position.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RawConfig {
    values: [Option<String>; 11],
}

fn key_index(key: &str) -> Option<usize> {
    KEYS.iter().position(|k| *k == key)
}

impl RawConfig {
    pub fn parse(text: &str, origin: &Path) -> CliResult<Self> {
        let mut raw = RawConfig::default();
        for (idx, line) in text.lines().enumerate() {
            let err = |message: String| CliError::Config {
                path: origin.to_path_buf(),
                line: idx + 1,
                message,
            };
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err(format!("expected key=value, got {line:?}")))?;
            let (key, value) = (key.trim(), value.trim());
            let slot = key_index(key).ok_or_else(|| err(format!("unknown key {key:?}")))?;
            if raw.values[slot].is_some() {
                return Err(err(format!("duplicate key {key:?}")));
            }
            raw.values[slot] = Some(value.to_string());
        }
        Ok(raw)
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text, path)
    }

    /// Sets `key`, replacing any file value.
    pub fn set(&mut self, key: &str, value: impl Into<String>) -> CliResult<()> {
        let slot = key_index(key).ok_or_else(|| CliError::Usage(format!("unknown key {key:?}")))?;
        self.values[slot] = Some(value.into());
        Ok(())
    }

    fn get(&self, key: &str) -> CliResult<&str> {
        let slot = key_index(key).expect("known key");
        if let Some(v) = &self.values[slot] {
            return Ok(v);
        }
        DEFAULTS
            .iter()
            .find(|(k, _)| *k == key)
            .map(|(_, v)| *v)
            .ok_or_else(|| CliError::Usage(format!("missing required setting {key:?}")))
    }

    pub fn resolve(&self) -> CliResult<ExperimentConfig> {
        let bad =
            |key: &str, e: &dyn std::fmt::Display| CliError::Usage(format!("invalid {key}: {e}"));
        let list = |key: &str| -> CliResult<Vec<usize>> {
            self.get(key)?
                .split(',')
                .map(|t| t.trim().parse::<usize>().map_err(|e| bad(key, &e)))
                .collect()
        };
        let parsed = |key: &str| -> CliResult<String> { Ok(self.get(key)?.to_string()) };
        let cfg = ExperimentConfig {
            experiment: parsed("experiment")?
                .parse()
                .map_err(|e| bad("experiment", &e))?,
            d: list("d")?,
            n: list("n")?,
            k: list("k")?,
            f: parsed("fn")?
                .parse::<ScalarFunction<f64>>()
                .map_err(|e| bad("fn", &e))?,
            b: parsed("B")?.parse().map_err(|e| bad("B", &e))?,
            sigma: parsed("sigma")?.parse().map_err(|e| bad("sigma", &e))?,
            m: parsed("M")?.parse().map_err(|e| bad("M", &e))?,
            chains: parsed("N")?.parse().map_err(|e| bad("N", &e))?,
            alpha: parsed("alpha")?.parse().map_err(|e| bad("alpha", &e))?,
            seed: parsed("seed")?.parse().map_err(|e| bad("seed", &e))?,
        };
        cfg.validate().map_err(|e| CliError::Usage(e.to_string()))?;
        Ok(cfg)
    }
}
