use std::path::Path;

use anyhow::Context;
use forge_core::amplifier::DEFAULT_CERT_BUDGET;
use forge_core::oracles::DEFAULT_ORACLE_BUDGET;
use serde::Deserialize;

/// Settings read from a TOML file. Command-line flags win over the file.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub min_occ: Option<usize>,
    pub amp_seed: Option<u64>,
    pub amp_attempts: Option<u64>,
    pub amp_budget: Option<u64>,
    pub oracle_budget: Option<u64>,
    pub subdivision_p: Option<usize>,
    pub tours: Option<usize>,
    pub seed: Option<u64>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> anyhow::Result<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }

    pub fn min_occ(&self, flag: Option<usize>) -> usize {
        flag.or(self.min_occ).unwrap_or(5)
    }

    pub fn amp_seed(&self, flag: Option<u64>) -> u64 {
        flag.or(self.amp_seed).unwrap_or(0)
    }

    pub fn amp_attempts(&self, flag: Option<u64>) -> u64 {
        flag.or(self.amp_attempts).unwrap_or(10_000)
    }

    pub fn amp_budget(&self, flag: Option<u64>) -> u64 {
        flag.or(self.amp_budget).unwrap_or(DEFAULT_CERT_BUDGET)
    }

    pub fn oracle_budget(&self, flag: Option<u64>) -> u64 {
        flag.or(self.oracle_budget).unwrap_or(DEFAULT_ORACLE_BUDGET)
    }

    pub fn subdivision_p(&self, flag: Option<usize>) -> usize {
        flag.or(self.subdivision_p).unwrap_or(8)
    }

    pub fn tours(&self, flag: Option<usize>) -> usize {
        flag.or(self.tours).unwrap_or(1000)
    }

    pub fn seed(&self, flag: Option<u64>) -> u64 {
        flag.or(self.seed).unwrap_or(0)
    }
}
