//! Run configuration shared by the analyze and report stages.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::corpus::DEFAULT_PIN;
use crate::labeler::{CategoryRules, KeywordSet};
use crate::stats::STRONG_THRESHOLD;

/// The only supported quartile convention.
pub const TUKEY_HINGES: &str = "tukey-hinges";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub keywords: KeywordSet,
    pub categories: CategoryRules,
    pub strong_threshold: f64,
    pub quartiles: String,
    pub pin_until: String,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            keywords: KeywordSet::default(),
            categories: CategoryRules::default(),
            strong_threshold: STRONG_THRESHOLD,
            quartiles: TUKEY_HINGES.to_string(),
            pin_until: DEFAULT_PIN.to_string(),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {detail}")]
    Parse { path: PathBuf, detail: String },
    #[error("unsupported quartile convention `{0}` (only `tukey-hinges`)")]
    Quartiles(String),
    #[error("strong_threshold must be within [-1, 1], got {0}")]
    Threshold(f64),
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let cfg: RunConfig = toml::from_str(&text).map_err(|e| ConfigError::Parse {
            path: path.to_path_buf(),
            detail: e.to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.quartiles != TUKEY_HINGES {
            return Err(ConfigError::Quartiles(self.quartiles.clone()));
        }
        if !(-1.0..=1.0).contains(&self.strong_threshold) {
            return Err(ConfigError::Threshold(self.strong_threshold));
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON form, hex encoded.
    pub fn hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(&json))
    }
}
