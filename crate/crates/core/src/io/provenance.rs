//! Reproducibility metadata attached to every output.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::config::ExperimentConfig;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub tool: String,
    pub version: String,
    pub command: String,
    /// SHA-256 of the config's canonical JSON.
    pub config_sha256: String,
    pub seed: u64,
}

impl Provenance {
    pub fn for_config(cfg: &ExperimentConfig) -> Self {
        let digest = Sha256::digest(cfg.to_json().as_bytes());
        Provenance {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: cfg.command.name().into(),
            config_sha256: hex::encode(digest),
            seed: cfg.seed,
        }
    }

    /// The single `#`-prefixed header line of a CSV output.
    pub fn csv_line(&self) -> String {
        format!(
            "# {} {} command={} config_sha256={} seed={}",
            self.tool, self.version, self.command, self.config_sha256, self.seed
        )
    }
}
