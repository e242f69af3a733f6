//! Run manifest: a JSON record written at the start of every run and
//! finalized at the end with output checksums, sufficient to replay the
//! run bit-identically.

use serde::Serialize;
use sfrc_core::stochastic::derive_seed;
use sfrc_core::verify::hex_digest;
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use crate::config::ExperimentConfig;
use crate::CliError;

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    pub master_seed: u64,
    /// Primary seed per realization slot (replacement seeds derive from
    /// the same published scheme).
    pub realization_seeds: Vec<u64>,
    pub config: ExperimentConfig,
    pub started_unix: u64,
    pub finished_unix: Option<u64>,
    /// Output file name -> SHA-256 of its bytes.
    pub outputs: BTreeMap<String, String>,
    #[serde(skip)]
    dir: PathBuf,
}

fn now_unix() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

impl RunManifest {
    /// Writes the initial manifest into `dir/manifest.json`.
    pub fn start(
        dir: &Path,
        command: &str,
        config: &ExperimentConfig,
        realizations: usize,
    ) -> Result<Self, CliError> {
        let manifest = Self {
            command: command.into(),
            version: env!("CARGO_PKG_VERSION").into(),
            master_seed: config.run.seed,
            realization_seeds: (0..realizations as u64)
                .map(|i| derive_seed(config.run.seed, i))
                .collect(),
            config: config.clone(),
            started_unix: now_unix(),
            finished_unix: None,
            outputs: BTreeMap::new(),
            dir: dir.to_path_buf(),
        };
        manifest.write()?;
        Ok(manifest)
    }

    /// Registers an output file and records its checksum.
    pub fn add_output(&mut self, name: &str) -> Result<(), CliError> {
        let bytes = std::fs::read(self.dir.join(name))
            .map_err(|e| CliError::Runtime(format!("checksum {name}: {e}")))?;
        self.outputs.insert(name.into(), hex_digest(&bytes));
        Ok(())
    }

    /// Stamps the end time and rewrites the manifest.
    pub fn finish(mut self) -> Result<(), CliError> {
        self.finished_unix = Some(now_unix());
        self.write()
    }

    fn write(&self) -> Result<(), CliError> {
        let path = self.dir.join("manifest.json");
        let text = serde_json::to_string_pretty(self)
            .map_err(|e| CliError::Runtime(format!("manifest: {e}")))?;
        std::fs::write(&path, text)
            .map_err(|e| CliError::Runtime(format!("manifest {}: {e}", path.display())))
    }
}
