//! On-disk layout of a training run.
//!
//! ```text
//! <root>/<name>-<hash12>/
//!     config.toml          resolved configuration
//!     record.json          RunRecord
//!     split<S>-seed<K>/    one directory per (split, seed)
//!         partition.json
//!         classifier.json
//!         policy.json | dqn.json
//!         visits.csv       search algorithms
//!         fronts.csv       multi-objective search
//!         training.json
//! ```

use std::path::{Path, PathBuf};

use anyhow::Context;
use mctsfa_core::datamodel::{load_dataset, Partition};
use mctsfa_core::Dataset;
use serde::{Deserialize, Serialize};

use crate::config::{Algorithm, RunConfig};
use crate::{CliError, CliResult};

pub const RECORD_FILE: &str = "record.json";
pub const CONFIG_FILE: &str = "config.toml";
pub const PARTITION_FILE: &str = "partition.json";
pub const CLASSIFIER_FILE: &str = "classifier.json";
pub const POLICY_FILE: &str = "policy.json";
pub const DQN_FILE: &str = "dqn.json";
pub const VISITS_FILE: &str = "visits.csv";
pub const FRONTS_FILE: &str = "fronts.csv";
pub const TRAINING_FILE: &str = "training.json";

const FORMAT_VERSION: u32 = 1;

/// One trained `(split, seed)` run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunEntry {
    pub split: usize,
    pub seed: u64,
    /// Seed every component of this run derives its randomness from.
    pub run_seed: u64,
    /// Directory relative to the record.
    pub dir: String,
    pub trainings: usize,
    pub final_loss: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub format_version: u32,
    pub name: String,
    pub config_hash: String,
    pub algorithm: Algorithm,
    pub dataset: String,
    pub schema_hash: String,
    pub runs: Vec<RunEntry>,
}

impl RunRecord {
    pub fn new(config: &RunConfig, dataset: &Dataset, runs: Vec<RunEntry>) -> Self {
        RunRecord {
            format_version: FORMAT_VERSION,
            name: config.display_name().to_string(),
            config_hash: config.hash(),
            algorithm: config.algorithm,
            dataset: dataset.name.clone(),
            schema_hash: dataset.schema.hash(),
            runs,
        }
    }
}

/// Directory name for a config: its display name plus a hash prefix.
pub fn record_dir_name(config: &RunConfig) -> String {
    format!("{}-{}", config.display_name(), &config.hash()[..12])
}

pub fn run_dir_name(split: usize, seed: u64) -> String {
    format!("split{split}-seed{seed}")
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> anyhow::Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> anyhow::Result<T> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

/// A record directory opened for evaluation or plotting.
#[derive(Debug)]
pub struct OpenRecord {
    pub dir: PathBuf,
    pub record: RunRecord,
    pub config: RunConfig,
}

impl OpenRecord {
    pub fn open(dir: &Path) -> CliResult<Self> {
        let record_path = dir.join(RECORD_FILE);
        if !record_path.is_file() {
            return Err(CliError::Usage(format!("{} is not a run record", dir.display())));
        }
        let record: RunRecord = read_json(&record_path)?;
        if record.format_version != FORMAT_VERSION {
            return Err(CliError::Runtime(anyhow::anyhow!(
                "record format {} is not supported (expected {FORMAT_VERSION})",
                record.format_version
            )));
        }
        let config_path = dir.join(CONFIG_FILE);
        let text =
            std::fs::read_to_string(&config_path).with_context(|| format!("reading {}", config_path.display()))?;
        let config = RunConfig::from_toml_str(&text)?;
        if config.hash() != record.config_hash {
            return Err(CliError::Runtime(anyhow::anyhow!(
                "{} does not match the hash in {}",
                config_path.display(),
                record_path.display()
            )));
        }
        Ok(OpenRecord { dir: dir.to_path_buf(), record, config })
    }

    pub fn load_dataset(&self) -> CliResult<Dataset> {
        let dataset = load_dataset(&self.config.data, &self.config.schema)?;
        if dataset.schema.hash() != self.record.schema_hash {
            return Err(CliError::Runtime(anyhow::anyhow!(
                "schema {} changed since training",
                self.config.schema.display()
            )));
        }
        Ok(dataset)
    }

    pub fn run_dir(&self, entry: &RunEntry) -> PathBuf {
        self.dir.join(&entry.dir)
    }

    pub fn partition(&self, entry: &RunEntry) -> CliResult<Partition> {
        Ok(read_json(&self.run_dir(entry).join(PARTITION_FILE))?)
    }
}
