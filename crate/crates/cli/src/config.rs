//! Run configuration: one TOML file per experiment.

use std::path::{Path, PathBuf};

use mctsfa_core::classifier::{ClassifierConfig, ClassifierKind, Encoder, ImputePolicy, ImputeShape, InputLayout};
use mctsfa_core::harness::{CurveStart, DqnConfig};
use mctsfa_core::nn::TrainConfig;
use mctsfa_core::{
    Dataset, FeatureSchema, HvConfig, IntegratedConfig, MoConfig, NetworkSpec, PolicyTrainConfig, RewardTarget,
    SearchConfig, SplitPlan, StandaloneConfig, StrategyKind,
};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    SoStandalone,
    SoIntegrated,
    MoIntegrated,
    Dqn,
    Random,
    Greedy,
}

impl Algorithm {
    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::SoStandalone => "so-standalone",
            Algorithm::SoIntegrated => "so-integrated",
            Algorithm::MoIntegrated => "mo-integrated",
            Algorithm::Dqn => "dqn",
            Algorithm::Random => "random",
            Algorithm::Greedy => "greedy",
        }
    }

    pub fn has_policy_network(self) -> bool {
        matches!(self, Algorithm::SoStandalone | Algorithm::SoIntegrated | Algorithm::MoIntegrated)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassifierSection {
    pub kind: ClassifierKind,
    /// Architecture for `nn`/`cnn`. Defaults to the small feedforward net or
    /// the MNIST conv net.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub network: Option<NetworkSpec>,
    /// Defaults to 0.1 for `lr` and 0.01 for the networks.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub learning_rate: Option<f64>,
    #[serde(default = "default_classifier_epochs")]
    pub epochs: usize,
    /// 0 means full batch.
    #[serde(default)]
    pub batch_size: usize,
}

fn default_classifier_lr(kind: ClassifierKind) -> f64 {
    match kind {
        ClassifierKind::LogisticRegression => 0.1,
        ClassifierKind::FeedforwardNet | ClassifierKind::ConvNet => 1e-2,
    }
}

fn default_classifier_epochs() -> usize {
    100
}

impl ClassifierSection {
    pub fn new(kind: ClassifierKind) -> Self {
        ClassifierSection {
            kind,
            network: None,
            learning_rate: Some(default_classifier_lr(kind)),
            epochs: default_classifier_epochs(),
            batch_size: 0,
        }
    }

    pub fn learning_rate(&self) -> f64 {
        self.learning_rate.unwrap_or_else(|| default_classifier_lr(self.kind))
    }

    pub fn network_spec(&self) -> NetworkSpec {
        match (self.kind, &self.network) {
            (ClassifierKind::LogisticRegression, _) => NetworkSpec::Linear,
            (_, Some(spec)) => spec.clone(),
            (ClassifierKind::FeedforwardNet, None) => NetworkSpec::small_feedforward(),
            (ClassifierKind::ConvNet, None) => NetworkSpec::mnist_conv(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ImputeSection {
    pub shape: ImputeShape,
    #[serde(default)]
    pub value_at_full_cost: f64,
}

impl Default for ImputeSection {
    fn default() -> Self {
        ImputeSection { shape: ImputeShape::Constant, value_at_full_cost: 0.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SearchSection {
    pub simulations: usize,
    pub exploration: f64,
    /// Samples between policy training rounds.
    pub update_frequency: usize,
    pub network_from_start: bool,
}

impl Default for SearchSection {
    fn default() -> Self {
        SearchSection { simulations: 100, exploration: 1.0, update_frequency: 18, network_from_start: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PolicySection {
    pub network: NetworkSpec,
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
}

impl Default for PolicySection {
    fn default() -> Self {
        let d = PolicyTrainConfig::default();
        PolicySection {
            network: NetworkSpec::small_feedforward(),
            learning_rate: 1e-5,
            epochs: d.epochs,
            batch_size: d.batch_size,
        }
    }
}

/// DQN settings; the network comes from the `policy` section.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DqnSection {
    pub episodes: usize,
    pub batch_size: usize,
    pub update_frequency: usize,
    pub gamma: f64,
    pub epsilon_start: f64,
    pub epsilon_min: f64,
    pub epsilon_decay: f64,
    pub learning_rate: f64,
    pub buffer_capacity: usize,
}

impl Default for DqnSection {
    fn default() -> Self {
        let d = DqnConfig::default();
        DqnSection {
            episodes: d.episodes,
            batch_size: d.batch_size,
            update_frequency: d.update_frequency,
            gamma: d.gamma,
            epsilon_start: d.epsilon_start,
            epsilon_min: d.epsilon_min,
            epsilon_decay: d.epsilon_decay,
            learning_rate: d.learning_rate,
            buffer_capacity: d.buffer_capacity,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvaluationSection {
    pub curve_start: CurveStart,
}

/// Everything that determines a run. Seeds inside the individual sections
/// are not configurable: each `(split, seed)` run derives them from its root
/// seed in `split.seeds`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Label for the output directory; not part of the config hash.
    #[serde(default)]
    pub name: String,
    pub data: PathBuf,
    pub schema: PathBuf,
    pub algorithm: Algorithm,
    #[serde(default)]
    pub reward_target: RewardTarget,
    pub classifier: ClassifierSection,
    pub strategy: StrategyKind,
    #[serde(default)]
    pub impute: ImputeSection,
    #[serde(default)]
    pub search: SearchSection,
    #[serde(default)]
    pub policy: PolicySection,
    #[serde(default)]
    pub dqn: DqnSection,
    #[serde(default)]
    pub split: SplitPlan,
    #[serde(default)]
    pub hv: HvConfig,
    #[serde(default)]
    pub evaluation: EvaluationSection,
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Usage(format!("invalid config: {e}")))
    }

    /// Reads a config file; relative data and schema paths are taken relative
    /// to the file's directory.
    pub fn from_path(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        let mut config = Self::from_toml_str(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        config.data = base.join(&config.data);
        config.schema = base.join(&config.schema);
        Ok(config)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string_pretty(self).expect("run config serializes")
    }

    /// Makes data and schema paths absolute so the stored config is usable
    /// from any working directory.
    pub fn absolutize(&mut self) -> Result<(), CliError> {
        for p in [&mut self.data, &mut self.schema] {
            *p = std::path::absolute(&*p).map_err(|e| CliError::Usage(format!("bad path {}: {e}", p.display())))?;
        }
        Ok(())
    }

    /// Hex SHA-256 over every field except `name`.
    pub fn hash(&self) -> String {
        let mut value = serde_json::to_value(self).expect("run config serializes");
        if let Some(map) = value.as_object_mut() {
            map.remove("name");
        }
        let mut hasher = Sha256::new();
        hasher.update(serde_json::to_vec(&value).expect("json value serializes"));
        hex::encode(hasher.finalize())
    }

    pub fn display_name(&self) -> &str {
        if self.name.is_empty() {
            self.algorithm.as_str()
        } else {
            &self.name
        }
    }

    /// Checks the config on its own and against the dataset's schema.
    pub fn validate(&self, schema: &FeatureSchema) -> Result<(), CliError> {
        let usage = |e: mctsfa_core::Error| CliError::Usage(e.to_string());
        let image = schema.is_image();
        if self.classifier.kind == ClassifierKind::ConvNet && !image {
            return Err(CliError::Usage("the cnn classifier needs an image dataset with block features".into()));
        }
        let conv = |s: &NetworkSpec| matches!(s, NetworkSpec::Conv { .. });
        if !image && (conv(&self.policy.network) || self.classifier.network.as_ref().is_some_and(conv)) {
            return Err(CliError::Usage("conv networks need an image dataset".into()));
        }
        self.strategy.validate().map_err(usage)?;
        self.split.validate().map_err(usage)?;
        self.classifier_config(0).train.validate().map_err(usage)?;
        self.classifier.network_spec().validate().map_err(usage)?;
        ImputePolicy::new(self.impute.shape, self.impute.value_at_full_cost, schema.total_cost()).map_err(usage)?;
        match self.algorithm {
            Algorithm::SoStandalone => {
                let c = self.standalone_config(0);
                c.search.validate().map_err(usage)?;
                c.policy.validate().map_err(usage)?;
                self.policy.network.validate().map_err(usage)?;
            }
            Algorithm::SoIntegrated => {
                self.integrated_config(0).validate().map_err(usage)?;
                self.policy.network.validate().map_err(usage)?;
            }
            Algorithm::MoIntegrated => {
                self.mo_config(0).validate().map_err(usage)?;
                self.policy.network.validate().map_err(usage)?;
            }
            Algorithm::Dqn => self.dqn_config(0).validate().map_err(usage)?,
            Algorithm::Random | Algorithm::Greedy => {}
        }
        Ok(())
    }

    pub fn encoder(&self, dataset: &Dataset, train: &[usize]) -> mctsfa_core::Result<Encoder> {
        let schema = dataset.schema.clone();
        let impute = match self.impute.shape {
            ImputeShape::Constant => ImputePolicy::constant(schema.total_cost()),
            shape => ImputePolicy::new(shape, self.impute.value_at_full_cost, schema.total_cost())?,
        };
        let encoder = Encoder::new(schema, impute).with_scales(dataset.feature_maxima(train))?;
        if dataset.schema.is_image() {
            encoder.with_layout(InputLayout::Image)
        } else {
            Ok(encoder)
        }
    }

    pub fn classifier_config(&self, seed: u64) -> ClassifierConfig {
        ClassifierConfig {
            kind: self.classifier.kind,
            network: self.classifier.network_spec(),
            train: TrainConfig {
                learning_rate: self.classifier.learning_rate(),
                epochs: self.classifier.epochs,
                batch_size: self.classifier.batch_size,
                seed,
            },
        }
    }

    fn search_config(&self, seed: u64) -> SearchConfig {
        SearchConfig { simulations: self.search.simulations, exploration: self.search.exploration, seed }
    }

    fn policy_train_config(&self, seed: u64) -> PolicyTrainConfig {
        PolicyTrainConfig {
            learning_rate: self.policy.learning_rate,
            epochs: self.policy.epochs,
            batch_size: self.policy.batch_size,
            seed,
        }
    }

    pub fn standalone_config(&self, seed: u64) -> StandaloneConfig {
        StandaloneConfig { search: self.search_config(seed), policy: self.policy_train_config(seed) }
    }

    pub fn integrated_config(&self, seed: u64) -> IntegratedConfig {
        IntegratedConfig {
            search: self.search_config(seed),
            policy: self.policy_train_config(seed),
            update_frequency: self.search.update_frequency,
            network_from_start: self.search.network_from_start,
        }
    }

    pub fn mo_config(&self, seed: u64) -> MoConfig {
        MoConfig {
            search: self.search_config(seed),
            policy: self.policy_train_config(seed),
            update_frequency: self.search.update_frequency,
            hv: self.hv,
            network_from_start: self.search.network_from_start,
        }
    }

    pub fn dqn_config(&self, seed: u64) -> DqnConfig {
        let d = &self.dqn;
        DqnConfig {
            episodes: d.episodes,
            batch_size: d.batch_size,
            update_frequency: d.update_frequency,
            gamma: d.gamma,
            epsilon_start: d.epsilon_start,
            epsilon_min: d.epsilon_min,
            epsilon_decay: d.epsilon_decay,
            learning_rate: d.learning_rate,
            buffer_capacity: d.buffer_capacity,
            network: self.policy.network.clone(),
            seed,
        }
    }
}


/// Command-line overrides applied on top of a config file or preset.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub name: Option<String>,
    pub data: Option<PathBuf>,
    pub schema: Option<PathBuf>,
    pub simulations: Option<usize>,
    pub exploration: Option<f64>,
    pub update_frequency: Option<usize>,
    pub splits: Option<usize>,
    pub seeds: Option<Vec<u64>>,
}

impl Overrides {
    pub fn apply(&self, config: &mut RunConfig) {
        if let Some(v) = &self.name {
            config.name = v.clone();
        }
        if let Some(v) = &self.data {
            config.data = v.clone();
        }
        if let Some(v) = &self.schema {
            config.schema = v.clone();
        }
        if let Some(v) = self.simulations {
            config.search.simulations = v;
        }
        if let Some(v) = self.exploration {
            config.search.exploration = v;
        }
        if let Some(v) = self.update_frequency {
            config.search.update_frequency = v;
        }
        if let Some(v) = self.splits {
            config.split.split_count = v;
        }
        if let Some(v) = &self.seeds {
            config.split.seeds = v.clone();
        }
    }
}
