//! Named configurations with the published hyperparameters.
//!
//! Names are `<dataset>-<algorithm>[-<classifier>]`: dataset is one of
//! `hf`, `chd`, `physionet`, `mnist`; algorithm one of `so`
//! (integrated), `so-standalone`, `mo`, `dqn`, `random`, `greedy`; the
//! classifier suffix is `nn` for the tabular sets and `cnn` for MNIST, and
//! logistic regression when omitted.

use std::path::PathBuf;

use mctsfa_core::classifier::{ClassifierKind, ImputeShape};
use mctsfa_core::datamodel::image_block_schema;
use mctsfa_core::harness::CurveStart;
use mctsfa_core::{FeatureSchema, HvConfig, NetworkSpec, RewardTarget, SplitPlan, StrategyKind};

use crate::config::{
    Algorithm, ClassifierSection, DqnSection, EvaluationSection, ImputeSection, PolicySection, RunConfig, SearchSection,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DatasetPreset {
    HeartFailure,
    CoronaryHeartDisease,
    PhysioNet,
    Mnist,
}

impl DatasetPreset {
    pub const ALL: [DatasetPreset; 4] = [
        DatasetPreset::HeartFailure,
        DatasetPreset::CoronaryHeartDisease,
        DatasetPreset::PhysioNet,
        DatasetPreset::Mnist,
    ];

    pub fn key(self) -> &'static str {
        match self {
            DatasetPreset::HeartFailure => "hf",
            DatasetPreset::CoronaryHeartDisease => "chd",
            DatasetPreset::PhysioNet => "physionet",
            DatasetPreset::Mnist => "mnist",
        }
    }

    fn column(self) -> usize {
        self as usize
    }

    /// Hidden layers shared by the feedforward classifier and policy.
    fn network(self) -> NetworkSpec {
        let hidden = match self {
            DatasetPreset::HeartFailure => vec![32, 16, 8],
            DatasetPreset::CoronaryHeartDisease => vec![512, 256, 128],
            DatasetPreset::PhysioNet => vec![256, 128, 64],
            DatasetPreset::Mnist => return NetworkSpec::mnist_conv(),
        };
        NetworkSpec::Feedforward { hidden }
    }

    /// The fixed schema of 4x4-pixel blocks over 28x28 digits; tabular
    /// schemas are user-authored.
    pub fn schema(self) -> Option<FeatureSchema> {
        match self {
            DatasetPreset::Mnist => Some(image_block_schema(28, 4, 10).expect("28 is divisible by 4")),
            _ => None,
        }
    }
}

/// Algorithm column of a preset name.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum PresetAlgorithm {
    So,
    SoStandalone,
    Mo,
    Dqn,
    Random,
    Greedy,
}

impl PresetAlgorithm {
    const ALL: [PresetAlgorithm; 6] = [
        PresetAlgorithm::So,
        PresetAlgorithm::SoStandalone,
        PresetAlgorithm::Mo,
        PresetAlgorithm::Dqn,
        PresetAlgorithm::Random,
        PresetAlgorithm::Greedy,
    ];

    fn key(self) -> &'static str {
        match self {
            PresetAlgorithm::So => "so",
            PresetAlgorithm::SoStandalone => "so-standalone",
            PresetAlgorithm::Mo => "mo",
            PresetAlgorithm::Dqn => "dqn",
            PresetAlgorithm::Random => "random",
            PresetAlgorithm::Greedy => "greedy",
        }
    }

    fn algorithm(self) -> Algorithm {
        match self {
            PresetAlgorithm::So => Algorithm::SoIntegrated,
            PresetAlgorithm::SoStandalone => Algorithm::SoStandalone,
            PresetAlgorithm::Mo => Algorithm::MoIntegrated,
            PresetAlgorithm::Dqn => Algorithm::Dqn,
            PresetAlgorithm::Random => Algorithm::Random,
            PresetAlgorithm::Greedy => Algorithm::Greedy,
        }
    }
}

const SO_UPDATE: [usize; 4] = [18, 20, 36, 100];
const SO_RETRAIN: [usize; 4] = [54, 180, 324, 10_000];
const MO_EXPLORATION: [f64; 4] = [2.0, 1.0, 1.0, 1.0];
const DQN_BATCH: [usize; 4] = [6, 20, 18, 25];
const DQN_GAMMA: [f64; 4] = [0.5, 0.99, 0.999, 0.99];
const DQN_EPSILON_DECAY: [f64; 4] = [0.99, 0.99, 0.99, 0.5];
const DQN_LR: [f64; 4] = [1e-6, 1e-6, 1e-6, 1e-7];
const DQN_RETRAIN: [usize; 4] = [108, 360, 684, 12_000];

fn impute(dataset: DatasetPreset, algorithm: PresetAlgorithm, nn: bool) -> ImputeSection {
    use DatasetPreset::*;
    use ImputeShape::*;
    use PresetAlgorithm::*;
    let (shape, value_at_full_cost) = match (dataset, algorithm, nn) {
        (Mnist, _, _) => (Constant, 0.0),
        (HeartFailure, SoStandalone, false) => (QuadMaxAtZero, -50.0),
        (HeartFailure, SoStandalone, true) => (QuadMinAtFull, -50.0),
        (HeartFailure, Dqn, false) => (QuadMinAtFull, -50.0),
        (HeartFailure, _, _) => (QuadMinAtFull, -70.0),
        (_, _, true) => (Constant, 0.0),
        (CoronaryHeartDisease | PhysioNet, Mo, false) => (QuadMaxAtZero, -50.0),
        (CoronaryHeartDisease, Dqn, false) => (QuadMaxAtZero, -10.0),
        (PhysioNet, Dqn, false) => (QuadMinAtFull, -60.0),
        (CoronaryHeartDisease | PhysioNet, _, false) => (QuadMinAtFull, -70.0),
    };
    ImputeSection { shape, value_at_full_cost }
}

fn build(dataset: DatasetPreset, algorithm: PresetAlgorithm, classifier: ClassifierKind) -> RunConfig {
    let col = dataset.column();
    let network = dataset.network();
    let nn = classifier != ClassifierKind::LogisticRegression;
    let mut classifier_section = ClassifierSection::new(classifier);
    if nn {
        classifier_section.network = Some(network.clone());
    }
    let mut search = SearchSection {
        simulations: 100,
        exploration: 1.0,
        update_frequency: SO_UPDATE[col],
        network_from_start: true,
    };
    let strategy = match algorithm {
        PresetAlgorithm::So | PresetAlgorithm::SoStandalone => StrategyKind::Retrain { frequency: SO_RETRAIN[col] },
        PresetAlgorithm::Mo => {
            search.exploration = MO_EXPLORATION[col];
            StrategyKind::Retrain { frequency: SO_UPDATE[col] }
        }
        PresetAlgorithm::Dqn => StrategyKind::Retrain { frequency: DQN_RETRAIN[col] },
        PresetAlgorithm::Random | PresetAlgorithm::Greedy => StrategyKind::Pretrain,
    };
    let dqn = DqnSection {
        episodes: 100,
        batch_size: DQN_BATCH[col],
        update_frequency: DQN_BATCH[col],
        gamma: DQN_GAMMA[col],
        epsilon_decay: DQN_EPSILON_DECAY[col],
        learning_rate: DQN_LR[col],
        ..DqnSection::default()
    };
    let key = dataset.key();
    RunConfig {
        name: String::new(),
        data: PathBuf::from(format!("{key}.csv")),
        schema: PathBuf::from(format!("{key}.schema.toml")),
        algorithm: algorithm.algorithm(),
        reward_target: RewardTarget::TrueLabel,
        classifier: classifier_section,
        strategy,
        impute: impute(dataset, algorithm, nn),
        search,
        policy: PolicySection { network, learning_rate: 1e-5, ..PolicySection::default() },
        dqn,
        split: SplitPlan::default(),
        hv: HvConfig::default(),
        evaluation: EvaluationSection { curve_start: CurveStart::Zero },
    }
}

/// Every preset name, in a stable order.
pub fn preset_names() -> Vec<String> {
    let mut out = Vec::new();
    for dataset in DatasetPreset::ALL {
        let deep = if dataset == DatasetPreset::Mnist { "cnn" } else { "nn" };
        for algorithm in PresetAlgorithm::ALL {
            out.push(format!("{}-{}", dataset.key(), algorithm.key()));
            out.push(format!("{}-{}-{deep}", dataset.key(), algorithm.key()));
        }
    }
    out
}

pub fn preset(name: &str) -> Option<RunConfig> {
    let (dataset, rest) = DatasetPreset::ALL
        .into_iter()
        .find_map(|d| name.strip_prefix(d.key()).and_then(|r| r.strip_prefix('-')).map(|r| (d, r)))?;
    let deep = if dataset == DatasetPreset::Mnist { ClassifierKind::ConvNet } else { ClassifierKind::FeedforwardNet };
    let deep_suffix = if dataset == DatasetPreset::Mnist { "-cnn" } else { "-nn" };
    let (algo_key, classifier) = match rest.strip_suffix(deep_suffix) {
        Some(a) => (a, deep),
        None => (rest, ClassifierKind::LogisticRegression),
    };
    let algorithm = PresetAlgorithm::ALL.into_iter().find(|a| a.key() == algo_key)?;
    let mut config = build(dataset, algorithm, classifier);
    config.name = name.to_string();
    Some(config)
}
