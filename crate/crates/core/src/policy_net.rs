//! The acquisition policy: one network scoring every feature for a state.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::checkpoint::Checkpoint;
use crate::classifier::Encoder;
use crate::environment::AcquisitionState;
use crate::error::{Error, Result};
use crate::feature_set::FeatureSet;
use crate::nn::{fit, Loss, Network, NetworkSpec, Target, TrainConfig};
use crate::rng::{derive_seed, rng_for, Purpose};

const CHECKPOINT_KIND: &str = "policy";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyTrainConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    /// 0 trains on the full batch.
    pub batch_size: usize,
    pub seed: u64,
}

impl Default for PolicyTrainConfig {
    fn default() -> Self {
        PolicyTrainConfig { learning_rate: 1e-3, epochs: 50, batch_size: 64, seed: 0 }
    }
}

impl PolicyTrainConfig {
    pub fn validate(&self) -> Result<()> {
        self.as_train_config(0).validate()
    }

    fn as_train_config(&self, round: u64) -> TrainConfig {
        TrainConfig {
            learning_rate: self.learning_rate,
            epochs: self.epochs,
            batch_size: self.batch_size,
            seed: derive_seed(self.seed, Purpose::PolicyTrain, &[round]),
        }
    }
}

/// Scores all features for an encoded state. Trained with squared error
/// against max-normalized action scores; the output layer is linear.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyNetwork {
    pub spec: NetworkSpec,
    pub encoder: Encoder,
    pub network: Network,
    /// Completed training rounds.
    pub rounds: u64,
}

/// Randomly initialized policy for the encoder's schema.
pub fn init_network(spec: &NetworkSpec, encoder: Encoder, seed: u64) -> Result<PolicyNetwork> {
    let mut rng = rng_for(seed, Purpose::PolicyInit, &[]);
    let network = spec.build(encoder.input_len(), encoder.schema.feature_count(), &mut rng)?;
    Ok(PolicyNetwork { spec: spec.clone(), encoder, network, rounds: 0 })
}

impl PolicyNetwork {
    pub fn feature_count(&self) -> usize {
        self.network.output_len()
    }

    pub fn scores(&self, state: &AcquisitionState) -> Result<Vec<f64>> {
        self.network.forward(&self.encoder.encode(state))
    }

    /// Highest-scoring unacquired feature.
    pub fn action(&self, state: &AcquisitionState) -> Result<usize> {
        policy_action(&self.scores(state)?, state.acquired())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        Checkpoint::new(CHECKPOINT_KIND, self.encoder.schema.hash(), self).save(path)
    }

    pub fn load(path: impl AsRef<Path>, schema_hash: &str) -> Result<Self> {
        Checkpoint::load(path, CHECKPOINT_KIND, schema_hash)
    }
}

/// Argmax of `scores` over features not in `acquired`; ties go to the lowest
/// index.
pub fn policy_action(scores: &[f64], acquired: &FeatureSet) -> Result<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, &s) in scores.iter().enumerate() {
        if acquired.contains(i) {
            continue;
        }
        // NaN scores lose against anything
        let s = if s.is_nan() { f64::NEG_INFINITY } else { s };
        if best.is_none_or(|(_, b)| s > b) {
            best = Some((i, s));
        }
    }
    best.map(|(i, _)| i).ok_or(Error::Terminal)
}

/// One training round on encoded states `inputs` and score vectors
/// `targets`. Returns the per-epoch loss.
pub fn train_policy(
    policy: &mut PolicyNetwork,
    inputs: &[Vec<f64>],
    targets: &[Vec<f64>],
    config: &PolicyTrainConfig,
) -> Result<Vec<f64>> {
    if inputs.is_empty() {
        return Err(Error::Empty("policy training set"));
    }
    if inputs.len() != targets.len() {
        return Err(Error::Dimension { expected: inputs.len(), actual: targets.len() });
    }
    if let Some(t) = targets.iter().find(|t| t.len() != policy.feature_count()) {
        return Err(Error::Dimension { expected: policy.feature_count(), actual: t.len() });
    }
    let targets: Vec<Target> = targets.iter().cloned().map(Target::Scores).collect();
    let history = fit(&mut policy.network, inputs, &targets, Loss::Mse, &config.as_train_config(policy.rounds))?;
    policy.rounds += 1;
    if let (Some(first), Some(last)) = (history.first(), history.last()) {
        log::debug!("policy round {}: {} states, loss {first:.5} -> {last:.5}", policy.rounds, inputs.len());
    }
    Ok(history)
}
