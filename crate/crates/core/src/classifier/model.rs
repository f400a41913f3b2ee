use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nn::{fit, softmax, Loss, Network, NetworkSpec, Target, TrainConfig};
use crate::rng::{rng_for, Purpose};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassifierKind {
    #[serde(rename = "lr")]
    LogisticRegression,
    #[serde(rename = "nn")]
    FeedforwardNet,
    #[serde(rename = "cnn")]
    ConvNet,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifierConfig {
    pub kind: ClassifierKind,
    /// Architecture for `nn`/`cnn`; ignored by `lr`.
    pub network: NetworkSpec,
    pub train: TrainConfig,
}

impl ClassifierConfig {
    pub fn logistic(train: TrainConfig) -> Self {
        ClassifierConfig { kind: ClassifierKind::LogisticRegression, network: NetworkSpec::Linear, train }
    }

    pub fn spec(&self) -> NetworkSpec {
        match self.kind {
            ClassifierKind::LogisticRegression => NetworkSpec::Linear,
            _ => self.network.clone(),
        }
    }
}

/// A trained classifier producing class probabilities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifierModel {
    pub kind: ClassifierKind,
    pub class_count: usize,
    pub network: Network,
}

impl ClassifierModel {
    pub fn predict_proba(&self, input: &[f64]) -> Result<Vec<f64>> {
        Ok(softmax(&self.network.forward(input)?))
    }

    pub fn input_len(&self) -> usize {
        self.network.input_len()
    }
}

/// Trains a classifier with softmax cross-entropy.
///
/// Initialization and mini-batch order both derive from `config.train.seed`.
pub fn train_classifier(
    config: &ClassifierConfig,
    inputs: &[Vec<f64>],
    labels: &[usize],
    class_count: usize,
) -> Result<ClassifierModel> {
    if inputs.is_empty() {
        return Err(Error::Empty("classifier training set"));
    }
    if let Some(&bad) = labels.iter().find(|&&y| y >= class_count) {
        return Err(Error::InvalidArgument(format!("label {bad} outside [0, {class_count})")));
    }
    let mut rng = rng_for(config.train.seed, Purpose::ClassifierInit, &[]);
    let mut network = config.spec().build(inputs[0].len(), class_count, &mut rng)?;
    let targets: Vec<Target> = labels.iter().map(|&y| Target::Class(y)).collect();
    let train = TrainConfig {
        seed: crate::rng::derive_seed(config.train.seed, Purpose::ClassifierTrain, &[]),
        ..config.train.clone()
    };
    let history = fit(&mut network, inputs, &targets, Loss::CrossEntropy, &train)?;
    if let (Some(first), Some(last)) = (history.first(), history.last()) {
        log::debug!("classifier {:?}: loss {first:.4} -> {last:.4} over {} epochs", config.kind, history.len());
    }
    Ok(ClassifierModel { kind: config.kind, class_count, network })
}
