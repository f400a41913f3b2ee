use std::collections::HashMap;
use std::path::Path;
use std::sync::{Arc, RwLock};

use rand::seq::index::sample as sample_indices;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::encode::Encoder;
use super::model::{train_classifier, ClassifierConfig, ClassifierModel};
use crate::checkpoint::Checkpoint;
use crate::datamodel::Dataset;
use crate::environment::{AcquisitionState, AdaptiveModel, ProbabilityModel};
use crate::error::{Error, Result};
use crate::feature_set::FeatureSet;
use crate::rng::{derive_seed, rng_for, Purpose};

const CHECKPOINT_KIND: &str = "classifier";

/// How the classifier behind the reward is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StrategyKind {
    /// One model trained on fully acquired samples.
    Pretrain,
    /// One model trained on a random subset of each sample.
    Random,
    /// Starts as `Pretrain`; every `frequency` processed samples it is
    /// retrained on the original data plus the states visited so far.
    Retrain { frequency: usize },
    /// A separate model per acquired subset, trained on first use.
    Fit,
}

impl StrategyKind {
    pub fn validate(&self) -> Result<()> {
        match self {
            StrategyKind::Retrain { frequency: 0 } => {
                Err(Error::InvalidArgument("retrain frequency must be at least 1".into()))
            }
            _ => Ok(()),
        }
    }
}

/// Classifier selection plus the training data it needs.
#[derive(Debug)]
pub struct ClassifierStrategy {
    kind: StrategyKind,
    config: ClassifierConfig,
    encoder: Encoder,
    dataset: Arc<Dataset>,
    train: Vec<usize>,
    seed: u64,
    shared: Option<Arc<ClassifierModel>>,
    cache: RwLock<HashMap<FeatureSet, Arc<ClassifierModel>>>,
    augmented: Vec<(Vec<f64>, usize)>,
    processed: usize,
    retrain_count: usize,
}

/// Serializable form of a [`ClassifierStrategy`] without its dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategySnapshot {
    pub kind: StrategyKind,
    pub config: ClassifierConfig,
    pub encoder: Encoder,
    pub seed: u64,
    pub shared: Option<ClassifierModel>,
    /// Fit-strategy models keyed by [`FeatureSet::key`].
    pub cache: Vec<(String, ClassifierModel)>,
    pub augmented: Vec<(Vec<f64>, usize)>,
    pub processed: usize,
    pub retrain_count: usize,
}

impl ClassifierStrategy {
    /// Trains the initial model(s) on the samples in `train`.
    pub fn new(
        kind: StrategyKind,
        config: ClassifierConfig,
        encoder: Encoder,
        dataset: Arc<Dataset>,
        train: Vec<usize>,
        seed: u64,
    ) -> Result<Self> {
        kind.validate()?;
        config.train.validate()?;
        if train.is_empty() {
            return Err(Error::Empty("classifier training samples"));
        }
        if let Some(&bad) = train.iter().find(|&&i| i >= dataset.len()) {
            return Err(Error::SampleOutOfRange { index: bad, count: dataset.len() });
        }
        if encoder.schema != dataset.schema {
            return Err(Error::Schema("encoder and dataset schemas differ".into()));
        }
        let mut strategy = ClassifierStrategy {
            kind,
            config,
            encoder,
            dataset,
            train,
            seed,
            shared: None,
            cache: RwLock::new(HashMap::new()),
            augmented: Vec::new(),
            processed: 0,
            retrain_count: 0,
        };
        strategy.shared = match kind {
            StrategyKind::Pretrain | StrategyKind::Retrain { .. } => {
                let full = strategy.dataset.schema.full_set();
                Some(Arc::new(strategy.fit_subset(full, 0)?))
            }
            StrategyKind::Random => Some(Arc::new(strategy.fit_random()?)),
            StrategyKind::Fit => None,
        };
        Ok(strategy)
    }

    pub fn kind(&self) -> StrategyKind {
        self.kind
    }

    pub fn encoder(&self) -> &Encoder {
        &self.encoder
    }

    pub fn dataset(&self) -> &Arc<Dataset> {
        &self.dataset
    }

    /// Number of samples passed to [`Self::record_sample`].
    pub fn processed(&self) -> usize {
        self.processed
    }

    /// Number of retrainings performed so far.
    pub fn retrain_count(&self) -> usize {
        self.retrain_count
    }

    /// Number of fit-strategy models trained so far.
    pub fn cached_models(&self) -> usize {
        self.cache.read().expect("cache lock").len()
    }

    /// The model used for states whose acquired set is `acquired`.
    pub fn model_for(&self, acquired: &FeatureSet) -> Result<Arc<ClassifierModel>> {
        if let Some(model) = &self.shared {
            return Ok(Arc::clone(model));
        }
        if let Some(model) = self.cache.read().expect("cache lock").get(acquired) {
            return Ok(Arc::clone(model));
        }
        let bits = acquired.bits();
        let trained = Arc::new(self.fit_subset(
            *acquired,
            derive_seed(self.seed, Purpose::ClassifierTrain, &[bits as u64, (bits >> 64) as u64]),
        )?);
        let mut cache = self.cache.write().expect("cache lock");
        // another thread may have trained the same subset meanwhile; keep the first
        Ok(Arc::clone(cache.entry(*acquired).or_insert(trained)))
    }

    /// Registers a processed sample and the states visited for it.
    ///
    /// For `Retrain` the model is replaced every `frequency` samples.
    /// Returns whether a retraining happened.
    pub fn record_sample(&mut self, visited: &[AcquisitionState]) -> Result<bool> {
        self.processed += 1;
        let StrategyKind::Retrain { frequency } = self.kind else {
            return Ok(false);
        };
        for state in visited {
            let label = self.dataset.label(state.sample_index);
            self.augmented.push((self.encoder.encode(state), label));
        }
        if !self.processed.is_multiple_of(frequency) {
            return Ok(false);
        }
        let full = self.dataset.schema.full_set();
        let (mut inputs, mut labels) = self.encoded_subset(full);
        for (x, y) in &self.augmented {
            inputs.push(x.clone());
            labels.push(*y);
        }
        self.retrain_count += 1;
        let model = self.train(&inputs, &labels, self.retrain_count as u64)?;
        self.shared = Some(Arc::new(model));
        Ok(true)
    }

    fn encoded_subset(&self, acquired: FeatureSet) -> (Vec<Vec<f64>>, Vec<usize>) {
        self.train
            .iter()
            .map(|&i| {
                let state =
                    AcquisitionState::with_acquired(&self.dataset, i, acquired).expect("validated sample and subset");
                (self.encoder.encode(&state), self.dataset.label(i))
            })
            .unzip()
    }

    fn fit_subset(&self, acquired: FeatureSet, counter: u64) -> Result<ClassifierModel> {
        let (inputs, labels) = self.encoded_subset(acquired);
        self.train(&inputs, &labels, counter)
    }

    fn fit_random(&self) -> Result<ClassifierModel> {
        let d = self.dataset.schema.feature_count();
        let mut rng = rng_for(self.seed, Purpose::RandomSubsets, &[]);
        let (inputs, labels) = self
            .train
            .iter()
            .map(|&i| {
                let size = rng.gen_range(0..=d);
                let subset = FeatureSet::from_indices(sample_indices(&mut rng, d, size));
                let state =
                    AcquisitionState::with_acquired(&self.dataset, i, subset).expect("validated sample and subset");
                (self.encoder.encode(&state), self.dataset.label(i))
            })
            .unzip::<_, _, Vec<_>, Vec<_>>();
        self.train(&inputs, &labels, 0)
    }

    fn train(&self, inputs: &[Vec<f64>], labels: &[usize], counter: u64) -> Result<ClassifierModel> {
        let mut config = self.config.clone();
        config.train.seed = derive_seed(self.seed, Purpose::ClassifierTrain, &[counter]);
        train_classifier(&config, inputs, labels, self.dataset.schema.class_count)
    }

    pub fn snapshot(&self) -> StrategySnapshot {
        let mut cache: Vec<(String, ClassifierModel)> =
            self.cache.read().expect("cache lock").iter().map(|(k, m)| (k.key(), (**m).clone())).collect();
        cache.sort_by(|a, b| a.0.cmp(&b.0));
        StrategySnapshot {
            kind: self.kind,
            config: self.config.clone(),
            encoder: self.encoder.clone(),
            seed: self.seed,
            shared: self.shared.as_deref().cloned(),
            cache,
            augmented: self.augmented.clone(),
            processed: self.processed,
            retrain_count: self.retrain_count,
        }
    }

    /// Rebuilds a strategy from a snapshot without retraining.
    pub fn restore(snapshot: StrategySnapshot, dataset: Arc<Dataset>, train: Vec<usize>) -> Result<Self> {
        if snapshot.encoder.schema != dataset.schema {
            return Err(Error::Schema("snapshot was taken on a different schema".into()));
        }
        if snapshot.shared.is_none() && snapshot.kind != StrategyKind::Fit {
            return Err(Error::Checkpoint(format!("{:?} snapshot has no model", snapshot.kind)));
        }
        let mut cache = HashMap::new();
        for (key, model) in snapshot.cache {
            cache.insert(FeatureSet::parse_key(&key)?, Arc::new(model));
        }
        Ok(ClassifierStrategy {
            kind: snapshot.kind,
            config: snapshot.config,
            encoder: snapshot.encoder,
            dataset,
            train,
            seed: snapshot.seed,
            shared: snapshot.shared.map(Arc::new),
            cache: RwLock::new(cache),
            augmented: snapshot.augmented,
            processed: snapshot.processed,
            retrain_count: snapshot.retrain_count,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        Checkpoint::new(CHECKPOINT_KIND, self.dataset.schema.hash(), self.snapshot()).save(path)
    }

    pub fn load(path: impl AsRef<Path>, dataset: Arc<Dataset>, train: Vec<usize>) -> Result<Self> {
        let snapshot = Checkpoint::load(path, CHECKPOINT_KIND, &dataset.schema.hash())?;
        Self::restore(snapshot, dataset, train)
    }
}

impl ProbabilityModel for ClassifierStrategy {
    fn class_probabilities(&self, state: &AcquisitionState) -> Result<Vec<f64>> {
        let model = self.model_for(state.acquired())?;
        model.predict_proba(&self.encoder.encode(state))
    }
}

impl AdaptiveModel for ClassifierStrategy {
    fn end_sample(&mut self, visited: &[AcquisitionState]) -> Result<()> {
        self.record_sample(visited).map(|_| ())
    }
}
