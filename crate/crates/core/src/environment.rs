//! The per-sample acquisition process.
//!
//! An episode starts with no feature acquired and ends when every feature is.
//! Acquiring feature `a` in state `O` pays its cost and yields
//!
//! ```text
//! r = P(y | X[O ∪ {a}]) / (cost(O ∪ {a}) / total_cost)
//! ```
//!
//! together with the vector form `(-cost(O ∪ {a}) / total_cost, P)`.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::datamodel::Dataset;
use crate::error::{Error, Result};
use crate::feature_set::FeatureSet;

/// Stored in place of values that have not been acquired. Data values are
/// non-negative, so the marker is unambiguous.
pub const UNACQUIRED: f64 = -1.0;

/// Acquired features and their values for one sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AcquisitionState {
    pub sample_index: usize,
    acquired: FeatureSet,
    values: Vec<f64>,
    cumulative_cost: f64,
}

impl AcquisitionState {
    /// Nothing acquired yet.
    pub fn empty(dataset: &Dataset, sample_index: usize) -> Result<Self> {
        Self::with_acquired(dataset, sample_index, FeatureSet::empty())
    }

    /// State with exactly `acquired` observed.
    pub fn with_acquired(dataset: &Dataset, sample_index: usize, acquired: FeatureSet) -> Result<Self> {
        if sample_index >= dataset.len() {
            return Err(Error::SampleOutOfRange { index: sample_index, count: dataset.len() });
        }
        let schema = &dataset.schema;
        if let Some(bad) = acquired.iter().find(|&i| i >= schema.feature_count()) {
            return Err(Error::FeatureOutOfRange { index: bad, count: schema.feature_count() });
        }
        let mut values = vec![UNACQUIRED; schema.value_len()];
        let source = dataset.values(sample_index);
        for f in acquired.iter() {
            let r = schema.value_range(f);
            values[r.clone()].copy_from_slice(&source[r]);
        }
        Ok(AcquisitionState { sample_index, acquired, values, cumulative_cost: schema.set_cost(&acquired) })
    }

    pub fn acquired(&self) -> &FeatureSet {
        &self.acquired
    }

    /// Raw values in schema layout; unacquired slots hold [`UNACQUIRED`].
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn cumulative_cost(&self) -> f64 {
        self.cumulative_cost
    }

    /// Number of acquisitions made so far.
    pub fn step(&self) -> usize {
        self.acquired.len()
    }

    pub fn is_terminal(&self, dataset: &Dataset) -> bool {
        self.acquired.len() == dataset.schema.feature_count()
    }

    /// Successor state after acquiring `action`.
    pub fn acquire(&self, dataset: &Dataset, action: usize) -> Result<Self> {
        let schema = &dataset.schema;
        if action >= schema.feature_count() {
            return Err(Error::FeatureOutOfRange { index: action, count: schema.feature_count() });
        }
        if self.acquired.contains(action) {
            return Err(Error::AlreadyAcquired(action));
        }
        let mut next = self.clone();
        next.acquired.insert(action);
        let r = schema.value_range(action);
        next.values[r.clone()].copy_from_slice(&dataset.values(self.sample_index)[r]);
        next.cumulative_cost = schema.set_cost(&next.acquired);
        Ok(next)
    }
}

/// Anything that turns a (partially observed) state into class probabilities.
pub trait ProbabilityModel {
    fn class_probabilities(&self, state: &AcquisitionState) -> Result<Vec<f64>>;
}

impl<T: ProbabilityModel + ?Sized> ProbabilityModel for &T {
    fn class_probabilities(&self, state: &AcquisitionState) -> Result<Vec<f64>> {
        (**self).class_probabilities(state)
    }
}

/// A probability model that may adapt once a sample has been processed,
/// between episodes.
pub trait AdaptiveModel: ProbabilityModel {
    /// Called after each training sample with the states visited for it.
    fn end_sample(&mut self, visited: &[AcquisitionState]) -> Result<()>;
}

/// Probability model backed by a closure, for fixed or synthetic
/// classifiers. It never adapts.
pub struct FnModel<F>(pub F);

impl<F: Fn(&AcquisitionState) -> Vec<f64>> ProbabilityModel for FnModel<F> {
    fn class_probabilities(&self, state: &AcquisitionState) -> Result<Vec<f64>> {
        Ok((self.0)(state))
    }
}

impl<F: Fn(&AcquisitionState) -> Vec<f64>> AdaptiveModel for FnModel<F> {
    fn end_sample(&mut self, _: &[AcquisitionState]) -> Result<()> {
        Ok(())
    }
}

/// Which probability enters the reward.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RewardTarget {
    /// Probability assigned to the sample's true label.
    #[default]
    TrueLabel,
    /// Largest predicted class probability.
    MaxClass,
}

impl RewardTarget {
    pub fn pick(self, probabilities: &[f64], label: usize) -> f64 {
        match self {
            RewardTarget::TrueLabel => probabilities[label],
            RewardTarget::MaxClass => probabilities.iter().copied().fold(0.0, f64::max),
        }
    }
}

/// Scalar reward for probability `p` at normalized cumulative cost
/// `cost_fraction`.
#[inline]
pub fn scalar_reward(p: f64, cost_fraction: f64) -> f64 {
    p / cost_fraction
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub next_state: AcquisitionState,
    pub scalar_reward: f64,
    /// `(r_c, r_p)`: negative normalized cost and probability.
    pub vector_reward: (f64, f64),
}

/// Dataset plus the classifier that scores states.
pub struct Environment<'a> {
    pub dataset: &'a Dataset,
    pub model: &'a dyn ProbabilityModel,
    pub target: RewardTarget,
}

impl<'a> Environment<'a> {
    pub fn new(dataset: &'a Dataset, model: &'a dyn ProbabilityModel, target: RewardTarget) -> Self {
        Environment { dataset, model, target }
    }

    pub fn feature_count(&self) -> usize {
        self.dataset.schema.feature_count()
    }

    pub fn reset(&self, sample_index: usize) -> Result<AcquisitionState> {
        AcquisitionState::empty(self.dataset, sample_index)
    }

    /// Reward probability of `state` (see [`RewardTarget`]).
    pub fn probability(&self, state: &AcquisitionState) -> Result<f64> {
        let probs = self.model.class_probabilities(state)?;
        let label = self.dataset.label(state.sample_index);
        if label >= probs.len() {
            return Err(Error::Dimension { expected: self.dataset.schema.class_count, actual: probs.len() });
        }
        Ok(self.target.pick(&probs, label))
    }

    /// `(r_c, r_p)` of a state reached by an acquisition.
    pub fn vector_reward(&self, state: &AcquisitionState) -> Result<(f64, f64)> {
        let fraction = state.cumulative_cost() / self.dataset.schema.total_cost();
        Ok((-fraction, self.probability(state)?))
    }

    pub fn step(&self, state: &AcquisitionState, action: usize) -> Result<StepOutcome> {
        let next_state = state.acquire(self.dataset, action)?;
        let (r_c, r_p) = self.vector_reward(&next_state)?;
        Ok(StepOutcome { scalar_reward: scalar_reward(r_p, -r_c), vector_reward: (r_c, r_p), next_state })
    }
}

/// Rewards of one sample's episode, memoized by acquired set. Rewards depend
/// only on the set reached, so searches query each set once.
pub struct Episode<'e, 'a> {
    env: &'e Environment<'a>,
    sample: usize,
    cache: HashMap<FeatureSet, (f64, f64)>,
}

impl<'e, 'a> Episode<'e, 'a> {
    pub fn new(env: &'e Environment<'a>, sample: usize) -> Result<Self> {
        env.reset(sample)?;
        Ok(Episode { env, sample, cache: HashMap::new() })
    }

    pub fn sample(&self) -> usize {
        self.sample
    }

    pub fn env(&self) -> &'e Environment<'a> {
        self.env
    }

    pub fn feature_count(&self) -> usize {
        self.env.feature_count()
    }

    pub fn state(&self, acquired: FeatureSet) -> Result<AcquisitionState> {
        AcquisitionState::with_acquired(self.env.dataset, self.sample, acquired)
    }

    /// `(r_c, r_p)` for arriving at `acquired`, which must be non-empty.
    pub fn vector(&mut self, acquired: FeatureSet) -> Result<(f64, f64)> {
        if acquired.is_empty() {
            return Err(Error::InvalidArgument("the empty state carries no reward".into()));
        }
        if let Some(&r) = self.cache.get(&acquired) {
            return Ok(r);
        }
        let r = self.env.vector_reward(&self.state(acquired)?)?;
        self.cache.insert(acquired, r);
        Ok(r)
    }

    /// Scalar reward for arriving at `acquired`.
    pub fn scalar(&mut self, acquired: FeatureSet) -> Result<f64> {
        let (r_c, r_p) = self.vector(acquired)?;
        Ok(scalar_reward(r_p, -r_c))
    }

    /// Number of classifier evaluations so far.
    pub fn evaluations(&self) -> usize {
        self.cache.len()
    }
}
