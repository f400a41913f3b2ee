use std::collections::HashMap;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::datamodel::Dataset;
use crate::environment::{AcquisitionState, ProbabilityModel};
use crate::error::{Error, Result};
use crate::policy_net::{policy_action, PolicyNetwork};
use crate::rng::{rng_for, Purpose};

/// Chooses the next feature during evaluation.
pub trait AcquisitionPolicy {
    /// Called at the start of each sample's episode.
    fn begin(&mut self, _sample: usize) -> Result<()> {
        Ok(())
    }

    /// Next feature to acquire; must not be in `state.acquired()`.
    fn choose(&mut self, state: &AcquisitionState) -> Result<usize>;
}

impl AcquisitionPolicy for &PolicyNetwork {
    fn choose(&mut self, state: &AcquisitionState) -> Result<usize> {
        self.action(state)
    }
}

/// Uniformly random among unacquired features, seeded per sample.
#[derive(Debug, Clone)]
pub struct RandomPolicy {
    seed: u64,
    feature_count: usize,
    rng: ChaCha8Rng,
}

impl RandomPolicy {
    pub fn new(seed: u64, feature_count: usize) -> Self {
        RandomPolicy { seed, feature_count, rng: rng_for(seed, Purpose::Evaluation, &[]) }
    }
}

impl AcquisitionPolicy for RandomPolicy {
    fn begin(&mut self, sample: usize) -> Result<()> {
        self.rng = rng_for(self.seed, Purpose::Evaluation, &[sample as u64]);
        Ok(())
    }

    fn choose(&mut self, state: &AcquisitionState) -> Result<usize> {
        let missing: Vec<usize> = state.acquired().missing(self.feature_count).collect();
        if missing.is_empty() {
            return Err(Error::Terminal);
        }
        Ok(missing[self.rng.gen_range(0..missing.len())])
    }
}

/// Cheapest unacquired feature first; ties go to the lowest index.
#[derive(Debug, Clone)]
pub struct GreedyCheapest {
    costs: Vec<f64>,
}

impl GreedyCheapest {
    pub fn new(dataset: &Dataset) -> Self {
        GreedyCheapest { costs: dataset.schema.features.iter().map(|f| f.cost).collect() }
    }
}

impl AcquisitionPolicy for GreedyCheapest {
    fn choose(&mut self, state: &AcquisitionState) -> Result<usize> {
        let scores: Vec<f64> = self.costs.iter().map(|c| -c).collect();
        policy_action(&scores, state.acquired())
    }
}

/// Replays acquisition orders from a trajectory file.
#[derive(Debug, Clone)]
pub struct TracePolicy {
    orders: HashMap<usize, Vec<usize>>,
    current: Vec<usize>,
}

impl TracePolicy {
    pub fn new(orders: HashMap<usize, Vec<usize>>) -> Self {
        TracePolicy { orders, current: Vec::new() }
    }

    pub fn from_trajectories(trajectories: &[super::AcquisitionTrajectory]) -> Self {
        Self::new(trajectories.iter().map(|t| (t.sample, t.steps.iter().map(|s| s.action).collect())).collect())
    }
}

impl AcquisitionPolicy for TracePolicy {
    fn begin(&mut self, sample: usize) -> Result<()> {
        self.current = self
            .orders
            .get(&sample)
            .cloned()
            .ok_or_else(|| Error::InvalidArgument(format!("trace has no sample {sample}")))?;
        Ok(())
    }

    fn choose(&mut self, state: &AcquisitionState) -> Result<usize> {
        let action = *self.current.get(state.step()).ok_or_else(|| {
            Error::InvalidArgument(format!(
                "trace for sample {} stops after {} steps",
                state.sample_index,
                self.current.len()
            ))
        })?;
        Ok(action)
    }
}

/// One acquisition inside a trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryStep {
    pub action: usize,
    pub cumulative_cost: f64,
    /// Argmax of the classifier's probabilities after the acquisition.
    pub predicted: usize,
    /// Probability of `predicted`.
    pub probability: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AcquisitionTrajectory {
    pub sample: usize,
    pub label: usize,
    pub steps: Vec<TrajectoryStep>,
}

impl AcquisitionTrajectory {
    /// Prediction at the largest visited cost not above `cost`.
    pub fn prediction_at(&self, cost: f64) -> Option<usize> {
        let n = self.steps.partition_point(|s| s.cumulative_cost <= cost + 1e-9);
        n.checked_sub(1).map(|i| self.steps[i].predicted)
    }
}

/// Plays a full episode for `sample`, recording the classifier's prediction
/// after every acquisition.
pub fn rollout_policy(
    policy: &mut dyn AcquisitionPolicy,
    dataset: &Dataset,
    sample: usize,
    model: &dyn ProbabilityModel,
) -> Result<AcquisitionTrajectory> {
    let mut state = AcquisitionState::empty(dataset, sample)?;
    policy.begin(sample)?;
    let mut steps = Vec::with_capacity(dataset.schema.feature_count());
    while !state.is_terminal(dataset) {
        let action = policy.choose(&state)?;
        state = state.acquire(dataset, action)?;
        let probs = model.class_probabilities(&state)?;
        let predicted =
            crate::so_mcts::first_argmax(probs.iter().copied()).ok_or(Error::Empty("class probabilities"))?;
        steps.push(TrajectoryStep {
            action,
            cumulative_cost: state.cumulative_cost(),
            predicted,
            probability: probs[predicted],
        });
    }
    Ok(AcquisitionTrajectory { sample, label: dataset.label(sample), steps })
}

/// Trajectories for every sample in `samples`.
pub fn evaluate_policy(
    policy: &mut dyn AcquisitionPolicy,
    dataset: &Dataset,
    samples: &[usize],
    model: &dyn ProbabilityModel,
) -> Result<Vec<AcquisitionTrajectory>> {
    samples.iter().map(|&s| rollout_policy(policy, dataset, s, model)).collect()
}
