use std::collections::VecDeque;
use std::path::Path;

use rand::seq::index::sample as sample_indices;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::policy::AcquisitionPolicy;
use crate::checkpoint::Checkpoint;
use crate::classifier::Encoder;
use crate::datamodel::Dataset;
use crate::environment::{AcquisitionState, AdaptiveModel, Environment, RewardTarget};
use crate::error::{Error, Result};
use crate::feature_set::FeatureSet;
use crate::nn::{Adam, Loss, Network, NetworkSpec, Target};
use crate::policy_net::policy_action;
use crate::rng::{rng_for, Purpose};

const CHECKPOINT_KIND: &str = "dqn";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DqnConfig {
    /// Episodes to play, cycling through the training samples.
    pub episodes: usize,
    pub batch_size: usize,
    /// Environment steps between target-network syncs.
    pub update_frequency: usize,
    pub gamma: f64,
    pub epsilon_start: f64,
    pub epsilon_min: f64,
    /// Multiplies epsilon after every episode.
    pub epsilon_decay: f64,
    pub learning_rate: f64,
    pub buffer_capacity: usize,
    pub network: NetworkSpec,
    pub seed: u64,
}

impl Default for DqnConfig {
    fn default() -> Self {
        DqnConfig {
            episodes: 100,
            batch_size: 6,
            update_frequency: 6,
            gamma: 0.5,
            epsilon_start: 1.0,
            epsilon_min: 0.01,
            epsilon_decay: 0.99,
            learning_rate: 1e-6,
            buffer_capacity: 10_000,
            network: NetworkSpec::small_feedforward(),
            seed: 0,
        }
    }
}

impl DqnConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidArgument(format!("dqn: {m}")));
        if self.episodes == 0 || self.batch_size == 0 || self.update_frequency == 0 {
            return bad("episodes, batch size and update frequency must be positive");
        }
        if !(0.0..=1.0).contains(&self.gamma) {
            return bad("gamma must lie in [0, 1]");
        }
        if !(0.0..=1.0).contains(&self.epsilon_start)
            || !(0.0..=1.0).contains(&self.epsilon_min)
            || !(0.0..=1.0).contains(&self.epsilon_decay)
        {
            return bad("epsilon parameters must lie in [0, 1]");
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad("learning rate must be positive");
        }
        if self.buffer_capacity < self.batch_size {
            return bad("replay buffer smaller than a batch");
        }
        self.network.validate()
    }
}

/// Greedy policy over learned action values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DqnPolicy {
    pub encoder: Encoder,
    pub network: Network,
}

impl DqnPolicy {
    pub fn q_values(&self, state: &AcquisitionState) -> Result<Vec<f64>> {
        self.network.forward(&self.encoder.encode(state))
    }

    pub fn action(&self, state: &AcquisitionState) -> Result<usize> {
        policy_action(&self.q_values(state)?, state.acquired())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        Checkpoint::new(CHECKPOINT_KIND, self.encoder.schema.hash(), self).save(path)
    }

    pub fn load(path: impl AsRef<Path>, schema_hash: &str) -> Result<Self> {
        Checkpoint::load(path, CHECKPOINT_KIND, schema_hash)
    }
}

impl AcquisitionPolicy for &DqnPolicy {
    fn choose(&mut self, state: &AcquisitionState) -> Result<usize> {
        self.action(state)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Transition {
    pub state: Vec<f64>,
    pub action: usize,
    pub reward: f64,
    pub next_state: Vec<f64>,
    pub next_acquired: FeatureSet,
    pub done: bool,
}

/// `r + γ · max Q_target(s', a')` over unacquired `a'`, or `r` at episode end.
pub(crate) fn q_target(target: &Network, t: &Transition, gamma: f64) -> Result<f64> {
    if t.done || gamma == 0.0 {
        return Ok(t.reward);
    }
    let q = target.forward(&t.next_state)?;
    let best = policy_action(&q, &t.next_acquired)?;
    Ok(t.reward + gamma * q[best])
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct DqnReport {
    /// Mean batch loss per episode (episodes without updates are skipped).
    pub episode_losses: Vec<f64>,
    pub gradient_steps: usize,
    pub final_epsilon: f64,
}

/// Experience-replay Q-learning on the acquisition process.
///
/// One gradient step per environment step once the buffer holds a batch; the
/// target network is synced every `update_frequency` environment steps.
pub fn dqn_train(
    dataset: &Dataset,
    samples: &[usize],
    model: &mut dyn AdaptiveModel,
    target: RewardTarget,
    encoder: Encoder,
    config: &DqnConfig,
) -> Result<(DqnPolicy, DqnReport)> {
    config.validate()?;
    if samples.is_empty() {
        return Err(Error::Empty("training samples"));
    }
    let d = dataset.schema.feature_count();
    let mut init_rng = rng_for(config.seed, Purpose::PolicyInit, &[1]);
    let mut online = config.network.build(encoder.input_len(), d, &mut init_rng)?;
    let mut frozen = online.clone();
    let mut adam = Adam::new(&online, config.learning_rate);
    let mut rng = rng_for(config.seed, Purpose::Dqn, &[]);
    let mut buffer: VecDeque<Transition> = VecDeque::with_capacity(config.buffer_capacity);
    let mut epsilon = config.epsilon_start;
    let mut env_steps = 0usize;
    let mut report = DqnReport::default();

    for episode in 0..config.episodes {
        let sample = samples[episode % samples.len()];
        let mut visited = Vec::with_capacity(d + 1);
        let mut losses = Vec::new();
        {
            let env = Environment::new(dataset, &*model, target);
            let mut state = env.reset(sample)?;
            visited.push(state.clone());
            while !state.is_terminal(dataset) {
                let encoded = encoder.encode(&state);
                let action = if rng.gen::<f64>() < epsilon {
                    let missing: Vec<usize> = state.acquired().missing(d).collect();
                    missing[rng.gen_range(0..missing.len())]
                } else {
                    policy_action(&online.forward(&encoded)?, state.acquired())?
                };
                let out = env.step(&state, action)?;
                let done = out.next_state.is_terminal(dataset);
                if buffer.len() == config.buffer_capacity {
                    buffer.pop_front();
                }
                buffer.push_back(Transition {
                    state: encoded,
                    action,
                    reward: out.scalar_reward,
                    next_state: encoder.encode(&out.next_state),
                    next_acquired: *out.next_state.acquired(),
                    done,
                });
                state = out.next_state;
                visited.push(state.clone());
                env_steps += 1;

                if buffer.len() >= config.batch_size {
                    let batch = sample_indices(&mut rng, buffer.len(), config.batch_size);
                    let mut grads = online.zero_grads();
                    let mut loss = 0.0;
                    for i in batch.iter() {
                        let t = &buffer[i];
                        let y = q_target(&frozen, t, config.gamma)?;
                        let (l, g) =
                            online.gradient(&t.state, &Loss::Mse, &Target::Output { index: t.action, value: y })?;
                        loss += l;
                        for (acc, gi) in grads.iter_mut().zip(&g) {
                            acc.iter_mut().zip(gi).for_each(|(a, b)| *a += b);
                        }
                    }
                    let scale = 1.0 / config.batch_size as f64;
                    grads.iter_mut().flatten().for_each(|g| *g *= scale);
                    loss *= scale;
                    if !loss.is_finite() {
                        return Err(Error::Divergence { epoch: episode, loss });
                    }
                    adam.step(&mut online, &grads);
                    report.gradient_steps += 1;
                    losses.push(loss);
                }
                if env_steps.is_multiple_of(config.update_frequency) {
                    frozen = online.clone();
                }
            }
        }
        if !losses.is_empty() {
            report.episode_losses.push(losses.iter().sum::<f64>() / losses.len() as f64);
        }
        model.end_sample(&visited)?;
        epsilon = (epsilon * config.epsilon_decay).max(config.epsilon_min);
        log::trace!("dqn episode {episode}: epsilon {epsilon:.3}");
    }
    report.final_epsilon = epsilon;
    Ok((DqnPolicy { encoder, network: online }, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifier::ImputePolicy;
    use crate::datamodel::{FeatureSchema, FeatureSpec};
    use crate::environment::FnModel;

    fn toy(costs: &[f64]) -> Dataset {
        let features =
            costs.iter().enumerate().map(|(i, &c)| FeatureSpec::categorical(format!("f{i}"), 2).with_cost(c)).collect();
        let schema = FeatureSchema::new(features, 2).unwrap();
        let values = (0..6).map(|i| vec![(i % 2) as f64; costs.len()]).collect();
        Dataset::new("dqn", schema, values, (0..6).map(|i| i % 2).collect()).unwrap()
    }

    fn encoder(ds: &Dataset) -> Encoder {
        Encoder::new(ds.schema.clone(), ImputePolicy::constant(ds.schema.total_cost()))
    }

    #[test]
    fn zero_gamma_targets_are_rewards() {
        let net = NetworkSpec::Linear.build(3, 2, &mut rng_for(0, Purpose::Dqn, &[])).unwrap();
        let t = Transition {
            state: vec![0.0; 3],
            action: 0,
            reward: 2.5,
            next_state: vec![1.0; 3],
            next_acquired: FeatureSet::from_indices([0]),
            done: false,
        };
        assert_eq!(q_target(&net, &t, 0.0).unwrap(), 2.5);
        let q = net.forward(&t.next_state).unwrap();
        assert!((q_target(&net, &t, 0.5).unwrap() - (2.5 + 0.5 * q[1])).abs() < 1e-12);
        assert_eq!(q_target(&net, &Transition { done: true, ..t }, 0.9).unwrap(), 2.5);
    }

    #[test]
    fn fully_decayed_policy_is_greedy() {
        let ds = toy(&[1.0, 7.0]);
        let cfg = DqnConfig {
            episodes: 3,
            epsilon_start: 0.0,
            epsilon_min: 0.0,
            network: NetworkSpec::Linear,
            learning_rate: 1e-3,
            ..DqnConfig::default()
        };
        let mut m = FnModel(|_: &AcquisitionState| vec![0.5, 0.5]);
        let (p, report) = dqn_train(&ds, &[0, 1], &mut m, RewardTarget::TrueLabel, encoder(&ds), &cfg).unwrap();
        assert_eq!(report.final_epsilon, 0.0);
        let s = AcquisitionState::empty(&ds, 0).unwrap();
        let q = p.q_values(&s).unwrap();
        assert_eq!(p.action(&s).unwrap(), policy_action(&q, &FeatureSet::empty()).unwrap());
    }

    #[test]
    fn learns_the_dominant_feature() {
        let ds = toy(&[1.0, 7.0]);
        let mut m = FnModel(|s: &AcquisitionState| {
            if s.acquired().contains(0) {
                let mut v = vec![0.05; 2];
                v[s.values()[0] as usize] = 0.95;
                v
            } else {
                vec![0.5, 0.5]
            }
        });
        let cfg = DqnConfig {
            episodes: 200,
            batch_size: 8,
            update_frequency: 8,
            gamma: 0.5,
            epsilon_decay: 0.97,
            learning_rate: 1e-2,
            network: NetworkSpec::Feedforward { hidden: vec![8] },
            seed: 4,
            ..DqnConfig::default()
        };
        let (p, _) = dqn_train(&ds, &[0, 1, 2, 3, 4, 5], &mut m, RewardTarget::TrueLabel, encoder(&ds), &cfg).unwrap();
        let first: Vec<usize> = (0..6).map(|i| p.action(&AcquisitionState::empty(&ds, i).unwrap()).unwrap()).collect();
        let hits = first.iter().filter(|&&a| a == 0).count();
        assert!(hits as f64 / 6.0 >= 0.9, "{first:?}");
    }

    #[test]
    fn invalid_config() {
        assert!(DqnConfig { batch_size: 0, ..DqnConfig::default() }.validate().is_err());
        assert!(DqnConfig { gamma: 1.5, ..DqnConfig::default() }.validate().is_err());
    }
}
