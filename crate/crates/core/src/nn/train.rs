use log::trace;
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::{softmax, Network};
use crate::error::{Error, Result};
use crate::rng::{rng_for, Purpose};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Loss {
    /// Softmax followed by negative log-likelihood of a class.
    CrossEntropy,
    /// Mean squared error against score targets.
    Mse,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Target {
    Class(usize),
    Scores(Vec<f64>),
    /// Squared error on a single output; the others get no gradient.
    Output {
        index: usize,
        value: f64,
    },
}

impl Loss {
    /// Loss value and its gradient with respect to the network output.
    pub fn evaluate(&self, out: &[f64], target: &Target) -> Result<(f64, Vec<f64>)> {
        match (self, target) {
            (Loss::CrossEntropy, Target::Class(c)) => {
                if *c >= out.len() {
                    return Err(Error::Dimension { expected: out.len(), actual: *c + 1 });
                }
                let mut p = softmax(out);
                let loss = -p[*c].max(f64::MIN_POSITIVE).ln();
                p[*c] -= 1.0;
                Ok((loss, p))
            }
            (Loss::Mse, Target::Scores(t)) => {
                if t.len() != out.len() {
                    return Err(Error::Dimension { expected: out.len(), actual: t.len() });
                }
                let n = out.len() as f64;
                let loss = out.iter().zip(t).map(|(o, t)| (o - t) * (o - t)).sum::<f64>() / n;
                let grad = out.iter().zip(t).map(|(o, t)| 2.0 * (o - t) / n).collect();
                Ok((loss, grad))
            }
            (Loss::Mse, Target::Output { index, value }) => {
                if *index >= out.len() {
                    return Err(Error::Dimension { expected: out.len(), actual: *index + 1 });
                }
                let diff = out[*index] - value;
                let mut grad = vec![0.0; out.len()];
                grad[*index] = 2.0 * diff;
                Ok((diff * diff, grad))
            }
            _ => Err(Error::InvalidArgument(format!("target {target:?} does not fit loss {self:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    /// Mini-batch size; 0 means full batch.
    pub batch_size: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig { learning_rate: 1e-2, epochs: 100, batch_size: 0, seed: 0 }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::InvalidArgument(format!("learning rate must be positive, got {}", self.learning_rate)));
        }
        Ok(())
    }
}

/// Adam optimizer state for one network.
#[derive(Debug, Clone)]
pub struct Adam {
    learning_rate: f64,
    beta1: f64,
    beta2: f64,
    eps: f64,
    step: i32,
    m: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
}

impl Adam {
    pub fn new(net: &Network, learning_rate: f64) -> Self {
        Adam { learning_rate, beta1: 0.9, beta2: 0.999, eps: 1e-8, step: 0, m: net.zero_grads(), v: net.zero_grads() }
    }

    /// Applies gradients (already averaged over the batch).
    pub fn step(&mut self, net: &mut Network, grads: &[Vec<f64>]) {
        self.step += 1;
        let c1 = 1.0 - self.beta1.powi(self.step);
        let c2 = 1.0 - self.beta2.powi(self.step);
        for (((p, g), m), v) in net.params_mut().into_iter().zip(grads).zip(&mut self.m).zip(&mut self.v) {
            for j in 0..p.len() {
                m[j] = self.beta1 * m[j] + (1.0 - self.beta1) * g[j];
                v[j] = self.beta2 * v[j] + (1.0 - self.beta2) * g[j] * g[j];
                let mh = m[j] / c1;
                let vh = v[j] / c2;
                p[j] -= self.learning_rate * mh / (vh.sqrt() + self.eps);
            }
        }
    }
}

/// Trains `net` with Adam; returns the mean loss of every epoch.
pub fn fit(
    net: &mut Network,
    inputs: &[Vec<f64>],
    targets: &[Target],
    loss: Loss,
    config: &TrainConfig,
) -> Result<Vec<f64>> {
    config.validate()?;
    if inputs.is_empty() {
        return Err(Error::Empty("training set"));
    }
    if inputs.len() != targets.len() {
        return Err(Error::Dimension { expected: inputs.len(), actual: targets.len() });
    }
    if let Some(bad) = inputs.iter().find(|x| x.len() != net.input_len()) {
        return Err(Error::Dimension { expected: net.input_len(), actual: bad.len() });
    }
    let n = inputs.len();
    let batch = if config.batch_size == 0 { n } else { config.batch_size.min(n) };
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = rng_for(config.seed, Purpose::PolicyTrain, &[]);
    let mut adam = Adam::new(net, config.learning_rate);
    let mut history = Vec::with_capacity(config.epochs);
    let mut grads = net.zero_grads();
    for epoch in 0..config.epochs {
        if batch < n {
            order.shuffle(&mut rng);
        }
        let mut total = 0.0;
        for chunk in order.chunks(batch) {
            grads.iter_mut().for_each(|g| g.iter_mut().for_each(|v| *v = 0.0));
            for &i in chunk {
                let acts = net.forward_trace(&inputs[i]);
                let (value, grad_out) = loss.evaluate(acts.last().unwrap(), &targets[i])?;
                total += value;
                net.backward(&acts, &grad_out, &mut grads);
            }
            let scale = 1.0 / chunk.len() as f64;
            grads.iter_mut().for_each(|g| g.iter_mut().for_each(|v| *v *= scale));
            adam.step(net, &grads);
        }
        let mean = total / n as f64;
        if !mean.is_finite() {
            return Err(Error::Divergence { epoch, loss: mean });
        }
        trace!("epoch {epoch}: loss {mean:.6}");
        history.push(mean);
    }
    Ok(history)
}
