//! Small dense/convolutional networks with hand-written backpropagation.
//!
//! Everything is `f64` and single-threaded so that training is bit-for-bit
//! reproducible from a seed.

mod layer;
mod train;

pub use layer::{Conv2d, Dense, Layer, MaxPool2d};
pub use train::{fit, Adam, Loss, Target, TrainConfig};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Architecture description, independent of input/output sizes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum NetworkSpec {
    /// A single affine layer.
    Linear,
    /// Dense hidden layers with ReLU, then a linear output layer.
    Feedforward { hidden: Vec<usize> },
    /// Conv/ReLU/max-pool stages over a square single-channel image, then a
    /// dense ReLU layer and a linear output layer. Convolutions use stride 1
    /// and zero "same" padding.
    Conv { side: usize, filters: Vec<usize>, kernel: usize, dilation: usize, pool: usize, dense: usize },
}

impl NetworkSpec {
    /// Three ReLU layers of 32/16/8 units.
    pub fn small_feedforward() -> Self {
        NetworkSpec::Feedforward { hidden: vec![32, 16, 8] }
    }

    /// 64/128/256 filters, kernel 3, dilation 2, pool 2, 512 dense units
    /// over a 28x28 image.
    pub fn mnist_conv() -> Self {
        NetworkSpec::Conv { side: 28, filters: vec![64, 128, 256], kernel: 3, dilation: 2, pool: 2, dense: 512 }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            NetworkSpec::Linear => Ok(()),
            NetworkSpec::Feedforward { hidden } => {
                if hidden.contains(&0) {
                    return Err(Error::InvalidArgument("layer sizes must be positive".into()));
                }
                Ok(())
            }
            NetworkSpec::Conv { side, filters, kernel, dilation, pool, dense } => {
                if *side == 0
                    || *kernel == 0
                    || kernel % 2 == 0
                    || *dilation == 0
                    || *pool == 0
                    || *dense == 0
                    || filters.is_empty()
                    || filters.contains(&0)
                {
                    return Err(Error::InvalidArgument(format!("invalid conv spec {self:?}")));
                }
                let mut s = *side;
                for _ in filters {
                    s /= pool;
                    if s == 0 {
                        return Err(Error::InvalidArgument(format!(
                            "conv spec pools a {side}x{side} image down to nothing"
                        )));
                    }
                }
                Ok(())
            }
        }
    }

    /// Builds a network with randomly initialized weights.
    pub fn build<R: Rng>(&self, inputs: usize, outputs: usize, rng: &mut R) -> Result<Network> {
        self.validate()?;
        if inputs == 0 || outputs == 0 {
            return Err(Error::InvalidArgument("network dimensions must be positive".into()));
        }
        let mut layers = Vec::new();
        match self {
            NetworkSpec::Linear => layers.push(Layer::Dense(Dense::new(inputs, outputs, rng))),
            NetworkSpec::Feedforward { hidden } => {
                let mut width = inputs;
                for &h in hidden {
                    layers.push(Layer::Dense(Dense::new(width, h, rng)));
                    layers.push(Layer::Relu);
                    width = h;
                }
                layers.push(Layer::Dense(Dense::new(width, outputs, rng)));
            }
            NetworkSpec::Conv { side, filters, kernel, dilation, pool, dense } => {
                if inputs != side * side {
                    return Err(Error::Dimension { expected: side * side, actual: inputs });
                }
                let (mut channels, mut s) = (1, *side);
                for &f in filters {
                    layers.push(Layer::Conv2d(Conv2d::new(channels, f, *kernel, *dilation, s, s, rng)));
                    layers.push(Layer::Relu);
                    layers.push(Layer::MaxPool2d(MaxPool2d::new(f, s, s, *pool)));
                    s /= pool;
                    channels = f;
                }
                layers.push(Layer::Dense(Dense::new(channels * s * s, *dense, rng)));
                layers.push(Layer::Relu);
                layers.push(Layer::Dense(Dense::new(*dense, outputs, rng)));
            }
        }
        Network::new(inputs, layers)
    }
}

/// A sequential stack of layers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Network {
    input_len: usize,
    layers: Vec<Layer>,
}

impl Network {
    pub fn new(input_len: usize, layers: Vec<Layer>) -> Result<Self> {
        let mut width = input_len;
        for layer in &layers {
            if let Some(expected) = layer.input_len() {
                if expected != width {
                    return Err(Error::Dimension { expected, actual: width });
                }
            }
            width = layer.output_len(width);
        }
        Ok(Network { input_len, layers })
    }

    pub fn input_len(&self) -> usize {
        self.input_len
    }

    pub fn output_len(&self) -> usize {
        self.layers.iter().fold(self.input_len, |w, l| l.output_len(w))
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn forward(&self, input: &[f64]) -> Result<Vec<f64>> {
        if input.len() != self.input_len {
            return Err(Error::Dimension { expected: self.input_len, actual: input.len() });
        }
        let mut x = input.to_vec();
        for layer in &self.layers {
            x = layer.forward(&x);
        }
        Ok(x)
    }

    /// Forward pass keeping every intermediate activation (input first).
    pub(crate) fn forward_trace(&self, input: &[f64]) -> Vec<Vec<f64>> {
        let mut acts = Vec::with_capacity(self.layers.len() + 1);
        acts.push(input.to_vec());
        for layer in &self.layers {
            let next = layer.forward(acts.last().unwrap());
            acts.push(next);
        }
        acts
    }

    /// Accumulates parameter gradients of a loss with output gradient
    /// `grad_out` into `grads` (one buffer per parameter tensor).
    pub(crate) fn backward(&self, acts: &[Vec<f64>], grad_out: &[f64], grads: &mut [Vec<f64>]) {
        let mut g = grad_out.to_vec();
        let mut slot = grads.len();
        for (i, layer) in self.layers.iter().enumerate().rev() {
            let n = layer.param_count();
            slot -= n;
            g = layer.backward(&acts[i], &acts[i + 1], &g, &mut grads[slot..slot + n]);
        }
    }

    /// Zeroed gradient buffers shaped like the parameters.
    pub fn zero_grads(&self) -> Vec<Vec<f64>> {
        self.params().iter().map(|p| vec![0.0; p.len()]).collect()
    }

    pub fn params(&self) -> Vec<&[f64]> {
        self.layers.iter().flat_map(|l| l.params()).collect()
    }

    pub fn params_mut(&mut self) -> Vec<&mut Vec<f64>> {
        self.layers.iter_mut().flat_map(|l| l.params_mut()).collect()
    }

    /// Sets every weight and bias to zero.
    pub fn zero_params(&mut self) {
        for p in self.params_mut() {
            p.iter_mut().for_each(|v| *v = 0.0);
        }
    }

    /// Gradient of `loss` at `input` with respect to every parameter.
    pub fn gradient(&self, input: &[f64], loss: &Loss, target: &Target) -> Result<(f64, Vec<Vec<f64>>)> {
        let acts = self.forward_trace(input);
        let out = acts.last().unwrap();
        let (value, grad_out) = loss.evaluate(out, target)?;
        let mut grads = self.zero_grads();
        self.backward(&acts, &grad_out, &mut grads);
        Ok((value, grads))
    }
}

/// Numerically stable softmax.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|&z| (z - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}
