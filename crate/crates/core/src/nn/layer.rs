use rand::Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "layer", rename_all = "snake_case")]
pub enum Layer {
    Dense(Dense),
    Relu,
    Conv2d(Conv2d),
    MaxPool2d(MaxPool2d),
}

impl Layer {
    /// Fixed input width, if the layer has one.
    pub fn input_len(&self) -> Option<usize> {
        match self {
            Layer::Dense(d) => Some(d.inputs),
            Layer::Relu => None,
            Layer::Conv2d(c) => Some(c.in_channels * c.height * c.width),
            Layer::MaxPool2d(p) => Some(p.channels * p.height * p.width),
        }
    }

    pub fn output_len(&self, input_len: usize) -> usize {
        match self {
            Layer::Dense(d) => d.outputs,
            Layer::Relu => input_len,
            Layer::Conv2d(c) => c.out_channels * c.height * c.width,
            Layer::MaxPool2d(p) => p.channels * (p.height / p.pool) * (p.width / p.pool),
        }
    }

    pub fn param_count(&self) -> usize {
        match self {
            Layer::Dense(_) | Layer::Conv2d(_) => 2,
            _ => 0,
        }
    }

    pub fn params(&self) -> Vec<&[f64]> {
        match self {
            Layer::Dense(d) => vec![&d.weights, &d.bias],
            Layer::Conv2d(c) => vec![&c.weights, &c.bias],
            _ => Vec::new(),
        }
    }

    pub fn params_mut(&mut self) -> Vec<&mut Vec<f64>> {
        match self {
            Layer::Dense(d) => vec![&mut d.weights, &mut d.bias],
            Layer::Conv2d(c) => vec![&mut c.weights, &mut c.bias],
            _ => Vec::new(),
        }
    }

    pub fn forward(&self, x: &[f64]) -> Vec<f64> {
        match self {
            Layer::Dense(d) => d.forward(x),
            Layer::Relu => x.iter().map(|&v| v.max(0.0)).collect(),
            Layer::Conv2d(c) => c.forward(x),
            Layer::MaxPool2d(p) => p.forward(x),
        }
    }

    /// Returns the input gradient; adds parameter gradients into `grads`.
    pub fn backward(&self, input: &[f64], output: &[f64], grad_out: &[f64], grads: &mut [Vec<f64>]) -> Vec<f64> {
        match self {
            Layer::Dense(d) => d.backward(input, grad_out, grads),
            Layer::Relu => output.iter().zip(grad_out).map(|(&y, &g)| if y > 0.0 { g } else { 0.0 }).collect(),
            Layer::Conv2d(c) => c.backward(input, grad_out, grads),
            Layer::MaxPool2d(p) => p.backward(input, grad_out),
        }
    }
}

/// Fully connected layer; `weights` is `outputs x inputs`, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dense {
    pub inputs: usize,
    pub outputs: usize,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl Dense {
    pub fn new<R: Rng>(inputs: usize, outputs: usize, rng: &mut R) -> Self {
        let limit = (6.0 / (inputs + outputs) as f64).sqrt();
        let weights = (0..inputs * outputs).map(|_| rng.gen_range(-limit..limit)).collect();
        Dense { inputs, outputs, weights, bias: vec![0.0; outputs] }
    }

    fn forward(&self, x: &[f64]) -> Vec<f64> {
        self.weights
            .chunks_exact(self.inputs)
            .zip(&self.bias)
            .map(|(row, b)| b + row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>())
            .collect()
    }

    fn backward(&self, x: &[f64], grad_out: &[f64], grads: &mut [Vec<f64>]) -> Vec<f64> {
        let mut grad_in = vec![0.0; self.inputs];
        let (gw, gb) = grads.split_at_mut(1);
        for (o, &g) in grad_out.iter().enumerate() {
            if g == 0.0 {
                continue;
            }
            gb[0][o] += g;
            let row = &self.weights[o * self.inputs..(o + 1) * self.inputs];
            let grow = &mut gw[0][o * self.inputs..(o + 1) * self.inputs];
            for i in 0..self.inputs {
                grow[i] += g * x[i];
                grad_in[i] += g * row[i];
            }
        }
        grad_in
    }
}

/// Stride-1 2-D convolution with zero "same" padding.
///
/// Activations are channel-major (`c, y, x`); `weights` is
/// `out x in x kernel x kernel`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Conv2d {
    pub in_channels: usize,
    pub out_channels: usize,
    pub kernel: usize,
    pub dilation: usize,
    pub height: usize,
    pub width: usize,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl Conv2d {
    pub fn new<R: Rng>(
        in_channels: usize,
        out_channels: usize,
        kernel: usize,
        dilation: usize,
        height: usize,
        width: usize,
        rng: &mut R,
    ) -> Self {
        let fan_in = in_channels * kernel * kernel;
        let limit = (6.0 / fan_in as f64).sqrt();
        let weights = (0..out_channels * fan_in).map(|_| rng.gen_range(-limit..limit)).collect();
        Conv2d { in_channels, out_channels, kernel, dilation, height, width, weights, bias: vec![0.0; out_channels] }
    }

    fn pad(&self) -> isize {
        (self.dilation * (self.kernel - 1) / 2) as isize
    }

    /// Calls `f(out_index, in_index, weight_index)` for every valid tap.
    #[inline]
    fn for_each_tap(&self, mut f: impl FnMut(usize, usize, usize)) {
        let (h, w, k) = (self.height as isize, self.width as isize, self.kernel);
        let pad = self.pad();
        let plane = self.height * self.width;
        for o in 0..self.out_channels {
            for i in 0..self.in_channels {
                for ky in 0..k {
                    let dy = (ky * self.dilation) as isize - pad;
                    for kx in 0..k {
                        let dx = (kx * self.dilation) as isize - pad;
                        let widx = ((o * self.in_channels + i) * k + ky) * k + kx;
                        for y in 0..h {
                            let sy = y + dy;
                            if sy < 0 || sy >= h {
                                continue;
                            }
                            for x in 0..w {
                                let sx = x + dx;
                                if sx < 0 || sx >= w {
                                    continue;
                                }
                                let out = o * plane + (y * w + x) as usize;
                                let inp = i * plane + (sy * w + sx) as usize;
                                f(out, inp, widx);
                            }
                        }
                    }
                }
            }
        }
    }

    fn forward(&self, x: &[f64]) -> Vec<f64> {
        let plane = self.height * self.width;
        let mut out = vec![0.0; self.out_channels * plane];
        for (o, b) in self.bias.iter().enumerate() {
            out[o * plane..(o + 1) * plane].iter_mut().for_each(|v| *v = *b);
        }
        self.for_each_tap(|oi, ii, wi| out[oi] += self.weights[wi] * x[ii]);
        out
    }

    fn backward(&self, x: &[f64], grad_out: &[f64], grads: &mut [Vec<f64>]) -> Vec<f64> {
        let plane = self.height * self.width;
        let mut grad_in = vec![0.0; x.len()];
        let (gw, gb) = grads.split_at_mut(1);
        for o in 0..self.out_channels {
            gb[0][o] += grad_out[o * plane..(o + 1) * plane].iter().sum::<f64>();
        }
        let gw = &mut gw[0];
        self.for_each_tap(|oi, ii, wi| {
            let g = grad_out[oi];
            gw[wi] += g * x[ii];
            grad_in[ii] += g * self.weights[wi];
        });
        grad_in
    }
}

/// Non-overlapping max pooling; trailing rows/columns are dropped.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaxPool2d {
    pub channels: usize,
    pub height: usize,
    pub width: usize,
    pub pool: usize,
}

impl MaxPool2d {
    pub fn new(channels: usize, height: usize, width: usize, pool: usize) -> Self {
        MaxPool2d { channels, height, width, pool }
    }

    /// Input index of the maximum of each output cell (first max wins).
    fn argmax(&self, x: &[f64]) -> Vec<usize> {
        let (oh, ow) = (self.height / self.pool, self.width / self.pool);
        let mut idx = Vec::with_capacity(self.channels * oh * ow);
        for c in 0..self.channels {
            for y in 0..oh {
                for xx in 0..ow {
                    let mut best = usize::MAX;
                    let mut best_v = f64::NEG_INFINITY;
                    for py in 0..self.pool {
                        for px in 0..self.pool {
                            let i =
                                c * self.height * self.width + (y * self.pool + py) * self.width + xx * self.pool + px;
                            if best == usize::MAX || x[i] > best_v {
                                best = i;
                                best_v = x[i];
                            }
                        }
                    }
                    idx.push(best);
                }
            }
        }
        idx
    }

    fn forward(&self, x: &[f64]) -> Vec<f64> {
        self.argmax(x).into_iter().map(|i| x[i]).collect()
    }

    fn backward(&self, x: &[f64], grad_out: &[f64]) -> Vec<f64> {
        let mut grad_in = vec![0.0; x.len()];
        for (o, i) in self.argmax(x).into_iter().enumerate() {
            grad_in[i] += grad_out[o];
        }
        grad_in
    }
}
