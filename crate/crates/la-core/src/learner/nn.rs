//! Minimal dense feedforward network with ReLU hidden layers and a linear
//! output, plus exact backpropagation. Weights are plain `f64` so forward
//! passes are bit-reproducible across runs.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Fully-connected network. `weights[l]` is row-major `[out x in]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    dims: Vec<usize>,
    weights: Vec<Vec<f64>>,
    biases: Vec<Vec<f64>>,
}

/// Activations recorded during a forward pass, consumed by `backward`.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    /// `activations[0]` is the input; the last entry is the linear output.
    pub activations: Vec<Vec<f64>>,
}

/// Parameter gradients matching the network layout.
#[derive(Debug, Clone)]
pub struct Gradients {
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<Vec<f64>>,
}

impl Gradients {
    pub fn zeros_like(net: &Mlp) -> Self {
        Self {
            weights: net.weights.iter().map(|w| vec![0.0; w.len()]).collect(),
            biases: net.biases.iter().map(|b| vec![0.0; b.len()]).collect(),
        }
    }

    pub fn scale(&mut self, s: f64) {
        for w in &mut self.weights {
            for v in w.iter_mut() {
                *v *= s;
            }
        }
        for b in &mut self.biases {
            for v in b.iter_mut() {
                *v *= s;
            }
        }
    }
}

impl Mlp {
    /// Xavier-uniform initialisation from a seeded stream.
    pub fn new(dims: &[usize], rng: &mut ChaCha8Rng) -> Self {
        assert!(dims.len() >= 2, "need at least input and output dims");
        let mut weights = Vec::new();
        let mut biases = Vec::new();
        for l in 0..dims.len() - 1 {
            let (fan_in, fan_out) = (dims[l], dims[l + 1]);
            let limit = libm::sqrt(6.0 / (fan_in + fan_out) as f64);
            let w: Vec<f64> = (0..fan_in * fan_out)
                .map(|_| rng.random_range(-limit..limit))
                .collect();
            weights.push(w);
            biases.push(vec![0.0; fan_out]);
        }
        Self {
            dims: dims.to_vec(),
            weights,
            biases,
        }
    }

    /// Build directly from raw parameters (checkpoint loading).
    pub fn from_parts(dims: Vec<usize>, weights: Vec<Vec<f64>>, biases: Vec<Vec<f64>>) -> Self {
        assert_eq!(weights.len(), dims.len() - 1);
        assert_eq!(biases.len(), dims.len() - 1);
        for l in 0..weights.len() {
            assert_eq!(weights[l].len(), dims[l] * dims[l + 1]);
            assert_eq!(biases[l].len(), dims[l + 1]);
        }
        Self {
            dims,
            weights,
            biases,
        }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn input_dim(&self) -> usize {
        self.dims[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.dims.last().unwrap()
    }

    pub fn layer_weights(&self, l: usize) -> &[f64] {
        &self.weights[l]
    }

    pub fn layer_biases(&self, l: usize) -> &[f64] {
        &self.biases[l]
    }

    pub fn layer_weights_mut(&mut self, l: usize) -> &mut [f64] {
        &mut self.weights[l]
    }

    pub fn layer_biases_mut(&mut self, l: usize) -> &mut [f64] {
        &mut self.biases[l]
    }

    pub fn copy_from(&mut self, other: &Mlp) {
        assert_eq!(self.dims, other.dims);
        self.weights.clone_from(&other.weights);
        self.biases.clone_from(&other.biases);
    }

    /// Plain forward pass.
    pub fn forward(&self, input: &[f64]) -> Vec<f64> {
        self.forward_cached(input).1
    }

    /// Forward pass keeping activations for backprop. Returns (cache, output).
    pub fn forward_cached(&self, input: &[f64]) -> (ForwardCache, Vec<f64>) {
        assert_eq!(input.len(), self.dims[0], "input width");
        let layers = self.weights.len();
        let mut activations = Vec::with_capacity(layers + 1);
        activations.push(input.to_vec());
        for l in 0..layers {
            let (fan_in, fan_out) = (self.dims[l], self.dims[l + 1]);
            let prev = &activations[l];
            let w = &self.weights[l];
            let mut out = self.biases[l].clone();
            for o in 0..fan_out {
                let row = &w[o * fan_in..(o + 1) * fan_in];
                let mut acc = 0.0;
                for i in 0..fan_in {
                    acc += row[i] * prev[i];
                }
                out[o] += acc;
            }
            if l + 1 < layers {
                for v in out.iter_mut() {
                    if *v < 0.0 {
                        *v = 0.0;
                    }
                }
            }
            activations.push(out);
        }
        let output = activations.last().unwrap().clone();
        (ForwardCache { activations }, output)
    }

    /// Backpropagate `d_loss/d_output` through the cached pass, accumulating
    /// into `grads`.
    pub fn backward(&self, cache: &ForwardCache, d_output: &[f64], grads: &mut Gradients) {
        let layers = self.weights.len();
        let mut delta = d_output.to_vec();
        for l in (0..layers).rev() {
            let (fan_in, fan_out) = (self.dims[l], self.dims[l + 1]);
            let below = &cache.activations[l];
            for o in 0..fan_out {
                let d = delta[o];
                if d != 0.0 {
                    let grow = &mut grads.weights[l][o * fan_in..(o + 1) * fan_in];
                    for i in 0..fan_in {
                        grow[i] += d * below[i];
                    }
                    grads.biases[l][o] += d;
                }
            }
            if l > 0 {
                let mut next = vec![0.0; fan_in];
                let w = &self.weights[l];
                for o in 0..fan_out {
                    let d = delta[o];
                    if d != 0.0 {
                        let row = &w[o * fan_in..(o + 1) * fan_in];
                        for i in 0..fan_in {
                            next[i] += d * row[i];
                        }
                    }
                }
                // ReLU gate of the layer below.
                for (i, v) in next.iter_mut().enumerate() {
                    if cache.activations[l][i] <= 0.0 {
                        *v = 0.0;
                    }
                }
                delta = next;
            }
        }
    }

    /// One SGD step: `p -= lr * g`.
    pub fn apply_gradients(&mut self, grads: &Gradients, lr: f64) {
        for l in 0..self.weights.len() {
            for (p, g) in self.weights[l].iter_mut().zip(&grads.weights[l]) {
                *p -= lr * g;
            }
            for (p, g) in self.biases[l].iter_mut().zip(&grads.biases[l]) {
                *p -= lr * g;
            }
        }
    }

    /// Total number of scalar parameters.
    pub fn param_count(&self) -> usize {
        self.weights.iter().map(|w| w.len()).sum::<usize>()
            + self.biases.iter().map(|b| b.len()).sum::<usize>()
    }

    /// Flat parameter accessor: weights of each layer, then its biases.
    pub fn param(&self, mut idx: usize) -> f64 {
        for l in 0..self.weights.len() {
            if idx < self.weights[l].len() {
                return self.weights[l][idx];
            }
            idx -= self.weights[l].len();
            if idx < self.biases[l].len() {
                return self.biases[l][idx];
            }
            idx -= self.biases[l].len();
        }
        panic!("parameter index out of range");
    }

    pub fn set_param(&mut self, mut idx: usize, value: f64) {
        for l in 0..self.weights.len() {
            if idx < self.weights[l].len() {
                self.weights[l][idx] = value;
                return;
            }
            idx -= self.weights[l].len();
            if idx < self.biases[l].len() {
                self.biases[l][idx] = value;
                return;
            }
            idx -= self.biases[l].len();
        }
        panic!("parameter index out of range");
    }

    /// Gradient of `param(idx)` from a `Gradients` bundle.
    pub fn grad_at(grads: &Gradients, mut idx: usize) -> f64 {
        for l in 0..grads.weights.len() {
            if idx < grads.weights[l].len() {
                return grads.weights[l][idx];
            }
            idx -= grads.weights[l].len();
            if idx < grads.biases[l].len() {
                return grads.biases[l][idx];
            }
            idx -= grads.biases[l].len();
        }
        panic!("parameter index out of range");
    }
}

/// Numerically stable softmax.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|v| libm::exp(v - max)).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}
