//! Tiny dense network for FiLM conditioning: 1 input, two ReLU hidden
//! layers of width 4, scalar output. Forward and backward are written out
//! directly; the whole point of this crate's numeric core is to be
//! checkable against finite differences without an autodiff dependency.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub const HIDDEN_WIDTH: usize = 4;

/// Row-major dense layer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseLayer {
    pub in_dim: usize,
    pub out_dim: usize,
    /// out_dim × in_dim, row-major.
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl DenseLayer {
    fn new(in_dim: usize, out_dim: usize) -> Self {
        Self { in_dim, out_dim, weights: vec![0.0; in_dim * out_dim], bias: vec![0.0; out_dim] }
    }

    fn apply(&self, input: &[f64], out: &mut Vec<f64>) {
        out.clear();
        for r in 0..self.out_dim {
            let mut acc = self.bias[r];
            let row = &self.weights[r * self.in_dim..(r + 1) * self.in_dim];
            for (w, x) in row.iter().zip(input) {
                acc += w * x;
            }
            out.push(acc);
        }
    }

    pub fn parameter_count(&self) -> usize {
        self.weights.len() + self.bias.len()
    }
}

/// λ-conditioning net: scalar in, scalar out.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mlp {
    pub layers: Vec<DenseLayer>,
}

/// Pre-activations and post-activations saved by the forward pass.
pub struct MlpCache {
    /// inputs[k] is the input to layer k; inputs.last() is the final output.
    inputs: Vec<Vec<f64>>,
    pre_activations: Vec<Vec<f64>>,
}

/// Gradients mirroring the layer structure.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpGrads {
    pub layers: Vec<(Vec<f64>, Vec<f64>)>,
}

impl MlpGrads {
    pub fn zeros(mlp: &Mlp) -> Self {
        Self {
            layers: mlp
                .layers
                .iter()
                .map(|l| (vec![0.0; l.weights.len()], vec![0.0; l.bias.len()]))
                .collect(),
        }
    }

    pub fn scale(&mut self, factor: f64) {
        for (w, b) in &mut self.layers {
            for v in w.iter_mut().chain(b.iter_mut()) {
                *v *= factor;
            }
        }
    }
}

impl Mlp {
    /// Fresh conditioning net. Hidden weights are small-uniform with small
    /// positive biases so every unit starts active over inputs in [0, 1];
    /// the output layer starts near-constant at `output_bias`, which gives
    /// identity modulation at initialization (scale nets pass 1, shift
    /// nets pass 0).
    pub fn conditioning_net(rng: &mut ChaCha8Rng, output_bias: f64) -> Self {
        let mut layers = vec![
            DenseLayer::new(1, HIDDEN_WIDTH),
            DenseLayer::new(HIDDEN_WIDTH, HIDDEN_WIDTH),
            DenseLayer::new(HIDDEN_WIDTH, 1),
        ];
        let n = layers.len();
        for (k, layer) in layers.iter_mut().enumerate() {
            let last = k == n - 1;
            let scale = if last { 0.05 } else { 0.5 };
            for w in &mut layer.weights {
                *w = rng.random_range(-scale..scale);
            }
            for b in &mut layer.bias {
                *b = if last { output_bias } else { rng.random_range(0.0..0.1) };
            }
        }
        layers[n - 1].bias[0] = output_bias;
        Self { layers }
    }

    pub fn forward(&self, input: f64) -> f64 {
        self.forward_cached(input).0
    }

    pub fn forward_cached(&self, input: f64) -> (f64, MlpCache) {
        let mut inputs = vec![vec![input]];
        let mut pre_activations = Vec::with_capacity(self.layers.len());
        let mut buf = Vec::new();
        for (k, layer) in self.layers.iter().enumerate() {
            layer.apply(inputs.last().unwrap(), &mut buf);
            pre_activations.push(buf.clone());
            let last = k == self.layers.len() - 1;
            let activated: Vec<f64> = if last {
                buf.clone()
            } else {
                buf.iter().map(|&z| z.max(0.0)).collect()
            };
            inputs.push(activated);
        }
        (inputs.last().unwrap()[0], MlpCache { inputs, pre_activations })
    }

    /// Backpropagate a scalar output gradient; accumulates into `grads`.
    pub fn backward(&self, cache: &MlpCache, dout: f64, grads: &mut MlpGrads) {
        let mut delta = vec![dout];
        for k in (0..self.layers.len()).rev() {
            let layer = &self.layers[k];
            let input = &cache.inputs[k];
            let (gw, gb) = &mut grads.layers[k];
            for r in 0..layer.out_dim {
                gb[r] += delta[r];
                for c in 0..layer.in_dim {
                    gw[r * layer.in_dim + c] += delta[r] * input[c];
                }
            }
            if k == 0 {
                break;
            }
            let mut upstream = vec![0.0; layer.in_dim];
            for (r, d) in delta.iter().enumerate() {
                let row = &layer.weights[r * layer.in_dim..(r + 1) * layer.in_dim];
                for (u, w) in upstream.iter_mut().zip(row) {
                    *u += w * d;
                }
            }
            // through the ReLU of the previous layer
            for (u, &z) in upstream.iter_mut().zip(&cache.pre_activations[k - 1]) {
                if z <= 0.0 {
                    *u = 0.0;
                }
            }
            delta = upstream;
        }
    }

    pub fn step(&mut self, grads: &MlpGrads, lr: f64) {
        for (layer, (gw, gb)) in self.layers.iter_mut().zip(&grads.layers) {
            for (w, g) in layer.weights.iter_mut().zip(gw) {
                *w -= lr * g;
            }
            for (b, g) in layer.bias.iter_mut().zip(gb) {
                *b -= lr * g;
            }
        }
    }

    pub fn parameter_count(&self) -> usize {
        self.layers.iter().map(|l| l.parameter_count()).sum()
    }

    pub fn flatten_into(&self, out: &mut Vec<f64>) {
        for layer in &self.layers {
            out.extend_from_slice(&layer.weights);
            out.extend_from_slice(&layer.bias);
        }
    }

    pub fn unflatten_from(&mut self, params: &mut std::slice::Iter<'_, f64>) {
        for layer in &mut self.layers {
            for w in &mut layer.weights {
                *w = *params.next().expect("parameter vector too short");
            }
            for b in &mut layer.bias {
                *b = *params.next().expect("parameter vector too short");
            }
        }
    }

    /// Crude Lipschitz bound: product of layer spectral-norm upper bounds
    /// (max row 1-norm). ReLU is 1-Lipschitz.
    pub fn lipschitz_bound(&self) -> f64 {
        self.layers
            .iter()
            .map(|l| {
                (0..l.out_dim)
                    .map(|r| {
                        l.weights[r * l.in_dim..(r + 1) * l.in_dim]
                            .iter()
                            .map(|w| w.abs())
                            .sum::<f64>()
                    })
                    .fold(0.0f64, f64::max)
            })
            .product()
    }
}
