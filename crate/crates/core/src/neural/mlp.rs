use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use super::NeuralError;
use crate::mapping::{DistValue, StructuralMapping};

/// Dense layer, `y = W x + b`, with `W` stored row-major as `outputs × inputs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub inputs: usize,
    pub outputs: usize,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl Layer {
    pub fn zeros(inputs: usize, outputs: usize) -> Self {
        Layer {
            inputs,
            outputs,
            weights: vec![0.0; inputs * outputs],
            bias: vec![0.0; outputs],
        }
    }

    /// Uniform in `±1/√fan_in` for weights and bias.
    fn init(inputs: usize, outputs: usize, rng: &mut ChaCha20Rng) -> Self {
        let bound = 1.0 / (inputs.max(1) as f64).sqrt();
        let mut draw = || rng.random_range(-bound..bound);
        Layer {
            inputs,
            outputs,
            weights: (0..inputs * outputs).map(|_| draw()).collect(),
            bias: (0..outputs).map(|_| draw()).collect(),
        }
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.weights
            .chunks_exact(self.inputs)
            .zip(&self.bias)
            .map(|(row, b)| row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + b)
            .collect()
    }

    /// Accumulates parameter gradients into `grad` and returns `∂/∂x`.
    fn backprop(&self, x: &[f64], dy: &[f64], grad: &mut Layer) -> Vec<f64> {
        let mut dx = vec![0.0; self.inputs];
        for (o, &g) in dy.iter().enumerate() {
            if g == 0.0 {
                continue;
            }
            grad.bias[o] += g;
            let row = &self.weights[o * self.inputs..(o + 1) * self.inputs];
            let grow = &mut grad.weights[o * self.inputs..(o + 1) * self.inputs];
            for i in 0..self.inputs {
                grow[i] += g * x[i];
                dx[i] += g * row[i];
            }
        }
        dx
    }
}

/// Multilayer perceptron with ReLU hidden layers and one softmax head per
/// Discrete component of `head_spec`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mlp {
    pub hidden: Vec<Layer>,
    pub heads: Vec<Layer>,
    pub head_spec: Vec<StructuralMapping>,
}

/// Activations retained by [`Mlp::forward`] for the backward pass.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    /// Input to each hidden layer, then the input shared by all heads.
    layer_inputs: Vec<Vec<f64>>,
    /// Pre-activation of each hidden layer.
    pre_activations: Vec<Vec<f64>>,
    pub probs: Vec<Vec<f64>>,
}

fn softmax(z: &[f64]) -> Vec<f64> {
    let max = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = z.iter().map(|v| (v - max).exp()).collect();
    let total: f64 = e.iter().sum();
    e.into_iter().map(|v| v / total).collect()
}

impl Mlp {
    /// `head_spec` entries must be Discrete.
    pub fn new(
        input_dim: usize,
        hidden_sizes: &[usize],
        head_spec: Vec<StructuralMapping>,
        seed: u64,
    ) -> Result<Self, NeuralError> {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let mut hidden = Vec::with_capacity(hidden_sizes.len());
        let mut width = input_dim;
        for &h in hidden_sizes {
            hidden.push(Layer::init(width, h, &mut rng));
            width = h;
        }
        let heads = head_spec
            .iter()
            .map(|m| match m.alphabet() {
                Some(a) => Ok(Layer::init(width, a.len(), &mut rng)),
                None => Err(NeuralError::UnsupportedHead(format!("{m}"))),
            })
            .collect::<Result<_, _>>()?;
        Ok(Mlp {
            hidden,
            heads,
            head_spec,
        })
    }

    pub fn input_dim(&self) -> usize {
        self.hidden.first().or(self.heads.first()).map_or(0, |l| l.inputs)
    }

    /// Parameter tensors in a fixed order: each hidden layer's weights then
    /// bias, then each head's weights then bias.
    pub fn tensors(&self) -> Vec<&[f64]> {
        self.hidden
            .iter()
            .chain(&self.heads)
            .flat_map(|l| [l.weights.as_slice(), l.bias.as_slice()])
            .collect()
    }

    pub fn tensors_mut(&mut self) -> Vec<&mut [f64]> {
        self.hidden
            .iter_mut()
            .chain(self.heads.iter_mut())
            .flat_map(|l| [l.weights.as_mut_slice(), l.bias.as_mut_slice()])
            .collect()
    }

    /// Same architecture, every parameter zero. Used as a gradient buffer.
    pub fn zeros_like(&self) -> Mlp {
        Mlp {
            hidden: self.hidden.iter().map(|l| Layer::zeros(l.inputs, l.outputs)).collect(),
            heads: self.heads.iter().map(|l| Layer::zeros(l.inputs, l.outputs)).collect(),
            head_spec: self.head_spec.clone(),
        }
    }

    pub fn add_scaled(&mut self, other: &Mlp, factor: f64) {
        for (a, b) in self.tensors_mut().into_iter().zip(other.tensors()) {
            a.iter_mut().zip(b).for_each(|(x, y)| *x += factor * y);
        }
    }

    pub fn forward(&self, x: &[f64]) -> Result<ForwardCache, NeuralError> {
        if x.len() != self.input_dim() {
            return Err(NeuralError::ShapeMismatch(format!(
                "input of length {} for a model expecting {}",
                x.len(),
                self.input_dim()
            )));
        }
        let mut layer_inputs = Vec::with_capacity(self.hidden.len() + 1);
        let mut pre_activations = Vec::with_capacity(self.hidden.len());
        let mut h = x.to_vec();
        for layer in &self.hidden {
            let z = layer.apply(&h);
            layer_inputs.push(h);
            h = z.iter().map(|v| v.max(0.0)).collect();
            pre_activations.push(z);
        }
        let probs = self.heads.iter().map(|head| softmax(&head.apply(&h))).collect();
        layer_inputs.push(h);
        Ok(ForwardCache {
            layer_inputs,
            pre_activations,
            probs,
        })
    }

    /// Head outputs as a distribution: Discrete for one head, else a Tuple.
    pub fn dist(&self, cache: &ForwardCache) -> DistValue {
        if cache.probs.len() == 1 {
            DistValue::Discrete(cache.probs[0].clone())
        } else {
            DistValue::Tuple(cache.probs.iter().cloned().map(DistValue::Discrete).collect())
        }
    }

    /// Adds `∂loss/∂θ` to `grad` given `∂loss/∂probs` per head.
    pub fn backward(
        &self,
        cache: &ForwardCache,
        d_probs: &[Vec<f64>],
        grad: &mut Mlp,
    ) -> Result<(), NeuralError> {
        if d_probs.len() != self.heads.len()
            || d_probs.iter().zip(&cache.probs).any(|(d, p)| d.len() != p.len())
        {
            return Err(NeuralError::ShapeMismatch("head gradient shape".into()));
        }
        let shared = cache.layer_inputs.last().expect("head input cached");
        let mut dh = vec![0.0; shared.len()];
        for (k, head) in self.heads.iter().enumerate() {
            let p = &cache.probs[k];
            let g = &d_probs[k];
            let dot: f64 = p.iter().zip(g).map(|(a, b)| a * b).sum();
            let dz: Vec<f64> = p.iter().zip(g).map(|(pi, gi)| pi * (gi - dot)).collect();
            let dx = head.backprop(shared, &dz, &mut grad.heads[k]);
            dh.iter_mut().zip(dx).for_each(|(a, b)| *a += b);
        }
        for l in (0..self.hidden.len()).rev() {
            let dz: Vec<f64> = dh
                .iter()
                .zip(&cache.pre_activations[l])
                .map(|(g, z)| if *z > 0.0 { *g } else { 0.0 })
                .collect();
            dh = self.hidden[l].backprop(&cache.layer_inputs[l], &dz, &mut grad.hidden[l]);
        }
        Ok(())
    }

    /// Index of the largest probability per head, lowest index on ties.
    pub fn argmax(cache: &ForwardCache) -> Vec<usize> {
        cache
            .probs
            .iter()
            .map(|p| {
                let mut best = 0;
                for (i, &v) in p.iter().enumerate() {
                    if v > p[best] {
                        best = i;
                    }
                }
                best
            })
            .collect()
    }
}
