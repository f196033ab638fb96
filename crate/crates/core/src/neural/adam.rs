use serde::{Deserialize, Serialize};

use super::{Mlp, NeuralError};

/// Adam with bias correction. Moments mirror the tensor order of [`Mlp::tensors`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdamState {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub step: u64,
    pub m: Vec<Vec<f64>>,
    pub v: Vec<Vec<f64>>,
}

impl AdamState {
    pub fn new(params: &Mlp, lr: f64) -> Self {
        let zeros: Vec<Vec<f64>> = params.tensors().iter().map(|t| vec![0.0; t.len()]).collect();
        AdamState {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            step: 0,
            m: zeros.clone(),
            v: zeros,
        }
    }

    /// One update of `params` against `grad` (same architecture).
    pub fn step(&mut self, params: &mut Mlp, grad: &Mlp) -> Result<(), NeuralError> {
        let grads = grad.tensors();
        let mut tensors = params.tensors_mut();
        if grads.len() != tensors.len()
            || self.m.len() != tensors.len()
            || tensors.iter().zip(&grads).zip(&self.m).any(|((p, g), m)| p.len() != g.len() || p.len() != m.len())
        {
            return Err(NeuralError::ShapeMismatch("optimizer state does not match parameters".into()));
        }
        self.step += 1;
        let t = self.step as i32;
        let c1 = 1.0 - self.beta1.powi(t);
        let c2 = 1.0 - self.beta2.powi(t);
        for (((p, g), m), v) in tensors.iter_mut().zip(&grads).zip(&mut self.m).zip(&mut self.v) {
            for i in 0..p.len() {
                m[i] = self.beta1 * m[i] + (1.0 - self.beta1) * g[i];
                v[i] = self.beta2 * v[i] + (1.0 - self.beta2) * g[i] * g[i];
                let m_hat = m[i] / c1;
                let v_hat = v[i] / c2;
                p[i] -= self.lr * m_hat / (v_hat.sqrt() + self.eps);
            }
        }
        Ok(())
    }
}
