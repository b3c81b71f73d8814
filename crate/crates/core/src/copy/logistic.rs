use serde::{Deserialize, Serialize};

use super::flat::{argmax, softmax, FlatModel};
use crate::space::LabeledSample;

/// Multinomial logistic regression. Parameters are laid out as the
/// row-major `classes x dim` weight matrix followed by the biases.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Logistic {
    pub dim: usize,
    pub classes: usize,
    pub params: Vec<f64>,
}

impl Logistic {
    pub fn zeros(dim: usize, classes: usize) -> Self {
        Self {
            dim,
            classes,
            params: vec![0.0; classes * dim + classes],
        }
    }

    /// Planted weights: `weights[c]` is the row for class `c`.
    pub fn from_weights(weights: &[Vec<f64>], bias: &[f64]) -> Self {
        let classes = weights.len();
        let dim = weights[0].len();
        let mut params: Vec<f64> = weights.iter().flatten().copied().collect();
        params.extend_from_slice(bias);
        Self {
            dim,
            classes,
            params,
        }
    }

    fn weight(&self, c: usize) -> &[f64] {
        &self.params[c * self.dim..(c + 1) * self.dim]
    }

    fn bias(&self, c: usize) -> f64 {
        self.params[self.classes * self.dim + c]
    }

    pub fn logits(&self, x: &[f64]) -> Vec<f64> {
        (0..self.classes)
            .map(|c| {
                self.weight(c)
                    .iter()
                    .zip(x)
                    .map(|(w, v)| w * v)
                    .sum::<f64>()
                    + self.bias(c)
            })
            .collect()
    }

    /// Class probabilities.
    pub fn scores(&self, x: &[f64]) -> Vec<f64> {
        let mut z = self.logits(x);
        softmax(&mut z);
        z
    }

    pub fn predict(&self, x: &[f64]) -> usize {
        argmax(&self.logits(x))
    }

    /// Gradient of the class-`c` probability with respect to the input:
    /// `p_c (W_c - sum_j p_j W_j)`.
    pub fn input_gradient(&self, x: &[f64], c: usize) -> Vec<f64> {
        let p = self.scores(x);
        let mut mean_w = vec![0.0; self.dim];
        for (j, pj) in p.iter().enumerate() {
            for (m, w) in mean_w.iter_mut().zip(self.weight(j)) {
                *m += pj * w;
            }
        }
        self.weight(c)
            .iter()
            .zip(&mean_w)
            .map(|(w, m)| p[c] * (w - m))
            .collect()
    }
}

impl FlatModel for Logistic {
    fn params(&self) -> &[f64] {
        &self.params
    }

    fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    fn loss_grad(&self, batch: &[&LabeledSample], grad: &mut [f64]) -> f64 {
        grad.iter_mut().for_each(|g| *g = 0.0);
        let inv = 1.0 / batch.len() as f64;
        let mut loss = 0.0;
        for s in batch {
            let x = s.point.coords();
            let p = self.scores(x);
            let y = s.label.0;
            loss -= p[y].max(1e-300).ln();
            for c in 0..self.classes {
                let delta = (p[c] - f64::from(u8::from(c == y))) * inv;
                for (g, v) in grad[c * self.dim..(c + 1) * self.dim].iter_mut().zip(x) {
                    *g += delta * v;
                }
                grad[self.classes * self.dim + c] += delta;
            }
        }
        loss * inv
    }
}
