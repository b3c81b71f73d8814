use serde::{Deserialize, Serialize};

use super::flat::{argmax, softmax, FlatModel};
use crate::rng::RandomSource;
use crate::space::LabeledSample;

/// Fully connected network: ReLU hidden layers, softmax output. Each layer
/// stores its `out x in` weights row-major followed by `out` biases, all
/// concatenated in `params`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mlp {
    /// Layer widths including input and output.
    pub widths: Vec<usize>,
    pub params: Vec<f64>,
}

impl Mlp {
    /// He-normal weights, zero biases.
    pub fn init(widths: Vec<usize>, rng: &mut RandomSource) -> Self {
        let mut params = Vec::new();
        for w in widths.windows(2) {
            let (fan_in, fan_out) = (w[0], w[1]);
            let sd = (2.0 / fan_in as f64).sqrt();
            params.extend((0..fan_in * fan_out).map(|_| sd * rng.standard_normal()));
            params.extend(std::iter::repeat_n(0.0, fan_out));
        }
        Self { widths, params }
    }

    pub fn classes(&self) -> usize {
        *self.widths.last().unwrap()
    }

    fn offsets(&self) -> Vec<usize> {
        let mut off = vec![0];
        for w in self.widths.windows(2) {
            off.push(off.last().unwrap() + w[0] * w[1] + w[1]);
        }
        off
    }

    /// Activations of every layer; the last entry holds probabilities.
    fn forward(&self, x: &[f64]) -> Vec<Vec<f64>> {
        let off = self.offsets();
        let layers = self.widths.len() - 1;
        let mut acts = vec![x.to_vec()];
        for l in 0..layers {
            let (n_in, n_out) = (self.widths[l], self.widths[l + 1]);
            let w = &self.params[off[l]..off[l] + n_in * n_out];
            let b = &self.params[off[l] + n_in * n_out..off[l + 1]];
            let input = &acts[l];
            let mut out: Vec<f64> = (0..n_out)
                .map(|o| {
                    w[o * n_in..(o + 1) * n_in]
                        .iter()
                        .zip(input)
                        .map(|(a, v)| a * v)
                        .sum::<f64>()
                        + b[o]
                })
                .collect();
            if l + 1 < layers {
                out.iter_mut().for_each(|v| *v = v.max(0.0));
            } else {
                softmax(&mut out);
            }
            acts.push(out);
        }
        acts
    }

    pub fn scores(&self, x: &[f64]) -> Vec<f64> {
        self.forward(x).pop().unwrap()
    }

    pub fn predict(&self, x: &[f64]) -> usize {
        argmax(&self.scores(x))
    }
}

impl FlatModel for Mlp {
    fn params(&self) -> &[f64] {
        &self.params
    }

    fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    fn loss_grad(&self, batch: &[&LabeledSample], grad: &mut [f64]) -> f64 {
        grad.iter_mut().for_each(|g| *g = 0.0);
        let off = self.offsets();
        let layers = self.widths.len() - 1;
        let inv = 1.0 / batch.len() as f64;
        let mut loss = 0.0;
        for s in batch {
            let acts = self.forward(s.point.coords());
            let y = s.label.0;
            let probs = &acts[layers];
            loss -= probs[y].max(1e-300).ln();
            let mut delta: Vec<f64> = probs
                .iter()
                .enumerate()
                .map(|(c, p)| (p - f64::from(u8::from(c == y))) * inv)
                .collect();
            for l in (0..layers).rev() {
                let (n_in, n_out) = (self.widths[l], self.widths[l + 1]);
                let input = &acts[l];
                let (wg, bg) = grad[off[l]..off[l + 1]].split_at_mut(n_in * n_out);
                for o in 0..n_out {
                    let d = delta[o];
                    if d == 0.0 {
                        continue;
                    }
                    for (g, v) in wg[o * n_in..(o + 1) * n_in].iter_mut().zip(input) {
                        *g += d * v;
                    }
                    bg[o] += d;
                }
                if l > 0 {
                    let w = &self.params[off[l]..off[l] + n_in * n_out];
                    let mut prev = vec![0.0; n_in];
                    for o in 0..n_out {
                        let d = delta[o];
                        if d == 0.0 {
                            continue;
                        }
                        for (p, a) in prev.iter_mut().zip(&w[o * n_in..(o + 1) * n_in]) {
                            *p += d * a;
                        }
                    }
                    // ReLU derivative
                    for (p, a) in prev.iter_mut().zip(input) {
                        if *a <= 0.0 {
                            *p = 0.0;
                        }
                    }
                    delta = prev;
                }
            }
        }
        loss * inv
    }
}
