//! Minibatch training shared by the gradient-based models.

use super::adam::Adam;
use crate::error::{Error, Result};
use crate::rng::RandomSource;
use crate::space::LabeledSample;

/// A softmax classifier whose parameters live in one flat vector.
pub(crate) trait FlatModel {
    fn params(&self) -> &[f64];
    fn params_mut(&mut self) -> &mut [f64];
    /// Mean cross-entropy over `batch`; writes the mean gradient into `grad`.
    fn loss_grad(&self, batch: &[&LabeledSample], grad: &mut [f64]) -> f64;
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct FitOptions {
    pub step_size: f64,
    pub epochs: usize,
    pub batch: usize,
    /// Hard cap on optimizer steps, if any.
    pub max_steps: Option<usize>,
}

pub(crate) fn fit<M: FlatModel>(
    model: &mut M,
    data: &[LabeledSample],
    opts: FitOptions,
    rng: &mut RandomSource,
) -> Result<f64> {
    if data.is_empty() {
        return Err(Error::Training("empty training set".into()));
    }
    let mut adam = Adam::new(opts.step_size, model.params().len());
    let mut grad = vec![0.0; model.params().len()];
    let mut order: Vec<usize> = (0..data.len()).collect();
    let batch = opts.batch.max(1);
    let mut steps = 0;
    let mut last = f64::NAN;
    'outer: for epoch in 0..opts.epochs {
        rng.shuffle(&mut order);
        let mut total = 0.0;
        let mut seen = 0;
        for chunk in order.chunks(batch) {
            let rows: Vec<&LabeledSample> = chunk.iter().map(|&i| &data[i]).collect();
            let loss = model.loss_grad(&rows, &mut grad);
            if !loss.is_finite() || grad.iter().any(|g| !g.is_finite()) {
                return Err(Error::Training(format!(
                    "non-finite loss/gradient at epoch {epoch}, step {steps} (loss {loss})"
                )));
            }
            adam.step(model.params_mut(), &grad);
            total += loss * rows.len() as f64;
            seen += rows.len();
            steps += 1;
            if opts.max_steps.is_some_and(|m| steps >= m) {
                last = total / seen as f64;
                break 'outer;
            }
        }
        last = total / seen as f64;
    }
    if model.params().iter().any(|p| !p.is_finite()) {
        return Err(Error::Training("parameters diverged".into()));
    }
    Ok(last)
}

/// In-place numerically stable softmax.
pub(crate) fn softmax(z: &mut [f64]) {
    let m = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut s = 0.0;
    for v in z.iter_mut() {
        *v = (*v - m).exp();
        s += *v;
    }
    for v in z.iter_mut() {
        *v /= s;
    }
}

pub(crate) fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if *x > v[best] {
            best = i;
        }
    }
    best
}
