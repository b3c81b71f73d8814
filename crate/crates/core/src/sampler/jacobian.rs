//! Substitute-driven augmentation: a logistic substitute is refit on the
//! labelled set, then retained points are pushed along the sign of its
//! class-score gradient and relabelled by the oracle.

use log::warn;
use serde::{Deserialize, Serialize};

use crate::copy::flat::{fit, FitOptions};
use crate::copy::Logistic;
use crate::dataset::SyntheticDataset;
use crate::error::{Error, Result};
use crate::oracle::{Metered, Oracle};
use crate::rng::RandomSource;
use crate::space::{LabeledSample, Point, SampleSpace};

pub const JACOBIAN_ID: &str = "jacobian";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JacobianParams {
    /// Substitute refits allowed before the last substitute is frozen.
    pub refits: usize,
    /// Uniform seeds, and points retained per refit.
    pub seeds_per_refit: usize,
    /// Augmentation step.
    pub step: f64,
    /// Chained augmentation rounds per refit.
    pub rounds: usize,
    /// Optimizer steps per refit; fixed so each refit costs the same.
    pub train_steps: usize,
    pub train_step_size: f64,
    pub train_batch: usize,
}

impl JacobianParams {
    pub fn for_budget(n: usize) -> Self {
        Self {
            refits: 100.min((5.0 + n as f64 / 4.0).round() as usize),
            seeds_per_refit: 50,
            step: 0.05,
            rounds: 5,
            train_steps: 200,
            train_step_size: 0.05,
            train_batch: 64,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.refits == 0
            || self.seeds_per_refit == 0
            || self.rounds == 0
            || self.train_steps == 0
        {
            return Err(Error::Precondition(
                "refits, seeds, rounds and training steps must be positive".into(),
            ));
        }
        if !(self.step > 0.0) || !(self.train_step_size > 0.0) || self.train_batch == 0 {
            return Err(Error::Precondition(
                "step sizes and batch must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Pre-clipping displacement of every augmented sample, in generation order.
#[derive(Debug, Clone, PartialEq)]
pub struct JacobianTrace {
    pub offsets: Vec<Vec<f64>>,
    pub refits_done: usize,
    pub refits_skipped: usize,
}

pub fn jacobian_sampler(
    n: usize,
    oracle: &dyn Oracle,
    params: &JacobianParams,
    rng: &mut RandomSource,
) -> Result<SyntheticDataset> {
    run(n, oracle, params, rng, &mut |_| {}).map(|(ds, _)| ds)
}

pub fn jacobian_sampler_observed(
    n: usize,
    oracle: &dyn Oracle,
    params: &JacobianParams,
    rng: &mut RandomSource,
    observe: &mut dyn FnMut(usize),
) -> Result<SyntheticDataset> {
    run(n, oracle, params, rng, observe).map(|(ds, _)| ds)
}

/// Same as [`jacobian_sampler`] but also returns the raw augmentation offsets.
pub fn jacobian_sampler_traced(
    n: usize,
    oracle: &dyn Oracle,
    params: &JacobianParams,
    rng: &mut RandomSource,
) -> Result<(SyntheticDataset, JacobianTrace)> {
    run(n, oracle, params, rng, &mut |_| {})
}

fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

fn run(
    n: usize,
    oracle: &dyn Oracle,
    p: &JacobianParams,
    rng: &mut RandomSource,
    observe: &mut dyn FnMut(usize),
) -> Result<(SyntheticDataset, JacobianTrace)> {
    p.validate()?;
    if n < p.seeds_per_refit {
        return Err(Error::Precondition(format!(
            "budget {n} is below the seed count {}",
            p.seeds_per_refit
        )));
    }
    let d = oracle.dim();
    let k = oracle.num_classes();
    let space = SampleSpace::new(d)?;
    let mut metered = Metered::new(oracle);
    let mut ds = SyntheticDataset::new(JACOBIAN_ID, rng.seed(), d, k);
    let mut trace = JacobianTrace {
        offsets: Vec::new(),
        refits_done: 0,
        refits_skipped: 0,
    };

    for _ in 0..p.seeds_per_refit {
        let z = space.uniform_sample(rng);
        let y = metered.query(&z)?;
        ds.push(LabeledSample::new(z, y))?;
        observe(ds.len());
    }

    let mut substitute = Logistic::zeros(d, k.max(1));
    let opts = FitOptions {
        step_size: p.train_step_size,
        epochs: usize::MAX,
        batch: p.train_batch,
        max_steps: Some(p.train_steps),
    };
    let mut attempts = 0;
    while ds.len() < n {
        if attempts < p.refits {
            attempts += 1;
            let mut candidate = substitute.clone();
            match fit(&mut candidate, ds.samples(), opts, rng) {
                Ok(_) => {
                    substitute = candidate;
                    trace.refits_done += 1;
                }
                Err(e) => {
                    warn!("substitute refit {attempts} skipped: {e}");
                    trace.refits_skipped += 1;
                }
            }
        }
        let retained = rng.sample_indices(ds.len(), p.seeds_per_refit.min(ds.len()));
        let mut frontier: Vec<LabeledSample> = retained
            .into_iter()
            .map(|i| ds.samples()[i].clone())
            .collect();
        'rounds: for _ in 0..p.rounds {
            let mut next = Vec::with_capacity(frontier.len());
            for s in &frontier {
                if ds.len() >= n {
                    break 'rounds;
                }
                let g = substitute.input_gradient(s.point.coords(), s.label.index());
                let offset: Vec<f64> = g.iter().map(|gi| p.step * sign(*gi)).collect();
                let mut moved: Vec<f64> = s
                    .point
                    .coords()
                    .iter()
                    .zip(&offset)
                    .map(|(a, b)| a + b)
                    .collect();
                space.clip(&mut moved);
                let z = Point(moved);
                let y = metered.query(&z)?;
                let sample = LabeledSample::new(z, y);
                ds.push(sample.clone())?;
                observe(ds.len());
                trace.offsets.push(offset);
                next.push(sample);
            }
            frontier = next;
        }
    }
    ds.query_count = metered.count();
    ds.notes
        .insert("refits_done".into(), trace.refits_done.to_string());
    ds.notes
        .insert("refits_skipped".into(), trace.refits_skipped.to_string());
    ds.notes.insert(
        "params".into(),
        serde_json::to_string(p).expect("params serialize"),
    );
    Ok((ds, trace))
}
