//! Gaussian-process regression on hard labels and the Bayesian samplers
//! built on it.
//!
//! The oracle's label is treated as a sample of a real-valued function. The
//! acquisition rewards posterior variance, boosted where the posterior mean
//! sits between two integers (i.e. near a class change).

mod kernel;
mod posterior;

pub use kernel::SeKernel;
pub use posterior::{GpPosterior, JITTER_MAX, JITTER_START};

use log::warn;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::SyntheticDataset;
use crate::error::{Error, Result};
use crate::oracle::{Metered, Oracle};
use crate::rng::RandomSource;
use crate::space::{ClassLabel, LabeledSample, Point, SampleSpace};

pub const FAST_BAYESIAN_ID: &str = "bayesian";
pub const REFERENCE_BAYESIAN_ID: &str = "bayesian-reference";

/// Largest budget accepted by [`reference_bayesian_sampler`].
pub const REFERENCE_MAX_N: usize = 500;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AcquisitionParams {
    pub tau: f64,
}

impl Default for AcquisitionParams {
    fn default() -> Self {
        Self { tau: 10.0 }
    }
}

impl AcquisitionParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.tau >= 0.0) {
            return Err(Error::Precondition(format!(
                "tau must be >= 0, got {}",
                self.tau
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FastBayesParams {
    /// Largest support set used for one posterior fit.
    pub cap: usize,
    /// Inverse fraction of new points generated per fit.
    pub slowness: f64,
    pub init_count: usize,
    /// Rounds of local acquisition ascent per new point.
    pub local_iters: usize,
}

impl Default for FastBayesParams {
    fn default() -> Self {
        Self {
            cap: 1000,
            slowness: 20.0,
            init_count: 10,
            local_iters: 10,
        }
    }
}

impl FastBayesParams {
    pub fn validate(&self) -> Result<()> {
        if self.init_count == 0 || self.cap < self.init_count {
            return Err(Error::Precondition(format!(
                "need cap ({}) >= init_count ({}) >= 1",
                self.cap, self.init_count
            )));
        }
        if !(self.slowness >= 1.0) {
            return Err(Error::Precondition(format!(
                "slowness must be >= 1, got {}",
                self.slowness
            )));
        }
        Ok(())
    }

    /// Points generated from one posterior fit on `support` samples.
    pub fn batch_size(&self, support: usize) -> usize {
        round_half_up(support as f64 / self.slowness).max(1)
    }
}

fn round_half_up(x: f64) -> usize {
    (x + 0.5).floor().max(0.0) as usize
}

/// `x - floor(x)`, in `[0, 1)`.
pub fn frac(x: f64) -> f64 {
    x - x.floor()
}

/// `var * (1 + tau * f^2 (1-f)^2)` with `f` the fractional part of `mean`.
pub fn acquisition_value(mean: f64, var: f64, params: &AcquisitionParams) -> f64 {
    let f = frac(mean);
    var * (1.0 + params.tau * f * f * (1.0 - f) * (1.0 - f))
}

pub fn acquisition(gp: &GpPosterior, z: &[f64], params: &AcquisitionParams) -> f64 {
    let (m, v) = gp.mean_var(z);
    acquisition_value(m, v, params)
}

/// Nearest class index, ties rounded up, clamped to `[0, k-1]`.
pub fn round_to_class(mu: f64, k: usize) -> ClassLabel {
    let top = k.saturating_sub(1) as f64;
    ClassLabel((mu + 0.5).floor().clamp(0.0, top) as usize)
}

const INITIAL_STEP: f64 = 0.1;

/// Bounded coordinate pattern ascent on the acquisition starting at `z0`.
///
/// Each round visits the coordinates in a random order and walks along each
/// one while the acquisition strictly improves, then halves the step. The
/// result never scores below `z0`.
pub fn maximize_acquisition(
    gp: &GpPosterior,
    z0: &Point,
    iters: usize,
    params: &AcquisitionParams,
    rng: &mut RandomSource,
) -> Point {
    let d = z0.dim();
    let mut z = z0.coords().to_vec();
    let mut best = acquisition(gp, &z, params);
    let mut step = INITIAL_STEP;
    let mut order: Vec<usize> = (0..d).collect();
    for _ in 0..iters {
        rng.shuffle(&mut order);
        for &j in &order {
            for dir in [1.0, -1.0] {
                let mut moved = false;
                loop {
                    let x = (z[j] + dir * step).clamp(0.0, 1.0);
                    if x == z[j] {
                        break;
                    }
                    let old = z[j];
                    z[j] = x;
                    let a = acquisition(gp, &z, params);
                    if a > best {
                        best = a;
                        moved = true;
                    } else {
                        z[j] = old;
                        break;
                    }
                }
                if moved {
                    break;
                }
            }
        }
        step *= 0.5;
    }
    Point(z)
}

fn init_samples(
    count: usize,
    space: &SampleSpace,
    oracle: &mut Metered<'_>,
    ds: &mut SyntheticDataset,
    rng: &mut RandomSource,
    observe: &mut dyn FnMut(usize),
) -> Result<()> {
    for _ in 0..count {
        let z = space.uniform_sample(rng);
        let y = oracle.query(&z)?;
        ds.push(LabeledSample::new(z, y))?;
        observe(ds.len());
    }
    Ok(())
}

/// Batched Bayesian sampling. Each posterior fit uses at most `cap`
/// samples and produces `max(1, round(|support| / slowness))` new points,
/// each from its own uniform start.
pub fn fast_bayesian_sampler(
    n: usize,
    oracle: &dyn Oracle,
    params: &FastBayesParams,
    kernel: SeKernel,
    acq: &AcquisitionParams,
    rng: &mut RandomSource,
) -> Result<SyntheticDataset> {
    fast_bayesian_sampler_observed(n, oracle, params, kernel, acq, rng, &mut |_| {})
}

pub fn fast_bayesian_sampler_observed(
    n: usize,
    oracle: &dyn Oracle,
    params: &FastBayesParams,
    kernel: SeKernel,
    acq: &AcquisitionParams,
    rng: &mut RandomSource,
    observe: &mut dyn FnMut(usize),
) -> Result<SyntheticDataset> {
    params.validate()?;
    acq.validate()?;
    if n < params.init_count {
        return Err(Error::Precondition(format!(
            "budget {n} is below the initial sample count {}",
            params.init_count
        )));
    }
    let space = SampleSpace::new(oracle.dim())?;
    let mut metered = Metered::new(oracle);
    let mut ds = SyntheticDataset::new(
        FAST_BAYESIAN_ID,
        rng.seed(),
        oracle.dim(),
        oracle.num_classes(),
    );
    init_samples(
        params.init_count,
        &space,
        &mut metered,
        &mut ds,
        rng,
        observe,
    )?;

    let mut fits = 0usize;
    let mut fallback_batches = 0usize;
    while ds.len() < n {
        let support: Vec<LabeledSample> = if ds.len() <= params.cap {
            ds.samples().to_vec()
        } else {
            let mut idx = rng.sample_indices(ds.len(), params.cap);
            idx.sort_unstable();
            idx.into_iter().map(|i| ds.samples()[i].clone()).collect()
        };
        let batch = params.batch_size(support.len()).min(n - ds.len());
        let starts: Vec<(Point, u64)> = (0..batch)
            .map(|_| (space.uniform_sample(rng), rng.next_u64()))
            .collect();
        let points: Vec<Point> = match GpPosterior::fit(&support, kernel) {
            Ok(gp) => {
                fits += 1;
                starts
                    .into_par_iter()
                    .map(|(z0, seed)| {
                        let mut local = RandomSource::new(seed);
                        maximize_acquisition(&gp, &z0, params.local_iters, acq, &mut local)
                    })
                    .collect()
            }
            Err(e) => {
                warn!("posterior fit failed ({e}); sampling this batch uniformly");
                fallback_batches += 1;
                starts.into_iter().map(|(z0, _)| z0).collect()
            }
        };
        for z in points {
            let y = metered.query(&z)?;
            ds.push(LabeledSample::new(z, y))?;
            observe(ds.len());
        }
    }
    ds.truncate(n);
    ds.query_count = metered.count();
    ds.notes.insert("posterior_fits".into(), fits.to_string());
    ds.notes
        .insert("fallback_batches".into(), fallback_batches.to_string());
    ds.notes.insert(
        "kernel".into(),
        serde_json::to_string(&kernel).expect("serialize"),
    );
    ds.notes.insert(
        "params".into(),
        serde_json::to_string(params).expect("serialize"),
    );
    ds.notes.insert("tau".into(), acq.tau.to_string());
    Ok(ds)
}

const REFERENCE_RESTARTS: usize = 10;
const REFERENCE_ITERS: usize = 12;

/// Unbatched Bayesian sampling: a full refit after every sample and a
/// multi-start maximization of the acquisition. Quadratic-or-worse cost, so
/// it only accepts small budgets; it serves as a quality reference.
pub fn reference_bayesian_sampler(
    n: usize,
    oracle: &dyn Oracle,
    kernel: SeKernel,
    acq: &AcquisitionParams,
    rng: &mut RandomSource,
) -> Result<SyntheticDataset> {
    acq.validate()?;
    let init = FastBayesParams::default().init_count;
    if n > REFERENCE_MAX_N {
        return Err(Error::Precondition(format!(
            "reference sampler is limited to N <= {REFERENCE_MAX_N}, got {n}"
        )));
    }
    if n < init {
        return Err(Error::Precondition(format!(
            "budget {n} is below the initial sample count {init}"
        )));
    }
    let space = SampleSpace::new(oracle.dim())?;
    let mut metered = Metered::new(oracle);
    let mut ds = SyntheticDataset::new(
        REFERENCE_BAYESIAN_ID,
        rng.seed(),
        oracle.dim(),
        oracle.num_classes(),
    );
    init_samples(init, &space, &mut metered, &mut ds, rng, &mut |_| {})?;
    while ds.len() < n {
        let gp = GpPosterior::fit(ds.samples(), kernel)?;
        let mut best: Option<(f64, Point)> = None;
        for _ in 0..REFERENCE_RESTARTS {
            let z0 = space.uniform_sample(rng);
            let z = maximize_acquisition(&gp, &z0, REFERENCE_ITERS, acq, rng);
            let a = acquisition(&gp, z.coords(), acq);
            if best.as_ref().is_none_or(|(b, _)| a > *b) {
                best = Some((a, z));
            }
        }
        let z = best.expect("at least one restart").1;
        let y = metered.query(&z)?;
        ds.push(LabeledSample::new(z, y))?;
    }
    ds.query_count = metered.count();
    Ok(ds)
}
