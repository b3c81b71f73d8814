//! Synthetic-set generators. Every sampler returns exactly `n` labelled
//! points inside the unit hypercube and is deterministic for a fixed seed.

pub mod boundary;
pub mod jacobian;
pub mod random;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use boundary::{
    binary_search_boundary, boundary_sampler, boundary_sampler_observed, is_boundary_slot,
    thread_step, Bisection, BoundaryParams, StepOutcome, StopReason, Thread,
};
pub use jacobian::{
    jacobian_sampler, jacobian_sampler_observed, jacobian_sampler_traced, JacobianParams,
    JacobianTrace,
};
pub use random::{random_sampler, random_sampler_observed};

use crate::dataset::SyntheticDataset;
use crate::error::{Error, Result};
use crate::gp::{self, AcquisitionParams, FastBayesParams, SeKernel};
use crate::oracle::Oracle;
use crate::rng::RandomSource;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Random,
    Boundary,
    Bayesian,
    Jacobian,
}

impl Method {
    pub const ALL: [Method; 4] = [
        Method::Random,
        Method::Boundary,
        Method::Bayesian,
        Method::Jacobian,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Random => "random",
            Method::Boundary => "boundary",
            Method::Bayesian => "bayesian",
            Method::Jacobian => "jacobian",
        }
    }

    /// Smallest budget the method accepts under `settings`.
    pub fn min_budget(self, settings: &SamplerSettings) -> usize {
        match self {
            Method::Random => 1,
            Method::Boundary => 2,
            Method::Bayesian => settings.bayesian.init_count,
            Method::Jacobian => settings.jacobian.seeds_per_refit.unwrap_or(50),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown sampling method {s:?}")))
    }
}

/// Optional replacements for the budget-dependent boundary defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoundaryOverrides {
    pub epsilon: Option<f64>,
    pub step: Option<f64>,
    pub spawn_rate: Option<f64>,
    pub runs: Option<usize>,
    pub max_threads: Option<usize>,
    pub max_steps: Option<usize>,
}

impl BoundaryOverrides {
    pub fn resolve(&self, n: usize) -> BoundaryParams {
        let mut p = BoundaryParams::for_budget(n);
        if let Some(v) = self.epsilon {
            p.epsilon = v;
        }
        if let Some(v) = self.step {
            p.step = v;
        }
        if let Some(v) = self.spawn_rate {
            p.spawn_rate = v;
        }
        if let Some(v) = self.runs {
            p.runs = v;
        }
        if let Some(v) = self.max_threads {
            p.max_threads = v;
        }
        if let Some(v) = self.max_steps {
            p.max_steps = v;
        }
        p
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct JacobianOverrides {
    pub refits: Option<usize>,
    pub seeds_per_refit: Option<usize>,
    pub step: Option<f64>,
    pub rounds: Option<usize>,
    pub train_steps: Option<usize>,
}

impl JacobianOverrides {
    pub fn resolve(&self, n: usize) -> JacobianParams {
        let mut p = JacobianParams::for_budget(n);
        if let Some(v) = self.refits {
            p.refits = v;
        }
        if let Some(v) = self.seeds_per_refit {
            p.seeds_per_refit = v;
        }
        if let Some(v) = self.step {
            p.step = v;
        }
        if let Some(v) = self.rounds {
            p.rounds = v;
        }
        if let Some(v) = self.train_steps {
            p.train_steps = v;
        }
        p
    }
}

/// Per-method parameters. Anything left unset takes the default for the
/// budget being generated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamplerSettings {
    pub boundary: BoundaryOverrides,
    pub jacobian: JacobianOverrides,
    pub bayesian: FastBayesParams,
    pub tau: f64,
    pub length_scale: Option<f64>,
    pub kernel_variance: Option<f64>,
}

impl Default for SamplerSettings {
    fn default() -> Self {
        Self {
            boundary: BoundaryOverrides::default(),
            jacobian: JacobianOverrides::default(),
            bayesian: FastBayesParams::default(),
            tau: AcquisitionParams::default().tau,
            length_scale: None,
            kernel_variance: None,
        }
    }
}

impl SamplerSettings {
    pub fn kernel(&self, d: usize, k: usize) -> Result<SeKernel> {
        let base = SeKernel::for_problem(d, k);
        SeKernel::new(
            self.length_scale.unwrap_or(base.length_scale),
            self.kernel_variance.unwrap_or(base.variance),
        )
    }

    pub fn validate(&self) -> Result<()> {
        self.boundary.resolve(1000).validate()?;
        self.jacobian.resolve(1000).validate()?;
        self.bayesian.validate()?;
        AcquisitionParams { tau: self.tau }.validate()?;
        self.kernel(1, 2)?;
        Ok(())
    }
}

/// Runs `method` for a budget of `n`, calling `observe` with the running
/// sample count after each sample is produced.
pub fn generate(
    method: Method,
    n: usize,
    oracle: &dyn Oracle,
    settings: &SamplerSettings,
    rng: &mut RandomSource,
    observe: &mut dyn FnMut(usize),
) -> Result<SyntheticDataset> {
    match method {
        Method::Random => random_sampler_observed(n, oracle, rng, observe),
        Method::Boundary => {
            boundary_sampler_observed(n, oracle, &settings.boundary.resolve(n), rng, observe)
        }
        Method::Jacobian => {
            jacobian_sampler_observed(n, oracle, &settings.jacobian.resolve(n), rng, observe)
        }
        Method::Bayesian => gp::fast_bayesian_sampler_observed(
            n,
            oracle,
            &settings.bayesian,
            settings.kernel(oracle.dim(), oracle.num_classes())?,
            &AcquisitionParams { tau: settings.tau },
            rng,
            observe,
        ),
    }
}
