//! Building copies of black-box hard-label classifiers from synthetic
//! query sets.
//!
//! An [`oracle::Oracle`] answers membership queries with class labels. A
//! sampler from [`sampler`] (or the Bayesian one in [`gp`]) chooses which
//! points to query, a model from [`copy`] is trained on the labelled points,
//! and [`metrics`] measures how closely the copy agrees with the oracle.
//! [`harness`] wires these into resumable experiment sweeps.

// `!(x > 0.0)` is used on purpose so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod copy;
pub mod dataset;
pub mod error;
pub mod gp;
pub mod harness;
pub mod metrics;
pub mod oracle;
pub mod preprocess;
pub mod rng;
pub mod sampler;
pub mod space;

pub use error::{Error, Result};
