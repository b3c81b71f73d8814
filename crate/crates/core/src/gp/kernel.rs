use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::space::squared_distance;

/// Squared exponential covariance `variance * exp(-|a-b|^2 / (2 l^2))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeKernel {
    pub length_scale: f64,
    pub variance: f64,
}

impl SeKernel {
    pub fn new(length_scale: f64, variance: f64) -> Result<Self> {
        if !(length_scale > 0.0 && length_scale.is_finite())
            || !(variance > 0.0 && variance.is_finite())
        {
            return Err(Error::Precondition(format!(
                "kernel needs positive length scale and variance, got {length_scale}, {variance}"
            )));
        }
        Ok(Self {
            length_scale,
            variance,
        })
    }

    /// Defaults for a `d`-dimensional, `k`-class problem: `l = 0.5 sqrt(d)`,
    /// `variance = 0.25 k^2`.
    pub fn for_problem(d: usize, k: usize) -> Self {
        Self {
            length_scale: 0.5 * (d as f64).sqrt(),
            variance: 0.25 * (k * k) as f64,
        }
    }

    pub fn eval(&self, a: &[f64], b: &[f64]) -> f64 {
        self.eval_sq(squared_distance(a, b))
    }

    pub(crate) fn eval_sq(&self, sq: f64) -> f64 {
        self.variance * (-sq / (2.0 * self.length_scale * self.length_scale)).exp()
    }
}
