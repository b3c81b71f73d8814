use nalgebra::{DMatrix, DVector};

use super::kernel::SeKernel;
use crate::error::{Error, Result};
use crate::space::{squared_distance, LabeledSample};

/// Starting jitter, relative to the kernel variance.
pub const JITTER_START: f64 = 1e-8;
/// Largest jitter tried before the fit is declared failed.
pub const JITTER_MAX: f64 = 1e-4;

/// Zero-mean GP regression on class indices, conditioned on a support set.
/// Immutable once fitted.
#[derive(Debug, Clone)]
pub struct GpPosterior {
    kernel: SeKernel,
    dim: usize,
    /// Row-major support coordinates.
    support: Vec<f64>,
    targets: Vec<f64>,
    /// Lower Cholesky factor of `K + jitter I`.
    factor: DMatrix<f64>,
    /// `L^-1 y`, so the mean is `(L^-1 k) . whitened` and shares its solve
    /// with the variance; this avoids the cancellation in `k . (K^-1 y)`.
    whitened: DVector<f64>,
    jitter: f64,
}

impl GpPosterior {
    /// The unconditioned prior: mean 0 and variance `kernel.variance`.
    pub fn prior(kernel: SeKernel, dim: usize) -> Self {
        Self {
            kernel,
            dim,
            support: Vec::new(),
            targets: Vec::new(),
            factor: DMatrix::zeros(0, 0),
            whitened: DVector::zeros(0),
            jitter: 0.0,
        }
    }

    /// Fits with jitter starting at `1e-8 * variance`, doubling on failed
    /// factorization up to `1e-4 * variance`.
    pub fn fit(samples: &[LabeledSample], kernel: SeKernel) -> Result<Self> {
        Self::fit_with_jitter(samples, kernel, JITTER_START * kernel.variance)
    }

    pub fn fit_with_jitter(
        samples: &[LabeledSample],
        kernel: SeKernel,
        jitter: f64,
    ) -> Result<Self> {
        let Some(first) = samples.first() else {
            return Err(Error::Fit(
                "posterior needs at least one support sample".into(),
            ));
        };
        if !(jitter > 0.0) {
            return Err(Error::Fit(format!("jitter must be positive, got {jitter}")));
        }
        let dim = first.point.dim();
        let n = samples.len();
        let mut support = Vec::with_capacity(n * dim);
        for s in samples {
            if s.point.dim() != dim {
                return Err(Error::Dimension {
                    expected: dim,
                    got: s.point.dim(),
                });
            }
            support.extend_from_slice(s.point.coords());
        }
        let targets: Vec<f64> = samples.iter().map(|s| s.label.index() as f64).collect();
        let gram = DMatrix::from_fn(n, n, |i, j| {
            kernel.eval(
                &support[i * dim..(i + 1) * dim],
                &support[j * dim..(j + 1) * dim],
            )
        });
        let ceiling = JITTER_MAX * kernel.variance;
        let mut jitter = jitter;
        loop {
            let mut m = gram.clone();
            for i in 0..n {
                m[(i, i)] += jitter;
            }
            if let Some(ch) = m.cholesky() {
                let y = DVector::from_column_slice(&targets);
                let factor = ch.unpack();
                let whitened = factor
                    .solve_lower_triangular(&y)
                    .expect("factor has a positive diagonal");
                return Ok(Self {
                    kernel,
                    dim,
                    support,
                    targets,
                    factor,
                    whitened,
                    jitter,
                });
            }
            if jitter >= ceiling {
                return Err(Error::Fit(format!(
                    "covariance not positive definite with jitter {jitter:e}"
                )));
            }
            jitter = (jitter * 2.0).min(ceiling);
        }
    }

    pub fn kernel(&self) -> SeKernel {
        self.kernel
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    pub fn support_point(&self, i: usize) -> &[f64] {
        &self.support[i * self.dim..(i + 1) * self.dim]
    }

    pub fn factor(&self) -> &DMatrix<f64> {
        &self.factor
    }

    /// Posterior mean and variance at `z`; the variance is clamped at 0.
    pub fn mean_var(&self, z: &[f64]) -> (f64, f64) {
        let n = self.len();
        if n == 0 {
            return (0.0, self.kernel.variance);
        }
        let cross = DVector::from_fn(n, |i, _| {
            self.kernel
                .eval_sq(squared_distance(self.support_point(i), z))
        });
        let v = self
            .factor
            .solve_lower_triangular(&cross)
            .expect("factor has a positive diagonal");
        let mean = v.dot(&self.whitened);
        let var = (self.kernel.variance - v.norm_squared()).max(0.0);
        (mean, var)
    }
}
