//! Input-space geometry and the basic labelled-point types.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::RandomSource;

/// The unit hypercube `[0,1]^d`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleSpace {
    dim: usize,
}

impl SampleSpace {
    pub fn new(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Precondition("dimension must be at least 1".into()));
        }
        Ok(Self { dim })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn contains(&self, p: &Point) -> bool {
        p.dim() == self.dim && p.coords().iter().all(|&x| (0.0..=1.0).contains(&x))
    }

    pub fn contains_coords(&self, coords: &[f64]) -> bool {
        coords.len() == self.dim && coords.iter().all(|&x| (0.0..=1.0).contains(&x))
    }

    pub fn clip(&self, coords: &mut [f64]) {
        for x in coords.iter_mut() {
            *x = x.clamp(0.0, 1.0);
        }
    }

    pub fn uniform_sample(&self, rng: &mut RandomSource) -> Point {
        Point((0..self.dim).map(|_| rng.uniform()).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Point(pub Vec<f64>);

impl Point {
    pub fn new(coords: Vec<f64>) -> Self {
        Self(coords)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn distance(&self, other: &Point) -> f64 {
        euclidean(&self.0, &other.0)
    }

    pub fn midpoint(&self, other: &Point) -> Point {
        Point(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| 0.5 * (a + b))
                .collect(),
        )
    }
}

impl From<Vec<f64>> for Point {
    fn from(v: Vec<f64>) -> Self {
        Point(v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ClassLabel(pub usize);

impl ClassLabel {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledSample {
    pub point: Point,
    pub label: ClassLabel,
}

impl LabeledSample {
    pub fn new(point: Point, label: ClassLabel) -> Self {
        Self { point, label }
    }
}

pub fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    squared_distance(a, b).sqrt()
}

pub fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}
