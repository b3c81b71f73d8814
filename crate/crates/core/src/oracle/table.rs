use std::path::Path;

use super::{Oracle, QueryCounter};
use crate::dataset::read_labeled_csv;
use crate::error::{Error, Result};
use crate::space::{squared_distance, LabeledSample};

/// 1-nearest-neighbour lookup over an exported labelled table. Distance
/// ties go to the lowest row index.
#[derive(Debug)]
pub struct TableOracle {
    dim: usize,
    classes: usize,
    rows: Vec<LabeledSample>,
    counter: QueryCounter,
}

impl TableOracle {
    pub fn new(rows: Vec<LabeledSample>) -> Result<Self> {
        let first = rows
            .first()
            .ok_or_else(|| Error::Precondition("table oracle needs at least one row".into()))?;
        let dim = first.point.dim();
        if let Some(bad) = rows.iter().find(|r| r.point.dim() != dim) {
            return Err(Error::Dimension {
                expected: dim,
                got: bad.point.dim(),
            });
        }
        let classes = rows.iter().map(|r| r.label.0).max().unwrap_or(0) + 1;
        Ok(Self {
            dim,
            classes,
            rows,
            counter: QueryCounter::default(),
        })
    }

    /// Reads a table in the dataset CSV layout.
    pub fn from_csv(path: &Path) -> Result<Self> {
        let (_, rows) = read_labeled_csv(path)?;
        Self::new(rows)
    }

    pub fn rows(&self) -> &[LabeledSample] {
        &self.rows
    }
}

impl Oracle for TableOracle {
    fn dim(&self) -> usize {
        self.dim
    }

    fn num_classes(&self) -> usize {
        self.classes
    }

    fn label_of(&self, z: &[f64]) -> Result<usize> {
        let mut best = (f64::INFINITY, 0usize);
        for r in &self.rows {
            let d = squared_distance(r.point.coords(), z);
            if d < best.0 {
                best = (d, r.label.0);
            }
        }
        Ok(best.1)
    }

    fn counter(&self) -> &QueryCounter {
        &self.counter
    }
}
