//! Hard-label membership-query oracles.
//!
//! An [`Oracle`] answers one question: which class does this point belong
//! to? No scores, no gradients. Every answered query bumps the oracle's
//! counter, which is the cost model samplers are metered against.

mod analytic;
mod external;
mod table;

use std::sync::atomic::{AtomicU64, Ordering};

pub use analytic::{AnalyticOracle, AnalyticVariant};
pub use external::{parse_handshake, serve, ExternalOracle};
pub use table::TableOracle;

use crate::error::{Error, Result};
use crate::space::{ClassLabel, Point};

#[derive(Debug, Default)]
pub struct QueryCounter(AtomicU64);

impl QueryCounter {
    pub fn increment(&self) {
        self.0.fetch_add(1, Ordering::Relaxed);
    }

    pub fn get(&self) -> u64 {
        self.0.load(Ordering::Relaxed)
    }
}

pub trait Oracle: Send + Sync {
    fn dim(&self) -> usize;

    fn num_classes(&self) -> usize;

    /// Uncounted label lookup. Samplers should go through [`Oracle::query`].
    fn label_of(&self, z: &[f64]) -> Result<usize>;

    fn counter(&self) -> &QueryCounter;

    /// Counted membership query.
    fn query(&self, z: &Point) -> Result<ClassLabel> {
        if z.dim() != self.dim() {
            return Err(Error::Dimension {
                expected: self.dim(),
                got: z.dim(),
            });
        }
        let label = self.label_of(z.coords())?;
        self.counter().increment();
        debug_assert!(label < self.num_classes());
        Ok(ClassLabel(label))
    }

    fn query_count(&self) -> u64 {
        self.counter().get()
    }

    fn as_analytic(&self) -> Option<&AnalyticOracle> {
        None
    }

    /// Whether concurrent queries are serialized internally.
    fn is_serial(&self) -> bool {
        false
    }
}

/// Forwards queries to an oracle while counting the ones made through it.
pub(crate) struct Metered<'a> {
    oracle: &'a dyn Oracle,
    count: u64,
}

impl<'a> Metered<'a> {
    pub fn new(oracle: &'a dyn Oracle) -> Self {
        Self { oracle, count: 0 }
    }

    pub fn query(&mut self, z: &Point) -> Result<ClassLabel> {
        let l = self.oracle.query(z)?;
        self.count += 1;
        Ok(l)
    }

    pub fn count(&self) -> u64 {
        self.count
    }
}
