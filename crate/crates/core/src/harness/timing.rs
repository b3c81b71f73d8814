use std::path::Path;
use std::time::Instant;

use crate::dataset::write_atomic;
use crate::error::{Error, Result};
use crate::oracle::Oracle;
use crate::rng::RandomSource;
use crate::sampler::{generate, Method, SamplerSettings};

pub const TIMING_HEADER: &str = "method,sample_count,elapsed_s";

/// Elapsed wall time at sample-count checkpoints of one generation run.
#[derive(Debug, Clone, PartialEq)]
pub struct TimingProfile {
    pub method: Method,
    pub checkpoints: Vec<(usize, f64)>,
}

impl TimingProfile {
    pub fn elapsed_at(&self, count: usize) -> Option<f64> {
        self.checkpoints
            .iter()
            .find(|(c, _)| *c == count)
            .map(|(_, t)| *t)
    }
}

/// Generates `max(checkpoints)` samples once, stamping the clock whenever
/// the running count reaches a checkpoint.
pub fn timing_profile(
    method: Method,
    checkpoints: &[usize],
    oracle: &dyn Oracle,
    settings: &SamplerSettings,
    rng: &mut RandomSource,
) -> Result<TimingProfile> {
    if checkpoints.is_empty() || checkpoints.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Precondition(
            "checkpoints must be non-empty and ascending".into(),
        ));
    }
    let n = *checkpoints.last().expect("non-empty");
    let mut stamps = Vec::with_capacity(checkpoints.len());
    let mut next = 0;
    let start = Instant::now();
    generate(method, n, oracle, settings, rng, &mut |count| {
        while next < checkpoints.len() && count >= checkpoints[next] {
            stamps.push((checkpoints[next], start.elapsed().as_secs_f64()));
            next += 1;
        }
    })?;
    Ok(TimingProfile {
        method,
        checkpoints: stamps,
    })
}

pub fn timing_to_csv(profiles: &[TimingProfile]) -> String {
    let mut s = format!("{TIMING_HEADER}\n");
    for p in profiles {
        for (c, t) in &p.checkpoints {
            s.push_str(&format!("{},{c},{t}\n", p.method));
        }
    }
    s
}

pub fn write_timing(path: &Path, profiles: &[TimingProfile]) -> Result<()> {
    write_atomic(path, timing_to_csv(profiles).as_bytes())
}
