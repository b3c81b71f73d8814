//! Uniform sampling of a checkerboard oracle, plus prefix reuse.

use copysample::oracle::{AnalyticOracle, Oracle};
use copysample::rng::RandomSource;
use copysample::sampler::random_sampler;

fn main() -> copysample::Result<()> {
    let oracle = AnalyticOracle::checkerboard(3, 2)?;
    let ds = random_sampler(4_000, &oracle, &mut RandomSource::new(7))?;
    println!(
        "{} samples, {} queries, class counts {:?}",
        ds.len(),
        ds.query_count,
        ds.class_counts()
    );

    // Smaller budgets are prefixes of the same stream.
    let small = random_sampler(100, &oracle, &mut RandomSource::new(7))?;
    assert_eq!(small.samples(), ds.prefix(100)?.samples());
    println!(
        "first 100 samples match the N=100 run; oracle answered {} queries in total",
        oracle.query_count()
    );
    Ok(())
}
