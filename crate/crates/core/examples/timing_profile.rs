//! Elapsed time at sample-count checkpoints for each method, as CSV.

use copysample::harness::{timing_profile, timing_to_csv};
use copysample::oracle::AnalyticOracle;
use copysample::rng::RandomSource;
use copysample::sampler::{Method, SamplerSettings};

fn main() -> copysample::Result<()> {
    let oracle = AnalyticOracle::circles(vec![0.5, 0.5], vec![0.25])?;
    let settings = SamplerSettings::default();
    let checkpoints = [250, 500, 1_000];
    let profiles = Method::ALL
        .into_iter()
        .map(|m| {
            timing_profile(
                m,
                &checkpoints,
                &oracle,
                &settings,
                &mut RandomSource::new(0),
            )
        })
        .collect::<copysample::Result<Vec<_>>>()?;
    print!("{}", timing_to_csv(&profiles));
    Ok(())
}
