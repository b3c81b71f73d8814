//! Boundary sampling on concentric circles. Reports how close the search half
//! lands to the true boundary, next to uniform sampling for scale.

use copysample::oracle::AnalyticOracle;
use copysample::rng::RandomSource;
use copysample::sampler::{boundary_sampler, is_boundary_slot, random_sampler, BoundaryParams};
use copysample::space::LabeledSample;

fn near_share<'a>(
    oracle: &AnalyticOracle,
    samples: impl Iterator<Item = &'a LabeledSample>,
    band: f64,
) -> f64 {
    let (mut near, mut total) = (0usize, 0usize);
    for s in samples {
        total += 1;
        near += usize::from(oracle.boundary_distance(&s.point).unwrap() < band);
    }
    near as f64 / total as f64
}

fn main() -> copysample::Result<()> {
    let oracle = AnalyticOracle::circles(vec![0.5, 0.5], vec![0.25])?;
    let n = 2_000;
    let params = BoundaryParams::for_budget(n);
    println!(
        "runs={} threads={} steps={} step={} epsilon={}",
        params.runs, params.max_threads, params.max_steps, params.step, params.epsilon
    );

    let ds = boundary_sampler(n, &oracle, &params, &mut RandomSource::new(3))?;
    let band = 2.0 * params.step;
    let search = ds
        .samples()
        .iter()
        .enumerate()
        .filter(|(i, _)| is_boundary_slot(*i))
        .map(|(_, s)| s);
    println!(
        "boundary search half within {band} of the boundary: {:.1}%",
        100.0 * near_share(&oracle, search, band)
    );
    for (key, value) in &ds.notes {
        println!("  {key}: {value}");
    }

    let uniform = random_sampler(n, &oracle, &mut RandomSource::new(3))?;
    println!(
        "uniform sampling within {band}: {:.1}%",
        100.0 * near_share(&oracle, uniform.samples().iter(), band)
    );
    Ok(())
}
