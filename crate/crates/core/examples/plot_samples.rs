//! Writes one SVG per sampling method over the spiral oracle's boundary.

use copysample::harness::plot_2d;
use copysample::oracle::AnalyticOracle;
use copysample::rng::RandomSource;
use copysample::sampler::{generate, Method, SamplerSettings};

fn main() -> copysample::Result<()> {
    let oracle = AnalyticOracle::spiral(1.5)?;
    let dir = std::env::temp_dir().join("copysample-plots");
    std::fs::create_dir_all(&dir)?;
    for method in Method::ALL {
        let ds = generate(
            method,
            600,
            &oracle,
            &SamplerSettings::default(),
            &mut RandomSource::new(2),
            &mut |_| {},
        )?;
        let path = dir.join(format!("{method}.svg"));
        plot_2d(&ds, Some(&oracle), &path)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}
