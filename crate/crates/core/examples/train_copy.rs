//! Trains every copy architecture on the same sampled data and round-trips
//! one model through its JSON container.

use copysample::copy::{disagreement, train, Arch, CopyModel, TrainConfig};
use copysample::oracle::AnalyticOracle;
use copysample::rng::RandomSource;
use copysample::sampler::random_sampler;

fn main() -> copysample::Result<()> {
    let oracle = AnalyticOracle::circles(vec![0.5, 0.5], vec![0.3])?;
    let train_set = random_sampler(2_000, &oracle, &mut RandomSource::new(1))?;
    let held_out = random_sampler(5_000, &oracle, &mut RandomSource::new(2))?;
    let cfg = TrainConfig::default();

    for arch in Arch::ALL {
        let model = train(arch, &train_set, &cfg)?;
        println!(
            "{arch:>4}: training error {:.4}, held-out disagreement {:.4}",
            model.train_meta.training_error,
            disagreement(&model, held_out.samples())
        );
    }

    let model = train(Arch::Dt, &train_set, &cfg)?;
    let path = std::env::temp_dir().join("copysample-example-dt.json");
    model.save(&path)?;
    let back = CopyModel::load(&path)?;
    assert_eq!(back, model);
    println!("saved and reloaded {} (identical)", path.display());
    Ok(())
}
