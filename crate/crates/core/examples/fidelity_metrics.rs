//! Plain and balanced fidelity error of copies trained on an imbalanced
//! problem, measured against a balanced reference set.

use copysample::copy::{train, Arch, CopyModel, TrainConfig};
use copysample::metrics::{
    balanced_empirical_fidelity_error, build_reference_set, empirical_fidelity_error,
    quality_checks,
};
use copysample::oracle::AnalyticOracle;
use copysample::rng::RandomSource;
use copysample::sampler::random_sampler;

fn main() -> copysample::Result<()> {
    // A small disc: about 7% of the cube is class 0.
    let oracle = AnalyticOracle::circles(vec![0.3, 0.3], vec![0.15])?;
    let reference = build_reference_set(
        &oracle,
        20_000,
        true,
        &mut RandomSource::new(100),
        2_000_000,
    )?;
    println!(
        "reference: {} points, per class {:?}, {} draws",
        reference.len(),
        reference.per_class_counts,
        reference.attempts
    );

    let majority = CopyModel::constant(Arch::Lr, 2, 2, 1);
    println!(
        "constant copy: R_F={:.3} R_Fb={:.3}",
        empirical_fidelity_error(&majority, &reference.samples)?,
        balanced_empirical_fidelity_error(&majority, &reference.samples, 2)?
    );

    let data = random_sampler(1_000, &oracle, &mut RandomSource::new(4))?;
    for arch in [Arch::Lr, Arch::Dt] {
        let model = train(arch, &data, &TrainConfig::default())?;
        println!(
            "{arch}: R_F={:.4} R_Fb={:.4}",
            empirical_fidelity_error(&model, &reference.samples)?,
            balanced_empirical_fidelity_error(&model, &reference.samples, 2)?
        );
    }

    // Can a DT learn the oracle at all when it sees the reference set itself?
    let originals: Vec<Vec<f64>> = data
        .samples()
        .iter()
        .map(|s| s.point.coords().to_vec())
        .collect();
    let check = quality_checks(
        &reference,
        &originals,
        &oracle,
        Arch::Dt,
        &TrainConfig::default(),
    )?;
    println!("quality check: {check:?}");
    Ok(())
}
