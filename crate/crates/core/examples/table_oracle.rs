//! An oracle backed by a labeled CSV: queries go to the nearest stored row.

use copysample::copy::{train, Arch, TrainConfig};
use copysample::dataset::samples_to_csv;
use copysample::metrics::balanced_empirical_fidelity_error;
use copysample::oracle::{AnalyticOracle, Oracle, TableOracle};
use copysample::rng::RandomSource;
use copysample::sampler::{boundary_sampler, random_sampler, BoundaryParams};

fn main() -> copysample::Result<()> {
    // Stand-in for a real labeled dataset.
    let source = AnalyticOracle::checkerboard(2, 3)?;
    let table = random_sampler(3_000, &source, &mut RandomSource::new(0))?;
    let path = std::env::temp_dir().join("copysample-table.csv");
    std::fs::write(&path, samples_to_csv(2, table.samples()))?;

    let oracle = TableOracle::from_csv(&path)?;
    println!(
        "table oracle from {}: d={} k={}, {} rows",
        path.display(),
        oracle.dim(),
        oracle.num_classes(),
        oracle.rows().len()
    );

    let ds = boundary_sampler(
        1_500,
        &oracle,
        &BoundaryParams::for_budget(1_500),
        &mut RandomSource::new(1),
    )?;
    let model = train(Arch::Dt, &ds, &TrainConfig::default())?;
    let err = balanced_empirical_fidelity_error(&model, oracle.rows(), oracle.num_classes())?;
    println!(
        "DT copy from {} boundary samples: balanced error on the table {err:.4}",
        ds.len()
    );
    Ok(())
}
