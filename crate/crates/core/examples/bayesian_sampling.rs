//! Batched Bayesian sampling next to the unbatched reference sampler, and a
//! look at the acquisition on a small posterior.

use std::time::Instant;

use copysample::gp::{
    acquisition, fast_bayesian_sampler, reference_bayesian_sampler, AcquisitionParams,
    FastBayesParams, GpPosterior, SeKernel,
};
use copysample::oracle::{AnalyticOracle, Oracle};
use copysample::rng::RandomSource;

fn main() -> copysample::Result<()> {
    let oracle = AnalyticOracle::circles(vec![0.5, 0.5], vec![0.2, 0.4])?;
    let kernel = SeKernel::for_problem(oracle.dim(), oracle.num_classes());
    let acq = AcquisitionParams::default();

    let t = Instant::now();
    let fast = fast_bayesian_sampler(
        300,
        &oracle,
        &FastBayesParams::default(),
        kernel,
        &acq,
        &mut RandomSource::new(5),
    )?;
    println!(
        "fast: {} samples in {:.2}s, notes {:?}",
        fast.len(),
        t.elapsed().as_secs_f64(),
        fast.notes
    );

    let t = Instant::now();
    let slow = reference_bayesian_sampler(60, &oracle, kernel, &acq, &mut RandomSource::new(5))?;
    println!(
        "reference: {} samples in {:.2}s",
        slow.len(),
        t.elapsed().as_secs_f64()
    );

    // Uncertainty is highest away from the data and where the mean sits between classes.
    let gp = GpPosterior::fit(&fast.samples()[..40], kernel)?;
    for z in [[0.5, 0.5], [0.5, 0.7], [0.02, 0.98]] {
        let (mean, var) = gp.mean_var(&z);
        println!(
            "z={z:?} mean={mean:.3} var={var:.2e} acquisition={:.2e}",
            acquisition(&gp, &z, &acq)
        );
    }
    Ok(())
}
