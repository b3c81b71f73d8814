use crate::dataset::SyntheticDataset;
use crate::error::{Error, Result};
use crate::oracle::{Metered, Oracle};
use crate::rng::RandomSource;
use crate::space::{LabeledSample, SampleSpace};

pub const RANDOM_ID: &str = "random";

/// `n` i.i.d. uniform points, each labelled by one query. The stream is
/// accumulative: a smaller run is a prefix of a larger one with the same seed.
pub fn random_sampler(
    n: usize,
    oracle: &dyn Oracle,
    rng: &mut RandomSource,
) -> Result<SyntheticDataset> {
    random_sampler_observed(n, oracle, rng, &mut |_| {})
}

pub fn random_sampler_observed(
    n: usize,
    oracle: &dyn Oracle,
    rng: &mut RandomSource,
    observe: &mut dyn FnMut(usize),
) -> Result<SyntheticDataset> {
    if n == 0 {
        return Err(Error::Precondition("sample budget must be >= 1".into()));
    }
    let space = SampleSpace::new(oracle.dim())?;
    let mut metered = Metered::new(oracle);
    let mut ds = SyntheticDataset::new(RANDOM_ID, rng.seed(), oracle.dim(), oracle.num_classes());
    for i in 0..n {
        let z = space.uniform_sample(rng);
        let y = metered.query(&z)?;
        ds.push(LabeledSample::new(z, y))?;
        observe(i + 1);
    }
    ds.query_count = metered.count();
    Ok(ds)
}
