//! Jacobian-based augmentation on a halfspace oracle. Every augmented point
//! moves by the step size along a sign pattern of the substitute's gradient.

use std::collections::BTreeMap;

use copysample::oracle::AnalyticOracle;
use copysample::rng::RandomSource;
use copysample::sampler::{jacobian_sampler_traced, JacobianParams};

fn main() -> copysample::Result<()> {
    let oracle = AnalyticOracle::halfspace(vec![1.0, -2.0], -0.5)?;
    let params = JacobianParams::for_budget(1_000);
    let (ds, trace) = jacobian_sampler_traced(1_000, &oracle, &params, &mut RandomSource::new(9))?;
    println!(
        "{} samples, {} refits ({} skipped), class counts {:?}",
        ds.len(),
        trace.refits_done,
        trace.refits_skipped,
        ds.class_counts()
    );

    let mut patterns: BTreeMap<String, usize> = BTreeMap::new();
    for offset in &trace.offsets {
        let key: String = offset
            .iter()
            .map(|v| match v.partial_cmp(&0.0) {
                Some(std::cmp::Ordering::Greater) => '+',
                Some(std::cmp::Ordering::Less) => '-',
                _ => '0',
            })
            .collect();
        *patterns.entry(key).or_default() += 1;
    }
    println!("offset sign patterns: {patterns:?}");
    Ok(())
}
