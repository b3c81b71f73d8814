//! A hand-rolled miniature sweep: every method, one copy architecture, a
//! few seeds, then pairwise victories/ties/losses.

use copysample::copy::{train, Arch, TrainConfig};
use copysample::metrics::{
    balanced_empirical_fidelity_error, build_reference_set, compare_methods, comparison_to_csv,
    empirical_fidelity_error, summarize, ReportRow, DEFAULT_TIE_MARGIN,
};
use copysample::oracle::{AnalyticOracle, Oracle};
use copysample::rng::RandomSource;
use copysample::sampler::{generate, Method, SamplerSettings};

fn main() -> copysample::Result<()> {
    let oracle = AnalyticOracle::circles(vec![0.5, 0.5], vec![0.25])?;
    let reference = build_reference_set(
        &oracle,
        10_000,
        true,
        &mut RandomSource::new(999),
        1_000_000,
    )?;
    let settings = SamplerSettings::default();
    let n = 400;

    let mut rows = Vec::new();
    for method in Method::ALL {
        for seed in 0..4 {
            let ds = generate(
                method,
                n,
                &oracle,
                &settings,
                &mut RandomSource::new(seed),
                &mut |_| {},
            )?;
            let model = train(
                Arch::Dt,
                &ds,
                &TrainConfig {
                    seed,
                    ..TrainConfig::default()
                },
            )?;
            rows.push(ReportRow {
                oracle: "circles".into(),
                method: method.name().into(),
                arch: Arch::Dt.name().into(),
                n,
                seed,
                r_f: empirical_fidelity_error(&model, &reference.samples)?,
                r_fb: balanced_empirical_fidelity_error(
                    &model,
                    &reference.samples,
                    oracle.num_classes(),
                )?,
                wall_time_s: None,
            });
        }
    }

    for r in summarize(&rows) {
        println!(
            "{:>9}: median R_Fb {:.4} (p20 {:.4}, p80 {:.4})",
            r.method, r.r_fb_p50, r.r_fb_p20, r.r_fb_p80
        );
    }
    print!(
        "{}",
        comparison_to_csv(&compare_methods(&rows, DEFAULT_TIE_MARGIN)?)
    );
    Ok(())
}
