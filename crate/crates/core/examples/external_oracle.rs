//! Talks to a classifier in another process over the line protocol.
//!
//! Run without arguments: the example re-launches itself with `--serve` as
//! the server, then samples and copies through the pipe.

use std::io::{stdin, stdout};

use copysample::copy::{train, Arch, TrainConfig};
use copysample::metrics::balanced_empirical_fidelity_error;
use copysample::oracle::{serve, AnalyticOracle, ExternalOracle, Oracle};
use copysample::rng::RandomSource;
use copysample::sampler::random_sampler;

fn hidden_model() -> copysample::Result<AnalyticOracle> {
    AnalyticOracle::halfspace(vec![0.8, -0.3, 0.5], 0.5)
}

fn main() -> copysample::Result<()> {
    if std::env::args().nth(1).as_deref() == Some("--serve") {
        let answered = serve(&hidden_model()?, stdin().lock(), stdout().lock())?;
        eprintln!("server answered {answered} queries");
        return Ok(());
    }

    let exe = std::env::current_exe()?;
    let remote =
        ExternalOracle::spawn(exe.to_str().expect("utf-8 path"), &["--serve".to_string()])?;
    println!("connected: d={} k={}", remote.dim(), remote.num_classes());
    let ds = random_sampler(500, &remote, &mut RandomSource::new(3))?;
    remote.close()?;

    let model = train(Arch::Lr, &ds, &TrainConfig::default())?;
    let local = hidden_model()?;
    let check = random_sampler(5_000, &local, &mut RandomSource::new(4))?;
    let err = balanced_empirical_fidelity_error(&model, check.samples(), 2)?;
    println!(
        "{} remote queries; LR copy balanced error {err:.4}",
        ds.query_count
    );
    Ok(())
}
