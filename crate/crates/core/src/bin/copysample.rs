use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use copysample::copy::{self, Arch, CopyModel, TrainConfig};
use copysample::dataset::SyntheticDataset;
use copysample::harness::{self, ExperimentConfig, OracleSource};
use copysample::metrics::{self, balanced_empirical_fidelity_error, empirical_fidelity_error};
use copysample::oracle::{serve, AnalyticOracle};
use copysample::rng::RandomSource;
use copysample::sampler::{generate, Method};
use copysample::{Error, Result};

#[derive(Parser)]
#[command(
    name = "copysample",
    version,
    about = "Synthetic sampling for copying black-box classifiers"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Experiment configuration (TOML).
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic dataset from the configured oracle.
    Sample {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        method: Method,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train a copy model on a synthetic dataset.
    Copy {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        arch: Arch,
        #[arg(long)]
        out: PathBuf,
    },
    /// Measure a copy against the oracle on a reference set.
    Evaluate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        model: PathBuf,
        /// Existing reference set; built from the config when absent.
        #[arg(long)]
        reference: Option<PathBuf>,
    },
    /// Victory/tie/loss matrix from a report CSV.
    Compare {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        reports: PathBuf,
        #[arg(long)]
        tie_margin: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Time a sampler at decade checkpoints up to N.
    Profile {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        method: Vec<Method>,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Scatter plot of a 2-D dataset, with the true boundary when known.
    Plot {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Full sweep: sample, copy, evaluate, compare, profile.
    Run {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Answer oracle queries on stdin/stdout.
    #[command(hide = true)]
    Serve {
        #[command(flatten)]
        common: Common,
    },
}

fn load_config(common: &Common) -> Result<ExperimentConfig> {
    let path = common
        .config
        .as_deref()
        .ok_or_else(|| Error::Config("--config is required for this command".into()))?;
    let mut cfg = ExperimentConfig::load(path)?;
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

fn train_config(common: &Common) -> Result<TrainConfig> {
    let mut t = match &common.config {
        Some(p) => ExperimentConfig::load(p)?.train,
        None => TrainConfig::default(),
    };
    if let Some(s) = common.seed {
        t.seed = s;
    }
    Ok(t)
}

fn analytic(cfg: &ExperimentConfig) -> Result<Option<AnalyticOracle>> {
    match &cfg.oracle.source {
        OracleSource::Analytic { dim, variant } => {
            Ok(Some(AnalyticOracle::new(*dim, variant.clone())?))
        }
        _ => Ok(None),
    }
}

fn decade_checkpoints(n: usize) -> Vec<usize> {
    let mut v = Vec::new();
    let mut c = 10;
    while c < n {
        v.push(c);
        c *= 10;
    }
    v.push(n);
    v
}

fn execute(cmd: Command) -> Result<ExitCode> {
    match cmd {
        Command::Sample {
            common,
            method,
            n,
            out,
        } => {
            let cfg = load_config(&common)?;
            let oracle = cfg.oracle.build()?;
            let mut rng = RandomSource::new(cfg.seed);
            let ds = generate(
                method,
                n,
                oracle.as_ref(),
                &cfg.sampler,
                &mut rng,
                &mut |_| {},
            )?;
            ds.save(&out)?;
            println!(
                "{} samples, {} queries -> {}",
                ds.len(),
                ds.query_count,
                out.display()
            );
        }
        Command::Copy {
            common,
            data,
            arch,
            out,
        } => {
            let ds = SyntheticDataset::load(&data)?;
            let model = copy::train(arch, &ds, &train_config(&common)?)?;
            model.save(&out)?;
            println!(
                "{arch} copy, training error {} -> {}",
                model.train_meta.training_error,
                out.display()
            );
        }
        Command::Evaluate {
            common,
            model,
            reference,
        } => {
            let model = CopyModel::load(&model)?;
            let truth = match reference {
                Some(p) => SyntheticDataset::load(&p)?,
                None => {
                    let cfg = load_config(&common)?;
                    let oracle = cfg.oracle.build()?;
                    let r = &cfg.reference;
                    let mut rng = RandomSource::new(cfg.seed.wrapping_add(r.seed_offset));
                    let set = metrics::build_reference_set(
                        oracle.as_ref(),
                        r.size,
                        r.balanced,
                        &mut rng,
                        r.attempts_per_point.saturating_mul(r.size as u64),
                    )?;
                    if let Some(w) = &set.warning {
                        eprintln!("warning: {w}");
                    }
                    SyntheticDataset::from_samples(
                        "reference",
                        cfg.seed,
                        oracle.dim(),
                        oracle.num_classes(),
                        set.samples,
                        set.attempts,
                    )?
                }
            };
            let r_f = empirical_fidelity_error(&model, truth.samples())?;
            let r_fb = balanced_empirical_fidelity_error(&model, truth.samples(), truth.classes())?;
            println!("R_F={r_f}\nR_Fb={r_fb}");
        }
        Command::Compare {
            common,
            reports,
            tie_margin,
            out,
        } => {
            let margin = match (tie_margin, &common.config) {
                (Some(m), _) => m,
                (None, Some(_)) => load_config(&common)?.tie_margin,
                (None, None) => metrics::DEFAULT_TIE_MARGIN,
            };
            let rows = metrics::read_reports(&reports)?;
            let cmp = metrics::compare_methods(&rows, margin)?;
            write_file(&out, &metrics::comparison_to_csv(&cmp))?;
            print!("{}", metrics::comparison_to_csv(&cmp));
        }
        Command::Profile {
            common,
            method,
            n,
            out,
        } => {
            let cfg = load_config(&common)?;
            let oracle = cfg.oracle.build()?;
            let methods = if method.is_empty() {
                Method::ALL.to_vec()
            } else {
                method
            };
            let checkpoints = decade_checkpoints(n);
            let mut profiles = Vec::new();
            for m in methods {
                let mut rng = RandomSource::new(cfg.seed);
                profiles.push(harness::timing_profile(
                    m,
                    &checkpoints,
                    oracle.as_ref(),
                    &cfg.sampler,
                    &mut rng,
                )?);
            }
            harness::write_timing(&out, &profiles)?;
            print!("{}", harness::timing_to_csv(&profiles));
        }
        Command::Plot { common, data, out } => {
            let ds = SyntheticDataset::load(&data)?;
            let overlay = match &common.config {
                Some(_) => analytic(&load_config(&common)?)?,
                None => None,
            };
            harness::plot_2d(&ds, overlay.as_ref(), &out)?;
            println!("{} points -> {}", ds.len(), out.display());
        }
        Command::Run {
            common,
            out,
            workers,
        } => {
            let mut cfg = load_config(&common)?;
            if let Some(w) = workers {
                cfg.workers = w;
            }
            let summary = harness::run_experiment(&cfg, &out)?;
            println!(
                "cells computed {}, skipped {}, failed {}; {} report rows in {}",
                summary.computed,
                summary.skipped,
                summary.failures.len(),
                summary.report_rows,
                out.display()
            );
            for f in &summary.failures {
                eprintln!("failed {}: {}", f.cell.stem(), f.error);
            }
            if !summary.succeeded() {
                return Ok(ExitCode::from(1));
            }
        }
        Command::Serve { common } => {
            let cfg = load_config(&common)?;
            let oracle = cfg.oracle.build()?;
            let stdin = std::io::stdin();
            serve(oracle.as_ref(), stdin.lock(), std::io::stdout().lock())?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(Error::from)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Config(_) => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}
