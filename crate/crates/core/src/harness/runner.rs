//! Resumable experiment sweeps.
//!
//! Output directory layout:
//!
//! ```text
//! resolved_config.toml      exact configuration used, replayable
//! reference.csv (+ .meta.json)
//! datasets/<method>-s<seed>.csv (+ .meta.json)   largest-N synthetic set
//! cells/<method>-<arch>-n<N>-s<seed>.json        one finished report row
//! failures/<same stem>.txt                       error text of a failed cell
//! reports.csv  summary.csv  comparison.csv  timing.csv
//! ```
//!
//! A cell whose JSON file exists is never recomputed, and a dataset is
//! generated only if some cell that needs it is missing.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use log::{info, warn};
use rayon::prelude::*;

use super::config::ExperimentConfig;
use super::timing::{timing_profile, write_timing};
use crate::copy::{self, Arch, TrainConfig};
use crate::dataset::{write_atomic, SyntheticDataset};
use crate::error::{Error, Result};
use crate::metrics::{
    self, balanced_empirical_fidelity_error, build_reference_set, empirical_fidelity_error,
    ReportRow,
};
use crate::oracle::Oracle;
use crate::rng::RandomSource;
use crate::sampler::{generate, Method};

pub const CONFIG_ECHO: &str = "resolved_config.toml";
pub const REFERENCE_FILE: &str = "reference.csv";
pub const REPORTS_FILE: &str = "reports.csv";
pub const SUMMARY_FILE: &str = "summary.csv";
pub const COMPARISON_FILE: &str = "comparison.csv";
pub const TIMING_FILE: &str = "timing.csv";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CellId {
    pub method: Method,
    pub arch: Arch,
    pub n: usize,
    pub seed: u64,
}

impl CellId {
    pub fn stem(&self) -> String {
        format!("{}-{}-n{}-s{}", self.method, self.arch, self.n, self.seed)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellFailure {
    pub cell: CellId,
    pub error: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunSummary {
    /// Cells evaluated during this run.
    pub computed: usize,
    /// Cells already on disk.
    pub skipped: usize,
    /// Synthetic datasets generated during this run.
    pub datasets_generated: usize,
    pub reference_built: bool,
    pub failures: Vec<CellFailure>,
    pub report_rows: usize,
}

impl RunSummary {
    pub fn succeeded(&self) -> bool {
        self.failures.is_empty()
    }
}

struct Job {
    method: Method,
    seed: u64,
    cells: Vec<CellId>,
}

fn jobs(cfg: &ExperimentConfig) -> Vec<Job> {
    let mut out = Vec::new();
    for &method in &cfg.methods {
        for rep in 0..cfg.repetitions_for(method) {
            let seed = cfg.seed + rep as u64;
            let mut cells = Vec::new();
            for &arch in &cfg.archs {
                for &n in &cfg.n_grid {
                    cells.push(CellId {
                        method,
                        arch,
                        n,
                        seed,
                    });
                }
            }
            out.push(Job {
                method,
                seed,
                cells,
            });
        }
    }
    out
}

/// Runs (or resumes) the sweep described by `cfg`, writing into `out`.
/// Cell failures are collected in the summary rather than returned as
/// errors; an `Err` means the run could not proceed at all.
pub fn run_experiment(cfg: &ExperimentConfig, out: &Path) -> Result<RunSummary> {
    cfg.validate()?;
    fs::create_dir_all(out.join("cells"))?;
    fs::create_dir_all(out.join("datasets"))?;
    fs::create_dir_all(out.join("failures"))?;
    echo_config(cfg, out)?;

    let oracle = cfg.oracle.build()?;
    let workers = if oracle.is_serial() || cfg.oracle.is_external() {
        1
    } else {
        cfg.workers
    };
    let mut summary = RunSummary::default();

    let (reference, built) = reference_set(cfg, oracle.as_ref(), out)?;
    summary.reference_built = built;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Config(format!("cannot start {workers} workers: {e}")))?;
    let all_jobs = jobs(cfg);
    let outcomes: Vec<JobOutcome> = pool.install(|| {
        all_jobs
            .par_iter()
            .map(|job| run_job(cfg, oracle.as_ref(), &reference, job, out))
            .collect()
    });
    for o in outcomes {
        summary.computed += o.computed;
        summary.skipped += o.skipped;
        summary.datasets_generated += usize::from(o.generated);
        summary.failures.extend(o.failures);
    }

    let mut rows = Vec::new();
    for job in &all_jobs {
        for cell in &job.cells {
            let path = cell_path(out, cell);
            if path.exists() {
                rows.push(read_cell(&path)?);
            }
        }
    }
    summary.report_rows = rows.len();
    metrics::write_reports(&out.join(REPORTS_FILE), &rows)?;
    write_atomic(&out.join(SUMMARY_FILE), summary_csv(&rows).as_bytes())?;
    if cfg.methods.len() >= 2 {
        match metrics::compare_methods(&rows, cfg.tie_margin) {
            Ok(cmp) => write_atomic(
                &out.join(COMPARISON_FILE),
                metrics::comparison_to_csv(&cmp).as_bytes(),
            )?,
            Err(e) => warn!("comparison skipped: {e}"),
        }
    }

    if let Some(profile) = &cfg.profile {
        let path = out.join(TIMING_FILE);
        if !path.exists() {
            let mut profiles = Vec::new();
            for &m in &profile.methods {
                let mut rng = RandomSource::new(cfg.seed);
                profiles.push(timing_profile(
                    m,
                    &profile.checkpoints,
                    oracle.as_ref(),
                    &cfg.sampler,
                    &mut rng,
                )?);
            }
            write_timing(&path, &profiles)?;
        }
    }
    info!(
        "run finished: {} computed, {} skipped, {} failed",
        summary.computed,
        summary.skipped,
        summary.failures.len()
    );
    Ok(summary)
}

fn echo_config(cfg: &ExperimentConfig, out: &Path) -> Result<()> {
    let path = out.join(CONFIG_ECHO);
    let text = cfg.to_toml();
    if path.exists() {
        let existing = fs::read_to_string(&path)?;
        if existing != text {
            return Err(Error::Config(format!(
                "{} was produced by a different configuration; use a fresh output directory",
                out.display()
            )));
        }
        return Ok(());
    }
    write_atomic(&path, text.as_bytes())
}

fn reference_set(
    cfg: &ExperimentConfig,
    oracle: &dyn Oracle,
    out: &Path,
) -> Result<(SyntheticDataset, bool)> {
    let path = out.join(REFERENCE_FILE);
    if path.exists() {
        return Ok((SyntheticDataset::load(&path)?, false));
    }
    let mut rng = RandomSource::new(cfg.seed.wrapping_add(cfg.reference.seed_offset));
    let r = &cfg.reference;
    let set = build_reference_set(
        oracle,
        r.size,
        r.balanced,
        &mut rng,
        r.attempts_per_point.saturating_mul(r.size as u64),
    )?;
    let mut ds = SyntheticDataset::from_samples(
        "reference",
        rng.seed(),
        oracle.dim(),
        oracle.num_classes(),
        set.samples,
        set.attempts,
    )?;
    ds.notes.insert("balanced".into(), r.balanced.to_string());
    if let Some(w) = set.warning {
        ds.notes.insert("warning".into(), w);
    }
    ds.save(&path)?;
    Ok((ds, true))
}

fn cell_path(out: &Path, cell: &CellId) -> PathBuf {
    out.join("cells").join(format!("{}.json", cell.stem()))
}

fn failure_path(out: &Path, cell: &CellId) -> PathBuf {
    out.join("failures").join(format!("{}.txt", cell.stem()))
}

fn read_cell(path: &Path) -> Result<ReportRow> {
    Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
}

fn dataset_path(out: &Path, method: Method, seed: u64) -> PathBuf {
    out.join("datasets").join(format!("{method}-s{seed}.csv"))
}

const ELAPSED_NOTE: &str = "elapsed_s_at_";

#[derive(Default)]
struct JobOutcome {
    computed: usize,
    skipped: usize,
    generated: bool,
    failures: Vec<CellFailure>,
}

fn run_job(
    cfg: &ExperimentConfig,
    oracle: &dyn Oracle,
    reference: &SyntheticDataset,
    job: &Job,
    out: &Path,
) -> JobOutcome {
    let mut outcome = JobOutcome::default();
    let pending: Vec<&CellId> = job
        .cells
        .iter()
        .filter(|c| !cell_path(out, c).exists())
        .collect();
    outcome.skipped = job.cells.len() - pending.len();
    if pending.is_empty() {
        return outcome;
    }
    let fail_all = |outcome: &mut JobOutcome, msg: String| {
        for c in &pending {
            let _ = write_atomic(&failure_path(out, c), msg.as_bytes());
            outcome.failures.push(CellFailure {
                cell: (*c).clone(),
                error: msg.clone(),
            });
        }
    };
    let dataset = match job_dataset(cfg, oracle, job, out) {
        Ok((ds, generated)) => {
            outcome.generated = generated;
            ds
        }
        Err(e) => {
            fail_all(&mut outcome, format!("dataset generation failed: {e}"));
            return outcome;
        }
    };
    for cell in pending {
        match evaluate_cell(cfg, reference, &dataset, cell) {
            Ok(row) => {
                let text = serde_json::to_string(&row).expect("row serializes") + "\n";
                if let Err(e) = write_atomic(&cell_path(out, cell), text.as_bytes()) {
                    outcome.failures.push(CellFailure {
                        cell: cell.clone(),
                        error: e.to_string(),
                    });
                    continue;
                }
                let _ = fs::remove_file(failure_path(out, cell));
                outcome.computed += 1;
            }
            Err(e) => {
                warn!("cell {} failed: {e}", cell.stem());
                let _ = write_atomic(&failure_path(out, cell), e.to_string().as_bytes());
                outcome.failures.push(CellFailure {
                    cell: cell.clone(),
                    error: e.to_string(),
                });
            }
        }
    }
    outcome
}

fn job_dataset(
    cfg: &ExperimentConfig,
    oracle: &dyn Oracle,
    job: &Job,
    out: &Path,
) -> Result<(SyntheticDataset, bool)> {
    let path = dataset_path(out, job.method, job.seed);
    if path.exists() {
        return Ok((SyntheticDataset::load(&path)?, false));
    }
    let n = cfg.max_n();
    let mut rng = RandomSource::new(job.seed);
    let start = Instant::now();
    let mut stamps = Vec::new();
    let grid = &cfg.n_grid;
    let mut ds = generate(
        job.method,
        n,
        oracle,
        &cfg.sampler,
        &mut rng,
        &mut |count| {
            if grid.binary_search(&count).is_ok() {
                stamps.push((count, start.elapsed().as_secs_f64()));
            }
        },
    )?;
    if cfg.record_wall_time {
        for (count, t) in stamps {
            ds.notes
                .insert(format!("{ELAPSED_NOTE}{count}"), t.to_string());
        }
    }
    ds.save(&path)?;
    Ok((ds, true))
}

fn evaluate_cell(
    cfg: &ExperimentConfig,
    reference: &SyntheticDataset,
    dataset: &SyntheticDataset,
    cell: &CellId,
) -> Result<ReportRow> {
    let start = Instant::now();
    let prefix = dataset.prefix(cell.n)?;
    let train_cfg = TrainConfig {
        seed: cell.seed,
        ..cfg.train.clone()
    };
    let model = copy::train(cell.arch, &prefix, &train_cfg)?;
    let truth = reference.samples();
    let r_f = empirical_fidelity_error(&model, truth)?;
    let r_fb = balanced_empirical_fidelity_error(&model, truth, reference.classes())?;
    let wall_time_s = if cfg.record_wall_time {
        let sampling: f64 = dataset
            .notes
            .get(&format!("{ELAPSED_NOTE}{}", cell.n))
            .and_then(|v| v.parse().ok())
            .unwrap_or(0.0);
        Some(sampling + start.elapsed().as_secs_f64())
    } else {
        None
    };
    Ok(ReportRow {
        oracle: cfg.oracle.name.clone(),
        method: cell.method.to_string(),
        arch: cell.arch.to_string(),
        n: cell.n,
        seed: cell.seed,
        r_f,
        r_fb,
        wall_time_s,
    })
}

fn summary_csv(rows: &[ReportRow]) -> String {
    let mut s = String::from(
        "oracle,method,arch,N,repetitions,R_F_median,R_Fb_median,R_Fb_p20,R_Fb_p50,R_Fb_p80\n",
    );
    for r in metrics::summarize(rows) {
        s.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            r.oracle,
            r.method,
            r.arch,
            r.n,
            r.repetitions,
            r.r_f,
            r.r_fb,
            r.r_fb_p20,
            r.r_fb_p50,
            r.r_fb_p80
        ));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::ExperimentConfig;

    fn tiny() -> ExperimentConfig {
        let mut c = ExperimentConfig::parse(
            r#"
methods = ["random"]
archs = ["dt"]
n_grid = [100]
repetitions = 1
[reference]
size = 2000
[oracle]
name = "circles"
source = "analytic"
dim = 2
variant = { kind = "concentric_circles", center = [0.5, 0.5], radii = [0.25] }
"#,
        )
        .unwrap();
        c.seed = 7;
        c
    }

    #[test]
    fn one_cell_one_row_and_resume() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = tiny();
        let s = run_experiment(&cfg, dir.path()).unwrap();
        assert_eq!((s.computed, s.report_rows, s.datasets_generated), (1, 1, 1));
        assert!(s.succeeded());
        let first = fs::read(dir.path().join(REPORTS_FILE)).unwrap();
        let again = run_experiment(&cfg, dir.path()).unwrap();
        assert_eq!(
            (again.computed, again.skipped, again.datasets_generated),
            (0, 1, 0)
        );
        assert!(!again.reference_built);
        assert_eq!(fs::read(dir.path().join(REPORTS_FILE)).unwrap(), first);
        assert!(dir.path().join(CONFIG_ECHO).exists());
    }

    #[test]
    fn different_config_refused() {
        let dir = tempfile::tempdir().unwrap();
        run_experiment(&tiny(), dir.path()).unwrap();
        let mut other = tiny();
        other.seed = 8;
        assert!(matches!(
            run_experiment(&other, dir.path()),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn failing_cells_isolated() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = tiny();
        cfg.archs = vec![Arch::Dt, Arch::Lr];
        // a reference set missing a class makes every balanced metric fail
        cfg.oracle.source = crate::harness::config::OracleSource::Analytic {
            dim: 2,
            variant: crate::oracle::AnalyticVariant::ConcentricCircles {
                center: vec![0.5, 0.5],
                radii: vec![0.001],
            },
        };
        cfg.reference.attempts_per_point = 1;
        let s = run_experiment(&cfg, dir.path()).unwrap();
        assert_eq!(s.failures.len(), 2);
        assert_eq!(s.report_rows, 0);
        assert!(dir.path().join("failures").read_dir().unwrap().count() == 2);
    }
}
