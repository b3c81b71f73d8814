//! Experiment plumbing: configuration, resumable sweeps, timing profiles
//! and SVG plots.

pub mod config;
pub mod plot;
pub mod runner;
pub mod timing;

pub use config::{ExperimentConfig, OracleSource, OracleSpec, ProfileConfig, ReferenceConfig};
pub use plot::{plot_2d, render_svg};
pub use runner::{run_experiment, CellFailure, CellId, RunSummary};
pub use timing::{timing_profile, timing_to_csv, write_timing, TimingProfile, TIMING_HEADER};
