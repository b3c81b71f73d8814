//! Experiment configuration, read from TOML.
//!
//! Only `[oracle]` is required. A minimal file:
//!
//! ```toml
//! [oracle]
//! name = "circles"
//! source = "analytic"
//! dim = 2
//! variant = { kind = "concentric_circles", center = [0.5, 0.5], radii = [0.25] }
//! ```
//!
//! Table oracles use `source = "table"` and `path = "rows.csv"` (relative
//! to the config file). External oracles use `source = "external"`,
//! `command = "..."` and optional `args = [...]`.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::copy::{Arch, TrainConfig};
use crate::error::{Error, Result};
use crate::metrics::DEFAULT_TIE_MARGIN;
use crate::oracle::{AnalyticOracle, AnalyticVariant, ExternalOracle, Oracle, TableOracle};
use crate::sampler::{Method, SamplerSettings};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum OracleSource {
    Analytic {
        dim: usize,
        variant: AnalyticVariant,
    },
    Table {
        path: PathBuf,
    },
    External {
        command: String,
        #[serde(default)]
        args: Vec<String>,
    },
}

const ORACLE_KEYS: [&str; 7] = [
    "name", "source", "dim", "variant", "path", "command", "args",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleSpec {
    /// Label used in report rows.
    pub name: String,
    #[serde(flatten)]
    pub source: OracleSource,
}

impl OracleSpec {
    pub fn build(&self) -> Result<Box<dyn Oracle>> {
        Ok(match &self.source {
            OracleSource::Analytic { dim, variant } => {
                Box::new(AnalyticOracle::new(*dim, variant.clone())?)
            }
            OracleSource::Table { path } => Box::new(TableOracle::from_csv(path)?),
            OracleSource::External { command, args } => {
                Box::new(ExternalOracle::spawn(command, args)?)
            }
        })
    }

    pub fn is_external(&self) -> bool {
        matches!(self.source, OracleSource::External { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReferenceConfig {
    pub size: usize,
    pub balanced: bool,
    /// Draw budget for balanced sets, as a multiple of `size`.
    pub attempts_per_point: u64,
    /// Offset added to the base seed for the reference stream.
    pub seed_offset: u64,
}

impl Default for ReferenceConfig {
    fn default() -> Self {
        Self {
            size: 100_000,
            balanced: true,
            attempts_per_point: 100,
            seed_offset: 1_000_003,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProfileConfig {
    pub methods: Vec<Method>,
    /// Ascending sample counts at which elapsed time is recorded.
    pub checkpoints: Vec<usize>,
}

impl Default for ProfileConfig {
    fn default() -> Self {
        Self {
            methods: vec![Method::Random, Method::Boundary, Method::Jacobian],
            checkpoints: vec![1_000, 10_000],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub oracle: OracleSpec,
    #[serde(default = "default_methods")]
    pub methods: Vec<Method>,
    #[serde(default = "default_archs")]
    pub archs: Vec<Arch>,
    #[serde(default = "default_n_grid")]
    pub n_grid: Vec<usize>,
    #[serde(default = "default_repetitions")]
    pub repetitions: usize,
    /// Repetitions for the Bayesian sampler, which is far slower.
    #[serde(default)]
    pub bayesian_repetitions: Option<usize>,
    /// Repetition `r` uses seed `seed + r`.
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_tie_margin")]
    pub tie_margin: f64,
    #[serde(default = "default_workers")]
    pub workers: usize,
    /// Wall times make report files differ between otherwise identical runs.
    #[serde(default)]
    pub record_wall_time: bool,
    #[serde(default)]
    pub reference: ReferenceConfig,
    #[serde(default)]
    pub train: TrainConfig,
    #[serde(default)]
    pub sampler: SamplerSettings,
    #[serde(default)]
    pub profile: Option<ProfileConfig>,
}

fn default_methods() -> Vec<Method> {
    Method::ALL.to_vec()
}

fn default_archs() -> Vec<Arch> {
    Arch::ALL.to_vec()
}

fn default_n_grid() -> Vec<usize> {
    vec![100, 1_000, 10_000]
}

fn default_repetitions() -> usize {
    10
}

fn default_tie_margin() -> f64 {
    DEFAULT_TIE_MARGIN
}

fn default_workers() -> usize {
    1
}

impl ExperimentConfig {
    /// Defaults for everything but the oracle.
    pub fn with_oracle(oracle: OracleSpec) -> Self {
        Self {
            oracle,
            methods: default_methods(),
            archs: default_archs(),
            n_grid: default_n_grid(),
            repetitions: default_repetitions(),
            bayesian_repetitions: None,
            seed: 0,
            tie_margin: default_tie_margin(),
            workers: default_workers(),
            record_wall_time: false,
            reference: ReferenceConfig::default(),
            train: TrainConfig::default(),
            sampler: SamplerSettings::default(),
            profile: None,
        }
    }

    /// The original large-scale protocol: N up to 10^6 and a 10^7-point
    /// reference set. Needs hours and a lot of memory.
    pub fn full_scale(oracle: OracleSpec) -> Self {
        Self {
            n_grid: vec![100, 1_000, 10_000, 100_000, 1_000_000],
            reference: ReferenceConfig {
                size: 10_000_000,
                ..ReferenceConfig::default()
            },
            ..Self::with_oracle(oracle)
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let raw: toml::Table = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        // the flattened oracle table cannot deny unknown keys by itself
        if let Some(toml::Value::Table(o)) = raw.get("oracle") {
            if let Some(k) = o.keys().find(|k| !ORACLE_KEYS.contains(&k.as_str())) {
                return Err(Error::Config(format!("unknown key `{k}` in [oracle]")));
            }
        }
        raw.try_into()
            .map_err(|e: toml::de::Error| Error::Config(e.to_string()))
    }

    /// Reads, resolves relative paths against the file's directory and
    /// validates.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = Self::parse(&text)?;
        if let OracleSource::Table { path: table } = &mut cfg.oracle.source {
            if table.is_relative() {
                let base = path.parent().unwrap_or(Path::new("."));
                *table = base.join(&*table);
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn repetitions_for(&self, method: Method) -> usize {
        match method {
            Method::Bayesian => self.bayesian_repetitions.unwrap_or(self.repetitions),
            _ => self.repetitions,
        }
    }

    pub fn max_n(&self) -> usize {
        self.n_grid.last().copied().unwrap_or(0)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.oracle.name.is_empty() || self.oracle.name.contains([',', '/', '\n']) {
            return bad("oracle name must be non-empty and free of ',', '/' and newlines".into());
        }
        if let OracleSource::Table { path } = &self.oracle.source {
            if !path.exists() {
                return bad(format!(
                    "table oracle file {} does not exist",
                    path.display()
                ));
            }
        }
        if let OracleSource::External { command, .. } = &self.oracle.source {
            if command.is_empty() {
                return bad("external oracle command is empty".into());
            }
        }
        if self.methods.is_empty() || self.archs.is_empty() {
            return bad("at least one method and one architecture are required".into());
        }
        if self.n_grid.is_empty() || self.n_grid.windows(2).any(|w| w[0] >= w[1]) {
            return bad(format!(
                "n_grid must be non-empty and strictly ascending: {:?}",
                self.n_grid
            ));
        }
        if self.repetitions == 0 || self.bayesian_repetitions == Some(0) {
            return bad("repetitions must be >= 1".into());
        }
        if self.workers == 0 {
            return bad("workers must be >= 1".into());
        }
        if !(self.tie_margin >= 0.0) {
            return bad("tie_margin must be >= 0".into());
        }
        if self.reference.size == 0 || self.reference.attempts_per_point == 0 {
            return bad("reference size and attempts_per_point must be positive".into());
        }
        self.train.validate()?;
        self.sampler
            .validate()
            .map_err(|e| Error::Config(e.to_string()))?;
        let smallest = self.n_grid[0];
        for m in &self.methods {
            let need = m.min_budget(&self.sampler);
            if smallest < need {
                return bad(format!(
                    "method {m} needs N >= {need}, grid starts at {smallest}"
                ));
            }
        }
        if let Some(p) = &self.profile {
            if p.checkpoints.is_empty() || p.checkpoints.windows(2).any(|w| w[0] >= w[1]) {
                return bad("profile checkpoints must be non-empty and strictly ascending".into());
            }
            for m in &p.methods {
                if p.checkpoints[0] < m.min_budget(&self.sampler) {
                    return bad(format!("profile checkpoint too small for {m}"));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
[oracle]
name = "circles"
source = "analytic"
dim = 2
variant = { kind = "concentric_circles", center = [0.5, 0.5], radii = [0.25] }
"#;

    #[test]
    fn minimal_config_gets_defaults() {
        let c = ExperimentConfig::parse(MINIMAL).unwrap();
        c.validate().unwrap();
        assert_eq!(c.n_grid, vec![100, 1000, 10000]);
        assert_eq!(c.methods.len(), 4);
        assert_eq!(c.reference.size, 100_000);
        assert_eq!(c.oracle.build().unwrap().num_classes(), 2);
    }

    #[test]
    fn echo_round_trips() {
        let mut c = ExperimentConfig::parse(MINIMAL).unwrap();
        c.sampler.boundary.runs = Some(4);
        c.profile = Some(ProfileConfig::default());
        let text = c.to_toml();
        assert_eq!(ExperimentConfig::parse(&text).unwrap(), c);
    }

    #[test]
    fn invalid_grids_rejected() {
        let mut c = ExperimentConfig::parse(MINIMAL).unwrap();
        c.n_grid = vec![1000, 100];
        assert!(matches!(c.validate(), Err(Error::Config(_))));
        c.n_grid = vec![20, 100];
        assert!(c.validate().is_err(), "jacobian needs 50 seeds");
        c.methods = vec![Method::Random];
        c.validate().unwrap();
    }

    #[test]
    fn unknown_keys_rejected() {
        let top = format!("bogus = 3\n{MINIMAL}");
        assert!(ExperimentConfig::parse(&top).is_err());
        let in_oracle = format!("{MINIMAL}\nbogus = 3\n");
        assert!(ExperimentConfig::parse(&in_oracle).is_err());
    }

    #[test]
    fn missing_table_rejected() {
        let text = "[oracle]\nname = \"t\"\nsource = \"table\"\npath = \"nope.csv\"\n";
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.toml");
        std::fs::write(&p, text).unwrap();
        assert!(matches!(ExperimentConfig::load(&p), Err(Error::Config(_))));
    }
}
