//! Copy models trained on oracle-labelled synthetic data.
//!
//! Four architectures: multinomial logistic regression (`lr`), a CART tree
//! (`dt`), a one-hidden-layer network with 5 ReLU units (`ann`) and a
//! 3 x 50 ReLU network (`ann2`).
//!
//! Models persist as a JSON document:
//!
//! ```text
//! { "format": "copysample-model", "version": 1,
//!   "arch": "lr" | "dt" | "ann" | "ann2", "dim": d, "classes": k,
//!   "body": { "kind": "constant" | "logistic" | "tree" | "mlp", ... },
//!   "train_meta": { ... } }
//! ```
//!
//! Floats are written in shortest round-trip form, so save/load is exact.

mod adam;
pub(crate) mod flat;
pub mod logistic;
pub mod mlp;
pub mod tree;

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dataset::{write_atomic, SyntheticDataset};
use crate::error::{Error, Result};
use crate::rng::RandomSource;
use crate::space::{ClassLabel, LabeledSample, Point};
use flat::FitOptions;
pub use logistic::Logistic;
pub use mlp::Mlp;
pub use tree::{Tree, TreeOptions};

pub const MODEL_FORMAT: &str = "copysample-model";
pub const MODEL_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Arch {
    Lr,
    Dt,
    Ann,
    Ann2,
}

impl Arch {
    pub const ALL: [Arch; 4] = [Arch::Lr, Arch::Dt, Arch::Ann, Arch::Ann2];

    pub fn name(self) -> &'static str {
        match self {
            Arch::Lr => "lr",
            Arch::Dt => "dt",
            Arch::Ann => "ann",
            Arch::Ann2 => "ann2",
        }
    }

    fn hidden(self) -> &'static [usize] {
        match self {
            Arch::Ann => &[5],
            Arch::Ann2 => &[50, 50, 50],
            _ => &[],
        }
    }
}

impl fmt::Display for Arch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Arch {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Arch::ALL
            .into_iter()
            .find(|a| a.name() == s.to_ascii_lowercase())
            .ok_or_else(|| Error::Config(format!("unknown architecture `{s}` (lr, dt, ann, ann2)")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub step_size: f64,
    pub epochs: usize,
    pub batch_size: usize,
    /// `None` grows the tree until leaves are pure.
    pub max_depth: Option<usize>,
    pub min_leaf: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            step_size: 1e-2,
            epochs: 200,
            batch_size: 64,
            max_depth: None,
            min_leaf: 1,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.step_size > 0.0) || self.epochs == 0 || self.batch_size == 0 || self.min_leaf == 0
        {
            return Err(Error::Config(
                "training step size, epochs, batch size and min leaf must be positive".into(),
            ));
        }
        if self.max_depth == Some(0) {
            return Err(Error::Config("max_depth must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelBody {
    Constant { label: usize },
    Logistic(Logistic),
    Tree(Tree),
    Mlp(Mlp),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainMeta {
    pub seed: u64,
    pub epochs: usize,
    pub tree_depth: Option<usize>,
    pub final_loss: Option<f64>,
    /// Fraction of training points the model disagrees with.
    pub training_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CopyModel {
    pub format: String,
    pub version: u32,
    pub arch: Arch,
    pub dim: usize,
    pub classes: usize,
    pub body: ModelBody,
    pub train_meta: TrainMeta,
}

impl CopyModel {
    pub fn predict(&self, z: &Point) -> ClassLabel {
        ClassLabel(self.predict_coords(z.coords()))
    }

    pub fn predict_coords(&self, x: &[f64]) -> usize {
        match &self.body {
            ModelBody::Constant { label } => *label,
            ModelBody::Logistic(m) => m.predict(x),
            ModelBody::Tree(t) => t.predict(x),
            ModelBody::Mlp(m) => m.predict(x),
        }
    }

    pub fn constant(arch: Arch, dim: usize, classes: usize, label: usize) -> Self {
        Self::assemble(
            arch,
            dim,
            classes,
            ModelBody::Constant { label },
            TrainMeta {
                seed: 0,
                epochs: 0,
                tree_depth: None,
                final_loss: None,
                training_error: 0.0,
            },
        )
    }

    pub fn from_logistic(model: Logistic) -> Self {
        let (dim, classes) = (model.dim, model.classes);
        Self::assemble(
            Arch::Lr,
            dim,
            classes,
            ModelBody::Logistic(model),
            TrainMeta {
                seed: 0,
                epochs: 0,
                tree_depth: None,
                final_loss: None,
                training_error: 0.0,
            },
        )
    }

    fn assemble(
        arch: Arch,
        dim: usize,
        classes: usize,
        body: ModelBody,
        train_meta: TrainMeta,
    ) -> Self {
        Self {
            format: MODEL_FORMAT.to_string(),
            version: MODEL_VERSION,
            arch,
            dim,
            classes,
            body,
            train_meta,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let m: CopyModel = serde_json::from_str(text)?;
        if m.format != MODEL_FORMAT || m.version != MODEL_VERSION {
            return Err(Error::Unsupported(format!(
                "model container {} v{}",
                m.format, m.version
            )));
        }
        Ok(m)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_atomic(path, self.to_json()?.as_bytes())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

/// Fraction of samples whose label the model does not reproduce.
pub fn disagreement(model: &CopyModel, samples: &[LabeledSample]) -> f64 {
    if samples.is_empty() {
        return 0.0;
    }
    let wrong = samples
        .iter()
        .filter(|s| model.predict_coords(s.point.coords()) != s.label.0)
        .count();
    wrong as f64 / samples.len() as f64
}

pub fn train(arch: Arch, ds: &SyntheticDataset, cfg: &TrainConfig) -> Result<CopyModel> {
    train_samples(arch, ds.samples(), ds.dim(), ds.classes(), cfg)
}

pub fn train_samples(
    arch: Arch,
    samples: &[LabeledSample],
    dim: usize,
    classes: usize,
    cfg: &TrainConfig,
) -> Result<CopyModel> {
    cfg.validate()?;
    if samples.is_empty() {
        return Err(Error::Training("empty training set".into()));
    }
    if let Some(s) = samples.iter().find(|s| s.point.dim() != dim) {
        return Err(Error::Dimension {
            expected: dim,
            got: s.point.dim(),
        });
    }
    let first = samples[0].label.0;
    if samples.iter().all(|s| s.label.0 == first) {
        let mut m = CopyModel::constant(arch, dim, classes, first);
        m.train_meta.seed = cfg.seed;
        return Ok(m);
    }
    let mut rng = RandomSource::new(cfg.seed);
    let opts = FitOptions {
        step_size: cfg.step_size,
        epochs: cfg.epochs,
        batch: cfg.batch_size,
        max_steps: None,
    };
    let (body, final_loss, depth) = match arch {
        Arch::Lr => {
            let mut m = Logistic::zeros(dim, classes);
            let loss = flat::fit(&mut m, samples, opts, &mut rng)?;
            (ModelBody::Logistic(m), Some(loss), None)
        }
        Arch::Ann | Arch::Ann2 => {
            let mut widths = vec![dim];
            widths.extend_from_slice(arch.hidden());
            widths.push(classes);
            let mut m = Mlp::init(widths, &mut rng);
            let loss = flat::fit(&mut m, samples, opts, &mut rng)?;
            (ModelBody::Mlp(m), Some(loss), None)
        }
        Arch::Dt => {
            let t = Tree::fit(
                samples,
                classes,
                TreeOptions {
                    max_depth: cfg.max_depth,
                    min_leaf: cfg.min_leaf,
                },
            );
            let depth = t.depth;
            (ModelBody::Tree(t), None, Some(depth))
        }
    };
    let mut model = CopyModel::assemble(
        arch,
        dim,
        classes,
        body,
        TrainMeta {
            seed: cfg.seed,
            epochs: if arch == Arch::Dt { 0 } else { cfg.epochs },
            tree_depth: depth,
            final_loss,
            training_error: 0.0,
        },
    );
    model.train_meta.training_error = disagreement(&model, samples);
    Ok(model)
}
