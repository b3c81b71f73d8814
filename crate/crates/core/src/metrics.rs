//! Agreement metrics between a copy and its oracle, reference-set
//! construction, and the pairwise method comparison.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::copy::{self, Arch, CopyModel, TrainConfig};
use crate::dataset::write_atomic;
use crate::error::{Error, Result};
use crate::oracle::{Metered, Oracle};
use crate::rng::RandomSource;
use crate::space::{ClassLabel, LabeledSample, SampleSpace};

pub const DEFAULT_TIE_MARGIN: f64 = 0.01;

/// Fraction of `truth` the copy gets wrong, taking the oracle labels in
/// `truth` as ground truth.
pub fn empirical_fidelity_error(copy: &CopyModel, truth: &[LabeledSample]) -> Result<f64> {
    if truth.is_empty() {
        return Err(Error::Metric("empty evaluation set".into()));
    }
    let wrong = truth
        .iter()
        .filter(|s| copy.predict(&s.point) != s.label)
        .count();
    Ok(wrong as f64 / truth.len() as f64)
}

/// One minus the mean per-class agreement over `classes` classes. Every class
/// must occur in `truth`.
pub fn balanced_empirical_fidelity_error(
    copy: &CopyModel,
    truth: &[LabeledSample],
    classes: usize,
) -> Result<f64> {
    let preds: Vec<ClassLabel> = truth.iter().map(|s| copy.predict(&s.point)).collect();
    balanced_error_from_predictions(truth, &preds, classes)
}

pub fn balanced_error_from_predictions(
    truth: &[LabeledSample],
    preds: &[ClassLabel],
    classes: usize,
) -> Result<f64> {
    if truth.len() != preds.len() {
        return Err(Error::Metric(
            "prediction count differs from truth count".into(),
        ));
    }
    let mut total = vec![0usize; classes];
    let mut agree = vec![0usize; classes];
    for (s, p) in truth.iter().zip(preds) {
        let c = s.label.index();
        if c >= classes {
            return Err(Error::Metric(format!(
                "label {c} outside {classes} classes"
            )));
        }
        total[c] += 1;
        if *p == s.label {
            agree[c] += 1;
        }
    }
    if let Some(missing) = total.iter().position(|&t| t == 0) {
        return Err(Error::Metric(format!(
            "class {missing} is absent from the evaluation set"
        )));
    }
    let mean_agree: f64 = agree
        .iter()
        .zip(&total)
        .map(|(&a, &t)| a as f64 / t as f64)
        .sum::<f64>()
        / classes as f64;
    Ok((1.0 - mean_agree).clamp(0.0, 1.0))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceSet {
    pub samples: Vec<LabeledSample>,
    pub classes: usize,
    pub balanced: bool,
    pub per_class_counts: Vec<usize>,
    /// Set when a balanced set could not fill its quotas.
    pub warning: Option<String>,
    pub attempts: u64,
}

impl ReferenceSet {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// Per-class quotas for `total` points over `classes` classes; the first
/// `total % classes` classes get one extra point.
pub fn class_quotas(total: usize, classes: usize) -> Vec<usize> {
    let base = total / classes;
    let extra = total % classes;
    (0..classes)
        .map(|c| base + usize::from(c < extra))
        .collect()
}

/// Uniform oracle-labelled reference points. When `balanced`, draws are
/// rejected once their class quota is full; after `max_attempts` draws the
/// partial set is returned with a warning.
pub fn build_reference_set(
    oracle: &dyn Oracle,
    size: usize,
    balanced: bool,
    rng: &mut RandomSource,
    max_attempts: u64,
) -> Result<ReferenceSet> {
    let k = oracle.num_classes();
    if size == 0 {
        return Err(Error::Precondition("reference size must be >= 1".into()));
    }
    if balanced && size < k {
        return Err(Error::Precondition(format!(
            "balanced reference set of {size} points cannot cover {k} classes"
        )));
    }
    let space = SampleSpace::new(oracle.dim())?;
    let mut metered = Metered::new(oracle);
    let mut counts = vec![0usize; k];
    let mut samples = Vec::with_capacity(size);
    let quotas = if balanced {
        class_quotas(size, k)
    } else {
        vec![usize::MAX; k]
    };
    let mut attempts = 0u64;
    while samples.len() < size {
        if balanced && attempts >= max_attempts {
            break;
        }
        attempts += 1;
        let z = space.uniform_sample(rng);
        let y = metered.query(&z)?;
        if counts[y.index()] < quotas[y.index()] {
            counts[y.index()] += 1;
            samples.push(LabeledSample::new(z, y));
        }
    }
    let warning = (samples.len() < size).then(|| {
        let msg = format!(
            "balanced quotas unfilled after {attempts} draws: counts {counts:?}, quotas {quotas:?}"
        );
        warn!("{msg}");
        msg
    });
    Ok(ReferenceSet {
        samples,
        classes: k,
        balanced,
        per_class_counts: counts,
        warning,
        attempts,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QualityCheck {
    /// Balanced error of the refit model on the reference set itself.
    pub on_reference: f64,
    /// Balanced error of the refit model on the original training points.
    pub on_original: f64,
}

/// Trains `arch` on the reference set and measures it against the oracle on
/// both the reference set and the original training points. The original
/// points are relabelled by `oracle`, since agreement is always measured
/// against the oracle.
pub fn quality_checks(
    reference: &ReferenceSet,
    original_points: &[Vec<f64>],
    oracle: &dyn Oracle,
    arch: Arch,
    cfg: &TrainConfig,
) -> Result<QualityCheck> {
    let model = copy::train_samples(
        arch,
        &reference.samples,
        oracle.dim(),
        reference.classes,
        cfg,
    )?;
    let on_reference =
        balanced_empirical_fidelity_error(&model, &reference.samples, reference.classes)?;
    let original: Vec<LabeledSample> = original_points
        .iter()
        .map(|x| {
            let p = crate::space::Point(x.clone());
            oracle.query(&p).map(|y| LabeledSample::new(p, y))
        })
        .collect::<Result<_>>()?;
    let on_original = balanced_empirical_fidelity_error(&model, &original, reference.classes)?;
    Ok(QualityCheck {
        on_reference,
        on_original,
    })
}

/// Linear-interpolation percentile, `q` in `[0, 1]`.
pub fn percentile(values: &[f64], q: f64) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let pos = q.clamp(0.0, 1.0) * (v.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    Some(v[lo] + (v[hi] - v[lo]) * (pos - lo as f64))
}

pub fn median(values: &[f64]) -> Option<f64> {
    percentile(values, 0.5)
}

/// One copy evaluated on one reference set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub oracle: String,
    pub method: String,
    pub arch: String,
    #[serde(rename = "N")]
    pub n: usize,
    pub seed: u64,
    #[serde(rename = "R_F")]
    pub r_f: f64,
    #[serde(rename = "R_Fb")]
    pub r_fb: f64,
    /// Blank unless wall-time recording is enabled.
    pub wall_time_s: Option<f64>,
}

pub const REPORT_HEADER: &str = "oracle,method,arch,N,seed,R_F,R_Fb,wall_time_s";
pub const COMPARISON_HEADER: &str = "method_a,method_b,victories,ties,losses";

pub fn reports_to_csv(rows: &[ReportRow]) -> Result<String> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    let body = String::from_utf8(w.into_inner().map_err(|e| Error::Io(e.into_error()))?)
        .expect("csv output is utf-8");
    Ok(format!("{REPORT_HEADER}\n{body}"))
}

pub fn write_reports(path: &Path, rows: &[ReportRow]) -> Result<()> {
    write_atomic(path, reports_to_csv(rows)?.as_bytes())
}

pub fn read_reports(path: &Path) -> Result<Vec<ReportRow>> {
    let mut r = csv::Reader::from_path(path)?;
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if header.join(",") != REPORT_HEADER {
        return Err(Error::Format {
            path: path.to_path_buf(),
            message: format!("expected header {REPORT_HEADER:?}"),
        });
    }
    r.deserialize()
        .map(|row| row.map_err(Error::from))
        .collect()
}

/// Aggregate over repetitions of one (oracle, method, arch, N) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FidelityReport {
    pub oracle: String,
    pub method: String,
    pub arch: String,
    pub n: usize,
    pub repetitions: usize,
    /// Median plain error.
    pub r_f: f64,
    /// Median balanced error.
    pub r_fb: f64,
    pub r_fb_p20: f64,
    pub r_fb_p50: f64,
    pub r_fb_p80: f64,
    pub wall_time_s: Option<f64>,
}

type CellKey = (String, String, String, usize);

fn cells(rows: &[ReportRow]) -> BTreeMap<CellKey, Vec<&ReportRow>> {
    let mut m: BTreeMap<CellKey, Vec<&ReportRow>> = BTreeMap::new();
    for r in rows {
        m.entry((r.oracle.clone(), r.method.clone(), r.arch.clone(), r.n))
            .or_default()
            .push(r);
    }
    m
}

pub fn summarize(rows: &[ReportRow]) -> Vec<FidelityReport> {
    cells(rows)
        .into_iter()
        .map(|((oracle, method, arch, n), rs)| {
            let fb: Vec<f64> = rs.iter().map(|r| r.r_fb).collect();
            let f: Vec<f64> = rs.iter().map(|r| r.r_f).collect();
            let wall: Vec<f64> = rs.iter().filter_map(|r| r.wall_time_s).collect();
            FidelityReport {
                oracle,
                method,
                arch,
                n,
                repetitions: rs.len(),
                r_f: median(&f).expect("non-empty cell"),
                r_fb: median(&fb).expect("non-empty cell"),
                r_fb_p20: percentile(&fb, 0.2).expect("non-empty cell"),
                r_fb_p50: percentile(&fb, 0.5).expect("non-empty cell"),
                r_fb_p80: percentile(&fb, 0.8).expect("non-empty cell"),
                wall_time_s: median(&wall),
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub method_a: String,
    pub method_b: String,
    pub victories: usize,
    pub ties: usize,
    pub losses: usize,
}

/// Victory/tie/loss counts for every ordered pair of methods. A cell is an
/// (oracle, arch, N) triple; methods are compared on their median balanced
/// error there, and differences within `tie_margin` are ties.
pub fn compare_methods(rows: &[ReportRow], tie_margin: f64) -> Result<Vec<ComparisonRow>> {
    if !(tie_margin >= 0.0) {
        return Err(Error::Comparison(format!(
            "tie margin must be >= 0, got {tie_margin}"
        )));
    }
    let mut by_method: BTreeMap<String, BTreeMap<(String, String, usize), f64>> = BTreeMap::new();
    for rep in summarize(rows) {
        by_method
            .entry(rep.method)
            .or_default()
            .insert((rep.oracle, rep.arch, rep.n), rep.r_fb);
    }
    let grids: BTreeSet<Vec<(String, String, usize)>> = by_method
        .values()
        .map(|m| m.keys().cloned().collect())
        .collect();
    if grids.len() > 1 {
        return Err(Error::Comparison(
            "methods were evaluated on different cell grids".into(),
        ));
    }
    let mut out = Vec::new();
    for (a, ma) in &by_method {
        for (b, mb) in &by_method {
            if a == b {
                continue;
            }
            let mut row = ComparisonRow {
                method_a: a.clone(),
                method_b: b.clone(),
                victories: 0,
                ties: 0,
                losses: 0,
            };
            for (cell, ea) in ma {
                let eb = mb[cell];
                if (ea - eb).abs() <= tie_margin {
                    row.ties += 1;
                } else if *ea < eb {
                    row.victories += 1;
                } else {
                    row.losses += 1;
                }
            }
            out.push(row);
        }
    }
    Ok(out)
}

pub fn comparison_to_csv(rows: &[ComparisonRow]) -> String {
    let mut s = format!("{COMPARISON_HEADER}\n");
    for r in rows {
        s.push_str(&format!(
            "{},{},{},{},{}\n",
            r.method_a, r.method_b, r.victories, r.ties, r.losses
        ));
    }
    s
}
