//! Synthetic datasets and their on-disk form.
//!
//! A dataset is stored as two files: a CSV with header `x0,...,x{d-1},label`
//! (coordinates written with 17 significant digits) and a JSON sidecar with
//! the generation metadata. The sidecar path is the CSV path with
//! `.meta.json` appended.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::space::{ClassLabel, LabeledSample, Point};

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticDataset {
    samples: Vec<LabeledSample>,
    pub generator_id: String,
    pub seed: u64,
    pub query_count: u64,
    dim: usize,
    classes: usize,
    /// Free-form generation notes (parameters, fallback flags).
    pub notes: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetMeta {
    pub generator_id: String,
    pub seed: u64,
    pub query_count: u64,
    pub d: usize,
    pub k: usize,
    #[serde(default)]
    pub notes: BTreeMap<String, String>,
}

impl SyntheticDataset {
    pub fn new(generator_id: impl Into<String>, seed: u64, dim: usize, classes: usize) -> Self {
        Self {
            samples: Vec::new(),
            generator_id: generator_id.into(),
            seed,
            query_count: 0,
            dim,
            classes,
            notes: BTreeMap::new(),
        }
    }

    pub fn from_samples(
        generator_id: impl Into<String>,
        seed: u64,
        dim: usize,
        classes: usize,
        samples: Vec<LabeledSample>,
        query_count: u64,
    ) -> Result<Self> {
        let mut ds = Self::new(generator_id, seed, dim, classes);
        for s in samples {
            ds.push(s)?;
        }
        ds.query_count = query_count;
        Ok(ds)
    }

    pub fn push(&mut self, sample: LabeledSample) -> Result<()> {
        if sample.point.dim() != self.dim {
            return Err(Error::Dimension {
                expected: self.dim,
                got: sample.point.dim(),
            });
        }
        if sample.label.0 >= self.classes {
            return Err(Error::Precondition(format!(
                "label {} outside [0, {})",
                sample.label.0, self.classes
            )));
        }
        self.samples.push(sample);
        Ok(())
    }

    pub fn samples(&self) -> &[LabeledSample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub(crate) fn truncate(&mut self, n: usize) {
        self.samples.truncate(n);
    }

    /// The first `j` samples with the same metadata.
    pub fn prefix(&self, j: usize) -> Result<Self> {
        if j > self.samples.len() {
            return Err(Error::Range {
                index: j,
                len: self.samples.len(),
            });
        }
        Ok(Self {
            samples: self.samples[..j].to_vec(),
            generator_id: self.generator_id.clone(),
            seed: self.seed,
            query_count: self.query_count,
            dim: self.dim,
            classes: self.classes,
            notes: self.notes.clone(),
        })
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.classes];
        for s in &self.samples {
            counts[s.label.0] += 1;
        }
        counts
    }

    pub fn meta(&self) -> DatasetMeta {
        DatasetMeta {
            generator_id: self.generator_id.clone(),
            seed: self.seed,
            query_count: self.query_count,
            d: self.dim,
            k: self.classes,
            notes: self.notes.clone(),
        }
    }

    pub fn to_csv_string(&self) -> String {
        samples_to_csv(self.dim, &self.samples)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_atomic(path, self.to_csv_string().as_bytes())?;
        let meta = serde_json::to_string_pretty(&self.meta())? + "\n";
        write_atomic(&sidecar_path(path), meta.as_bytes())?;
        Ok(())
    }

    /// Loads a dataset; the sidecar is required.
    pub fn load(path: &Path) -> Result<Self> {
        let meta_text = fs::read_to_string(sidecar_path(path))?;
        let meta: DatasetMeta = serde_json::from_str(&meta_text)?;
        let (dim, samples) = read_labeled_csv(path)?;
        if !samples.is_empty() && dim != meta.d {
            return Err(Error::Format {
                path: path.to_path_buf(),
                message: format!("csv has {dim} columns but metadata says d={}", meta.d),
            });
        }
        let mut ds = Self::from_samples(
            meta.generator_id,
            meta.seed,
            meta.d,
            meta.k,
            samples,
            meta.query_count,
        )?;
        ds.notes = meta.notes;
        Ok(ds)
    }
}

pub fn sidecar_path(csv: &Path) -> PathBuf {
    let mut s = csv.as_os_str().to_owned();
    s.push(".meta.json");
    PathBuf::from(s)
}

/// Positional decimal with 17 significant digits.
pub fn format_f64(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 {
            "0".to_string()
        } else {
            format!("{x}")
        };
    }
    let sci = format!("{:.16e}", x);
    let exp: i32 = sci
        .rsplit('e')
        .next()
        .and_then(|e| e.parse().ok())
        .unwrap_or(0);
    let decimals = (16 - exp).max(0) as usize;
    format!("{:.*}", decimals, x)
}

pub fn samples_to_csv(dim: usize, samples: &[LabeledSample]) -> String {
    let mut out = String::new();
    for i in 0..dim {
        out.push_str(&format!("x{i},"));
    }
    out.push_str("label\n");
    for s in samples {
        for x in s.point.coords() {
            out.push_str(&format_f64(*x));
            out.push(',');
        }
        out.push_str(&s.label.0.to_string());
        out.push('\n');
    }
    out
}

/// Reads any CSV in the dataset layout; returns the column dimension and rows.
pub fn read_labeled_csv(path: &Path) -> Result<(usize, Vec<LabeledSample>)> {
    let mut reader = csv::Reader::from_path(path)?;
    let headers = reader.headers()?.clone();
    let ncol = headers.len();
    if ncol < 2 || headers.get(ncol - 1) != Some("label") {
        return Err(Error::Format {
            path: path.to_path_buf(),
            message: "expected header x0,...,x{d-1},label".into(),
        });
    }
    let dim = ncol - 1;
    let mut rows = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec?;
        let bad = |m: String| Error::Format {
            path: path.to_path_buf(),
            message: format!("row {}: {m}", i + 1),
        };
        let coords = (0..dim)
            .map(|c| {
                rec[c]
                    .trim()
                    .parse::<f64>()
                    .map_err(|e| bad(format!("column {c}: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        let label = rec[dim]
            .trim()
            .parse::<usize>()
            .map_err(|e| bad(format!("label: {e}")))?;
        rows.push(LabeledSample::new(Point(coords), ClassLabel(label)));
    }
    Ok((dim, rows))
}

pub(crate) fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)?;
        }
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn toy(n: usize) -> SyntheticDataset {
        let samples = (0..n)
            .map(|i| LabeledSample::new(Point(vec![i as f64 / 10.0, 0.5]), ClassLabel(i % 2)))
            .collect();
        SyntheticDataset::from_samples("toy", 7, 2, 2, samples, n as u64).unwrap()
    }

    #[test]
    fn prefix_edges() {
        let ds = toy(5);
        assert!(ds.prefix(0).unwrap().is_empty());
        assert_eq!(ds.prefix(5).unwrap(), ds);
        let p = ds.prefix(3).unwrap();
        assert_eq!(p.samples(), &ds.samples()[..3]);
        assert_eq!(p.generator_id, "toy");
        assert_eq!(p.seed, 7);
        assert!(matches!(ds.prefix(6), Err(Error::Range { .. })));
    }

    #[test]
    fn seventeen_significant_digits() {
        assert_eq!(format_f64(0.1), "0.10000000000000001");
        assert_eq!(format_f64(1.0), "1.0000000000000000");
        assert_eq!(format_f64(0.0), "0");
        assert_eq!(format_f64(0.5).parse::<f64>().unwrap(), 0.5);
    }

    #[test]
    fn save_load_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ds.csv");
        let mut ds = toy(4);
        ds.notes.insert("fallback".into(), "false".into());
        ds.save(&path).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("x0,x1,label\n"));
        assert_eq!(SyntheticDataset::load(&path).unwrap(), ds);
    }

    proptest! {
        #[test]
        fn prefix_monotone(n in 0usize..30, a in 0usize..30, b in 0usize..30) {
            let ds = toy(n);
            let (j1, j2) = (a.min(b).min(n), a.max(b).min(n));
            prop_assert_eq!(ds.prefix(j1).unwrap(), ds.prefix(j2).unwrap().prefix(j1).unwrap());
        }

        #[test]
        fn float_format_roundtrips(x in any::<f64>().prop_filter("finite", |x| x.is_finite())) {
            prop_assert_eq!(format_f64(x).parse::<f64>().unwrap().to_bits(), if x == 0.0 { 0.0f64.to_bits() } else { x.to_bits() });
        }
    }
}
