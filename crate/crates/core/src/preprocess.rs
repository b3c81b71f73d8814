//! Normalization of raw attributes into the unit hypercube and stratified
//! train/test splitting of labelled data.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::RandomSource;
use crate::space::LabeledSample;

pub const TARGET_MEAN: f64 = 0.5;
/// With this spread, about 99% of a normal attribute falls inside `[0, 1]`.
pub const TARGET_STD: f64 = 1.0 / 5.152;

/// Per-dimension affine map `x -> 0.5 + (x - mean) * TARGET_STD / std`,
/// using the population standard deviation of the fitted data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizationTransform {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl NormalizationTransform {
    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn apply(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .zip(self.mean.iter().zip(&self.std))
            .map(|(x, (m, s))| TARGET_MEAN + (x - m) * (TARGET_STD / s))
            .collect()
    }

    pub fn invert(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .zip(self.mean.iter().zip(&self.std))
            .map(|(z, (m, s))| m + (z - TARGET_MEAN) * (s / TARGET_STD))
            .collect()
    }
}

pub fn fit_normalization(raw: &[Vec<f64>]) -> Result<NormalizationTransform> {
    if raw.len() < 2 {
        return Err(Error::Precondition(
            "normalization needs at least two rows".into(),
        ));
    }
    let d = raw[0].len();
    if let Some(bad) = raw.iter().find(|r| r.len() != d) {
        return Err(Error::Dimension {
            expected: d,
            got: bad.len(),
        });
    }
    let m = raw.len() as f64;
    let mut mean = vec![0.0; d];
    let mut std = vec![0.0; d];
    for j in 0..d {
        let mu = raw.iter().map(|r| r[j]).sum::<f64>() / m;
        let var = raw.iter().map(|r| (r[j] - mu).powi(2)).sum::<f64>() / m;
        let sd = var.sqrt();
        if sd == 0.0 || !sd.is_finite() || sd <= 1e-12 * mu.abs() {
            return Err(Error::DegenerateColumn { column: j });
        }
        mean[j] = mu;
        std[j] = sd;
    }
    Ok(NormalizationTransform { mean, std })
}

/// Splits each class separately, keeping `fraction` of it for training.
///
/// Per-class training counts are `floor(n_c * fraction)` plus one for the
/// classes with the largest fractional remainders until the total reaches
/// `round(M * fraction)`; each class keeps at least one sample on each side.
/// Within a class the assignment is a seeded shuffle. Both outputs keep the
/// original row order.
pub fn stratified_split(
    data: &[LabeledSample],
    fraction: f64,
    rng: &mut RandomSource,
) -> Result<(Vec<LabeledSample>, Vec<LabeledSample>)> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::Precondition(format!(
            "split fraction {fraction} not in (0,1)"
        )));
    }
    let k = data.iter().map(|s| s.label.0 + 1).max().unwrap_or(0);
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); k];
    for (i, s) in data.iter().enumerate() {
        by_class[s.label.0].push(i);
    }
    for (c, rows) in by_class.iter().enumerate() {
        if rows.len() == 1 {
            return Err(Error::Stratification(format!(
                "class {c} has a single sample"
            )));
        }
    }
    let present: Vec<usize> = (0..k).filter(|&c| !by_class[c].is_empty()).collect();
    let exact: Vec<f64> = present
        .iter()
        .map(|&c| by_class[c].len() as f64 * fraction)
        .collect();
    let mut counts: Vec<usize> = exact.iter().map(|x| x.floor() as usize).collect();
    let target = (data.len() as f64 * fraction).round() as usize;
    let mut order: Vec<usize> = (0..present.len()).collect();
    // largest remainder first, lower class index on ties
    order.sort_by(|&a, &b| {
        let ra = exact[a] - exact[a].floor();
        let rb = exact[b] - exact[b].floor();
        rb.partial_cmp(&ra).unwrap().then(a.cmp(&b))
    });
    let deficit = target.saturating_sub(counts.iter().sum());
    for &i in order.iter().take(deficit) {
        counts[i] += 1;
    }
    for (i, &c) in present.iter().enumerate() {
        counts[i] = counts[i].clamp(1, by_class[c].len() - 1);
    }

    let mut in_train = vec![false; data.len()];
    for (i, &c) in present.iter().enumerate() {
        let mut rows = by_class[c].clone();
        rng.shuffle(&mut rows);
        for &r in &rows[..counts[i]] {
            in_train[r] = true;
        }
    }
    let mut train = Vec::new();
    let mut test = Vec::new();
    for (s, t) in data.iter().zip(in_train) {
        if t {
            train.push(s.clone());
        } else {
            test.push(s.clone());
        }
    }
    Ok((train, test))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::{ClassLabel, Point};
    use proptest::prelude::*;

    fn mean_std(col: &[f64]) -> (f64, f64) {
        let n = col.len() as f64;
        let m = col.iter().sum::<f64>() / n;
        let v = col.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / n;
        (m, v.sqrt())
    }

    #[test]
    fn three_point_column() {
        let raw = vec![vec![0.0], vec![1.0], vec![2.0]];
        let t = fit_normalization(&raw).unwrap();
        // independent oracle: population std of {0,1,2} is sqrt(2/3)
        let sigma = (2.0f64 / 3.0).sqrt();
        let step = (1.0 / 5.152) / sigma;
        let expect = [0.5 - step, 0.5, 0.5 + step];
        for (r, e) in raw.iter().zip(expect) {
            assert!((t.apply(r)[0] - e).abs() < 1e-15);
        }
    }

    #[test]
    fn conforming_column_is_fixed_point() {
        let s = 1.0 / 5.152;
        let raw = vec![vec![0.5 - s], vec![0.5 + s]];
        let t = fit_normalization(&raw).unwrap();
        for x in [0.0, 0.3, 0.5, 0.9, 1.0] {
            assert!((t.apply(&[x])[0] - x).abs() < 1e-12);
        }
    }

    #[test]
    fn constant_column_rejected() {
        let raw = vec![vec![1.0, 3.0], vec![2.0, 3.0], vec![4.0, 3.0]];
        assert!(matches!(
            fit_normalization(&raw),
            Err(Error::DegenerateColumn { column: 1 })
        ));
    }

    fn labelled(counts: &[usize]) -> Vec<LabeledSample> {
        let mut out = Vec::new();
        for (c, &n) in counts.iter().enumerate() {
            for i in 0..n {
                out.push(LabeledSample::new(Point(vec![i as f64]), ClassLabel(c)));
            }
        }
        out
    }

    fn class_counts(s: &[LabeledSample], k: usize) -> Vec<usize> {
        let mut v = vec![0; k];
        for x in s {
            v[x.label.0] += 1;
        }
        v
    }

    #[test]
    fn exact_split() {
        let data = labelled(&[50, 50]);
        let (tr, te) = stratified_split(&data, 0.8, &mut RandomSource::new(1)).unwrap();
        assert_eq!(class_counts(&tr, 2), vec![40, 40]);
        assert_eq!(class_counts(&te, 2), vec![10, 10]);
    }

    #[test]
    fn uneven_split() {
        // enumerated options for 7/3 at 0.8: train counts in {5,6} x {2,3}, total 8
        let data = labelled(&[7, 3]);
        let (tr, te) = stratified_split(&data, 0.8, &mut RandomSource::new(1)).unwrap();
        let c = class_counts(&tr, 2);
        assert!([5, 6].contains(&c[0]) && [2, 3].contains(&c[1]));
        assert_eq!(tr.len(), 8);
        assert_eq!(te.len(), 2);
    }

    #[test]
    fn singleton_class_rejected() {
        let data = labelled(&[5, 1]);
        assert!(matches!(
            stratified_split(&data, 0.8, &mut RandomSource::new(1)),
            Err(Error::Stratification(_))
        ));
    }

    #[test]
    fn split_deterministic() {
        let data = labelled(&[13, 9, 4]);
        let a = stratified_split(&data, 0.8, &mut RandomSource::new(3)).unwrap();
        let b = stratified_split(&data, 0.8, &mut RandomSource::new(3)).unwrap();
        assert_eq!(a, b);
    }

    proptest! {
        #[test]
        fn normalization_roundtrip(rows in proptest::collection::vec(proptest::collection::vec(-100.0f64..100.0, 3), 2..20)) {
            if let Ok(t) = fit_normalization(&rows) {
                for r in &rows {
                    let back = t.invert(&t.apply(r));
                    for (a, b) in back.iter().zip(r) {
                        prop_assert!((a - b).abs() <= 1e-12 * (1.0 + b.abs()));
                    }
                }
                for j in 0..3 {
                    let col: Vec<f64> = rows.iter().map(|r| t.apply(r)[j]).collect();
                    let (m, s) = mean_std(&col);
                    prop_assert!((m - 0.5).abs() < 1e-9);
                    prop_assert!((s - TARGET_STD).abs() < 1e-9);
                }
            }
        }

        #[test]
        fn split_preserves_proportions(counts in proptest::collection::vec(2usize..40, 1..5), seed in any::<u64>()) {
            let data = labelled(&counts);
            let (tr, te) = stratified_split(&data, 0.8, &mut RandomSource::new(seed)).unwrap();
            prop_assert_eq!(tr.len() + te.len(), data.len());
            let c = class_counts(&tr, counts.len());
            for (got, n) in c.iter().zip(&counts) {
                prop_assert!((*got as f64 - 0.8 * *n as f64).abs() <= 1.0 + 1e-9);
            }
        }
    }
}
