//! CART classification tree: axis-aligned binary splits chosen by Gini
//! impurity.

use serde::{Deserialize, Serialize};

use crate::space::LabeledSample;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "snake_case")]
pub enum Node {
    Leaf {
        label: usize,
    },
    /// `x[feature] <= threshold` goes left.
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
    pub depth: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct TreeOptions {
    pub max_depth: Option<usize>,
    pub min_leaf: usize,
}

fn gini(counts: &[usize], n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let n = n as f64;
    1.0 - counts.iter().map(|&c| (c as f64 / n).powi(2)).sum::<f64>()
}

fn majority(counts: &[usize]) -> usize {
    let mut best = 0;
    for (c, &n) in counts.iter().enumerate() {
        if n > counts[best] {
            best = c;
        }
    }
    best
}

struct Best {
    score: f64,
    feature: usize,
    threshold: f64,
}

impl Tree {
    pub fn fit(data: &[LabeledSample], classes: usize, opts: TreeOptions) -> Tree {
        let min_leaf = opts.min_leaf.max(1);
        let mut nodes = vec![Node::Leaf { label: 0 }];
        let mut depth_reached = 0;
        // (node slot, row indices, depth)
        let mut stack: Vec<(usize, Vec<usize>, usize)> = vec![(0, (0..data.len()).collect(), 0)];
        while let Some((slot, rows, depth)) = stack.pop() {
            depth_reached = depth_reached.max(depth);
            let mut counts = vec![0; classes];
            for &r in &rows {
                counts[data[r].label.0] += 1;
            }
            let label = majority(&counts);
            let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
            let depth_capped = opts.max_depth.is_some_and(|m| depth >= m);
            if pure || depth_capped || rows.len() < 2 * min_leaf {
                nodes[slot] = Node::Leaf { label };
                continue;
            }
            let Some(best) = best_split(data, &rows, classes, min_leaf) else {
                nodes[slot] = Node::Leaf { label };
                continue;
            };
            let (l, r): (Vec<usize>, Vec<usize>) = rows
                .iter()
                .partition(|&&i| data[i].point.coords()[best.feature] <= best.threshold);
            let left = nodes.len();
            nodes.push(Node::Leaf { label });
            let right = nodes.len();
            nodes.push(Node::Leaf { label });
            nodes[slot] = Node::Split {
                feature: best.feature,
                threshold: best.threshold,
                left,
                right,
            };
            stack.push((right, r, depth + 1));
            stack.push((left, l, depth + 1));
        }
        Tree {
            nodes,
            depth: depth_reached,
        }
    }

    pub fn predict(&self, x: &[f64]) -> usize {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                Node::Leaf { label } => return *label,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    i = if x[*feature] <= *threshold {
                        *left
                    } else {
                        *right
                    }
                }
            }
        }
    }
}

/// Lowest weighted child impurity; ties keep the first feature and the
/// smallest threshold. Impure nodes split even without impurity decrease so
/// that consistent data can always be fitted exactly.
fn best_split(
    data: &[LabeledSample],
    rows: &[usize],
    classes: usize,
    min_leaf: usize,
) -> Option<Best> {
    let dim = data[rows[0]].point.dim();
    let n = rows.len();
    let mut total = vec![0; classes];
    for &r in rows {
        total[data[r].label.0] += 1;
    }
    let mut best: Option<Best> = None;
    let mut sorted = rows.to_vec();
    for f in 0..dim {
        let val = |i: usize| data[i].point.coords()[f];
        sorted.sort_by(|&a, &b| val(a).partial_cmp(&val(b)).unwrap().then(a.cmp(&b)));
        let mut left = vec![0; classes];
        for i in 0..n - 1 {
            left[data[sorted[i]].label.0] += 1;
            let (a, b) = (val(sorted[i]), val(sorted[i + 1]));
            let nl = i + 1;
            if a == b || nl < min_leaf || n - nl < min_leaf {
                continue;
            }
            let right: Vec<usize> = total.iter().zip(&left).map(|(t, l)| t - l).collect();
            let score =
                (nl as f64 * gini(&left, nl) + (n - nl) as f64 * gini(&right, n - nl)) / n as f64;
            if best.as_ref().is_none_or(|b| score < b.score - 1e-15) {
                let mid = 0.5 * (a + b);
                let threshold = if mid < b { mid } else { a };
                best = Some(Best {
                    score,
                    feature: f,
                    threshold,
                });
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RandomSource;
    use crate::space::{ClassLabel, Point};

    fn s(x: &[f64], l: usize) -> LabeledSample {
        LabeledSample::new(Point(x.to_vec()), ClassLabel(l))
    }

    #[test]
    fn stump_splits_at_half() {
        let data = vec![
            s(&[0.2, 0.9], 0),
            s(&[0.4, 0.1], 0),
            s(&[0.6, 0.5], 1),
            s(&[0.8, 0.3], 1),
        ];
        let t = Tree::fit(
            &data,
            2,
            TreeOptions {
                max_depth: Some(1),
                min_leaf: 1,
            },
        );
        assert_eq!(t.predict(&[0.4999, 0.0]), 0);
        assert_eq!(t.predict(&[0.5001, 0.0]), 1);
        assert!(
            matches!(t.nodes[0], Node::Split { feature: 0, threshold, .. } if threshold == 0.5)
        );
    }

    #[test]
    fn xor_is_fitted_exactly() {
        let data = vec![
            s(&[0.0, 0.0], 0),
            s(&[1.0, 1.0], 0),
            s(&[0.0, 1.0], 1),
            s(&[1.0, 0.0], 1),
        ];
        let t = Tree::fit(
            &data,
            2,
            TreeOptions {
                max_depth: None,
                min_leaf: 1,
            },
        );
        for d in &data {
            assert_eq!(t.predict(d.point.coords()), d.label.0);
        }
    }

    #[test]
    fn unlimited_tree_shatters_random_labels() {
        let mut rng = RandomSource::new(5);
        let data: Vec<_> = (0..500)
            .map(|_| s(&[rng.uniform(), rng.uniform(), rng.uniform()], rng.below(3)))
            .collect();
        let t = Tree::fit(
            &data,
            3,
            TreeOptions {
                max_depth: None,
                min_leaf: 1,
            },
        );
        assert!(data
            .iter()
            .all(|d| t.predict(d.point.coords()) == d.label.0));
    }
}
