use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{Oracle, QueryCounter};
use crate::error::{Error, Result};
use crate::space::{euclidean, Point};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AnalyticVariant {
    /// Label 1 where `w . z >= c`, else 0.
    Halfspace { w: Vec<f64>, c: f64 },
    /// Label = number of radii the point lies outside of. With no radii the
    /// oracle is constant (k = 1).
    ConcentricCircles { center: Vec<f64>, radii: Vec<f64> },
    /// Parity of the cell index sum on an `m^d` grid.
    Checkerboard { cells_per_dim: usize },
    /// Two interleaved Archimedean arms around (0.5, 0.5). 2-D only.
    Spiral2d { turns: f64 },
}

/// Closed-form oracle whose decision boundary is known exactly.
#[derive(Debug)]
pub struct AnalyticOracle {
    dim: usize,
    variant: AnalyticVariant,
    counter: QueryCounter,
}

impl AnalyticOracle {
    pub fn new(dim: usize, variant: AnalyticVariant) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Precondition("oracle dimension must be >= 1".into()));
        }
        match &variant {
            AnalyticVariant::Halfspace { w, c } => {
                if w.len() != dim {
                    return Err(Error::Dimension {
                        expected: dim,
                        got: w.len(),
                    });
                }
                if w.iter().all(|x| *x == 0.0) || !c.is_finite() {
                    return Err(Error::Precondition(
                        "halfspace normal must be nonzero".into(),
                    ));
                }
            }
            AnalyticVariant::ConcentricCircles { center, radii } => {
                if center.len() != dim {
                    return Err(Error::Dimension {
                        expected: dim,
                        got: center.len(),
                    });
                }
                if radii.iter().any(|r| *r <= 0.0) || radii.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(Error::Precondition(
                        "radii must be positive and strictly ascending".into(),
                    ));
                }
            }
            AnalyticVariant::Checkerboard { cells_per_dim } => {
                if *cells_per_dim < 2 {
                    return Err(Error::Precondition("checkerboard needs >= 2 cells".into()));
                }
            }
            AnalyticVariant::Spiral2d { turns } => {
                if dim != 2 {
                    return Err(Error::Unsupported("spiral oracle is 2-D only".into()));
                }
                if *turns <= 0.0 {
                    return Err(Error::Precondition("spiral turns must be positive".into()));
                }
            }
        }
        Ok(Self {
            dim,
            variant,
            counter: QueryCounter::default(),
        })
    }

    pub fn halfspace(w: Vec<f64>, c: f64) -> Result<Self> {
        Self::new(w.len(), AnalyticVariant::Halfspace { w, c })
    }

    pub fn circles(center: Vec<f64>, radii: Vec<f64>) -> Result<Self> {
        Self::new(
            center.len(),
            AnalyticVariant::ConcentricCircles { center, radii },
        )
    }

    pub fn checkerboard(dim: usize, cells_per_dim: usize) -> Result<Self> {
        Self::new(dim, AnalyticVariant::Checkerboard { cells_per_dim })
    }

    pub fn spiral(turns: f64) -> Result<Self> {
        Self::new(2, AnalyticVariant::Spiral2d { turns })
    }

    pub fn variant(&self) -> &AnalyticVariant {
        &self.variant
    }

    /// Euclidean distance from `z` to the true decision boundary
    /// (`f64::INFINITY` when there is none).
    pub fn boundary_distance(&self, z: &Point) -> Result<f64> {
        if z.dim() != self.dim {
            return Err(Error::Dimension {
                expected: self.dim,
                got: z.dim(),
            });
        }
        let x = z.coords();
        Ok(match &self.variant {
            AnalyticVariant::Halfspace { w, c } => {
                let norm = w.iter().map(|v| v * v).sum::<f64>().sqrt();
                (dot(w, x) - c).abs() / norm
            }
            AnalyticVariant::ConcentricCircles { center, radii } => {
                let r = euclidean(x, center);
                radii
                    .iter()
                    .map(|ri| (r - ri).abs())
                    .fold(f64::INFINITY, f64::min)
            }
            AnalyticVariant::Checkerboard { cells_per_dim } => {
                let m = *cells_per_dim as f64;
                x.iter()
                    .map(|xi| {
                        let j = (xi * m).round().clamp(1.0, m - 1.0);
                        (xi - j / m).abs()
                    })
                    .fold(f64::INFINITY, f64::min)
            }
            AnalyticVariant::Spiral2d { turns } => spiral_distance(*turns, x),
        })
    }

    /// The decision boundary clipped to the unit square, as polylines.
    pub fn boundary_polylines(&self) -> Result<Vec<Vec<(f64, f64)>>> {
        if self.dim != 2 {
            return Err(Error::Unsupported("boundary polylines are 2-D only".into()));
        }
        let inside = |p: &(f64, f64)| (0.0..=1.0).contains(&p.0) && (0.0..=1.0).contains(&p.1);
        let lines = match &self.variant {
            AnalyticVariant::Halfspace { w, c } => {
                // intersections of w.x = c with the square's edges
                let mut pts: Vec<(f64, f64)> = Vec::new();
                for &edge in &[0.0, 1.0] {
                    if w[1] != 0.0 {
                        pts.push((edge, (c - w[0] * edge) / w[1]));
                    }
                    if w[0] != 0.0 {
                        pts.push(((c - w[1] * edge) / w[0], edge));
                    }
                }
                pts.retain(|p| inside(p));
                pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
                pts.dedup_by(|a, b| (a.0 - b.0).abs() < 1e-12 && (a.1 - b.1).abs() < 1e-12);
                if pts.len() >= 2 {
                    vec![vec![pts[0], pts[pts.len() - 1]]]
                } else {
                    vec![]
                }
            }
            AnalyticVariant::ConcentricCircles { center, radii } => radii
                .iter()
                .flat_map(|r| {
                    let ring: Vec<(f64, f64)> = (0..=256)
                        .map(|i| {
                            let a = 2.0 * PI * i as f64 / 256.0;
                            (center[0] + r * a.cos(), center[1] + r * a.sin())
                        })
                        .collect();
                    split_inside(&ring, inside)
                })
                .collect(),
            AnalyticVariant::Checkerboard { cells_per_dim } => {
                let m = *cells_per_dim;
                (1..m)
                    .flat_map(|j| {
                        let v = j as f64 / m as f64;
                        [vec![(v, 0.0), (v, 1.0)], vec![(0.0, v), (1.0, v)]]
                    })
                    .collect()
            }
            AnalyticVariant::Spiral2d { turns } => {
                let c = spiral_pitch(*turns);
                let t_max = spiral_t_max(c);
                let steps = 4000;
                [0.0, PI]
                    .iter()
                    .flat_map(|phase| {
                        let arm: Vec<(f64, f64)> = (0..=steps)
                            .map(|i| {
                                let t = t_max * i as f64 / steps as f64;
                                spiral_point(c, t, *phase)
                            })
                            .collect();
                        split_inside(&arm, inside)
                    })
                    .collect()
            }
        };
        Ok(lines)
    }
}

impl Oracle for AnalyticOracle {
    fn dim(&self) -> usize {
        self.dim
    }

    fn num_classes(&self) -> usize {
        match &self.variant {
            AnalyticVariant::ConcentricCircles { radii, .. } => radii.len() + 1,
            _ => 2,
        }
    }

    fn label_of(&self, x: &[f64]) -> Result<usize> {
        if x.len() != self.dim {
            return Err(Error::Dimension {
                expected: self.dim,
                got: x.len(),
            });
        }
        Ok(match &self.variant {
            AnalyticVariant::Halfspace { w, c } => usize::from(dot(w, x) >= *c),
            AnalyticVariant::ConcentricCircles { center, radii } => {
                let r = euclidean(x, center);
                radii.iter().filter(|ri| r >= **ri).count()
            }
            AnalyticVariant::Checkerboard { cells_per_dim } => {
                let m = *cells_per_dim as f64;
                let sum: usize = x
                    .iter()
                    .map(|xi| (xi * m).floor().clamp(0.0, m - 1.0) as usize)
                    .sum();
                sum % 2
            }
            AnalyticVariant::Spiral2d { turns } => {
                let c = spiral_pitch(*turns);
                let (dx, dy) = (x[0] - 0.5, x[1] - 0.5);
                let r = (dx * dx + dy * dy).sqrt();
                let theta = dy.atan2(dx);
                // arms are the level sets r/c - theta in pi*Z
                let band = ((r / c - theta) / PI).floor() as i64;
                band.rem_euclid(2) as usize
            }
        })
    }

    fn counter(&self) -> &QueryCounter {
        &self.counter
    }

    fn as_analytic(&self) -> Option<&AnalyticOracle> {
        Some(self)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn split_inside(pts: &[(f64, f64)], inside: impl Fn(&(f64, f64)) -> bool) -> Vec<Vec<(f64, f64)>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    for p in pts {
        if inside(p) {
            cur.push(*p);
        } else if !cur.is_empty() {
            out.push(std::mem::take(&mut cur));
        }
    }
    if cur.len() > 1 {
        out.push(cur);
    }
    out.retain(|l| l.len() > 1);
    out
}

fn spiral_pitch(turns: f64) -> f64 {
    0.5 / (2.0 * PI * turns)
}

fn spiral_t_max(c: f64) -> f64 {
    // covers the farthest corner of the unit square
    0.5f64.sqrt() / c + PI
}

fn spiral_point(c: f64, t: f64, phase: f64) -> (f64, f64) {
    (
        0.5 + c * t * (t + phase).cos(),
        0.5 + c * t * (t + phase).sin(),
    )
}

fn spiral_distance(turns: f64, x: &[f64]) -> f64 {
    let c = spiral_pitch(turns);
    let t_max = spiral_t_max(c);
    let dist = |t: f64, phase: f64| {
        let p = spiral_point(c, t, phase);
        ((p.0 - x[0]).powi(2) + (p.1 - x[1]).powi(2)).sqrt()
    };
    let mut best = f64::INFINITY;
    for phase in [0.0, PI] {
        // coarse scan with arc-length step ~1e-3, then golden-section refine
        let mut t = 0.0;
        let mut scan = Vec::new();
        while t <= t_max {
            scan.push((t, dist(t, phase)));
            t += 1e-3 / (c * (1.0 + t * t).sqrt());
        }
        for i in 0..scan.len() {
            let left_ok = i == 0 || scan[i].1 <= scan[i - 1].1;
            let right_ok = i + 1 == scan.len() || scan[i].1 <= scan[i + 1].1;
            if !(left_ok && right_ok) {
                continue;
            }
            let lo = if i == 0 { 0.0 } else { scan[i - 1].0 };
            let hi = if i + 1 == scan.len() {
                scan[i].0
            } else {
                scan[i + 1].0
            };
            best = best.min(golden_min(|t| dist(t, phase), lo, hi));
        }
    }
    best
}

fn golden_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    for _ in 0..80 {
        if f(c) < f(d) {
            b = d;
        } else {
            a = c;
        }
        c = b - g * (b - a);
        d = a + g * (b - a);
    }
    f(0.5 * (a + b)).min(f(a)).min(f(b))
}
