//! Boundary sampling: uniform exploration until a label change, bisection
//! down to a tolerance, then threads that walk along the decision boundary
//! by alternately stepping across it.

use std::collections::VecDeque;

use log::debug;
use serde::{Deserialize, Serialize};

use crate::dataset::SyntheticDataset;
use crate::error::{Error, Result};
use crate::oracle::{Metered, Oracle};
use crate::rng::RandomSource;
use crate::space::{LabeledSample, Point, SampleSpace};

pub const BOUNDARY_ID: &str = "boundary";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryParams {
    /// Bisection tolerance.
    pub epsilon: f64,
    /// Distance between consecutive thread samples.
    pub step: f64,
    /// Mean number of thread steps between spawns.
    pub spawn_rate: f64,
    /// Copies of each bisection endpoint queued as thread seeds.
    pub runs: usize,
    /// Thread starts allowed per bisection.
    pub max_threads: usize,
    /// Steps allowed per thread.
    pub max_steps: usize,
}

impl BoundaryParams {
    /// Defaults for a budget of `n` samples (natural log; the step count is
    /// floored).
    pub fn for_budget(n: usize) -> Self {
        let ln = (n.max(1) as f64).ln();
        Self {
            epsilon: 0.01,
            step: 0.05,
            spawn_rate: 5.0,
            runs: (2.0 + ln).round() as usize,
            max_threads: (8.0 + 4.0 * ln).round() as usize,
            max_steps: (5.0 + 2.6 * ln).floor() as usize,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon < self.step) {
            return Err(Error::Precondition(format!(
                "need 0 < epsilon ({}) < step ({})",
                self.epsilon, self.step
            )));
        }
        if !(self.spawn_rate > 0.0)
            || self.runs == 0
            || self.max_threads == 0
            || self.max_steps == 0
        {
            return Err(Error::Precondition(
                "spawn rate, runs, thread and step limits must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Bisection {
    /// Final pair, `(a, b)` with differing labels and distance below epsilon.
    pub pair: (LabeledSample, LabeledSample),
    /// Every queried midpoint, in query order.
    pub visited: Vec<LabeledSample>,
}

pub fn binary_search_boundary(
    a: LabeledSample,
    b: LabeledSample,
    eps: f64,
    oracle: &dyn Oracle,
) -> Result<Bisection> {
    bisect(a, b, eps, &mut Metered::new(oracle))
}

pub(crate) fn bisect(
    mut a: LabeledSample,
    mut b: LabeledSample,
    eps: f64,
    oracle: &mut Metered<'_>,
) -> Result<Bisection> {
    if a.label == b.label {
        return Err(Error::Precondition(
            "bisection endpoints must have different labels".into(),
        ));
    }
    if !(eps > 0.0) {
        return Err(Error::Precondition(
            "bisection tolerance must be positive".into(),
        ));
    }
    let mut visited = Vec::new();
    while a.point.distance(&b.point) >= eps {
        let mid = a.point.midpoint(&b.point);
        let y = oracle.query(&mid)?;
        let c = LabeledSample::new(mid, y);
        visited.push(c.clone());
        if c.label != a.label {
            b = c;
        } else {
            a = c;
        }
    }
    Ok(Bisection {
        pair: (a, b),
        visited,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Thread {
    pub current: LabeledSample,
    /// Unit preferred direction.
    pub direction: Vec<f64>,
    pub steps_taken: usize,
    pub spawn_countdown: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StopReason {
    /// A probe left the unit hypercube.
    OutOfRange,
    /// No direction in the sweep produced a label change.
    NoLabelChange,
}

#[derive(Debug, Clone, PartialEq)]
pub enum StepOutcome {
    Moved {
        accepted: LabeledSample,
        /// Queries spent on this step, including the accepted one.
        probes: usize,
        /// The accepted sample should seed a new thread.
        spawn: bool,
    },
    Stopped(StopReason),
}

impl Thread {
    pub fn start(current: LabeledSample, spawn_rate: f64, rng: &mut RandomSource) -> Self {
        let d = current.point.dim();
        let direction = random_unit(d, rng);
        Self {
            current,
            direction,
            steps_taken: 0,
            spawn_countdown: draw_countdown(spawn_rate, rng),
        }
    }
}

fn draw_countdown(rate: f64, rng: &mut RandomSource) -> u64 {
    rng.poisson(rate).max(1)
}

fn random_unit(d: usize, rng: &mut RandomSource) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..d).map(|_| rng.standard_normal()).collect();
        let n = norm(&v);
        if n > 1e-12 {
            return v.into_iter().map(|x| x / n).collect();
        }
    }
}

/// Unit vector orthogonal to the unit vector `u`; `None` in one dimension.
fn random_orthogonal(u: &[f64], rng: &mut RandomSource) -> Option<Vec<f64>> {
    if u.len() < 2 {
        return None;
    }
    loop {
        let mut g: Vec<f64> = u.iter().map(|_| rng.standard_normal()).collect();
        let proj: f64 = g.iter().zip(u).map(|(a, b)| a * b).sum();
        for (gi, ui) in g.iter_mut().zip(u) {
            *gi -= proj * ui;
        }
        let n = norm(&g);
        if n > 1e-9 {
            return Some(g.into_iter().map(|x| x / n).collect());
        }
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Sweep values for the component along the previous direction:
/// 1, 0.9, ..., -0.9, -1.
pub fn alpha_sweep() -> impl Iterator<Item = f64> {
    (0..=20).map(|i| (10 - i) as f64 / 10.0)
}

/// Advances a thread by one accepted sample.
///
/// Directions `v = alpha*u + sqrt(1 - alpha^2)*w` are tried for alpha from
/// 1 down to -1, with `w` a unit vector orthogonal to `u` drawn once per
/// step. The first probe `z + step*v` whose label differs from the thread's
/// label is accepted. The thread stops when a probe leaves the hypercube or
/// the whole sweep yields no change.
pub fn thread_step(
    thread: &mut Thread,
    oracle: &dyn Oracle,
    step: f64,
    spawn_rate: f64,
    rng: &mut RandomSource,
) -> Result<StepOutcome> {
    thread_step_metered(thread, &mut Metered::new(oracle), step, spawn_rate, rng)
}

pub(crate) fn thread_step_metered(
    thread: &mut Thread,
    oracle: &mut Metered<'_>,
    step: f64,
    spawn_rate: f64,
    rng: &mut RandomSource,
) -> Result<StepOutcome> {
    let d = thread.current.point.dim();
    let space = SampleSpace::new(d)?;
    let u = thread.direction.clone();
    let w = random_orthogonal(&u, rng);
    let mut probes = 0;
    for alpha in alpha_sweep() {
        let perp = (1.0 - alpha * alpha).max(0.0).sqrt();
        let v: Vec<f64> = match &w {
            Some(w) => u.iter().zip(w).map(|(a, b)| alpha * a + perp * b).collect(),
            None if perp == 0.0 => u.iter().map(|a| alpha * a).collect(),
            None => continue,
        };
        let probe: Vec<f64> = thread
            .current
            .point
            .coords()
            .iter()
            .zip(&v)
            .map(|(z, vi)| z + step * vi)
            .collect();
        if !space.contains_coords(&probe) {
            return Ok(StepOutcome::Stopped(StopReason::OutOfRange));
        }
        let probe = Point(probe);
        let y = oracle.query(&probe)?;
        probes += 1;
        if y != thread.current.label {
            let accepted = LabeledSample::new(probe, y);
            thread.current = accepted.clone();
            thread.direction = v;
            thread.steps_taken += 1;
            thread.spawn_countdown -= 1;
            let spawn = thread.spawn_countdown == 0;
            if spawn {
                thread.spawn_countdown = draw_countdown(spawn_rate, rng);
            }
            return Ok(StepOutcome::Moved {
                accepted,
                probes,
                spawn,
            });
        }
    }
    Ok(StepOutcome::Stopped(StopReason::NoLabelChange))
}

/// Slot layout of a boundary dataset: even positions hold the
/// boundary-search stream, odd positions the uniform stream.
pub fn is_boundary_slot(index: usize) -> bool {
    index.is_multiple_of(2)
}

/// Boundary sampling with a budget of exactly `n` samples, `ceil(n/2)` from
/// the boundary search and `floor(n/2)` uniform, interleaved.
pub fn boundary_sampler(
    n: usize,
    oracle: &dyn Oracle,
    params: &BoundaryParams,
    rng: &mut RandomSource,
) -> Result<SyntheticDataset> {
    boundary_sampler_observed(n, oracle, params, rng, &mut |_| {})
}

pub fn boundary_sampler_observed(
    n: usize,
    oracle: &dyn Oracle,
    params: &BoundaryParams,
    rng: &mut RandomSource,
    observe: &mut dyn FnMut(usize),
) -> Result<SyntheticDataset> {
    if n < 2 {
        return Err(Error::Precondition("boundary sampling needs n >= 2".into()));
    }
    params.validate()?;
    let space = SampleSpace::new(oracle.dim())?;
    let mut metered = Metered::new(oracle);
    let search_budget = n.div_ceil(2);
    let uniform_budget = n / 2;

    let mut search_rng = rng.fork(1);
    let mut uniform_rng = rng.fork(2);
    let mut produced = 0;
    let mut on_sample = |observe: &mut dyn FnMut(usize)| {
        produced += 1;
        observe(produced);
    };

    let (search, scan_exhausted, stats) = boundary_search(
        search_budget,
        &space,
        &mut metered,
        params,
        &mut search_rng,
        &mut |_| on_sample(observe),
    )?;
    let mut uniform = Vec::with_capacity(uniform_budget);
    for _ in 0..uniform_budget {
        let z = space.uniform_sample(&mut uniform_rng);
        let y = metered.query(&z)?;
        uniform.push(LabeledSample::new(z, y));
        on_sample(observe);
    }

    let mut ds = SyntheticDataset::new(BOUNDARY_ID, rng.seed(), oracle.dim(), oracle.num_classes());
    let mut s_iter = search.into_iter();
    let mut u_iter = uniform.into_iter();
    for i in 0..n {
        let next = if is_boundary_slot(i) {
            s_iter.next()
        } else {
            u_iter.next()
        };
        ds.push(next.expect("stream sizes match the slot layout"))?;
    }
    // no label change seen means every sample above is uniform
    let fallback = scan_exhausted || stats.bisections == 0;
    ds.query_count = metered.count();
    ds.notes
        .insert("layout".into(), "even=boundary,odd=uniform".into());
    ds.notes
        .insert("fallback_uniform".into(), fallback.to_string());
    ds.notes
        .insert("bisections".into(), stats.bisections.to_string());
    ds.notes.insert("threads".into(), stats.threads.to_string());
    ds.notes.insert(
        "params".into(),
        serde_json::to_string(params).expect("params serialize"),
    );
    Ok(ds)
}

#[derive(Debug, Default, Clone, Copy)]
struct SearchStats {
    bisections: usize,
    threads: usize,
}

fn boundary_search(
    budget: usize,
    space: &SampleSpace,
    oracle: &mut Metered<'_>,
    p: &BoundaryParams,
    rng: &mut RandomSource,
    observe: &mut dyn FnMut(usize),
) -> Result<(Vec<LabeledSample>, bool, SearchStats)> {
    let mut out: Vec<LabeledSample> = Vec::with_capacity(budget);
    let mut push = |out: &mut Vec<LabeledSample>, s: LabeledSample| {
        out.push(s);
        observe(out.len());
    };
    let scan_limit = 10 * p.max_steps;
    let mut fallback = false;
    let mut stats = SearchStats::default();

    while out.len() < budget {
        if fallback {
            let z = space.uniform_sample(rng);
            let y = oracle.query(&z)?;
            push(&mut out, LabeledSample::new(z, y));
            continue;
        }
        // uniform scan until two consecutive draws disagree
        let z = space.uniform_sample(rng);
        let y = oracle.query(&z)?;
        let mut a = LabeledSample::new(z, y);
        let mut b;
        let mut scanned = 0;
        loop {
            b = a;
            let z = space.uniform_sample(rng);
            let y = oracle.query(&z)?;
            a = LabeledSample::new(z, y);
            push(&mut out, a.clone());
            scanned += 1;
            if a.label != b.label || out.len() >= budget {
                break;
            }
            if scanned >= scan_limit {
                debug!("no label change in {scanned} uniform probes; falling back to uniform");
                fallback = true;
                break;
            }
        }
        if fallback || out.len() >= budget {
            continue;
        }

        let bis = bisect(a.clone(), b, p.epsilon, oracle)?;
        stats.bisections += 1;
        let seed = bis.visited.last().cloned().unwrap_or(a);
        for v in bis.visited {
            if out.len() >= budget {
                break;
            }
            push(&mut out, v);
        }

        let mut pending: VecDeque<LabeledSample> = std::iter::repeat_n(seed, p.runs).collect();
        let mut started = 0;
        while started < p.max_threads && out.len() < budget {
            let Some(start) = pending.pop_front() else {
                break;
            };
            started += 1;
            stats.threads += 1;
            let mut thread = Thread::start(start, p.spawn_rate, rng);
            for _ in 0..p.max_steps {
                match thread_step_metered(&mut thread, oracle, p.step, p.spawn_rate, rng)? {
                    StepOutcome::Moved {
                        accepted, spawn, ..
                    } => {
                        if spawn {
                            pending.push_back(accepted.clone());
                        }
                        push(&mut out, accepted);
                        if out.len() >= budget {
                            break;
                        }
                    }
                    StepOutcome::Stopped(_) => break,
                }
            }
        }
    }
    Ok((out, fallback, stats))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::AnalyticOracle;

    fn ls(x: &[f64], o: &dyn Oracle) -> LabeledSample {
        let p = Point(x.to_vec());
        let y = o.query(&p).unwrap();
        LabeledSample::new(p, y)
    }

    #[test]
    fn defaults_at_thousand() {
        let p = BoundaryParams::for_budget(1000);
        assert_eq!((p.runs, p.max_threads, p.max_steps), (9, 36, 22));
        assert_eq!((p.epsilon, p.step, p.spawn_rate), (0.01, 0.05, 5.0));
    }

    #[test]
    fn epsilon_must_be_below_step() {
        let mut p = BoundaryParams::for_budget(100);
        p.epsilon = 0.1;
        assert!(p.validate().is_err());
    }

    #[test]
    fn bisection_on_unit_interval() {
        // independent simulation of the interval halving: 1/2^7 < 0.01 <= 1/2^6
        let mut gap = 1.0f64;
        let mut expected = 0;
        while gap >= 0.01 {
            gap /= 2.0;
            expected += 1;
        }
        assert_eq!(expected, 7);

        let o = AnalyticOracle::halfspace(vec![1.0], 0.5).unwrap();
        let a = ls(&[0.0], &o);
        let b = ls(&[1.0], &o);
        let r = binary_search_boundary(a, b, 0.01, &o).unwrap();
        assert_eq!(r.visited.len(), expected);
        let (pa, pb) = &r.pair;
        assert_ne!(pa.label, pb.label);
        assert!(pa.point.distance(&pb.point) < 0.01);
        let (lo, hi) = (
            pa.point.0[0].min(pb.point.0[0]),
            pa.point.0[0].max(pb.point.0[0]),
        );
        assert!(lo < 0.5 && 0.5 <= hi);
        assert_eq!(o.query_count(), 2 + 7);
    }

    #[test]
    fn close_endpoints_need_no_bisection() {
        let o = AnalyticOracle::halfspace(vec![1.0], 0.5).unwrap();
        let a = ls(&[0.499], &o);
        let b = ls(&[0.501], &o);
        let r = binary_search_boundary(a.clone(), b.clone(), 0.01, &o).unwrap();
        assert!(r.visited.is_empty());
        assert_eq!(r.pair, (a, b));
    }

    #[test]
    fn equal_labels_rejected() {
        let o = AnalyticOracle::halfspace(vec![1.0], 0.5).unwrap();
        let a = ls(&[0.1], &o);
        let b = ls(&[0.2], &o);
        assert!(matches!(
            binary_search_boundary(a, b, 0.01, &o),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn thread_step_geometry() {
        // direction parallel to the boundary x0 = 0.5
        let o = AnalyticOracle::halfspace(vec![1.0, 0.0], 0.5).unwrap();
        let mut rng = RandomSource::new(12);
        let mut moved = 0;
        for _ in 0..50 {
            let start = ls(&[0.49, 0.5], &o);
            let mut t = Thread {
                current: start.clone(),
                direction: vec![0.0, 1.0],
                steps_taken: 0,
                spawn_countdown: 100,
            };
            // the orthogonal component is drawn once per step, so in 2-D it
            // points away from the boundary about half the time
            match thread_step(&mut t, &o, 0.05, 5.0, &mut rng).unwrap() {
                StepOutcome::Moved { accepted, .. } => {
                    moved += 1;
                    assert!(accepted.point.0[0] - 0.49 > 0.0);
                    assert_ne!(accepted.label, start.label);
                    assert!((accepted.point.distance(&start.point) - 0.05).abs() < 1e-12);
                    assert!((norm(&t.direction) - 1.0).abs() < 1e-12);
                }
                StepOutcome::Stopped(r) => assert_eq!(r, StopReason::NoLabelChange),
            }
        }
        assert!(moved >= 10, "{moved}");
    }

    #[test]
    fn thread_stops_at_cube_edge() {
        let o = AnalyticOracle::halfspace(vec![1.0, 0.0], 0.5).unwrap();
        let mut t = Thread {
            current: ls(&[0.2, 0.99], &o),
            direction: vec![0.0, 1.0],
            steps_taken: 0,
            spawn_countdown: 3,
        };
        let r = thread_step(&mut t, &o, 0.05, 5.0, &mut RandomSource::new(1)).unwrap();
        assert_eq!(r, StepOutcome::Stopped(StopReason::OutOfRange));
    }

    #[test]
    fn no_change_stops_thread() {
        let o = AnalyticOracle::halfspace(vec![1.0, 0.0], 0.5).unwrap();
        let mut t = Thread {
            current: ls(&[0.2, 0.5], &o),
            direction: vec![0.0, 1.0],
            steps_taken: 0,
            spawn_countdown: 3,
        };
        let r = thread_step(&mut t, &o, 0.05, 5.0, &mut RandomSource::new(1)).unwrap();
        assert_eq!(r, StepOutcome::Stopped(StopReason::NoLabelChange));
    }

    #[test]
    fn spawn_gap_mean() {
        // countdowns are max(1, Poisson(5)); mean 5 + e^-5
        let mut rng = RandomSource::new(77);
        let n = 10_000;
        let mut total = 0u64;
        for _ in 0..n {
            total += draw_countdown(5.0, &mut rng);
        }
        assert!((total as f64 / n as f64 - 5.0).abs() < 0.2);
    }

    #[test]
    fn budget_layout_and_accounting() {
        let o = AnalyticOracle::circles(vec![0.5, 0.5], vec![0.25]).unwrap();
        for n in [2, 3, 101, 500] {
            let before = o.query_count();
            let ds = boundary_sampler(
                n,
                &o,
                &BoundaryParams::for_budget(n),
                &mut RandomSource::new(n as u64),
            )
            .unwrap();
            assert_eq!(ds.len(), n);
            assert!(ds.query_count >= n as u64);
            assert_eq!(o.query_count() - before, ds.query_count);
            let space = SampleSpace::new(2).unwrap();
            assert!(ds.samples().iter().all(|s| space.contains(&s.point)));
        }
    }

    #[test]
    fn constant_oracle_falls_back() {
        let o = AnalyticOracle::circles(vec![0.5, 0.5], vec![]).unwrap();
        for n in [200, 2000] {
            let ds = boundary_sampler(
                n,
                &o,
                &BoundaryParams::for_budget(n),
                &mut RandomSource::new(1),
            )
            .unwrap();
            assert_eq!(ds.len(), n);
            assert_eq!(ds.notes["fallback_uniform"], "true");
        }
    }

    #[test]
    fn circles_do_not_fall_back() {
        let o = AnalyticOracle::circles(vec![0.5, 0.5], vec![0.25]).unwrap();
        let ds = boundary_sampler(
            2000,
            &o,
            &BoundaryParams::for_budget(2000),
            &mut RandomSource::new(1),
        )
        .unwrap();
        assert_eq!(ds.notes["fallback_uniform"], "false");
        assert!(ds.notes["bisections"].parse::<usize>().unwrap() >= 1);
    }

    #[test]
    fn deterministic() {
        let o = AnalyticOracle::spiral(1.5).unwrap();
        let p = BoundaryParams::for_budget(300);
        let a = boundary_sampler(300, &o, &p, &mut RandomSource::new(5)).unwrap();
        let b = boundary_sampler(300, &o, &p, &mut RandomSource::new(5)).unwrap();
        assert_eq!(a.to_csv_string(), b.to_csv_string());
    }
}
