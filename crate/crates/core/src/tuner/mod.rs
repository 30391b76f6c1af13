//! Parameter selection for the centrality heuristic: a Nelder-Mead search
//! over `(d, k)` that maximizes the mean aggregation rate.
//!
//! The simplex moves in continuous space; every evaluation rounds to the
//! nearest integers and clamps to the bounds, and results are memoized per
//! integer pair. A short integer hill-climb from the simplex optimum over
//! the 8-neighborhood finishes the search, since rounding creates plateaus
//! on which the simplex can stall.

use std::collections::HashMap;
use std::io::Write;

use rayon::prelude::*;
use thiserror::Error;

use crate::graph::SnapshotGraph;
use crate::metrics::aggregation_rate;
use crate::mobility::{RadioParams, Trace};
use crate::pipeline::build_period_graph;
use crate::selection::{centrality_select, SelectionError, MAX_HOPS};

mod simplex;

pub use simplex::{nelder_mead, NelderMeadOptions, NelderMeadResult, SimplexState, TrajectoryStep};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TunerError {
    #[error("degenerate initial simplex: {0}")]
    DegenerateSimplex(String),
    #[error("invalid tuner configuration: {0}")]
    InvalidConfig(String),
    #[error("no non-empty snapshot among the sampled periods")]
    EmptyTrace,
    #[error(transparent)]
    Selection(#[from] SelectionError),
    #[error("{0}")]
    Input(String),
    #[error("trajectory csv: {0}")]
    Csv(String),
}

#[derive(Clone, Debug, PartialEq)]
pub struct TunerConfig {
    pub max_iterations: usize,
    /// Upper bound on `d` (lower bound is 1).
    pub d_max: u32,
    /// Upper bound on `k`; `None` uses the largest component diameter of
    /// the sampled graphs.
    pub k_max: Option<u32>,
    /// Starting point of the simplex.
    pub start: (u32, u32),
    pub alpha: f64,
    pub gamma: f64,
    pub rho: f64,
    pub sigma: f64,
    pub tolerance: f64,
}

impl Default for TunerConfig {
    fn default() -> Self {
        TunerConfig {
            max_iterations: 500,
            d_max: MAX_HOPS,
            k_max: None,
            start: (1, 4),
            alpha: 1.0,
            gamma: 2.0,
            rho: 0.5,
            sigma: 0.5,
            tolerance: 1e-9,
        }
    }
}

/// One row of the tuning trajectory: the best integer pair so far.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TuneStep {
    pub iteration: usize,
    pub d: u32,
    pub k: u32,
    pub objective: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TuneResult {
    pub d: u32,
    pub k: u32,
    /// Objective at `(d, k)`; for trace tuning, the mean aggregation rate.
    pub objective: f64,
    pub d_max: u32,
    pub k_max: u32,
    pub iterations: usize,
    /// Distinct `(d, k)` pairs evaluated.
    pub evaluations: usize,
    pub trajectory: Vec<TuneStep>,
}

struct Memo<F> {
    objective: F,
    cache: HashMap<(u32, u32), f64>,
}

impl<F: FnMut(u32, u32) -> f64> Memo<F> {
    fn get(&mut self, d: u32, k: u32) -> f64 {
        if let Some(&v) = self.cache.get(&(d, k)) {
            return v;
        }
        let v = (self.objective)(d, k);
        self.cache.insert((d, k), v);
        v
    }

    /// Highest value seen; ties go to the smaller `(d, k)`.
    fn best(&self) -> ((u32, u32), f64) {
        self.cache
            .iter()
            .map(|(&p, &v)| (p, v))
            .max_by(|a, b| a.1.total_cmp(&b.1).then(b.0.cmp(&a.0)))
            .expect("at least one evaluation")
    }
}

fn to_integer(x: &[f64], d_max: u32, k_max: u32) -> (u32, u32) {
    let d = x[0].round().clamp(1.0, f64::from(d_max)) as u32;
    let k = x[1].round().clamp(1.0, f64::from(k_max)) as u32;
    (d, k)
}

fn step_off(v: u32, hi: u32) -> u32 {
    if v < hi {
        v + 1
    } else {
        v - 1
    }
}

/// Maximizes `objective(d, k)` over `[1, d_max] x [1, k_max]`.
pub fn tune_with<F>(objective: F, d_max: u32, k_max: u32, config: &TunerConfig) -> Result<TuneResult, TunerError>
where
    F: FnMut(u32, u32) -> f64,
{
    if d_max == 0 || k_max == 0 {
        return Err(TunerError::InvalidConfig("parameter bounds must be at least 1".into()));
    }
    let mut memo = Memo {
        objective,
        cache: HashMap::new(),
    };
    let mut trajectory = Vec::new();
    let iterations;

    if d_max == 1 || k_max == 1 {
        // one free dimension at most: scan it
        for d in 1..=d_max {
            for k in 1..=k_max {
                memo.get(d, k);
                let ((bd, bk), v) = memo.best();
                trajectory.push(TuneStep {
                    iteration: trajectory.len(),
                    d: bd,
                    k: bk,
                    objective: v,
                });
            }
        }
        iterations = trajectory.len().saturating_sub(1);
    } else {
        let d0 = config.start.0.clamp(1, d_max);
        let k0 = config.start.1.clamp(1, k_max);
        let initial = vec![
            vec![f64::from(d0), f64::from(k0)],
            vec![f64::from(step_off(d0, d_max)), f64::from(k0)],
            vec![f64::from(d0), f64::from(step_off(k0, k_max))],
        ];
        let options = NelderMeadOptions {
            max_iterations: config.max_iterations,
            alpha: config.alpha,
            gamma: config.gamma,
            rho: config.rho,
            sigma: config.sigma,
            tolerance: config.tolerance,
            bounds: Some(vec![(1.0, f64::from(d_max)), (1.0, f64::from(k_max))]),
        };
        let result = nelder_mead(
            |x| {
                let (d, k) = to_integer(x, d_max, k_max);
                -memo.get(d, k)
            },
            initial,
            &options,
        )?;
        iterations = result.iterations;
        trajectory.extend(result.trajectory.iter().map(|s| {
            let (d, k) = to_integer(&s.point, d_max, k_max);
            TuneStep {
                iteration: s.iteration,
                d,
                k,
                objective: -s.value,
            }
        }));

        // integer hill-climb from the best pair seen so far
        let (mut at, mut value) = memo.best();
        loop {
            let (d, k) = at;
            let mut next = None;
            for nd in d.saturating_sub(1).max(1)..=(d + 1).min(d_max) {
                for nk in k.saturating_sub(1).max(1)..=(k + 1).min(k_max) {
                    if (nd, nk) == at {
                        continue;
                    }
                    let v = memo.get(nd, nk);
                    if v > value && next.is_none_or(|(_, bv)| v > bv) {
                        next = Some(((nd, nk), v));
                    }
                }
            }
            match next {
                Some((p, v)) => {
                    at = p;
                    value = v;
                }
                None => break,
            }
        }
    }

    let ((d, k), objective) = memo.best();
    Ok(TuneResult {
        d,
        k,
        objective,
        d_max,
        k_max,
        iterations,
        evaluations: memo.cache.len(),
        trajectory,
    })
}

/// Mean aggregation rate of the centrality heuristic over `graphs`.
/// Empty graphs are skipped by the caller.
pub fn mean_centrality_rate(graphs: &[SnapshotGraph], d: u32, k: u32) -> Result<f64, SelectionError> {
    let rates: Vec<f64> = graphs
        .par_iter()
        .map(|g| {
            let r = centrality_select(g, d, k)?;
            Ok(aggregation_rate(r.len(), g.vertex_count()).expect("non-empty graph has at least one AP"))
        })
        .collect::<Result<_, SelectionError>>()?;
    Ok(rates.iter().sum::<f64>() / rates.len() as f64)
}

/// Tunes `(d, k)` on the communication graphs at `sample_times`.
pub fn tune_parameters(
    trace: &Trace,
    sample_times: &[f64],
    radio: &RadioParams,
    direction: bool,
    config: &TunerConfig,
) -> Result<TuneResult, TunerError> {
    let mut graphs = Vec::new();
    for &t in sample_times {
        let pg = build_period_graph(trace, t, radio, direction).map_err(|e| TunerError::Input(e.to_string()))?;
        if !pg.graph.is_empty() {
            graphs.push(pg.graph);
        }
    }
    if graphs.is_empty() {
        return Err(TunerError::EmptyTrace);
    }
    let d_max = config.d_max.clamp(1, MAX_HOPS);
    let k_max = match config.k_max {
        Some(k) => k.max(1),
        None => graphs
            .iter()
            .map(SnapshotGraph::component_diameter)
            .max()
            .unwrap_or(0)
            .max(1),
    };
    let mut failure = None;
    let result = tune_with(
        |d, k| match mean_centrality_rate(&graphs, d, k) {
            Ok(v) => v,
            Err(e) => {
                failure.get_or_insert(e);
                f64::NEG_INFINITY
            }
        },
        d_max,
        k_max,
        config,
    )?;
    match failure {
        Some(e) => Err(e.into()),
        None => Ok(result),
    }
}

pub const TRAJECTORY_HEADER: [&str; 4] = ["iteration", "d", "k", "objective"];

pub fn write_trajectory_csv<W: Write>(steps: &[TuneStep], writer: W) -> Result<(), TunerError> {
    let mut wtr = csv::Writer::from_writer(writer);
    let err = |e: csv::Error| TunerError::Csv(e.to_string());
    wtr.write_record(TRAJECTORY_HEADER).map_err(err)?;
    for s in steps {
        wtr.write_record([
            s.iteration.to_string(),
            s.d.to_string(),
            s.k.to_string(),
            s.objective.to_string(),
        ])
        .map_err(err)?;
    }
    wtr.flush().map_err(|e| TunerError::Csv(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::VehicleId;
    use crate::mobility::{Trace, TracePoint};

    fn grid_oracle(f: impl Fn(u32, u32) -> f64, d_max: u32, k_max: u32) -> ((u32, u32), f64) {
        let mut best = ((1, 1), f(1, 1));
        for d in 1..=d_max {
            for k in 1..=k_max {
                let v = f(d, k);
                if v > best.1 {
                    best = ((d, k), v);
                }
            }
        }
        best
    }

    #[test]
    fn finds_unique_integer_optimum() {
        let stub = |d: u32, k: u32| -((f64::from(d) - 3.0).powi(2) + (f64::from(k) - 4.0).powi(2));
        let oracle = grid_oracle(stub, 10, 12);
        assert_eq!(oracle.0, (3, 4));
        let r = tune_with(stub, 10, 12, &TunerConfig::default()).unwrap();
        assert_eq!((r.d, r.k), oracle.0);
        assert_eq!(r.objective, oracle.1);
    }

    #[test]
    fn finds_distant_optimum() {
        let stub = |d: u32, k: u32| -(f64::from(d) - 8.0).abs() - 0.5 * (f64::from(k) - 17.0).abs();
        let r = tune_with(stub, 10, 25, &TunerConfig::default()).unwrap();
        assert_eq!((r.d, r.k), grid_oracle(stub, 10, 25).0);
    }

    #[test]
    fn memoizes_and_respects_bounds() {
        let mut calls = Vec::new();
        let r = tune_with(
            |d, k| {
                calls.push((d, k));
                f64::from(d + k)
            },
            4,
            6,
            &TunerConfig::default(),
        )
        .unwrap();
        let mut unique = calls.clone();
        unique.sort_unstable();
        unique.dedup();
        assert_eq!(unique.len(), calls.len(), "a pair was evaluated twice");
        assert!(calls.iter().all(|&(d, k)| (1..=4).contains(&d) && (1..=6).contains(&k)));
        assert_eq!((r.d, r.k), (4, 6));
        assert_eq!(r.evaluations, calls.len());
    }

    #[test]
    fn never_worse_than_initial_vertices() {
        let bumpy = |d: u32, k: u32| ((d * 7 + k * 13) % 11) as f64;
        let r = tune_with(bumpy, 10, 10, &TunerConfig::default()).unwrap();
        for (d, k) in [(1, 4), (2, 4), (1, 5)] {
            assert!(r.objective >= bumpy(d, k));
        }
    }

    #[test]
    fn degenerate_box_is_scanned() {
        let r = tune_with(|d, _| -f64::from(d), 10, 1, &TunerConfig::default()).unwrap();
        assert_eq!((r.d, r.k), (1, 1));
        assert!(tune_with(|_, _| 0.0, 0, 3, &TunerConfig::default()).is_err());
    }

    #[test]
    fn isolated_vehicles_give_zero_rate() {
        let points = (0..5)
            .map(|i| TracePoint {
                time: 0.0,
                vehicle: VehicleId(i),
                x: 1_000.0 * i as f64,
                y: 0.0,
            })
            .collect();
        let trace = Trace::new(points).unwrap();
        let r = tune_parameters(&trace, &[0.0], &RadioParams::default(), false, &TunerConfig::default()).unwrap();
        assert_eq!(r.objective, 0.0);
        assert!((1..=10).contains(&r.d) && r.k == 1);
    }

    #[test]
    fn empty_samples_are_an_error() {
        let trace = Trace::new(vec![
            TracePoint {
                time: 0.0,
                vehicle: VehicleId(0),
                x: 0.0,
                y: 0.0,
            },
            TracePoint {
                time: 10.0,
                vehicle: VehicleId(0),
                x: 0.0,
                y: 0.0,
            },
        ])
        .unwrap();
        assert_eq!(
            tune_parameters(&trace, &[5.0], &RadioParams::default(), false, &TunerConfig::default()),
            Err(TunerError::EmptyTrace)
        );
    }

    #[test]
    fn trajectory_csv_layout() {
        let mut buf = Vec::new();
        write_trajectory_csv(
            &[TuneStep {
                iteration: 0,
                d: 1,
                k: 4,
                objective: 0.5,
            }],
            &mut buf,
        )
        .unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "iteration,d,k,objective\n0,1,4,0.5\n");
    }
}
