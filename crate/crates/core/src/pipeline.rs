//! Per-period experiment pipeline: snapshot, communication graph,
//! selection and metrics for every delivery period and algorithm.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use thiserror::Error;

use crate::graph::{SnapshotGraph, VehicleId};
use crate::metrics::{
    aggregation_rate, notification_count, reelection_count, routing_update_count, upload_cost, write_metrics_csv,
    MetricsError, OffloadConstants, PeriodMetrics,
};
use crate::mobility::{
    build_direction_constrained_udg, build_udg, generate_two_way_roadway, load_trace_csv, MobilityError, RadioParams,
    RoadwayParams, Snapshot, Trace,
};
use crate::selection::{
    centrality_select, exact_min_dominating_set, rb_select, SelectionError, SelectionResult, DEFAULT_EXACT_LIMIT,
    DEFAULT_SLOTS,
};

#[derive(Debug, Error)]
pub enum RunError {
    #[error("configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Mobility(#[from] MobilityError),
    #[error("{label} at t={time}: {source}")]
    Selection {
        label: String,
        time: f64,
        source: SelectionError,
    },
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error("{path}: {message}")]
    Io { path: PathBuf, message: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum AlgorithmKind {
    Centrality,
    Rb,
    Exact,
}

impl std::str::FromStr for AlgorithmKind {
    type Err = RunError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "centrality" => Ok(AlgorithmKind::Centrality),
            "rb" => Ok(AlgorithmKind::Rb),
            "exact" => Ok(AlgorithmKind::Exact),
            other => Err(RunError::Config(format!(
                "unknown algorithm `{other}` (expected centrality, rb or exact)"
            ))),
        }
    }
}

/// One algorithm to run, with its parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AlgorithmSpec {
    pub kind: AlgorithmKind,
    pub d: u32,
    pub k: u32,
    pub slots: u32,
    /// Build direction-constrained graphs for this algorithm.
    pub direction: bool,
}

impl AlgorithmSpec {
    pub fn new(kind: AlgorithmKind) -> Self {
        AlgorithmSpec {
            kind,
            d: 1,
            k: 4,
            slots: DEFAULT_SLOTS,
            direction: false,
        }
    }

    pub fn centrality(d: u32, k: u32) -> Self {
        AlgorithmSpec {
            d,
            k,
            ..Self::new(AlgorithmKind::Centrality)
        }
    }

    pub fn rb(slots: u32) -> Self {
        AlgorithmSpec {
            slots,
            ..Self::new(AlgorithmKind::Rb)
        }
    }

    pub fn exact(d: u32) -> Self {
        AlgorithmSpec {
            d,
            ..Self::new(AlgorithmKind::Exact)
        }
    }

    pub fn with_direction(self, direction: bool) -> Self {
        AlgorithmSpec { direction, ..self }
    }

    /// File-name-safe label, e.g. `centrality_d1_k4_dir`.
    pub fn label(&self) -> String {
        let base = match self.kind {
            AlgorithmKind::Centrality => format!("centrality_d{}_k{}", self.d, self.k),
            AlgorithmKind::Rb => format!("rb_t{}", self.slots),
            AlgorithmKind::Exact => format!("exact_d{}", self.d),
        };
        if self.direction {
            base + "_dir"
        } else {
            base
        }
    }

    /// Hop radius the assignment is validated against (RB is 1-hop).
    pub fn hop_radius(&self) -> u32 {
        match self.kind {
            AlgorithmKind::Rb => 1,
            _ => self.d,
        }
    }
}

impl fmt::Display for AlgorithmSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum TraceSource {
    File(PathBuf),
    Roadway(RoadwayParams),
    InMemory(Trace),
}

impl TraceSource {
    pub fn load(&self) -> Result<Trace, MobilityError> {
        match self {
            TraceSource::File(p) => load_trace_csv(p),
            TraceSource::Roadway(params) => generate_two_way_roadway(params),
            TraceSource::InMemory(t) => Ok(t.clone()),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub trace: TraceSource,
    pub radio: RadioParams,
    pub algorithms: Vec<AlgorithmSpec>,
    /// Packet size and delivery period.
    pub constants: OffloadConstants,
    /// `(start, end)` in seconds; defaults to the whole trace.
    pub window: Option<(f64, f64)>,
    /// Where per-algorithm CSVs go; nothing is written when `None`.
    pub out_dir: Option<PathBuf>,
    pub seed: u64,
    pub exact_limit: usize,
}

impl RunConfig {
    pub fn new(trace: TraceSource) -> Self {
        RunConfig {
            trace,
            radio: RadioParams::default(),
            algorithms: Vec::new(),
            constants: OffloadConstants::default(),
            window: None,
            out_dir: None,
            seed: 0,
            exact_limit: DEFAULT_EXACT_LIMIT,
        }
    }

    fn validate(&self) -> Result<(), RunError> {
        if self.algorithms.is_empty() {
            return Err(RunError::Config("at least one algorithm is required".into()));
        }
        let mut labels = BTreeSet::new();
        for a in &self.algorithms {
            if !labels.insert(a.label()) {
                return Err(RunError::Config(format!("algorithm `{a}` is listed twice")));
            }
            let params = crate::selection::SelectionParams {
                d: a.d,
                k: a.k,
                slots: a.slots,
                seed: 0,
            };
            params.validate().map_err(|e| RunError::Config(format!("{a}: {e}")))?;
        }
        self.radio.validate()?;
        self.constants.validate()?;
        Ok(())
    }
}

/// Communication graph at one delivery instant.
#[derive(Clone, Debug, PartialEq)]
pub struct PeriodGraph {
    pub time: f64,
    pub snapshot: Snapshot,
    pub graph: SnapshotGraph,
    /// In-range edges dropped by the direction filter (0 without it).
    pub removed_edges: usize,
}

/// Snapshot at `t` and its unit disk graph. With `direction`, displacements
/// are taken against the sample one sampling period earlier.
pub fn build_period_graph(
    trace: &Trace,
    t: f64,
    radio: &RadioParams,
    direction: bool,
) -> Result<PeriodGraph, MobilityError> {
    let snapshot = trace.snapshot_at(t)?;
    let (graph, removed_edges) = if direction {
        let t_prev = t - trace.sampling_period();
        let prev = if t_prev >= trace.start_time() - 1e-9 {
            trace.snapshot_at(t_prev)?
        } else {
            Snapshot {
                time: t_prev,
                positions: Vec::new(),
            }
        };
        let c = build_direction_constrained_udg(&snapshot, &prev, radio)?;
        (c.graph, c.removed_edges)
    } else {
        (build_udg(&snapshot, radio), 0)
    };
    Ok(PeriodGraph {
        time: t,
        snapshot,
        graph,
        removed_edges,
    })
}

/// Delivery-period boundaries `start, start + period, ...` up to `end`.
pub fn delivery_instants(trace: &Trace, period: f64, window: Option<(f64, f64)>) -> Result<Vec<f64>, RunError> {
    if !(period.is_finite() && period > 0.0) {
        return Err(RunError::Config(format!(
            "delivery period must be positive, got {period}"
        )));
    }
    let (span_start, span_end) = (trace.start_time(), trace.end_time());
    let (start, end) = window.unwrap_or((span_start, span_end));
    if start > end || start < span_start - 1e-9 || end > span_end + 1e-9 {
        return Err(RunError::Config(format!(
            "window [{start}, {end}] is not inside the trace span [{span_start}, {span_end}]"
        )));
    }
    let count = ((end - start) / period + 1e-9).floor() as usize + 1;
    Ok((0..count).map(|i| start + i as f64 * period).collect())
}

fn period_seed(seed: u64, period: usize) -> u64 {
    // splitmix64 finalizer
    let mut z = seed ^ (period as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn select(
    spec: &AlgorithmSpec,
    g: &SnapshotGraph,
    seed: u64,
    exact_limit: usize,
) -> Result<SelectionResult, SelectionError> {
    match spec.kind {
        AlgorithmKind::Centrality => centrality_select(g, spec.d, spec.k),
        AlgorithmKind::Rb => rb_select(g, spec.slots, seed),
        AlgorithmKind::Exact => exact_min_dominating_set(g, spec.d, exact_limit),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AlgorithmSummary {
    pub label: String,
    pub periods: usize,
    /// Mean over periods with at least one vehicle.
    pub mean_aggregation_rate: Option<f64>,
    pub mean_upload_cost: f64,
    pub mean_reelections: f64,
    pub mean_notifications: f64,
    pub mean_routing_updates: f64,
    pub mean_edges: f64,
    /// Removed over unit-disk edges, pooled across periods.
    pub removed_edge_fraction: f64,
    pub edges_examined: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AlgorithmRun {
    pub spec: AlgorithmSpec,
    pub rows: Vec<PeriodMetrics>,
    pub aggregation_points: Vec<BTreeSet<VehicleId>>,
    pub assignments: Vec<BTreeMap<VehicleId, VehicleId>>,
    pub removed_edges: Vec<usize>,
    pub summary: AlgorithmSummary,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunOutput {
    pub instants: Vec<f64>,
    pub runs: Vec<AlgorithmRun>,
    /// Files written, in algorithm order.
    pub files: Vec<PathBuf>,
}

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

fn run_algorithm(spec: &AlgorithmSpec, graphs: &[PeriodGraph], config: &RunConfig) -> Result<AlgorithmRun, RunError> {
    let selections: Vec<SelectionResult> = graphs
        .par_iter()
        .enumerate()
        .map(|(i, pg)| {
            select(spec, &pg.graph, period_seed(config.seed, i), config.exact_limit).map_err(|source| {
                RunError::Selection {
                    label: spec.label(),
                    time: pg.time,
                    source,
                }
            })
        })
        .collect::<Result<_, _>>()?;

    let mut rows = Vec::with_capacity(graphs.len());
    let mut prev_aps = BTreeSet::new();
    let mut prev_assign = BTreeMap::new();
    let mut history = Vec::with_capacity(graphs.len());
    let mut assignments = Vec::with_capacity(graphs.len());
    for (pg, sel) in graphs.iter().zip(selections) {
        let n_vehicles = pg.graph.vertex_count();
        let n_aps = sel.len();
        rows.push(PeriodMetrics {
            time: pg.time,
            n_vehicles,
            n_edges: pg.graph.edge_count(),
            n_aps,
            aggregation_rate: if n_vehicles == 0 {
                None
            } else {
                Some(aggregation_rate(n_aps, n_vehicles)?)
            },
            upload_cost: upload_cost(n_aps, &config.constants),
            edges_examined: sel.work.edges_examined,
            n_notifications: notification_count(&prev_aps, &sel.aggregation_points),
            n_routing_updates: routing_update_count(&prev_assign, &sel.assignment),
            n_reelections: prev_aps.intersection(&sel.aggregation_points).count(),
        });
        prev_aps = sel.aggregation_points.clone();
        prev_assign = sel.assignment.clone();
        history.push(sel.aggregation_points);
        assignments.push(sel.assignment);
    }

    let removed: usize = graphs.iter().map(|g| g.removed_edges).sum();
    let kept: usize = graphs.iter().map(|g| g.graph.edge_count()).sum();
    let summary = AlgorithmSummary {
        label: spec.label(),
        periods: rows.len(),
        mean_aggregation_rate: {
            let rates: Vec<f64> = rows.iter().filter_map(|r| r.aggregation_rate).collect();
            (!rates.is_empty()).then(|| mean(rates.into_iter()))
        },
        mean_upload_cost: mean(rows.iter().map(|r| r.upload_cost)),
        mean_reelections: reelection_count(&history).mean,
        mean_notifications: mean(rows.iter().map(|r| r.n_notifications as f64)),
        mean_routing_updates: mean(rows.iter().map(|r| r.n_routing_updates as f64)),
        mean_edges: mean(rows.iter().map(|r| r.n_edges as f64)),
        removed_edge_fraction: if removed + kept == 0 {
            0.0
        } else {
            removed as f64 / (removed + kept) as f64
        },
        edges_examined: rows.iter().map(|r| r.edges_examined).sum(),
    };
    Ok(AlgorithmRun {
        spec: *spec,
        rows,
        aggregation_points: history,
        assignments,
        removed_edges: graphs.iter().map(|g| g.removed_edges).collect(),
        summary,
    })
}

fn create(path: &Path) -> Result<BufWriter<File>, RunError> {
    File::create(path).map(BufWriter::new).map_err(|e| RunError::Io {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

/// Builds the period graphs for one direction setting.
pub fn period_graphs(
    trace: &Trace,
    instants: &[f64],
    radio: &RadioParams,
    direction: bool,
) -> Result<Vec<PeriodGraph>, MobilityError> {
    instants
        .par_iter()
        .map(|&t| build_period_graph(trace, t, radio, direction))
        .collect()
}

/// Runs every configured algorithm over every delivery period and, when an
/// output directory is set, writes `<label>.csv` per algorithm.
pub fn run(config: &RunConfig) -> Result<RunOutput, RunError> {
    config.validate()?;
    let trace = config.trace.load()?;
    let instants = delivery_instants(&trace, config.constants.delivery_period, config.window)?;

    let mut graphs: [Option<Vec<PeriodGraph>>; 2] = [None, None];
    let mut runs = Vec::with_capacity(config.algorithms.len());
    for spec in &config.algorithms {
        let slot = &mut graphs[usize::from(spec.direction)];
        if slot.is_none() {
            *slot = Some(period_graphs(&trace, &instants, &config.radio, spec.direction)?);
        }
        runs.push(run_algorithm(spec, slot.as_deref().expect("built above"), config)?);
    }

    let mut files = Vec::new();
    if let Some(dir) = &config.out_dir {
        fs::create_dir_all(dir).map_err(|e| RunError::Io {
            path: dir.clone(),
            message: e.to_string(),
        })?;
        for r in &runs {
            let path = dir.join(format!("{}.csv", r.spec.label()));
            let mut w = create(&path)?;
            write_metrics_csv(&r.rows, &mut w)?;
            w.flush().map_err(|e| RunError::Io {
                path: path.clone(),
                message: e.to_string(),
            })?;
            files.push(path);
        }
    }
    Ok(RunOutput { instants, runs, files })
}

pub const SUMMARY_HEADER: &str = "algorithm,periods,mean_aggregation_rate,mean_upload_cost_bps,mean_reelections,mean_notifications,mean_routing_updates,mean_edges,removed_edge_fraction,edges_examined";

pub fn write_summary_csv<W: Write>(summaries: &[AlgorithmSummary], mut w: W) -> std::io::Result<()> {
    writeln!(w, "{SUMMARY_HEADER}")?;
    for s in summaries {
        let rate = s.mean_aggregation_rate.map(|r| r.to_string()).unwrap_or_default();
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{}",
            s.label,
            s.periods,
            rate,
            s.mean_upload_cost,
            s.mean_reelections,
            s.mean_notifications,
            s.mean_routing_updates,
            s.mean_edges,
            s.removed_edge_fraction,
            s.edges_examined
        )?;
    }
    Ok(())
}

/// [`run`] plus a merged `summary.csv` with one row per algorithm.
pub fn compare(config: &RunConfig) -> Result<(RunOutput, Vec<AlgorithmSummary>), RunError> {
    let mut out = run(config)?;
    let summaries: Vec<AlgorithmSummary> = out.runs.iter().map(|r| r.summary.clone()).collect();
    if let Some(dir) = &config.out_dir {
        let path = dir.join("summary.csv");
        let mut w = create(&path)?;
        write_summary_csv(&summaries, &mut w)
            .and_then(|_| w.flush())
            .map_err(|e| RunError::Io {
                path: path.clone(),
                message: e.to_string(),
            })?;
        out.files.push(path);
    }
    Ok((out, summaries))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mobility::TracePoint;
    use crate::selection::verify_domination;

    fn small_roadway() -> RoadwayParams {
        RoadwayParams {
            n_vehicles: 30,
            area_side: 600.0,
            duration: 21.0,
            speed_min: 5.0,
            speed_max: 15.0,
            seed: 3,
            ..Default::default()
        }
    }

    #[test]
    fn three_snapshots_three_rows() {
        let mut cfg = RunConfig::new(TraceSource::Roadway(small_roadway()));
        cfg.algorithms = vec![AlgorithmSpec::centrality(1, 4)];
        let out = run(&cfg).unwrap();
        assert_eq!(out.instants, vec![0.0, 10.0, 20.0]);
        assert_eq!(out.runs[0].rows.len(), 3);
        assert_eq!(out.runs[0].rows[0].n_notifications, out.runs[0].rows[0].n_aps);
    }

    #[test]
    fn exact_never_larger_than_heuristics() {
        let mut cfg = RunConfig::new(TraceSource::Roadway(small_roadway()));
        cfg.algorithms = vec![
            AlgorithmSpec::centrality(1, 4),
            AlgorithmSpec::rb(256),
            AlgorithmSpec::exact(1),
        ];
        let out = run(&cfg).unwrap();
        for i in 0..out.instants.len() {
            let exact = out.runs[2].rows[i].n_aps;
            assert!(exact <= out.runs[0].rows[i].n_aps);
            assert!(exact <= out.runs[1].rows[i].n_aps);
        }
        let trace = cfg.trace.load().unwrap();
        for r in &out.runs {
            for (i, &t) in out.instants.iter().enumerate() {
                let g = build_period_graph(&trace, t, &cfg.radio, r.spec.direction)
                    .unwrap()
                    .graph;
                assert!(verify_domination(&g, &r.aggregation_points[i], r.spec.hop_radius()).unwrap());
            }
        }
    }

    #[test]
    fn empty_periods_keep_their_row() {
        let points = vec![
            TracePoint {
                time: 0.0,
                vehicle: VehicleId(1),
                x: 0.0,
                y: 0.0,
            },
            TracePoint {
                time: 0.0,
                vehicle: VehicleId(2),
                x: 50.0,
                y: 0.0,
            },
            TracePoint {
                time: 20.0,
                vehicle: VehicleId(1),
                x: 0.0,
                y: 0.0,
            },
        ];
        let mut cfg = RunConfig::new(TraceSource::InMemory(Trace::new(points).unwrap()));
        cfg.algorithms = vec![AlgorithmSpec::centrality(1, 4)];
        let out = run(&cfg).unwrap();
        let rows = &out.runs[0].rows;
        assert_eq!(rows.len(), 3);
        assert_eq!(rows[1].n_vehicles, 0);
        assert_eq!(rows[1].aggregation_rate, None);
        assert_eq!(rows[0].aggregation_rate, Some(0.5));
        // vehicle 1 reappears after the gap: counts as an arrival
        assert_eq!(rows[2].n_routing_updates, 1);
    }

    #[test]
    fn config_errors() {
        let cfg = RunConfig::new(TraceSource::Roadway(small_roadway()));
        assert!(matches!(run(&cfg), Err(RunError::Config(_))));
        let mut dup = cfg.clone();
        dup.algorithms = vec![AlgorithmSpec::rb(8), AlgorithmSpec::rb(8)];
        assert!(matches!(run(&dup), Err(RunError::Config(_))));
        let mut bad_window = cfg.clone();
        bad_window.algorithms = vec![AlgorithmSpec::rb(8)];
        bad_window.window = Some((0.0, 500.0));
        assert!(matches!(run(&bad_window), Err(RunError::Config(_))));
        let mut bad_d = cfg.clone();
        bad_d.algorithms = vec![AlgorithmSpec::centrality(0, 4)];
        assert!(matches!(run(&bad_d), Err(RunError::Config(_))));
        let missing = RunConfig {
            algorithms: vec![AlgorithmSpec::rb(8)],
            ..RunConfig::new(TraceSource::File("/nonexistent/trace.csv".into()))
        };
        assert!(matches!(run(&missing), Err(RunError::Mobility(MobilityError::Io(_)))));
    }

    #[test]
    fn exact_limit_is_reported() {
        let mut cfg = RunConfig::new(TraceSource::Roadway(small_roadway()));
        cfg.algorithms = vec![AlgorithmSpec::exact(1)];
        cfg.exact_limit = 5;
        assert!(matches!(
            run(&cfg),
            Err(RunError::Selection {
                source: SelectionError::TooLarge { .. },
                ..
            })
        ));
    }

    #[test]
    fn labels_and_parsing() {
        assert_eq!(
            AlgorithmSpec::centrality(3, 4).with_direction(true).label(),
            "centrality_d3_k4_dir"
        );
        assert_eq!(AlgorithmSpec::rb(256).label(), "rb_t256");
        assert_eq!(AlgorithmSpec::exact(2).label(), "exact_d2");
        assert_eq!("rb".parse::<AlgorithmKind>().unwrap(), AlgorithmKind::Rb);
        assert!("greedy".parse::<AlgorithmKind>().is_err());
    }

    #[test]
    fn compare_writes_summary() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = RunConfig::new(TraceSource::Roadway(small_roadway()));
        cfg.algorithms = vec![AlgorithmSpec::centrality(1, 4)];
        cfg.out_dir = Some(dir.path().to_path_buf());
        let (out, summaries) = compare(&cfg).unwrap();
        assert_eq!(out.files.len(), 2);
        let s = &summaries[0];
        let rows = &out.runs[0].rows;
        let mean_rate = rows.iter().filter_map(|r| r.aggregation_rate).sum::<f64>() / rows.len() as f64;
        assert_eq!(s.mean_aggregation_rate, Some(mean_rate));
        let text = fs::read_to_string(dir.path().join("summary.csv")).unwrap();
        assert!(text.starts_with(SUMMARY_HEADER));
        assert_eq!(text.lines().count(), 2);
    }

    #[test]
    fn instants_cover_window() {
        let trace = generate_two_way_roadway(&small_roadway()).unwrap();
        assert_eq!(delivery_instants(&trace, 10.0, None).unwrap(), vec![0.0, 10.0, 20.0]);
        assert_eq!(
            delivery_instants(&trace, 5.0, Some((5.0, 15.0))).unwrap(),
            vec![5.0, 10.0, 15.0]
        );
        assert!(delivery_instants(&trace, 0.0, None).is_err());
    }
}
