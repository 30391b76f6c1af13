use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use vsn_offload::metrics::OffloadConstants;
use vsn_offload::mobility::{generate_two_way_roadway, load_trace_csv, write_trace, RadioParams, RoadwayParams};
use vsn_offload::pipeline::{self, build_period_graph, delivery_instants, AlgorithmSummary, RunConfig, TraceSource};
use vsn_offload::selection::{exact_min_dominating_set, DEFAULT_EXACT_LIMIT, DEFAULT_SLOTS};
use vsn_offload::tuner::{tune_parameters, write_trajectory_csv, TunerConfig};

mod config;

use config::{load_settings, parse_algo, parse_bool, parse_window, AlgoDefaults, RoadwaySettings, Settings};

/// Aggregation-point selection and offloading metrics for vehicular
/// sensor networks.
#[derive(Parser, Debug)]
#[command(name = "vsn-offload", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one or more algorithms over every delivery period and write one
    /// metrics CSV per algorithm.
    Run(ExperimentArgs),
    /// Like `run`, plus a merged summary.csv with per-algorithm means.
    Compare(ExperimentArgs),
    /// Generate a synthetic two-way roadway trace.
    GenTrace(GenTraceArgs),
    /// Tune `d` and `k` of the centrality heuristic on a trace.
    Tune(TuneArgs),
    /// Solve one snapshot exactly and print the aggregation points.
    Exact(ExactArgs),
}

#[derive(Args, Debug, Clone, Default)]
struct RoadwayArgs {
    /// Vehicles on the generated roadway (used when no trace is given).
    #[arg(long)]
    vehicles: Option<usize>,
    /// Side of the square area in meters.
    #[arg(long)]
    area: Option<f64>,
    /// Simulated seconds.
    #[arg(long)]
    duration: Option<f64>,
    #[arg(long)]
    speed_min: Option<f64>,
    #[arg(long)]
    speed_max: Option<f64>,
    /// Distance between lane center lines in meters.
    #[arg(long)]
    lane_separation: Option<f64>,
    /// Seconds between trace samples.
    #[arg(long)]
    sample_period: Option<f64>,
}

impl RoadwayArgs {
    fn settings(&self) -> RoadwaySettings {
        RoadwaySettings {
            vehicles: self.vehicles,
            area: self.area,
            duration: self.duration,
            speed_min: self.speed_min,
            speed_max: self.speed_max,
            lane_separation: self.lane_separation,
            sample_period: self.sample_period,
        }
    }
}

fn roadway_params(s: &RoadwaySettings, seed: u64) -> RoadwayParams {
    let base = RoadwayParams::default();
    RoadwayParams {
        n_vehicles: s.vehicles.unwrap_or(base.n_vehicles),
        area_side: s.area.unwrap_or(base.area_side),
        duration: s.duration.unwrap_or(base.duration),
        speed_min: s.speed_min.unwrap_or(base.speed_min),
        speed_max: s.speed_max.unwrap_or(base.speed_max),
        lane_separation: s.lane_separation.unwrap_or(base.lane_separation),
        sample_period: s.sample_period.unwrap_or(base.sample_period),
        seed,
    }
}

#[derive(Args, Debug)]
struct ExperimentArgs {
    /// `key = value` file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Trace CSV (`time,id,x,y`). Without it a roadway trace is generated.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Algorithm, repeatable: centrality, rb or exact, with optional inline
    /// parameters such as `centrality:d=3,k=4,direction`.
    #[arg(long = "algo")]
    algos: Vec<String>,
    /// Offload radius in hops.
    #[arg(long)]
    d: Option<u32>,
    /// Centrality cutoff in hops.
    #[arg(long)]
    k: Option<u32>,
    /// RB reservation slots.
    #[arg(long)]
    slots: Option<u32>,
    /// Drop links between vehicles moving in different directions.
    #[arg(long, num_args = 0..=1, default_missing_value = "true", value_parser = parse_bool)]
    direction: Option<bool>,
    /// D2D range in meters.
    #[arg(long)]
    radius: Option<f64>,
    /// Direction threshold in degrees.
    #[arg(long)]
    angle: Option<f64>,
    /// Delivery period in seconds.
    #[arg(long)]
    period: Option<f64>,
    /// Aggregated packet size in bytes.
    #[arg(long)]
    packet_size: Option<f64>,
    /// `start,end` in seconds.
    #[arg(long, value_parser = parse_window)]
    window: Option<(f64, f64)>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Largest snapshot the exact solver accepts.
    #[arg(long)]
    exact_limit: Option<usize>,
    #[command(flatten)]
    roadway: RoadwayArgs,
}

impl ExperimentArgs {
    fn settings(&self) -> Result<Settings> {
        let flags = Settings {
            trace: self.trace.clone(),
            algos: self.algos.clone(),
            d: self.d,
            k: self.k,
            slots: self.slots,
            direction: self.direction,
            radius: self.radius,
            angle: self.angle,
            period: self.period,
            packet_size: self.packet_size,
            window: self.window,
            seed: self.seed,
            out: self.out.clone(),
            exact_limit: self.exact_limit,
            roadway: self.roadway.settings(),
        };
        Ok(match &self.config {
            Some(path) => flags.overlay(load_settings(path)?),
            None => flags,
        })
    }
}

fn trace_source(s: &Settings, seed: u64) -> Result<TraceSource> {
    match &s.trace {
        Some(path) => {
            if s.roadway.any_set() {
                bail!("give either a trace file or roadway generator settings, not both");
            }
            Ok(TraceSource::File(path.clone()))
        }
        None => Ok(TraceSource::Roadway(roadway_params(&s.roadway, seed))),
    }
}

fn radio(s: &Settings) -> RadioParams {
    let base = RadioParams::default();
    RadioParams {
        range_r: s.radius.unwrap_or(base.range_r),
        angle_threshold: s.angle.unwrap_or(base.angle_threshold),
    }
}

fn constants(s: &Settings) -> OffloadConstants {
    let base = OffloadConstants::default();
    OffloadConstants {
        packet_size_eps: s.packet_size.unwrap_or(base.packet_size_eps),
        delivery_period: s.period.unwrap_or(base.delivery_period),
        ..base
    }
}

fn run_config(s: &Settings) -> Result<RunConfig> {
    let seed = s.seed.unwrap_or(0);
    let defaults = AlgoDefaults {
        d: s.d.unwrap_or(1),
        k: s.k.unwrap_or(4),
        slots: s.slots.unwrap_or(DEFAULT_SLOTS),
        direction: s.direction.unwrap_or(false),
    };
    let algorithms = s
        .algos
        .iter()
        .map(|a| parse_algo(a, defaults))
        .collect::<Result<Vec<_>>>()?;
    Ok(RunConfig {
        trace: trace_source(s, seed)?,
        radio: radio(s),
        algorithms,
        constants: constants(s),
        window: s.window,
        out_dir: Some(s.out.clone().unwrap_or_else(|| PathBuf::from("results"))),
        seed,
        exact_limit: s.exact_limit.unwrap_or(DEFAULT_EXACT_LIMIT),
    })
}

fn print_summary(summaries: &[AlgorithmSummary]) {
    println!(
        "{:<28} {:>7} {:>10} {:>12} {:>11} {:>9} {:>9}",
        "algorithm", "periods", "mean_rate", "upload_B/s", "reelection", "notif", "routing"
    );
    for s in summaries {
        let rate = s
            .mean_aggregation_rate
            .map_or_else(|| "-".to_string(), |r| format!("{r:.4}"));
        println!(
            "{:<28} {:>7} {:>10} {:>12.1} {:>11.3} {:>9.2} {:>9.2}",
            s.label,
            s.periods,
            rate,
            s.mean_upload_cost,
            s.mean_reelections,
            s.mean_notifications,
            s.mean_routing_updates
        );
    }
}

fn cmd_run(args: &ExperimentArgs, merged_summary: bool) -> Result<()> {
    let cfg = run_config(&args.settings()?)?;
    let (out, summaries) = if merged_summary {
        pipeline::compare(&cfg)?
    } else {
        let out = pipeline::run(&cfg)?;
        let summaries = out.runs.iter().map(|r| r.summary.clone()).collect();
        (out, summaries)
    };
    print_summary(&summaries);
    for f in &out.files {
        eprintln!("wrote {}", f.display());
    }
    Ok(())
}

#[derive(Args, Debug)]
struct GenTraceArgs {
    #[command(flatten)]
    roadway: RoadwayArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output CSV; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn cmd_gen_trace(args: &GenTraceArgs) -> Result<()> {
    let trace = generate_two_way_roadway(&roadway_params(&args.roadway.settings(), args.seed))?;
    match &args.out {
        Some(path) => {
            let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
            let mut w = BufWriter::new(file);
            write_trace(&trace, &mut w)?;
            w.flush()?;
            eprintln!("wrote {} samples to {}", trace.len(), path.display());
        }
        None => write_trace(&trace, io::stdout().lock())?,
    }
    Ok(())
}

#[derive(Args, Debug)]
struct TuneArgs {
    /// Trace CSV. Without it a roadway trace is generated.
    #[arg(long)]
    trace: Option<PathBuf>,
    #[command(flatten)]
    roadway: RoadwayArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 100.0)]
    radius: f64,
    #[arg(long, default_value_t = 45.0)]
    angle: f64,
    #[arg(long, num_args = 0..=1, default_missing_value = "true", value_parser = parse_bool, default_value = "false")]
    direction: bool,
    /// Seconds between sampled snapshots.
    #[arg(long, default_value_t = 10.0)]
    period: f64,
    #[arg(long, value_parser = parse_window)]
    window: Option<(f64, f64)>,
    #[arg(long, default_value_t = 10)]
    d_max: u32,
    /// Defaults to the largest component diameter of the sampled graphs.
    #[arg(long)]
    k_max: Option<u32>,
    #[arg(long, default_value_t = 500)]
    max_iterations: usize,
    /// Trajectory CSV (`iteration,d,k,objective`).
    #[arg(long)]
    out: Option<PathBuf>,
}

fn cmd_tune(args: &TuneArgs) -> Result<()> {
    let trace = match &args.trace {
        Some(p) => load_trace_csv(p)?,
        None => generate_two_way_roadway(&roadway_params(&args.roadway.settings(), args.seed))?,
    };
    let samples = delivery_instants(&trace, args.period, args.window)?;
    let radio = RadioParams {
        range_r: args.radius,
        angle_threshold: args.angle,
    };
    let config = TunerConfig {
        max_iterations: args.max_iterations,
        d_max: args.d_max,
        k_max: args.k_max,
        ..Default::default()
    };
    let result = tune_parameters(&trace, &samples, &radio, args.direction, &config)?;
    println!(
        "d = {}, k = {}, mean aggregation rate = {:.6} ({} iterations, {} evaluations, bounds d<={} k<={})",
        result.d, result.k, result.objective, result.iterations, result.evaluations, result.d_max, result.k_max
    );
    if let Some(path) = &args.out {
        let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
        write_trajectory_csv(&result.trajectory, BufWriter::new(file))?;
        eprintln!("wrote {}", path.display());
    }
    Ok(())
}

#[derive(Args, Debug)]
struct ExactArgs {
    #[arg(long)]
    trace: PathBuf,
    /// Snapshot time; defaults to the first instant.
    #[arg(long)]
    time: Option<f64>,
    #[arg(long, default_value_t = 1)]
    d: u32,
    #[arg(long, default_value_t = 100.0)]
    radius: f64,
    #[arg(long, default_value_t = 45.0)]
    angle: f64,
    #[arg(long, num_args = 0..=1, default_missing_value = "true", value_parser = parse_bool, default_value = "false")]
    direction: bool,
    #[arg(long, default_value_t = DEFAULT_EXACT_LIMIT)]
    limit: usize,
}

fn cmd_exact(args: &ExactArgs) -> Result<()> {
    let trace = load_trace_csv(&args.trace)?;
    let t = args.time.unwrap_or_else(|| trace.start_time());
    let radio = RadioParams {
        range_r: args.radius,
        angle_threshold: args.angle,
    };
    radio.validate()?;
    let pg = build_period_graph(&trace, t, &radio, args.direction)?;
    let r = exact_min_dominating_set(&pg.graph, args.d, args.limit)?;
    let members: Vec<String> = r.aggregation_points.iter().map(|v| v.to_string()).collect();
    println!(
        "t = {t}: {} vehicles, {} edges",
        pg.graph.vertex_count(),
        pg.graph.edge_count()
    );
    println!("|S| = {}", r.len());
    println!("S = {{{}}}", members.join(", "));
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(a) => cmd_run(a, false),
        Command::Compare(a) => cmd_run(a, true),
        Command::GenTrace(a) => cmd_gen_trace(a),
        Command::Tune(a) => cmd_tune(a),
        Command::Exact(a) => cmd_exact(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
