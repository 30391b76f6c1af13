//! Mobility input: trace ingestion, per-instant snapshots, unit-disk
//! communication graphs (optionally direction-filtered) and a synthetic
//! two-way roadway generator.

use thiserror::Error;

use crate::graph::VehicleId;

mod roadway;
mod trace;
mod udg;

pub use roadway::{generate_two_way_roadway, RoadwayParams};
pub use trace::{
    load_trace_csv, read_trace, save_trace_csv, write_trace, Position, Snapshot, Trace, TracePoint, TRACE_HEADER,
};
pub use udg::{
    build_direction_constrained_udg, build_udg, direction_angle, displacements, same_direction, ConstrainedGraph,
    DisplacementVector, RadioParams,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MobilityError {
    #[error("{0}")]
    Io(String),
    #[error("trace header must be `time,id,x,y`, found `{0}`")]
    BadHeader(String),
    #[error("line {line}: {message}")]
    Csv { line: u64, message: String },
    #[error("trace has no samples")]
    EmptyTrace,
    #[error("duplicate sample for vehicle {vehicle} at t={time}")]
    DuplicateSample { time: f64, vehicle: VehicleId },
    #[error("invalid sample for vehicle {vehicle} at t={time}")]
    InvalidSample { time: f64, vehicle: VehicleId },
    #[error("time {t} is outside the trace span [{start}, {end}]")]
    OutOfRange { t: f64, start: f64, end: f64 },
    #[error("previous snapshot (t={prev}) does not precede t={current}")]
    SnapshotOrder { prev: f64, current: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}
