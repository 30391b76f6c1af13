use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::graph::VehicleId;

use super::MobilityError;

/// Header every trace CSV must carry, verbatim.
pub const TRACE_HEADER: [&str; 4] = ["time", "id", "x", "y"];

/// Two sample times closer than this are the same instant.
const TIME_EPS: f64 = 1e-9;

/// One position sample: seconds, vehicle, planar meters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub time: f64,
    #[serde(rename = "id")]
    pub vehicle: VehicleId,
    pub x: f64,
    pub y: f64,
}

/// Position of one vehicle at one instant.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Position {
    pub vehicle: VehicleId,
    pub x: f64,
    pub y: f64,
}

/// All vehicles sampled at one instant, sorted by id.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Snapshot {
    pub time: f64,
    pub positions: Vec<Position>,
}

impl Snapshot {
    pub fn new(time: f64, mut positions: Vec<Position>) -> Self {
        positions.sort_by_key(|p| p.vehicle);
        Snapshot { time, positions }
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn get(&self, v: VehicleId) -> Option<&Position> {
        self.positions
            .binary_search_by_key(&v, |p| p.vehicle)
            .ok()
            .map(|i| &self.positions[i])
    }
}

/// Time-indexed vehicle positions, sorted by `(time, vehicle)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Trace {
    points: Vec<TracePoint>,
    sampling_period: f64,
}

impl Trace {
    /// Sorts and validates `points`. The sampling period is the smallest
    /// positive gap between sample times (1 s for single-instant traces).
    pub fn new(mut points: Vec<TracePoint>) -> Result<Self, MobilityError> {
        if points.is_empty() {
            return Err(MobilityError::EmptyTrace);
        }
        for p in &points {
            if !(p.time.is_finite() && p.time >= 0.0 && p.x.is_finite() && p.y.is_finite()) {
                return Err(MobilityError::InvalidSample {
                    time: p.time,
                    vehicle: p.vehicle,
                });
            }
        }
        points.sort_by(|a, b| a.time.total_cmp(&b.time).then(a.vehicle.cmp(&b.vehicle)));
        let mut sampling_period = f64::INFINITY;
        for w in points.windows(2) {
            let gap = w[1].time - w[0].time;
            if gap <= TIME_EPS {
                if w[0].vehicle == w[1].vehicle {
                    return Err(MobilityError::DuplicateSample {
                        time: w[0].time,
                        vehicle: w[0].vehicle,
                    });
                }
            } else {
                sampling_period = sampling_period.min(gap);
            }
        }
        if !sampling_period.is_finite() {
            sampling_period = 1.0;
        }
        Ok(Trace {
            points,
            sampling_period,
        })
    }

    pub fn points(&self) -> &[TracePoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn sampling_period(&self) -> f64 {
        self.sampling_period
    }

    pub fn start_time(&self) -> f64 {
        self.points[0].time
    }

    pub fn end_time(&self) -> f64 {
        self.points[self.points.len() - 1].time
    }

    /// Distinct sample times in ascending order.
    pub fn instants(&self) -> Vec<f64> {
        let mut out: Vec<f64> = Vec::new();
        for p in &self.points {
            if out.last().is_none_or(|&t| p.time - t > TIME_EPS) {
                out.push(p.time);
            }
        }
        out
    }

    /// Vehicles sampled exactly at `t` (no interpolation).
    pub fn snapshot_at(&self, t: f64) -> Result<Snapshot, MobilityError> {
        let (start, end) = (self.start_time(), self.end_time());
        if !(t >= start - TIME_EPS && t <= end + TIME_EPS) {
            return Err(MobilityError::OutOfRange { t, start, end });
        }
        let lo = self.points.partition_point(|p| p.time < t - TIME_EPS);
        let hi = self.points.partition_point(|p| p.time <= t + TIME_EPS);
        let positions = self.points[lo..hi]
            .iter()
            .map(|p| Position {
                vehicle: p.vehicle,
                x: p.x,
                y: p.y,
            })
            .collect();
        Ok(Snapshot::new(t, positions))
    }
}

pub fn read_trace<R: Read>(reader: R) -> Result<Trace, MobilityError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers().map_err(|e| MobilityError::Csv {
        line: 1,
        message: e.to_string(),
    })?;
    if headers.iter().ne(TRACE_HEADER) {
        return Err(MobilityError::BadHeader(headers.iter().collect::<Vec<_>>().join(",")));
    }
    let mut points = Vec::new();
    for row in rdr.deserialize::<TracePoint>() {
        let point = row.map_err(|e| MobilityError::Csv {
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        points.push(point);
    }
    Trace::new(points)
}

pub fn load_trace_csv(path: impl AsRef<Path>) -> Result<Trace, MobilityError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| MobilityError::Io(format!("{}: {e}", path.display())))?;
    read_trace(file)
}

pub fn write_trace<W: Write>(trace: &Trace, writer: W) -> Result<(), MobilityError> {
    let mut wtr = csv::Writer::from_writer(writer);
    for p in trace.points() {
        wtr.serialize(p).map_err(|e| MobilityError::Io(e.to_string()))?;
    }
    wtr.flush().map_err(|e| MobilityError::Io(e.to_string()))
}

pub fn save_trace_csv(trace: &Trace, path: impl AsRef<Path>) -> Result<(), MobilityError> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| MobilityError::Io(format!("{}: {e}", path.display())))?;
    write_trace(trace, file)
}
