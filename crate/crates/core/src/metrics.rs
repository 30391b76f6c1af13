//! Per-period offloading measurements and their CSV form.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::VehicleId;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricsError {
    #[error("aggregation rate is undefined for an empty snapshot")]
    NoVehicles,
    #[error("{n_aps} aggregation points for {n_vehicles} vehicles")]
    InvalidCounts { n_aps: usize, n_vehicles: usize },
    #[error("invalid constant: {0}")]
    InvalidConstant(String),
    #[error("metrics csv: {0}")]
    Csv(String),
}

/// Packet size and timing of the offloading scheme.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OffloadConstants {
    /// Bytes in one aggregated packet.
    pub packet_size_eps: f64,
    /// Seconds between uploads.
    pub delivery_period: f64,
    /// Seconds between D2D collection rounds.
    pub collect_interval: f64,
}

impl Default for OffloadConstants {
    fn default() -> Self {
        OffloadConstants {
            packet_size_eps: 120.0,
            delivery_period: 10.0,
            collect_interval: 5.0,
        }
    }
}

impl OffloadConstants {
    pub fn validate(&self) -> Result<(), MetricsError> {
        for (name, v) in [
            ("packet_size_eps", self.packet_size_eps),
            ("delivery_period", self.delivery_period),
            ("collect_interval", self.collect_interval),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(MetricsError::InvalidConstant(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        Ok(())
    }
}

/// Fraction of upload volume removed by aggregation: `1 - n_aps / n_vehicles`.
pub fn aggregation_rate(n_aps: usize, n_vehicles: usize) -> Result<f64, MetricsError> {
    if n_vehicles == 0 {
        return Err(MetricsError::NoVehicles);
    }
    if n_aps == 0 || n_aps > n_vehicles {
        return Err(MetricsError::InvalidCounts { n_aps, n_vehicles });
    }
    Ok(1.0 - n_aps as f64 / n_vehicles as f64)
}

/// Cellular upload in bytes per second: one packet per AP per delivery period.
pub fn upload_cost(n_aps: usize, consts: &OffloadConstants) -> f64 {
    n_aps as f64 * consts.packet_size_eps / consts.delivery_period
}

/// Base-station notifications: vehicles that became or ceased to be an AP.
pub fn notification_count(prev: &BTreeSet<VehicleId>, cur: &BTreeSet<VehicleId>) -> usize {
    prev.symmetric_difference(cur).count()
}

/// Routing-table updates: vehicles whose AP changed plus newly present
/// vehicles. Departed vehicles cost nothing.
pub fn routing_update_count(prev: &BTreeMap<VehicleId, VehicleId>, cur: &BTreeMap<VehicleId, VehicleId>) -> usize {
    cur.iter()
        .filter(|(v, ap)| prev.get(v).is_none_or(|old| old != *ap))
        .count()
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ReelectionStats {
    /// Times each vehicle stayed an AP from one period to the next.
    pub per_vehicle: BTreeMap<VehicleId, u32>,
    /// Mean over every vehicle that was ever an AP; 0 if none was.
    pub mean: f64,
}

pub fn reelection_count(history: &[BTreeSet<VehicleId>]) -> ReelectionStats {
    let mut per_vehicle: BTreeMap<VehicleId, u32> = BTreeMap::new();
    let mut prev: Option<&BTreeSet<VehicleId>> = None;
    for cur in history {
        for &v in cur {
            let count = per_vehicle.entry(v).or_insert(0);
            if prev.is_some_and(|p| p.contains(&v)) {
                *count += 1;
            }
        }
        prev = Some(cur);
    }
    let mean = if per_vehicle.is_empty() {
        0.0
    } else {
        per_vehicle.values().map(|&c| f64::from(c)).sum::<f64>() / per_vehicle.len() as f64
    };
    ReelectionStats { per_vehicle, mean }
}

/// Measurements for one delivery period of one algorithm. Serializes to
/// one row of the per-period metrics CSV.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PeriodMetrics {
    pub time: f64,
    pub n_vehicles: usize,
    pub n_edges: usize,
    pub n_aps: usize,
    /// Blank when the period has no vehicles.
    pub aggregation_rate: Option<f64>,
    #[serde(rename = "upload_cost_bps")]
    pub upload_cost: f64,
    pub edges_examined: u64,
    pub n_notifications: usize,
    pub n_routing_updates: usize,
    /// APs re-elected from the previous period; summarized, not written.
    #[serde(skip)]
    pub n_reelections: usize,
}

pub const METRICS_HEADER: [&str; 9] = [
    "time",
    "n_vehicles",
    "n_edges",
    "n_aps",
    "aggregation_rate",
    "upload_cost_bps",
    "edges_examined",
    "n_notifications",
    "n_routing_updates",
];

pub fn write_metrics_csv<W: Write>(rows: &[PeriodMetrics], writer: W) -> Result<(), MetricsError> {
    let mut wtr = csv::WriterBuilder::new().has_headers(false).from_writer(writer);
    wtr.write_record(METRICS_HEADER)
        .map_err(|e| MetricsError::Csv(e.to_string()))?;
    for row in rows {
        wtr.serialize(row).map_err(|e| MetricsError::Csv(e.to_string()))?;
    }
    wtr.flush().map_err(|e| MetricsError::Csv(e.to_string()))
}

pub fn read_metrics_csv<R: Read>(reader: R) -> Result<Vec<PeriodMetrics>, MetricsError> {
    let mut rdr = csv::Reader::from_reader(reader);
    let headers = rdr.headers().map_err(|e| MetricsError::Csv(e.to_string()))?;
    if headers.iter().ne(METRICS_HEADER) {
        return Err(MetricsError::Csv(format!(
            "unexpected header `{}`",
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    rdr.deserialize()
        .map(|r| r.map_err(|e| MetricsError::Csv(e.to_string())))
        .collect()
}
