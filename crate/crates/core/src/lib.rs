//! Aggregation-point selection for mobile data offloading in vehicular
//! sensor networks.
//!
//! Each delivery period, the vehicles in D2D range form a [`SnapshotGraph`].
//! A d-hop dominating set of that graph is elected as aggregation points:
//! every other vehicle forwards its reading to an aggregation point at most
//! `d` hops away, and only aggregation points upload over the cellular
//! network.
//!
//! * [`graph`]: snapshots, truncated BFS, k-closeness centrality
//! * [`selection`]: centrality greedy, reservation-based baseline, exact solver
//! * [`mobility`]: traces, unit disk graphs, direction filter, roadway generator
//! * [`metrics`]: aggregation rate, upload cost, cluster-maintenance counters
//! * [`tuner`]: Nelder-Mead search over `(d, k)`
//! * [`pipeline`]: the per-period experiment driver used by the CLI

pub mod generators;
pub mod graph;
pub mod metrics;
pub mod mobility;
pub mod pipeline;
pub mod selection;
pub mod tuner;

pub use graph::{GraphError, HopDistance, SnapshotGraph, VehicleId};
pub use selection::{SelectionParams, SelectionResult};
