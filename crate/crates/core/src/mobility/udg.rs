use crate::graph::SnapshotGraph;

use super::trace::Snapshot;
use super::MobilityError;

/// Tolerance, in degrees, applied when comparing an angle to the threshold;
/// absorbs rounding in the arccos of exactly representable 45° pairs.
const ANGLE_EPS_DEG: f64 = 1e-9;

/// D2D radio model: unit-disk range plus the same-direction threshold.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RadioParams {
    /// Transmission range in meters; pairs at exactly this distance connect.
    pub range_r: f64,
    /// Largest displacement angle, in degrees, still treated as one direction.
    pub angle_threshold: f64,
}

impl Default for RadioParams {
    fn default() -> Self {
        RadioParams {
            range_r: 100.0,
            angle_threshold: 45.0,
        }
    }
}

impl RadioParams {
    pub fn validate(&self) -> Result<(), MobilityError> {
        if !(self.range_r.is_finite() && self.range_r > 0.0) {
            return Err(MobilityError::InvalidParameter(format!(
                "range must be positive, got {}",
                self.range_r
            )));
        }
        if !(self.angle_threshold > 0.0 && self.angle_threshold <= 180.0) {
            return Err(MobilityError::InvalidParameter(format!(
                "angle threshold must be in (0, 180], got {}",
                self.angle_threshold
            )));
        }
        Ok(())
    }
}

/// Movement between two consecutive samples, `current - previous`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DisplacementVector {
    pub dx: f64,
    pub dy: f64,
}

impl DisplacementVector {
    pub fn new(dx: f64, dy: f64) -> Self {
        DisplacementVector { dx, dy }
    }

    pub fn magnitude(&self) -> f64 {
        self.dx.hypot(self.dy)
    }

    /// A vehicle that has not moved has no direction.
    pub fn is_neutral(&self) -> bool {
        self.magnitude() == 0.0
    }
}

/// Smallest angle between two displacements, in degrees within `[0, 180]`,
/// via `arccos(a·b / |a||b|)`. `None` if either vector is direction-neutral.
pub fn direction_angle(a: DisplacementVector, b: DisplacementVector) -> Option<f64> {
    let (ma, mb) = (a.magnitude(), b.magnitude());
    if ma == 0.0 || mb == 0.0 {
        return None;
    }
    let cos = ((a.dx * b.dx + a.dy * b.dy) / (ma * mb)).clamp(-1.0, 1.0);
    Some(cos.acos().to_degrees())
}

/// Whether two vehicles count as moving the same way. Direction-neutral
/// vehicles are compatible with everyone.
pub fn same_direction(a: Option<DisplacementVector>, b: Option<DisplacementVector>, threshold: f64) -> bool {
    match (a, b) {
        (Some(a), Some(b)) => direction_angle(a, b).is_none_or(|deg| deg <= threshold + ANGLE_EPS_DEG),
        _ => true,
    }
}

fn in_range_pairs(snapshot: &Snapshot, r: f64) -> Vec<(usize, usize)> {
    let r2 = r * r;
    let pos = &snapshot.positions;
    let mut pairs = Vec::new();
    for i in 0..pos.len() {
        for j in i + 1..pos.len() {
            let (dx, dy) = (pos[i].x - pos[j].x, pos[i].y - pos[j].y);
            if dx * dx + dy * dy <= r2 {
                pairs.push((i, j));
            }
        }
    }
    pairs
}

fn graph_from_pairs(snapshot: &Snapshot, pairs: impl IntoIterator<Item = (usize, usize)>) -> SnapshotGraph {
    let ids = snapshot.positions.iter().map(|p| p.vehicle).collect();
    let mut adj = vec![Vec::new(); snapshot.len()];
    for (i, j) in pairs {
        adj[i].push(j);
        adj[j].push(i);
    }
    SnapshotGraph::from_index_adjacency(ids, adj)
}

/// Unit disk graph: an edge wherever two vehicles are at most `range_r` apart.
pub fn build_udg(snapshot: &Snapshot, radio: &RadioParams) -> SnapshotGraph {
    graph_from_pairs(snapshot, in_range_pairs(snapshot, radio.range_r))
}

/// A direction-filtered unit disk graph.
#[derive(Clone, Debug, PartialEq)]
pub struct ConstrainedGraph {
    pub graph: SnapshotGraph,
    /// In-range pairs dropped because their directions differ.
    pub removed_edges: usize,
}

impl ConstrainedGraph {
    /// Share of unit-disk edges dropped; 0 when there were none.
    pub fn removed_fraction(&self) -> f64 {
        let total = self.removed_edges + self.graph.edge_count();
        if total == 0 {
            0.0
        } else {
            self.removed_edges as f64 / total as f64
        }
    }
}

/// Displacement of every vehicle in `snapshot` since `prev`; `None` for
/// vehicles absent from `prev`.
pub fn displacements(snapshot: &Snapshot, prev: &Snapshot) -> Vec<Option<DisplacementVector>> {
    snapshot
        .positions
        .iter()
        .map(|p| {
            prev.get(p.vehicle)
                .map(|q| DisplacementVector::new(p.x - q.x, p.y - q.y))
        })
        .collect()
}

/// Unit disk graph keeping only pairs that move in the same direction
/// (within `radio.angle_threshold`). Vehicles without a previous sample or
/// without movement keep all their edges.
pub fn build_direction_constrained_udg(
    snapshot: &Snapshot,
    prev: &Snapshot,
    radio: &RadioParams,
) -> Result<ConstrainedGraph, MobilityError> {
    if prev.time >= snapshot.time && !prev.is_empty() {
        return Err(MobilityError::SnapshotOrder {
            prev: prev.time,
            current: snapshot.time,
        });
    }
    let moves = displacements(snapshot, prev);
    let (kept, removed): (Vec<_>, Vec<_>) = in_range_pairs(snapshot, radio.range_r)
        .into_iter()
        .partition(|&(i, j)| same_direction(moves[i], moves[j], radio.angle_threshold));
    Ok(ConstrainedGraph {
        graph: graph_from_pairs(snapshot, kept),
        removed_edges: removed.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::VehicleId;
    use crate::mobility::trace::Position;
    use proptest::prelude::*;

    fn snap(time: f64, pts: &[(u64, f64, f64)]) -> Snapshot {
        Snapshot::new(
            time,
            pts.iter()
                .map(|&(v, x, y)| Position {
                    vehicle: VehicleId(v),
                    x,
                    y,
                })
                .collect(),
        )
    }

    #[test]
    fn range_boundary_is_inclusive() {
        let radio = RadioParams::default();
        assert_eq!(
            build_udg(&snap(0.0, &[(0, 0.0, 0.0), (1, 100.0, 0.0)]), &radio).edge_count(),
            1
        );
        assert_eq!(
            build_udg(&snap(0.0, &[(0, 0.0, 0.0), (1, 100.1, 0.0)]), &radio).edge_count(),
            0
        );
        let g = build_udg(&snap(0.0, &[(0, 0.0, 0.0), (1, 90.0, 0.0), (2, 180.0, 0.0)]), &radio);
        assert_eq!(
            g.edges().collect::<Vec<_>>(),
            vec![(VehicleId(0), VehicleId(1)), (VehicleId(1), VehicleId(2))]
        );
    }

    #[test]
    fn angles() {
        let e = DisplacementVector::new(1.0, 0.0);
        assert_eq!(direction_angle(e, e), Some(0.0));
        assert_eq!(direction_angle(e, DisplacementVector::new(-1.0, 0.0)), Some(180.0));
        let diag = direction_angle(e, DisplacementVector::new(1.0, 1.0)).unwrap();
        assert!((diag - 45.0).abs() < 1e-12);
        assert!(same_direction(Some(e), Some(DisplacementVector::new(1.0, 1.0)), 45.0));
        assert!(!same_direction(Some(e), Some(DisplacementVector::new(1.0, 1.01)), 45.0));
        assert_eq!(direction_angle(e, DisplacementVector::new(0.0, 0.0)), None);
        assert!(same_direction(Some(e), Some(DisplacementVector::new(0.0, 0.0)), 45.0));
        assert!(same_direction(None, Some(e), 45.0));
        // nearly parallel vectors must not produce NaN from rounding past 1.0
        let a = DisplacementVector::new(1e-3, 1.0);
        let b = DisplacementVector::new(1e-3 * (1.0 + f64::EPSILON), 1.0);
        assert!(direction_angle(a, b).unwrap().is_finite());
    }

    #[test]
    fn same_heading_keeps_every_edge() {
        let prev = snap(0.0, &[(0, 0.0, 0.0), (1, 50.0, 0.0), (2, 100.0, 10.0)]);
        let cur = snap(1.0, &[(0, 10.0, 0.0), (1, 60.0, 0.0), (2, 110.0, 10.0)]);
        let c = build_direction_constrained_udg(&cur, &prev, &RadioParams::default()).unwrap();
        assert_eq!(c.graph, build_udg(&cur, &RadioParams::default()));
        assert_eq!(c.removed_edges, 0);
    }

    #[test]
    fn opposite_heading_drops_the_edge() {
        let prev = snap(0.0, &[(0, 0.0, 0.0), (1, 50.0, 5.0)]);
        let cur = snap(1.0, &[(0, 10.0, 0.0), (1, 40.0, 5.0)]);
        let c = build_direction_constrained_udg(&cur, &prev, &RadioParams::default()).unwrap();
        assert_eq!(c.graph.edge_count(), 0);
        assert_eq!(c.removed_edges, 1);
        assert_eq!(c.removed_fraction(), 1.0);
    }

    #[test]
    fn newcomers_and_parked_vehicles_are_neutral() {
        let prev = snap(0.0, &[(0, 0.0, 0.0), (2, 60.0, 0.0)]);
        let cur = snap(1.0, &[(0, 10.0, 0.0), (1, 30.0, 0.0), (2, 60.0, 0.0)]);
        let c = build_direction_constrained_udg(&cur, &prev, &RadioParams::default()).unwrap();
        assert_eq!(c.graph.edge_count(), 3);
        let first = build_direction_constrained_udg(&cur, &Snapshot::default(), &RadioParams::default()).unwrap();
        assert_eq!(first.graph, build_udg(&cur, &RadioParams::default()));
    }

    #[test]
    fn prev_must_precede() {
        let a = snap(5.0, &[(0, 0.0, 0.0)]);
        let b = snap(4.0, &[(0, 1.0, 0.0)]);
        assert!(matches!(
            build_direction_constrained_udg(&b, &a, &RadioParams::default()),
            Err(MobilityError::SnapshotOrder { .. })
        ));
    }

    #[test]
    fn radio_validation() {
        assert!(RadioParams::default().validate().is_ok());
        assert!(RadioParams {
            range_r: 0.0,
            ..Default::default()
        }
        .validate()
        .is_err());
        assert!(RadioParams {
            angle_threshold: 0.0,
            ..Default::default()
        }
        .validate()
        .is_err());
        assert!(RadioParams {
            angle_threshold: 180.0,
            ..Default::default()
        }
        .validate()
        .is_ok());
    }

    fn arb_points() -> impl Strategy<Value = Vec<(f64, f64)>> {
        proptest::collection::vec((0.0f64..500.0, 0.0f64..500.0), 0..40)
    }

    fn near_boundary(pts: &[(f64, f64)], r: f64) -> bool {
        pts.iter().enumerate().any(|(i, a)| {
            pts[i + 1..]
                .iter()
                .any(|b| ((a.0 - b.0).hypot(a.1 - b.1) - r).abs() < 1e-6)
        })
    }

    proptest! {
        #[test]
        fn rigid_motions_preserve_edges(pts in arb_points(), angle in 0.0f64..std::f64::consts::TAU, tx in -1e3f64..1e3, ty in -1e3f64..1e3) {
            let radio = RadioParams::default();
            prop_assume!(!near_boundary(&pts, radio.range_r));
            let orig: Vec<_> = pts.iter().enumerate().map(|(i, &(x, y))| (i as u64, x, y)).collect();
            let (s, c) = angle.sin_cos();
            let moved: Vec<_> = pts.iter().enumerate()
                .map(|(i, &(x, y))| (i as u64, c * x - s * y + tx, s * x + c * y + ty))
                .collect();
            prop_assert_eq!(build_udg(&snap(0.0, &orig), &radio), build_udg(&snap(0.0, &moved), &radio));
        }

        #[test]
        fn constrained_edges_subset_of_udg(pts in arb_points(), steps in proptest::collection::vec((-20.0f64..20.0, -20.0f64..20.0), 40)) {
            let radio = RadioParams::default();
            let prev: Vec<_> = pts.iter().enumerate().map(|(i, &(x, y))| (i as u64, x, y)).collect();
            let cur: Vec<_> = pts.iter().zip(&steps).enumerate()
                .map(|(i, (&(x, y), &(dx, dy)))| (i as u64, x + dx, y + dy))
                .collect();
            let cur = snap(1.0, &cur);
            let full = build_udg(&cur, &radio);
            let c = build_direction_constrained_udg(&cur, &snap(0.0, &prev), &radio).unwrap();
            let all: std::collections::BTreeSet<_> = full.edges().collect();
            prop_assert!(c.graph.edges().all(|e| all.contains(&e)));
            prop_assert_eq!(c.graph.edge_count() + c.removed_edges, full.edge_count());
        }
    }
}
