//! Aggregation-point selection: the k-closeness greedy heuristic, the
//! reservation-based (RB) baseline, and exact minimum d-hop domination.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::graph::{GraphError, SnapshotGraph, VehicleId};

mod centrality;
mod exact;
mod rb;

pub use centrality::centrality_select;
pub use exact::{brute_force_min_dominating_set, exact_min_dominating_set, BRUTE_FORCE_LIMIT, DEFAULT_EXACT_LIMIT};
pub use rb::{draw_slots, rb_select, rb_select_with_slots};

/// Upper bound on the offload radius `d`.
pub const MAX_HOPS: u32 = 10;
/// Default number of RB reservation slots.
pub const DEFAULT_SLOTS: u32 = 256;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SelectionError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("snapshot has {vertices} vehicles, above the limit of {limit} for {solver}")]
    TooLarge {
        solver: &'static str,
        vertices: usize,
        limit: usize,
    },
    #[error("aggregation points do not {d}-hop dominate the snapshot (vehicle {uncovered} uncovered)")]
    NotDominating { d: u32, uncovered: VehicleId },
    #[error("forced slot table has {got} entries for {expected} vehicles")]
    SlotTableSize { expected: usize, got: usize },
}

/// Parameters shared by the selectors. `k` is only read by the centrality
/// heuristic; `slots` and `seed` only by RB.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SelectionParams {
    pub d: u32,
    pub k: u32,
    pub slots: u32,
    pub seed: u64,
}

impl Default for SelectionParams {
    fn default() -> Self {
        SelectionParams {
            d: 1,
            k: 4,
            slots: DEFAULT_SLOTS,
            seed: 0,
        }
    }
}

impl SelectionParams {
    pub fn validate(&self) -> Result<(), SelectionError> {
        check_hops(self.d)?;
        if self.k == 0 {
            return Err(SelectionError::InvalidParameter("k must be at least 1".into()));
        }
        if self.slots == 0 {
            return Err(SelectionError::InvalidParameter("slot count must be at least 1".into()));
        }
        Ok(())
    }
}

pub(crate) fn check_hops(d: u32) -> Result<(), SelectionError> {
    if d == 0 || d > MAX_HOPS {
        return Err(SelectionError::InvalidParameter(format!(
            "d must be in 1..={MAX_HOPS}, got {d}"
        )));
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Algorithm {
    Centrality,
    Rb,
    Exact,
    BruteForce,
}

impl Algorithm {
    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::Centrality => "centrality",
            Algorithm::Rb => "rb",
            Algorithm::Exact => "exact",
            Algorithm::BruteForce => "brute-force",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct WorkCounters {
    /// Adjacency entries scanned while estimating centrality.
    pub edges_examined: u64,
    /// RB reservation slots simulated.
    pub slots_simulated: u32,
    /// Branch-and-bound search nodes visited.
    pub search_nodes: u64,
}

/// Aggregation points for one snapshot plus the vehicle-to-AP assignment.
#[derive(Clone, Debug, PartialEq)]
pub struct SelectionResult {
    pub aggregation_points: BTreeSet<VehicleId>,
    /// Every vehicle mapped to its aggregation point; APs map to themselves.
    pub assignment: BTreeMap<VehicleId, VehicleId>,
    /// Aggregation points in the order the selector committed them.
    pub pick_order: Vec<VehicleId>,
    pub algorithm: Algorithm,
    pub work: WorkCounters,
}

impl SelectionResult {
    pub fn len(&self) -> usize {
        self.aggregation_points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.aggregation_points.is_empty()
    }

    pub(crate) fn from_indices(
        g: &SnapshotGraph,
        picks: &[usize],
        d: u32,
        algorithm: Algorithm,
        work: WorkCounters,
    ) -> Result<Self, SelectionError> {
        let pick_order: Vec<VehicleId> = picks.iter().map(|&i| g.id_at(i)).collect();
        let aggregation_points: BTreeSet<VehicleId> = pick_order.iter().copied().collect();
        let assignment = assign_to_aggregation_points(g, &aggregation_points, d)?;
        Ok(SelectionResult {
            aggregation_points,
            assignment,
            pick_order,
            algorithm,
            work,
        })
    }
}

/// Level-synchronous multi-source BFS from `sources` up to `d` hops.
/// Returns, per vertex index, `(hops, owner)` where `owner` is the lowest
/// source index among the hop-nearest sources, or `None` when no source is
/// within `d` hops.
fn nearest_sources(g: &SnapshotGraph, sources: &[usize], d: u32) -> Vec<Option<(u32, usize)>> {
    let mut best: Vec<Option<(u32, usize)>> = vec![None; g.vertex_count()];
    let mut frontier: Vec<usize> = Vec::new();
    for &s in sources {
        if best[s].is_none() {
            best[s] = Some((0, s));
            frontier.push(s);
        }
    }
    let mut level = 0;
    while level < d && !frontier.is_empty() {
        let mut next = Vec::new();
        for &u in &frontier {
            let owner = best[u].expect("frontier vertex is labelled").1;
            for &w in g.neighbor_indices(u) {
                match best[w] {
                    None => {
                        best[w] = Some((level + 1, owner));
                        next.push(w);
                    }
                    Some((h, o)) if h == level + 1 && owner < o => best[w] = Some((h, owner)),
                    _ => {}
                }
            }
        }
        frontier = next;
        level += 1;
    }
    best
}

fn indices_of(g: &SnapshotGraph, set: &BTreeSet<VehicleId>) -> Result<Vec<usize>, GraphError> {
    set.iter().map(|&v| g.index_of(v)).collect()
}

/// True iff every vehicle outside `set` has a member of `set` within `d` hops.
pub fn verify_domination(g: &SnapshotGraph, set: &BTreeSet<VehicleId>, d: u32) -> Result<bool, SelectionError> {
    if d == 0 {
        return Err(SelectionError::InvalidParameter("d must be at least 1".into()));
    }
    let sources = indices_of(g, set)?;
    Ok(nearest_sources(g, &sources, d).iter().all(Option::is_some))
}

/// Maps every vehicle to its hop-nearest aggregation point, ties going to
/// the lowest AP id. Fails if `set` does not `d`-hop dominate `g`.
pub fn assign_to_aggregation_points(
    g: &SnapshotGraph,
    set: &BTreeSet<VehicleId>,
    d: u32,
) -> Result<BTreeMap<VehicleId, VehicleId>, SelectionError> {
    if d == 0 {
        return Err(SelectionError::InvalidParameter("d must be at least 1".into()));
    }
    let sources = indices_of(g, set)?;
    nearest_sources(g, &sources, d)
        .into_iter()
        .enumerate()
        .map(|(i, label)| match label {
            Some((_, owner)) => Ok((g.id_at(i), g.id_at(owner))),
            None => Err(SelectionError::NotDominating {
                d,
                uncovered: g.id_at(i),
            }),
        })
        .collect()
}
