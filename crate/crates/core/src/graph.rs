//! Immutable communication-graph snapshots and hop-count queries.
//!
//! Vertices are stored sorted by [`VehicleId`]; internally every vertex is
//! addressed by its dense index into that order, so "lowest index" and
//! "lowest id" coincide everywhere downstream.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Identifier of a vehicle, stable across the snapshots of one trace.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VehicleId(pub u64);

impl fmt::Display for VehicleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<u64> for VehicleId {
    fn from(v: u64) -> Self {
        VehicleId(v)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("vehicle {0} is not part of the snapshot")]
    UnknownVertex(VehicleId),
    #[error("self-loop on vehicle {0}")]
    SelfLoop(VehicleId),
    #[error("hop limit must be at least 1")]
    ZeroCutoff,
}

/// Shortest-path length in hops.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum HopDistance {
    Hops(u32),
    Unreachable,
}

impl HopDistance {
    pub fn hops(self) -> Option<u32> {
        match self {
            HopDistance::Hops(h) => Some(h),
            HopDistance::Unreachable => None,
        }
    }
}

/// Undirected simple graph of the vehicles in D2D range at one instant.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SnapshotGraph {
    ids: Vec<VehicleId>,
    adj: Vec<Vec<usize>>,
    n_edges: usize,
}

impl SnapshotGraph {
    /// Builds a graph from a vertex list and an edge list.
    ///
    /// Duplicate vertices and duplicate edges (in either orientation) are
    /// collapsed. Edges naming a vertex outside `vertices` or joining a
    /// vertex to itself are rejected.
    pub fn from_edges<V, E>(vertices: V, edges: E) -> Result<Self, GraphError>
    where
        V: IntoIterator<Item = VehicleId>,
        E: IntoIterator<Item = (VehicleId, VehicleId)>,
    {
        let mut ids: Vec<VehicleId> = vertices.into_iter().collect();
        ids.sort_unstable();
        ids.dedup();
        let mut adj = vec![Vec::new(); ids.len()];
        for (a, b) in edges {
            if a == b {
                return Err(GraphError::SelfLoop(a));
            }
            let ia = ids.binary_search(&a).map_err(|_| GraphError::UnknownVertex(a))?;
            let ib = ids.binary_search(&b).map_err(|_| GraphError::UnknownVertex(b))?;
            adj[ia].push(ib);
            adj[ib].push(ia);
        }
        Ok(Self::from_index_adjacency(ids, adj))
    }

    /// Builds a graph on ids `0..n` from index pairs. Panics on out-of-range
    /// indices; intended for generators and tests.
    pub fn from_index_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let ids = (0..n as u64).map(VehicleId).collect();
        let mut adj = vec![Vec::new(); n];
        for (a, b) in edges {
            assert!(a < n && b < n, "edge ({a}, {b}) out of range for {n} vertices");
            if a != b {
                adj[a].push(b);
                adj[b].push(a);
            }
        }
        Self::from_index_adjacency(ids, adj)
    }

    /// `ids` must be sorted and unique; adjacency may be unsorted and
    /// contain duplicates but must be symmetric.
    pub(crate) fn from_index_adjacency(ids: Vec<VehicleId>, mut adj: Vec<Vec<usize>>) -> Self {
        debug_assert!(ids.windows(2).all(|w| w[0] < w[1]));
        let mut n_edges = 0;
        for list in &mut adj {
            list.sort_unstable();
            list.dedup();
            n_edges += list.len();
        }
        SnapshotGraph {
            ids,
            adj,
            n_edges: n_edges / 2,
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.ids.len()
    }

    pub fn edge_count(&self) -> usize {
        self.n_edges
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    /// Vertices in ascending id order.
    pub fn vertices(&self) -> &[VehicleId] {
        &self.ids
    }

    pub fn contains(&self, v: VehicleId) -> bool {
        self.ids.binary_search(&v).is_ok()
    }

    pub fn index_of(&self, v: VehicleId) -> Result<usize, GraphError> {
        self.ids.binary_search(&v).map_err(|_| GraphError::UnknownVertex(v))
    }

    pub fn id_at(&self, index: usize) -> VehicleId {
        self.ids[index]
    }

    /// Neighbors of `v` sorted by id.
    pub fn neighbors(&self, v: VehicleId) -> Result<impl Iterator<Item = VehicleId> + '_, GraphError> {
        let i = self.index_of(v)?;
        Ok(self.adj[i].iter().map(move |&j| self.ids[j]))
    }

    pub fn degree(&self, v: VehicleId) -> Result<usize, GraphError> {
        Ok(self.adj[self.index_of(v)?].len())
    }

    pub(crate) fn neighbor_indices(&self, i: usize) -> &[usize] {
        &self.adj[i]
    }

    /// Edges as `(a, b)` with `a < b`, in ascending order.
    pub fn edges(&self) -> impl Iterator<Item = (VehicleId, VehicleId)> + '_ {
        self.adj.iter().enumerate().flat_map(move |(i, list)| {
            list.iter()
                .filter(move |&&j| j > i)
                .map(move |&j| (self.ids[i], self.ids[j]))
        })
    }

    pub fn is_isolated(&self, v: VehicleId) -> Result<bool, GraphError> {
        Ok(self.adj[self.index_of(v)?].is_empty())
    }

    pub fn isolated_vertices(&self) -> impl Iterator<Item = VehicleId> + '_ {
        self.adj
            .iter()
            .enumerate()
            .filter(|(_, l)| l.is_empty())
            .map(|(i, _)| self.ids[i])
    }

    /// Breadth-first search from `source` truncated at `cutoff` hops.
    pub fn bfs_distances(&self, source: VehicleId, cutoff: u32) -> Result<BfsResult, GraphError> {
        if cutoff == 0 {
            return Err(GraphError::ZeroCutoff);
        }
        let s = self.index_of(source)?;
        let mut scratch = BfsScratch::new(self.vertex_count());
        let edges_examined = scratch.run(self, s, cutoff);
        let distances = scratch
            .visited
            .iter()
            .map(|&i| (self.ids[i], scratch.dist[i]))
            .collect();
        Ok(BfsResult {
            distances,
            edges_examined,
        })
    }

    /// `N_d(v)`: every vertex at 1..=d hops from `v`, excluding `v`.
    pub fn d_hop_neighborhood(&self, v: VehicleId, d: u32) -> Result<BTreeSet<VehicleId>, GraphError> {
        let bfs = self.bfs_distances(v, d)?;
        Ok(bfs
            .distances
            .into_iter()
            .filter(|&(_, h)| h > 0)
            .map(|(u, _)| u)
            .collect())
    }

    /// Hop distance between two vertices (unbounded search).
    pub fn hop_distance(&self, a: VehicleId, b: VehicleId) -> Result<HopDistance, GraphError> {
        let ia = self.index_of(a)?;
        let ib = self.index_of(b)?;
        let mut scratch = BfsScratch::new(self.vertex_count());
        scratch.run(self, ia, u32::MAX);
        Ok(scratch.distance(ib))
    }

    /// Largest finite eccentricity over all vertices, i.e. the maximum
    /// diameter of any connected component. Zero for edgeless graphs.
    pub fn component_diameter(&self) -> u32 {
        let n = self.vertex_count();
        (0..n)
            .into_par_iter()
            .map_init(
                || BfsScratch::new(n),
                |scratch, s| {
                    scratch.run(self, s, u32::MAX);
                    scratch.visited.iter().map(|&i| scratch.dist[i]).max().unwrap_or(0)
                },
            )
            .max()
            .unwrap_or(0)
    }

    /// Connected components as sorted index lists, ordered by smallest member.
    pub(crate) fn components(&self) -> Vec<Vec<usize>> {
        let n = self.vertex_count();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for s in 0..n {
            if seen[s] {
                continue;
            }
            seen[s] = true;
            let mut comp = vec![s];
            let mut queue = VecDeque::from([s]);
            while let Some(u) = queue.pop_front() {
                for &w in &self.adj[u] {
                    if !seen[w] {
                        seen[w] = true;
                        comp.push(w);
                        queue.push_back(w);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    /// k-closeness centrality of a single vertex.
    ///
    /// `1 / sum(dist(v, u))` over all `u` with `1 <= dist(v, u) <= k`, and 0
    /// when nothing lies within `k` hops.
    pub fn k_closeness(&self, v: VehicleId, k: u32) -> Result<f64, GraphError> {
        if k == 0 {
            return Err(GraphError::ZeroCutoff);
        }
        let i = self.index_of(v)?;
        let mut scratch = BfsScratch::new(self.vertex_count());
        scratch.run(self, i, k);
        Ok(scratch.closeness())
    }

    /// k-closeness for every vertex, evaluated in parallel.
    ///
    /// Each vertex is an independent BFS, so the result is identical to a
    /// sequential evaluation.
    pub fn all_k_closeness(&self, k: u32) -> Result<Closeness, GraphError> {
        if k == 0 {
            return Err(GraphError::ZeroCutoff);
        }
        let n = self.vertex_count();
        let per_vertex: Vec<(f64, u64)> = (0..n)
            .into_par_iter()
            .map_init(
                || BfsScratch::new(n),
                |scratch, s| {
                    let examined = scratch.run(self, s, k);
                    (scratch.closeness(), examined)
                },
            )
            .collect();
        let edges_examined = per_vertex.iter().map(|&(_, e)| e).sum();
        let values = per_vertex.into_iter().map(|(c, _)| c).collect();
        Ok(Closeness {
            ids: self.ids.clone(),
            values,
            edges_examined,
        })
    }
}

/// Output of a truncated BFS.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BfsResult {
    /// Every vertex within the cutoff (source included at 0).
    pub distances: BTreeMap<VehicleId, u32>,
    /// Adjacency entries scanned; vertices at the cutoff depth are not expanded.
    pub edges_examined: u64,
}

impl BfsResult {
    pub fn get(&self, v: VehicleId) -> HopDistance {
        self.distances
            .get(&v)
            .map_or(HopDistance::Unreachable, |&h| HopDistance::Hops(h))
    }
}

/// Centrality values indexed like [`SnapshotGraph::vertices`].
#[derive(Clone, Debug, PartialEq)]
pub struct Closeness {
    ids: Vec<VehicleId>,
    values: Vec<f64>,
    pub edges_examined: u64,
}

impl Closeness {
    pub fn get(&self, v: VehicleId) -> Option<f64> {
        self.ids.binary_search(&v).ok().map(|i| self.values[i])
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn iter(&self) -> impl Iterator<Item = (VehicleId, f64)> + '_ {
        self.ids.iter().copied().zip(self.values.iter().copied())
    }

    pub fn to_map(&self) -> BTreeMap<VehicleId, f64> {
        self.iter().collect()
    }
}

/// Reusable BFS buffers. `dist` is only meaningful for indices in `visited`.
pub(crate) struct BfsScratch {
    dist: Vec<u32>,
    mark: Vec<bool>,
    pub(crate) visited: Vec<usize>,
    queue: VecDeque<usize>,
}

impl BfsScratch {
    pub(crate) fn new(n: usize) -> Self {
        BfsScratch {
            dist: vec![0; n],
            mark: vec![false; n],
            visited: Vec::new(),
            queue: VecDeque::new(),
        }
    }

    fn reset(&mut self) {
        for &i in &self.visited {
            self.mark[i] = false;
        }
        self.visited.clear();
        self.queue.clear();
    }

    /// Runs a BFS from `source` up to `cutoff` hops and returns the number
    /// of adjacency entries examined.
    pub(crate) fn run(&mut self, g: &SnapshotGraph, source: usize, cutoff: u32) -> u64 {
        self.reset();
        self.mark[source] = true;
        self.dist[source] = 0;
        self.visited.push(source);
        self.queue.push_back(source);
        let mut examined = 0u64;
        while let Some(u) = self.queue.pop_front() {
            let du = self.dist[u];
            if du >= cutoff {
                continue;
            }
            for &w in &g.adj[u] {
                examined += 1;
                if !self.mark[w] {
                    self.mark[w] = true;
                    self.dist[w] = du + 1;
                    self.visited.push(w);
                    self.queue.push_back(w);
                }
            }
        }
        examined
    }

    pub(crate) fn distance(&self, i: usize) -> HopDistance {
        if self.mark[i] {
            HopDistance::Hops(self.dist[i])
        } else {
            HopDistance::Unreachable
        }
    }

    fn closeness(&self) -> f64 {
        let farness: u64 = self.visited.iter().map(|&i| u64::from(self.dist[i])).sum();
        if farness == 0 {
            0.0
        } else {
            1.0 / farness as f64
        }
    }
}
