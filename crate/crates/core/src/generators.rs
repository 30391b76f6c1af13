//! Small deterministic and random graph families used by tests, benches and
//! the acceptance harness.

use rand::Rng;

use crate::graph::SnapshotGraph;

pub fn path(n: usize) -> SnapshotGraph {
    SnapshotGraph::from_index_edges(n, (1..n).map(|i| (i - 1, i)))
}

pub fn cycle(n: usize) -> SnapshotGraph {
    assert!(n >= 3, "cycle needs at least 3 vertices");
    SnapshotGraph::from_index_edges(n, (0..n).map(|i| (i, (i + 1) % n)))
}

/// Vertex 0 joined to `leaves` leaves `1..=leaves`.
pub fn star(leaves: usize) -> SnapshotGraph {
    SnapshotGraph::from_index_edges(leaves + 1, (1..=leaves).map(|i| (0, i)))
}

pub fn complete(n: usize) -> SnapshotGraph {
    SnapshotGraph::from_index_edges(n, (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))))
}

/// `rows x cols` grid, vertex `r * cols + c`.
pub fn grid(rows: usize, cols: usize) -> SnapshotGraph {
    let mut edges = Vec::new();
    for r in 0..rows {
        for c in 0..cols {
            let v = r * cols + c;
            if c + 1 < cols {
                edges.push((v, v + 1));
            }
            if r + 1 < rows {
                edges.push((v, v + cols));
            }
        }
    }
    SnapshotGraph::from_index_edges(rows * cols, edges)
}

/// Erdős–Rényi G(n, p).
pub fn gnp<R: Rng + ?Sized>(n: usize, p: f64, rng: &mut R) -> SnapshotGraph {
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen_bool(p) {
                edges.push((i, j));
            }
        }
    }
    SnapshotGraph::from_index_edges(n, edges)
}

/// G(n, p) conditioned on connectivity: a random spanning tree is laid down
/// first, then every other pair is added with probability `p`.
pub fn random_connected<R: Rng + ?Sized>(n: usize, p: f64, rng: &mut R) -> SnapshotGraph {
    let mut edges = Vec::new();
    for i in 1..n {
        edges.push((rng.gen_range(0..i), i));
    }
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen_bool(p) {
                edges.push((i, j));
            }
        }
    }
    SnapshotGraph::from_index_edges(n, edges)
}

/// Uniform points in a `side x side` square joined when at most `radius` apart.
pub fn random_geometric<R: Rng + ?Sized>(n: usize, side: f64, radius: f64, rng: &mut R) -> SnapshotGraph {
    let pts: Vec<(f64, f64)> = (0..n)
        .map(|_| (rng.gen_range(0.0..side), rng.gen_range(0.0..side)))
        .collect();
    let r2 = radius * radius;
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let (dx, dy) = (pts[i].0 - pts[j].0, pts[i].1 - pts[j].1);
            if dx * dx + dy * dy <= r2 {
                edges.push((i, j));
            }
        }
    }
    SnapshotGraph::from_index_edges(n, edges)
}
