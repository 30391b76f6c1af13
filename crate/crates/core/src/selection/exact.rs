//! Exact minimum d-hop dominating sets.
//!
//! The problem is solved as set cover: vehicle `v` covers its closed d-hop
//! neighborhood, and every vehicle must be covered. Connected components
//! are independent and solved one at a time.

use crate::graph::{BfsScratch, SnapshotGraph};

use super::{check_hops, Algorithm, SelectionError, SelectionResult, WorkCounters};

/// Default vertex limit for [`exact_min_dominating_set`].
pub const DEFAULT_EXACT_LIMIT: usize = 200;
/// Hard vertex limit for [`brute_force_min_dominating_set`].
pub const BRUTE_FORCE_LIMIT: usize = 20;

#[derive(Clone, PartialEq, Eq, Debug)]
struct Bits(Vec<u64>);

impl Bits {
    fn empty(len: usize) -> Self {
        Bits(vec![0; len.div_ceil(64)])
    }

    fn full(len: usize) -> Self {
        let mut b = Self::empty(len);
        for i in 0..len {
            b.insert(i);
        }
        b
    }

    fn insert(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }

    fn remove(&mut self, i: usize) {
        self.0[i / 64] &= !(1 << (i % 64));
    }

    #[cfg(test)]
    fn contains(&self, i: usize) -> bool {
        self.0[i / 64] >> (i % 64) & 1 == 1
    }

    fn is_empty(&self) -> bool {
        self.0.iter().all(|&w| w == 0)
    }

    fn count(&self) -> u32 {
        self.0.iter().map(|w| w.count_ones()).sum()
    }

    fn and(&self, other: &Bits) -> Bits {
        Bits(self.0.iter().zip(&other.0).map(|(a, b)| a & b).collect())
    }

    fn and_not(&self, other: &Bits) -> Bits {
        Bits(self.0.iter().zip(&other.0).map(|(a, b)| a & !b).collect())
    }

    fn or_assign(&mut self, other: &Bits) {
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a |= b;
        }
    }

    fn intersects(&self, other: &Bits) -> bool {
        self.0.iter().zip(&other.0).any(|(a, b)| a & b != 0)
    }

    fn is_subset(&self, other: &Bits) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a & !b == 0)
    }

    fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().enumerate().flat_map(|(wi, &w)| {
            let mut word = w;
            std::iter::from_fn(move || {
                if word == 0 {
                    return None;
                }
                let bit = word.trailing_zeros() as usize;
                word &= word - 1;
                Some(wi * 64 + bit)
            })
        })
    }
}

struct SetCoverSearch {
    /// `cover[v]`: local vertices within `d` hops of `v`, `v` included.
    cover: Vec<Bits>,
    best: Vec<usize>,
    nodes: u64,
}

impl SetCoverSearch {
    fn new(cover: Vec<Bits>) -> Self {
        let mut s = SetCoverSearch {
            cover,
            best: Vec::new(),
            nodes: 0,
        };
        s.best = s.greedy();
        s
    }

    fn len(&self) -> usize {
        self.cover.len()
    }

    fn greedy(&self) -> Vec<usize> {
        let mut uncovered = Bits::full(self.len());
        let mut picks = Vec::new();
        while !uncovered.is_empty() {
            let (best, _) = (0..self.len())
                .map(|c| (c, self.cover[c].and(&uncovered).count()))
                .fold((0, 0), |acc, x| if x.1 > acc.1 { x } else { acc });
            picks.push(best);
            uncovered = uncovered.and_not(&self.cover[best]);
        }
        picks
    }

    /// Disjoint-neighborhood packing: uncovered vertices whose allowed
    /// coverer sets are pairwise disjoint each need their own pick.
    fn lower_bound(&self, uncovered: &Bits, allowed: &Bits) -> usize {
        let mut ranked: Vec<(u32, usize)> = uncovered
            .iter()
            .map(|u| (self.cover[u].and(allowed).count(), u))
            .collect();
        ranked.sort_unstable();
        let mut used = Bits::empty(self.len());
        let mut packing = 0;
        for (_, u) in ranked {
            let coverers = self.cover[u].and(allowed);
            if !coverers.intersects(&used) {
                used.or_assign(&coverers);
                packing += 1;
            }
        }
        let max_gain = allowed
            .iter()
            .map(|c| self.cover[c].and(uncovered).count())
            .max()
            .unwrap_or(0) as usize;
        let volume = if max_gain == 0 {
            usize::MAX
        } else {
            (uncovered.count() as usize).div_ceil(max_gain)
        };
        packing.max(volume)
    }

    fn search(&mut self, uncovered: Bits, mut allowed: Bits, chosen: &mut Vec<usize>) {
        self.nodes += 1;
        if uncovered.is_empty() {
            if chosen.len() < self.best.len() {
                self.best = chosen.clone();
            }
            return;
        }
        let bound = self.lower_bound(&uncovered, &allowed);
        if bound == usize::MAX || chosen.len() + bound >= self.best.len() {
            return;
        }

        // branch on the uncovered vertex with the fewest allowed coverers
        let (u, _) = uncovered
            .iter()
            .map(|u| (u, self.cover[u].and(&allowed).count()))
            .min_by_key(|&(u, c)| (c, u))
            .expect("uncovered is non-empty");

        let gains: Vec<(usize, Bits)> = self.cover[u]
            .and(&allowed)
            .iter()
            .map(|c| (c, self.cover[c].and(&uncovered)))
            .collect();
        // drop candidates whose gain is contained in another's (lower index
        // wins among equals); swapping one for the other keeps feasibility
        let mut candidates: Vec<(usize, u32)> = gains
            .iter()
            .filter(|(c, g)| {
                !gains
                    .iter()
                    .any(|(o, og)| o != c && g.is_subset(og) && (og.count() > g.count() || o < c))
            })
            .map(|(c, g)| (*c, g.count()))
            .collect();
        candidates.sort_by_key(|&(c, gain)| (std::cmp::Reverse(gain), c));

        for (c, _) in candidates {
            chosen.push(c);
            self.search(uncovered.and_not(&self.cover[c]), allowed.clone(), chosen);
            chosen.pop();
            // later siblings never re-pick c: those sets were covered here
            allowed.remove(c);
        }
    }
}

/// Closed d-hop neighborhoods of the component `comp`, in local indices.
fn component_cover(g: &SnapshotGraph, comp: &[usize], d: u32, scratch: &mut BfsScratch) -> Vec<Bits> {
    comp.iter()
        .map(|&v| {
            scratch.run(g, v, d);
            let mut bits = Bits::empty(comp.len());
            for &u in &scratch.visited {
                let local = comp.binary_search(&u).expect("BFS stays inside the component");
                bits.insert(local);
            }
            bits
        })
        .collect()
}

/// Minimum d-hop dominating set by branch and bound.
///
/// Upper bound from greedy set cover, lower bound from disjoint uncovered
/// neighborhoods. Refuses snapshots with more than `vertex_limit` vehicles.
pub fn exact_min_dominating_set(
    g: &SnapshotGraph,
    d: u32,
    vertex_limit: usize,
) -> Result<SelectionResult, SelectionError> {
    check_hops(d)?;
    if g.vertex_count() > vertex_limit {
        return Err(SelectionError::TooLarge {
            solver: "exact solver",
            vertices: g.vertex_count(),
            limit: vertex_limit,
        });
    }
    let mut scratch = BfsScratch::new(g.vertex_count());
    let mut picks = Vec::new();
    let mut nodes = 0;
    for comp in g.components() {
        if comp.len() == 1 {
            picks.push(comp[0]);
            continue;
        }
        let cover = component_cover(g, &comp, d, &mut scratch);
        let m = comp.len();
        let mut search = SetCoverSearch::new(cover);
        search.search(Bits::full(m), Bits::full(m), &mut Vec::new());
        nodes += search.nodes;
        picks.extend(search.best.iter().map(|&l| comp[l]));
    }
    picks.sort_unstable();
    let work = WorkCounters {
        search_nodes: nodes,
        ..Default::default()
    };
    SelectionResult::from_indices(g, &picks, d, Algorithm::Exact, work)
}

/// Exhaustive search over subsets in increasing size; the first dominating
/// subset found is returned. Test oracle, limited to 20 vehicles.
pub fn brute_force_min_dominating_set(g: &SnapshotGraph, d: u32) -> Result<SelectionResult, SelectionError> {
    if d == 0 {
        return Err(SelectionError::InvalidParameter("d must be at least 1".into()));
    }
    let n = g.vertex_count();
    if n > BRUTE_FORCE_LIMIT {
        return Err(SelectionError::TooLarge {
            solver: "brute force",
            vertices: n,
            limit: BRUTE_FORCE_LIMIT,
        });
    }
    let mut scratch = BfsScratch::new(n);
    let closed: Vec<u32> = (0..n)
        .map(|v| {
            scratch.run(g, v, d);
            scratch.visited.iter().fold(0u32, |m, &u| m | 1 << u)
        })
        .collect();
    let full: u32 = if n == 0 { 0 } else { u32::MAX >> (32 - n) };

    for size in 0..=n {
        // Gosper's hack: all n-bit masks with `size` bits set
        let mut mask: u32 = if size == 0 { 0 } else { u32::MAX >> (32 - size) };
        loop {
            let covered = (0..n).filter(|&i| mask >> i & 1 == 1).fold(0, |acc, i| acc | closed[i]);
            if covered == full {
                let picks: Vec<usize> = (0..n).filter(|&i| mask >> i & 1 == 1).collect();
                return SelectionResult::from_indices(g, &picks, d, Algorithm::BruteForce, WorkCounters::default());
            }
            if size == 0 {
                break;
            }
            let c = mask & mask.wrapping_neg();
            let r = mask + c;
            let next = (((r ^ mask) >> 2) / c) | r;
            if next >> n != 0 || next == 0 {
                break;
            }
            mask = next;
        }
    }
    unreachable!("the full vertex set always dominates")
}
