use crate::graph::{BfsScratch, SnapshotGraph};

use super::{check_hops, Algorithm, SelectionError, SelectionResult, WorkCounters};

/// Greedy d-hop domination driven by k-closeness centrality.
///
/// Centrality is computed once on the full snapshot. Vehicles are then
/// taken in decreasing centrality (lowest id first among equal values);
/// each vehicle still in the working set becomes an aggregation point and
/// removes its d-hop neighborhood, measured on the full snapshot, from the
/// working set. Isolated vehicles end up selecting themselves.
pub fn centrality_select(g: &SnapshotGraph, d: u32, k: u32) -> Result<SelectionResult, SelectionError> {
    check_hops(d)?;
    if k == 0 {
        return Err(SelectionError::InvalidParameter("k must be at least 1".into()));
    }
    let n = g.vertex_count();
    let closeness = g.all_k_closeness(k)?;
    let values = closeness.values();

    let mut order: Vec<usize> = (0..n).collect();
    // stable sort keeps ascending index (= ascending id) among ties
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]));

    let mut remaining = vec![true; n];
    let mut picks = Vec::new();
    let mut scratch = BfsScratch::new(n);
    for v in order {
        if !remaining[v] {
            continue;
        }
        picks.push(v);
        scratch.run(g, v, d);
        for &u in &scratch.visited {
            remaining[u] = false;
        }
    }

    let work = WorkCounters {
        edges_examined: closeness.edges_examined,
        ..Default::default()
    };
    SelectionResult::from_indices(g, &picks, d, Algorithm::Centrality, work)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators;
    use crate::graph::VehicleId;
    use crate::selection::{brute_force_min_dominating_set, verify_domination};
    use proptest::prelude::*;

    fn ids(v: &[u64]) -> Vec<VehicleId> {
        v.iter().copied().map(VehicleId).collect()
    }

    #[test]
    fn path3_picks_center() {
        let g = generators::path(3);
        let r = centrality_select(&g, 1, 2).unwrap();
        assert_eq!(r.pick_order, ids(&[1]));
        assert_eq!(brute_force_min_dominating_set(&g, 1).unwrap().len(), 1);
    }

    #[test]
    fn path5_greedy_is_suboptimal_at_one_hop() {
        let g = generators::path(5);
        let r = centrality_select(&g, 1, 4).unwrap();
        assert_eq!(r.pick_order, ids(&[2, 0, 4]));
        assert_eq!(brute_force_min_dominating_set(&g, 1).unwrap().len(), 2);
        let r2 = centrality_select(&g, 2, 4).unwrap();
        assert_eq!(r2.pick_order, ids(&[2]));
    }

    #[test]
    fn isolated_vehicles_select_themselves() {
        let g = SnapshotGraph::from_index_edges(5, [(0, 1), (1, 2)]);
        let r = centrality_select(&g, 1, 3).unwrap();
        assert_eq!(r.pick_order, ids(&[1, 3, 4]));
        assert_eq!(r.assignment[&VehicleId(4)], VehicleId(4));
    }

    #[test]
    fn empty_graph_is_not_an_error() {
        let r = centrality_select(&SnapshotGraph::default(), 2, 2).unwrap();
        assert!(r.is_empty() && r.assignment.is_empty());
    }

    #[test]
    fn bad_parameters() {
        let g = generators::path(3);
        assert!(centrality_select(&g, 0, 2).is_err());
        assert!(centrality_select(&g, 1, 0).is_err());
        assert!(centrality_select(&g, 11, 2).is_err());
    }

    #[test]
    fn reports_centrality_work() {
        let g = generators::star(4);
        let r = centrality_select(&g, 1, 1).unwrap();
        assert_eq!(r.work.edges_examined, 8);
        // leaves have 1-closeness 1.0 and beat the center (0.25)
        assert_eq!(r.pick_order, ids(&[1, 2, 3, 4]));
    }

    proptest! {
        #[test]
        fn valid_and_separated(n in 1usize..40, p in 0.0f64..0.3, seed in any::<u64>(), d in 1u32..4, k in 1u32..6) {
            use rand::SeedableRng;
            let g = generators::gnp(n, p, &mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            let r = centrality_select(&g, d, k).unwrap();
            prop_assert!(verify_domination(&g, &r.aggregation_points, d).unwrap());
            for v in g.isolated_vertices() {
                prop_assert!(r.aggregation_points.contains(&v));
            }
            for (i, &a) in r.pick_order.iter().enumerate() {
                for &b in &r.pick_order[i + 1..] {
                    let h = g.hop_distance(a, b).unwrap().hops();
                    prop_assert!(h.map_or(true, |h| h > d));
                }
            }
            prop_assert_eq!(r.assignment.len(), n);
            prop_assert_eq!(centrality_select(&g, d, k).unwrap(), r);
        }
    }
}
