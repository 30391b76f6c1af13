use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use vsn_offload::mobility::{RadioParams, Trace, TracePoint};
use vsn_offload::pipeline::build_period_graph;
use vsn_offload::tuner::{mean_centrality_rate, tune_parameters, TunerConfig};
use vsn_offload::VehicleId;

/// Vehicles scattered uniformly at each of three instants.
fn random_geometric_trace(n: u64, side: f64, seed: u64) -> Trace {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points = Vec::new();
    for t in [0.0, 10.0, 20.0] {
        for id in 0..n {
            points.push(TracePoint {
                time: t,
                vehicle: VehicleId(id),
                x: rng.gen_range(0.0..side),
                y: rng.gen_range(0.0..side),
            });
        }
    }
    Trace::new(points).unwrap()
}

#[test]
fn tuned_rate_beats_default_and_matches_grid_bound() {
    let trace = random_geometric_trace(120, 600.0, 3);
    let radio = RadioParams::default();
    let samples = [0.0, 10.0, 20.0];
    let config = TunerConfig {
        d_max: 4,
        k_max: Some(6),
        ..Default::default()
    };
    let tuned = tune_parameters(&trace, &samples, &radio, false, &config).unwrap();
    assert!(tuned.d <= 4 && tuned.k <= 6);

    let graphs: Vec<_> = samples
        .iter()
        .map(|&t| build_period_graph(&trace, t, &radio, false).unwrap().graph)
        .collect();
    let default_rate = mean_centrality_rate(&graphs, 1, 4).unwrap();
    let mut grid_best = f64::NEG_INFINITY;
    for d in 1..=4 {
        for k in 1..=6 {
            grid_best = grid_best.max(mean_centrality_rate(&graphs, d, k).unwrap());
        }
    }
    assert_eq!(
        tuned.objective,
        mean_centrality_rate(&graphs, tuned.d, tuned.k).unwrap()
    );
    assert!(tuned.objective >= default_rate);
    assert!(tuned.objective <= grid_best);
    assert!(tuned.iterations <= 500);
}

#[test]
fn tuning_is_deterministic() {
    let trace = random_geometric_trace(60, 500.0, 9);
    let go = || {
        tune_parameters(
            &trace,
            &[0.0, 10.0, 20.0],
            &RadioParams::default(),
            false,
            &TunerConfig::default(),
        )
        .unwrap()
    };
    assert_eq!(go(), go());
}
