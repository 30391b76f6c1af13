use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::SnapshotGraph;

use super::{Algorithm, SelectionError, SelectionResult, WorkCounters};

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum State {
    Contender,
    Dominator,
    Dominated,
}

/// Draws one uniform slot in `0..slots` per vehicle, in ascending id order.
pub fn draw_slots(g: &SnapshotGraph, slots: u32, seed: u64) -> Result<Vec<u32>, SelectionError> {
    if slots == 0 {
        return Err(SelectionError::InvalidParameter("slot count must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..g.vertex_count()).map(|_| rng.gen_range(0..slots)).collect())
}

/// Reservation-based selection with slots drawn from `seed`.
pub fn rb_select(g: &SnapshotGraph, slots: u32, seed: u64) -> Result<SelectionResult, SelectionError> {
    let table = draw_slots(g, slots, seed)?;
    rb_select_with_slots(g, &table)
}

/// Reservation-based selection with a caller-supplied slot per vehicle
/// (indexed like [`SnapshotGraph::vertices`]).
///
/// Slots are simulated in increasing order. Every contender whose slot has
/// come transmits and becomes a dominator. A contender that hears exactly
/// one transmitting neighbor in that slot becomes dominated; hearing two or
/// more is a collision, nothing is decoded and it stays a contender.
/// Reservation messages reach 1-hop neighbors only.
pub fn rb_select_with_slots(g: &SnapshotGraph, slots: &[u32]) -> Result<SelectionResult, SelectionError> {
    let n = g.vertex_count();
    if slots.len() != n {
        return Err(SelectionError::SlotTableSize {
            expected: n,
            got: slots.len(),
        });
    }
    let mut by_slot: Vec<usize> = (0..n).collect();
    by_slot.sort_by_key(|&i| (slots[i], i));

    let mut state = vec![State::Contender; n];
    let mut heard = vec![0u32; n];
    let mut touched = Vec::new();
    let mut picks = Vec::new();
    let mut contenders = n;
    let mut slots_simulated = 0;

    let mut pos = 0;
    while pos < n && contenders > 0 {
        let slot = slots[by_slot[pos]];
        let end = pos + by_slot[pos..].iter().take_while(|&&i| slots[i] == slot).count();
        slots_simulated = slot + 1;

        let transmitters: Vec<usize> = by_slot[pos..end]
            .iter()
            .copied()
            .filter(|&i| state[i] == State::Contender)
            .collect();
        for &t in &transmitters {
            state[t] = State::Dominator;
            picks.push(t);
            contenders -= 1;
        }
        for &t in &transmitters {
            for &w in g.neighbor_indices(t) {
                if state[w] == State::Contender {
                    if heard[w] == 0 {
                        touched.push(w);
                    }
                    heard[w] += 1;
                }
            }
        }
        for w in touched.drain(..) {
            if heard[w] == 1 {
                state[w] = State::Dominated;
                contenders -= 1;
            }
            heard[w] = 0;
        }
        pos = end;
    }
    debug_assert!(state.iter().all(|&s| s != State::Contender));

    let work = WorkCounters {
        slots_simulated,
        ..Default::default()
    };
    SelectionResult::from_indices(g, &picks, 1, Algorithm::Rb, work)
}
