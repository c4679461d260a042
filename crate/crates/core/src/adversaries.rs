//! Opponents used to exercise the two strategies.
//!
//! The greedy scores are deliberately simple test instruments:
//!
//! * `greedy_nonplanar` merges the two positive components ranked highest by
//!   (deficit, cycle rank), and plays inside a component only when a single
//!   positive component is left.
//! * `greedy_structure` spends its moves completing small components around
//!   the opponent's edges towards a `K4`, the cheapest way to take deficit
//!   out of a matching edge.
//! * `connector` keeps the graph as isolated vertices plus one component
//!   with a vertex of deficit at least 2, which forces a connected result in
//!   the 3-game. When the opponent starts a second component, connector joins
//!   it to the main one; this restoration rule is our reconstruction.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::game::{GameState, Partition};
use crate::strategy::{Strategy, StrategyError};

/// Uniform random legal move.
pub fn random_move(state: &GameState, rng: &mut ChaCha8Rng) -> Result<(usize, usize), StrategyError> {
    let open = state.unsaturated_count();
    if state.is_over() {
        return Err(StrategyError::NoLegalMove);
    }
    // Rejection sampling over ordered pairs of open vertices is uniform on
    // legal pairs; enumerate when the position is crowded.
    for _ in 0..64 {
        let a = state.unsaturated_at(rng.gen_range(0..open));
        let b = state.unsaturated_at(rng.gen_range(0..open));
        if a != b && !state.has_edge(a, b) {
            return Ok((a.min(b), a.max(b)));
        }
    }
    let moves = state.legal_moves();
    Ok(moves[rng.gen_range(0..moves.len())])
}

#[derive(Debug, Clone)]
pub struct RandomPlayer {
    rng: ChaCha8Rng,
}

impl RandomPlayer {
    pub fn new(seed: u64) -> Self {
        RandomPlayer {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }
}

impl Strategy for RandomPlayer {
    fn name(&self) -> String {
        "random".into()
    }

    fn choose(&mut self, state: &GameState) -> Result<(usize, usize), StrategyError> {
        random_move(state, &mut self.rng)
    }
}

/// Positive components as (vertex list, deficit, cycle rank).
fn positive_components<'a>(state: &GameState, parts: &'a Partition) -> Vec<(&'a [usize], usize, usize)> {
    parts
        .iter()
        .filter_map(|vs| {
            let d = state.component_deficit(vs[0]);
            (d > 0).then(|| {
                let rank = state.component_edge_count(vs[0]) + 1 - vs.len();
                (vs, d, rank)
            })
        })
        .collect()
}

fn lowest_positive(state: &GameState, vs: &[usize]) -> Option<usize> {
    vs.iter().copied().find(|&v| state.deficit_of(v) > 0)
}

pub fn greedy_nonplanar_move(state: &GameState) -> Result<(usize, usize), StrategyError> {
    if state.is_over() {
        return Err(StrategyError::NoLegalMove);
    }
    let parts = state.component_partition();
    let mut comps = positive_components(state, &parts);
    comps.sort_by(|a, b| b.1.cmp(&a.1).then(b.2.cmp(&a.2)).then(a.0[0].cmp(&b.0[0])));
    if comps.len() >= 2 {
        let a = lowest_positive(state, comps[0].0).expect("positive component");
        let b = lowest_positive(state, comps[1].0).expect("positive component");
        return Ok((a.min(b), a.max(b)));
    }
    state.first_legal_move().ok_or(StrategyError::NoLegalMove)
}

#[derive(Debug, Clone, Copy, Default)]
pub struct GreedyNonplanar;

impl Strategy for GreedyNonplanar {
    fn name(&self) -> String {
        "greedy_nonplanar".into()
    }

    fn choose(&mut self, state: &GameState) -> Result<(usize, usize), StrategyError> {
        greedy_nonplanar_move(state)
    }
}

/// Builds `K4`s around the opponent's edges.
///
/// Candidates are components of at most four vertices containing an edge of
/// the other player that are not yet complete; the one with most edges (then
/// lowest id) is grown with an isolated vertex while it has fewer than four
/// vertices, and filled with internal edges afterwards. Otherwise the
/// lexicographically least legal move is played.
pub fn greedy_structure_move(state: &GameState) -> Result<(usize, usize), StrategyError> {
    if state.is_over() {
        return Err(StrategyError::NoLegalMove);
    }
    let me = state.mover();
    let opponent = me.other();
    let mut touched = vec![false; state.n()];
    for m in state.history() {
        if m.player == opponent {
            touched[m.u] = true;
        }
    }
    let parts = state.component_partition();
    let mut candidates: Vec<(&[usize], usize)> = parts
        .iter()
        .filter(|vs| vs.len() <= 4 && vs.len() >= 2 && vs.iter().any(|&v| touched[v]))
        .map(|vs| {
            let e = state.component_edge_count(vs[0]);
            (vs, e)
        })
        .filter(|(vs, e)| *e < vs.len() * (vs.len() - 1) / 2 || vs.len() < 4)
        .collect();
    candidates.sort_by(|a, b| b.1.cmp(&a.1).then(a.0[0].cmp(&b.0[0])));
    let isolated = (0..state.n()).find(|&v| state.degree(v) == 0);
    for (vs, _) in &candidates {
        let internal = || {
            for (i, &a) in vs.iter().enumerate() {
                for &b in &vs[i + 1..] {
                    if state.is_legal(a, b) {
                        return Some((a, b));
                    }
                }
            }
            None
        };
        let edge = if vs.len() < 4 {
            match (lowest_positive(state, vs), isolated) {
                (Some(a), Some(w)) => Some((a.min(w), a.max(w))),
                _ => internal(),
            }
        } else {
            internal()
        };
        if let Some(e) = edge {
            return Ok(e);
        }
    }
    state.first_legal_move().ok_or(StrategyError::NoLegalMove)
}

#[derive(Debug, Clone, Copy, Default)]
pub struct GreedyStructure;

impl Strategy for GreedyStructure {
    fn name(&self) -> String {
        "greedy_structure".into()
    }

    fn choose(&mut self, state: &GameState) -> Result<(usize, usize), StrategyError> {
        greedy_structure_move(state)
    }
}

/// Keeps the position as isolated vertices plus a single component.
///
/// The main component is the largest nontrivial one (lowest id on ties). Its
/// anchor is its lowest vertex of deficit at least 2, else its lowest positive
/// vertex. If another nontrivial positive component exists it is joined to
/// the anchor; otherwise the anchor is joined to the lowest isolated vertex. With no nontrivial component yet, the two
/// lowest isolated vertices are joined. Fallback: least legal move.
pub fn connector_move(state: &GameState) -> Result<(usize, usize), StrategyError> {
    if state.is_over() {
        return Err(StrategyError::NoLegalMove);
    }
    let sets = state.component_partition();
    let mut nontrivial: Vec<&[usize]> = sets.iter().filter(|vs| vs.len() > 1).collect();
    nontrivial.sort_by(|a, b| b.len().cmp(&a.len()).then(a[0].cmp(&b[0])));
    let isolated: Vec<usize> = sets.iter().filter(|vs| vs.len() == 1).map(|vs| vs[0]).collect();
    let legal = |a: usize, b: usize| state.is_legal(a, b).then(|| (a.min(b), a.max(b)));
    if let Some(main) = nontrivial.first() {
        let anchor = main
            .iter()
            .copied()
            .find(|&v| state.deficit_of(v) >= 2)
            .or_else(|| lowest_positive(state, main));
        for other in &nontrivial[1..] {
            if let (Some(a), Some(b)) = (anchor, lowest_positive(state, other)) {
                if let Some(e) = legal(a, b) {
                    return Ok(e);
                }
            }
        }
        if let (Some(a), Some(&w)) = (anchor, isolated.first()) {
            if let Some(e) = legal(a, w) {
                return Ok(e);
            }
        }
    } else if isolated.len() >= 2 {
        if let Some(e) = legal(isolated[0], isolated[1]) {
            return Ok(e);
        }
    }
    state.first_legal_move().ok_or(StrategyError::NoLegalMove)
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Connector;

impl Strategy for Connector {
    fn name(&self) -> String {
        "connector".into()
    }

    fn choose(&mut self, state: &GameState) -> Result<(usize, usize), StrategyError> {
        connector_move(state)
    }
}

/// Does `state` have the connector shape: isolated vertices plus at most one
/// other component, which has a vertex of deficit at least 2 while isolated
/// vertices remain?
pub fn connector_invariant(state: &GameState) -> bool {
    let sets = state.component_partition();
    let big: Vec<&[usize]> = sets.iter().filter(|vs| vs.len() > 1).collect();
    let isolated = sets.len() > big.len();
    match big.as_slice() {
        [] => true,
        [main] => !isolated || main.iter().any(|&v| state.deficit_of(v) >= 2),
        _ => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{GameConfig, Move, Player};

    fn game(n: usize, k: usize) -> GameState {
        GameState::new(GameConfig::new(n, k, Player::A, 0)).unwrap()
    }

    fn play(s: &mut GameState, u: usize, v: usize) {
        let p = s.mover();
        s.play(Move::new(u, v, p)).unwrap();
    }

    #[test]
    fn random_is_seeded_and_uniform() {
        let s = game(3, 3);
        let a = random_move(&s, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        let b = random_move(&s, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        assert_eq!(a, b);
        let s = game(4, 3);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut counts = std::collections::HashMap::new();
        let draws = 10_000;
        for _ in 0..draws {
            *counts.entry(random_move(&s, &mut rng).unwrap()).or_insert(0usize) += 1;
        }
        assert_eq!(counts.len(), 6);
        for (_, c) in counts {
            let f = c as f64 / draws as f64;
            assert!((f - 1.0 / 6.0).abs() < 0.02, "{f}");
        }
    }

    #[test]
    fn random_errors_when_over() {
        let mut s = game(4, 3);
        for (u, v) in [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)] {
            play(&mut s, u, v);
        }
        assert_eq!(
            random_move(&s, &mut ChaCha8Rng::seed_from_u64(1)),
            Err(StrategyError::NoLegalMove)
        );
        assert_eq!(greedy_nonplanar_move(&s), Err(StrategyError::NoLegalMove));
        assert_eq!(greedy_structure_move(&s), Err(StrategyError::NoLegalMove));
        assert_eq!(connector_move(&s), Err(StrategyError::NoLegalMove));
    }

    #[test]
    fn greedy_nonplanar_merges_type2_pair() {
        let mut s = game(8, 3);
        play(&mut s, 0, 1);
        play(&mut s, 2, 3);
        assert_eq!(greedy_nonplanar_move(&s).unwrap(), (0, 2));
        assert_eq!(greedy_nonplanar_move(&game(5, 3)).unwrap(), (0, 1));
        assert_eq!(greedy_nonplanar_move(&s), greedy_nonplanar_move(&s.clone()));
    }

    #[test]
    fn greedy_structure_builds_k4s() {
        let mut s = game(10, 4);
        play(&mut s, 4, 5);
        // B to move: grow the component of 4-5.
        let e = greedy_structure_move(&s).unwrap();
        assert!(e.0 == 4 || e.0 == 5 || e.1 == 4 || e.1 == 5);
        // Make {4,5,6,7} a K4 and check the next move leaves it.
        let mut s = game(12, 4);
        play(&mut s, 4, 5);
        for (u, v) in [(4, 6), (0, 1), (4, 7), (2, 3), (5, 6), (8, 9), (5, 7), (10, 11), (6, 7)] {
            play(&mut s, u, v);
        }
        assert_eq!(s.component_edge_count(4), 6);
        let e = greedy_structure_move(&s).unwrap();
        assert!(![4, 5, 6, 7].contains(&e.0) && ![4, 5, 6, 7].contains(&e.1), "{e:?}");
    }

    #[test]
    fn connector_examples() {
        assert_eq!(connector_move(&game(6, 3)).unwrap(), (0, 1));
        let mut s = game(6, 3);
        play(&mut s, 2, 3);
        assert_eq!(connector_move(&s).unwrap(), (0, 2));
    }

    #[test]
    fn connector_forces_connected_graph() {
        for seed in 0..200u64 {
            for seat in [Player::A, Player::B] {
                let n = 4 + (seed as usize % 47);
                let mut s = GameState::new(GameConfig::new(n, 3, Player::A, seed)).unwrap();
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                while !s.is_over() {
                    let e = if s.mover() == seat {
                        connector_move(&s).unwrap()
                    } else {
                        random_move(&s, &mut rng).unwrap()
                    };
                    play(&mut s, e.0, e.1);
                    if s.mover() != seat && !s.is_over() {
                        assert!(connector_invariant(&s), "seed {seed}");
                    }
                }
                assert_eq!(s.component_vertex_sets().len(), 1, "seed {seed} n {n} seat {seat}");
            }
        }
    }
}
