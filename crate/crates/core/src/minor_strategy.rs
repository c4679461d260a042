//! The clique-minor strategy for the 4-game.
//!
//! Round 1 plays a matching on isolated vertices until the summed deficit of
//! the components of deficit at least 5 (the δ-statistic) is large. After
//! that the player grows one big component by joining it to other components
//! of deficit at least 5, splits a spanning tree of it into `ℓ` connected
//! parts of deficit at least `C(ℓ,2)` each, and spends its remaining moves
//! joining the parts pairwise. The parts are then the branch sets of a `K_ℓ`
//! minor.

use std::collections::{BTreeMap, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::game::{GameState, Player};
use crate::planarity::{verify_minor_certificate, BranchDecomposition};
use crate::strategy::{Strategy, StrategyError};
use crate::transcript::{Annotations, Transcript, TranscriptError};
use crate::tree_split::{ceil_log2, split_labeled_tree, LabeledTree, SplitError};

/// Largest per-vertex deficit and degree bound in the 4-game.
pub const LABEL_BOUND: usize = 4;
pub const TREE_DEGREE: usize = 4;
/// Analysis constant for the per-component edge cost of killing a deficit.
pub const BETA_FLOOR: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Phase {
    Matching,
    Growth,
    Split,
    Join,
    Done,
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

fn binom2(ell: usize) -> usize {
    ell * (ell - 1) / 2
}

/// Deficit the big component needs before it can be split:
/// `C(ℓ,2)·(Δ+1)^⌈log₂ ℓ⌉` with `Δ = 4`.
pub fn minor_threshold(ell: usize) -> usize {
    binom2(ell) * (TREE_DEGREE + 1).pow(ceil_log2(ell) as u32)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MinorMemory {
    pub target_ell: usize,
    pub phase: Phase,
    pub matching_edges: Vec<(usize, usize)>,
    /// A vertex of the tracked big component; components only ever merge, so
    /// its component is the big one from then on.
    pub big_component: Option<usize>,
    pub branch_sets: Option<BranchDecomposition>,
    /// Index pairs into `branch_sets` still lacking an edge between them.
    pub pending_pairs: Vec<(usize, usize)>,
    /// Number of moves played when round 1 ended.
    pub round1_end: Option<usize>,
    /// (turn, phase entered) in order.
    pub phase_history: Vec<(usize, Phase)>,
    pub replans: usize,
}

impl MinorMemory {
    pub fn new(ell: usize) -> Self {
        assert!(ell >= 2, "clique order must be at least 2");
        MinorMemory {
            target_ell: ell,
            phase: Phase::Matching,
            matching_edges: Vec::new(),
            big_component: None,
            branch_sets: None,
            pending_pairs: Vec::new(),
            round1_end: None,
            phase_history: vec![(0, Phase::Matching)],
            replans: 0,
        }
    }

    pub fn threshold(&self) -> usize {
        minor_threshold(self.target_ell)
    }

    fn enter(&mut self, turn: usize, phase: Phase) {
        self.phase = phase;
        self.phase_history.push((turn, phase));
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeltaReport {
    pub delta: usize,
    pub m: usize,
    pub m1: usize,
    pub m2: usize,
    pub beta_floor: usize,
}

impl DeltaReport {
    /// `δ ≥ 6m − 6m₁/β − 2m₂`, compared exactly after multiplying by β.
    pub fn inequality_holds(&self) -> bool {
        let b = self.beta_floor as i128;
        let lhs = b * self.delta as i128;
        let rhs = b * 6 * self.m as i128 - 6 * self.m1 as i128 - b * 2 * self.m2 as i128;
        lhs >= rhs
    }
}

/// Sum of the deficits of components with deficit at least 5.
pub fn delta_of(state: &GameState) -> usize {
    component_deficits(state)
        .into_iter()
        .map(|(_, d)| d)
        .filter(|&d| d >= 5)
        .sum()
}

/// (root, deficit) per component.
fn component_deficits(state: &GameState) -> Vec<(usize, usize)> {
    (0..state.n())
        .filter(|&v| state.component_root(v) == v)
        .map(|r| (r, state.component_deficit(r)))
        .collect()
}

/// δ-statistic of `state`, with the moves of `minor_seat` counted as
/// matching edges and the other player's edges split by the deficit of the
/// component that now contains them.
pub fn delta_statistic(state: &GameState, minor_seat: Player) -> DeltaReport {
    let mut report = DeltaReport {
        delta: delta_of(state),
        m: 0,
        m1: 0,
        m2: 0,
        beta_floor: BETA_FLOOR,
    };
    for mv in state.history() {
        if mv.player == minor_seat {
            report.m += 1;
        } else if state.component_deficit(mv.u) <= 4 {
            report.m1 += 1;
        } else {
            report.m2 += 1;
        }
    }
    report
}

#[derive(Debug, Error)]
pub enum AccountingError {
    #[error(transparent)]
    Transcript(#[from] TranscriptError),
    #[error("round 1 ends at turn {round1_end} but the transcript has {moves} moves")]
    RoundEnd { round1_end: usize, moves: usize },
    #[error("component at {vertex} (deficit {deficit}): {matching} matching edges but only {adversary} opponent edges")]
    Component {
        vertex: usize,
        deficit: usize,
        matching: usize,
        adversary: usize,
    },
    #[error("δ = {} is below 6m − 6m₁/{} − 2m₂ with m = {}, m₁ = {}, m₂ = {}", .0.delta, .0.beta_floor, .0.m, .0.m1, .0.m2)]
    Inequality(DeltaReport),
}

/// Checks the round-1 accounting of a 4-game in which `minor_seat` played
/// the matching: every component of deficit at most 4 holds at least
/// `3m_C − 2` opponent edges (at least 5 when `m_C = 1`), and the δ bound.
pub fn round1_accounting_check(
    transcript: &Transcript,
    round1_end: usize,
    minor_seat: Player,
) -> Result<DeltaReport, AccountingError> {
    if round1_end > transcript.moves.len() {
        return Err(AccountingError::RoundEnd {
            round1_end,
            moves: transcript.moves.len(),
        });
    }
    let prefix = Transcript {
        config: transcript.config,
        moves: transcript.moves[..round1_end].to_vec(),
        annotations: None,
    };
    let state = prefix.replay()?;
    let mut per: BTreeMap<usize, (usize, usize)> = BTreeMap::new();
    for mv in state.history() {
        let entry = per.entry(state.component_root(mv.u)).or_default();
        if mv.player == minor_seat {
            entry.0 += 1;
        } else {
            entry.1 += 1;
        }
    }
    for (&root, &(matching, adversary)) in &per {
        let deficit = state.component_deficit(root);
        if deficit > 4 {
            continue;
        }
        let need = if matching == 1 { 5 } else { (3 * matching).saturating_sub(2) };
        if adversary < need {
            let vertex = state.component_vertices(root)[0];
            return Err(AccountingError::Component {
                vertex,
                deficit,
                matching,
                adversary,
            });
        }
    }
    let report = delta_statistic(&state, minor_seat);
    if !report.inequality_holds() {
        return Err(AccountingError::Inequality(report));
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PlanError {
    #[error("no big component is tracked")]
    NoBigComponent,
    #[error("big component has deficit {deficit}, below the threshold {threshold}")]
    ThresholdNotReached { deficit: usize, threshold: usize },
    #[error(transparent)]
    Split(#[from] SplitError),
}

/// BFS spanning tree of the component of `root`, labelled by deficits.
fn spanning_tree(state: &GameState, root: usize) -> LabeledTree {
    let mut seen = vec![false; state.n()];
    let mut queue = VecDeque::from([root]);
    seen[root] = true;
    let mut nodes = Vec::new();
    let mut edges = Vec::new();
    while let Some(v) = queue.pop_front() {
        nodes.push(v);
        for w in state.neighbors(v) {
            if !seen[w] {
                seen[w] = true;
                edges.push((v, w));
                queue.push_back(w);
            }
        }
    }
    let labels = nodes.iter().map(|&v| state.deficit_of(v)).collect();
    LabeledTree {
        nodes,
        edges,
        labels,
        b: LABEL_BOUND,
        max_degree: TREE_DEGREE,
    }
}

/// Splits the big component into `ℓ` connected branch sets, each of deficit
/// at least `C(ℓ,2)`.
pub fn plan_branch_sets(state: &GameState, memory: &MinorMemory) -> Result<BranchDecomposition, PlanError> {
    let big = memory.big_component.ok_or(PlanError::NoBigComponent)?;
    let ell = memory.target_ell;
    let deficit = state.component_deficit(big);
    let threshold = memory.threshold();
    if deficit < threshold {
        return Err(PlanError::ThresholdNotReached { deficit, threshold });
    }
    let tree = spanning_tree(state, big);
    let mut parts = split_labeled_tree(&tree, binom2(ell), ell)?;
    parts.truncate(ell);
    for p in &mut parts {
        p.sort_unstable();
    }
    Ok(BranchDecomposition {
        branch_sets: parts,
        target: ell,
    })
}

fn all_pairs(ell: usize) -> Vec<(usize, usize)> {
    (0..ell).flat_map(|i| (i + 1..ell).map(move |j| (i, j))).collect()
}

fn lowest_positive(state: &GameState, vs: &[usize]) -> Option<usize> {
    vs.iter().copied().find(|&v| state.deficit_of(v) > 0)
}

fn ordered(a: usize, b: usize) -> (usize, usize) {
    (a.min(b), a.max(b))
}

/// Edge between the two lowest isolated vertices.
fn matching_edge(state: &GameState) -> Option<(usize, usize)> {
    let mut iso = (0..state.n()).filter(|&v| state.degree(v) == 0);
    Some((iso.next()?, iso.next()?))
}

/// Component roots other than `big`'s, with deficit, largest deficit first
/// (lowest root on ties).
fn others_by_deficit(state: &GameState, big: usize) -> Vec<(usize, usize)> {
    let big_root = state.component_root(big);
    let mut others: Vec<(usize, usize)> = component_deficits(state)
        .into_iter()
        .filter(|&(r, d)| r != big_root && d > 0)
        .collect();
    others.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    others
}

/// Largest component of deficit at least 5, as one of its vertices.
fn pick_big(state: &GameState) -> Option<usize> {
    state
        .component_vertex_sets()
        .into_iter()
        .map(|vs| (state.component_deficit(vs[0]), vs[0]))
        .filter(|&(d, _)| d >= 5)
        .max_by(|a, b| a.0.cmp(&b.0).then(b.1.cmp(&a.1)))
        .map(|(_, v)| v)
}

/// Edge joining the big component to the component of deficit at least 5
/// with the largest deficit; a matching edge when there is none, and then
/// any positive component.
fn growth_edge(state: &GameState, big: usize) -> Option<(usize, usize)> {
    let a = lowest_positive(state, &state.component_vertices(big))?;
    let others = others_by_deficit(state, big);
    let join = |root: usize| lowest_positive(state, &state.component_vertices(root)).map(|b| ordered(a, b));
    if let Some(&(r, d)) = others.first() {
        if d >= 5 {
            return join(r);
        }
    }
    if let Some(e) = matching_edge(state) {
        return Some(e);
    }
    others.first().and_then(|&(r, _)| join(r))
}

/// Which branch set each vertex belongs to.
fn set_labels(n: usize, bd: &BranchDecomposition) -> Vec<usize> {
    let mut label = vec![usize::MAX; n];
    for (i, set) in bd.branch_sets.iter().enumerate() {
        for &v in set {
            label[v] = i;
        }
    }
    label
}

/// Drops pending pairs that already have an edge between their sets.
fn prune_pending(state: &GameState, memory: &mut MinorMemory) {
    let Some(bd) = &memory.branch_sets else { return };
    let label = set_labels(state.n(), bd);
    let ell = bd.branch_sets.len();
    let mut linked = vec![vec![false; ell]; ell];
    for (i, set) in bd.branch_sets.iter().enumerate() {
        for &v in set {
            for w in state.neighbors(v) {
                let j = label[w];
                if j != usize::MAX && j != i {
                    linked[i][j] = true;
                }
            }
        }
    }
    memory.pending_pairs.retain(|&(i, j)| !linked[i][j]);
}

/// Next Join edge, or `None` if some pending set has run out of deficit.
fn join_edge(state: &GameState, memory: &MinorMemory) -> Option<(usize, usize)> {
    let bd = memory.branch_sets.as_ref()?;
    // Join-phase safety: every set with a pending pair keeps positive deficit.
    for &(i, j) in &memory.pending_pairs {
        for s in [i, j] {
            lowest_positive(state, &bd.branch_sets[s])?;
        }
    }
    let &(i, j) = memory.pending_pairs.first()?;
    let u = lowest_positive(state, &bd.branch_sets[i])?;
    let v = lowest_positive(state, &bd.branch_sets[j])?;
    Some(ordered(u, v))
}

/// Computes branch sets and enters Join, or returns to Growth if the big
/// component is below the threshold.
fn split(state: &GameState, memory: &mut MinorMemory) {
    let turn = state.turn();
    memory.enter(turn, Phase::Split);
    match plan_branch_sets(state, memory) {
        Ok(bd) => {
            memory.pending_pairs = all_pairs(memory.target_ell);
            memory.branch_sets = Some(bd);
            memory.enter(turn, Phase::Join);
        }
        Err(_) => {
            memory.branch_sets = None;
            memory.pending_pairs.clear();
            memory.enter(turn, Phase::Growth);
        }
    }
}

/// One move of the minor player; `memory` carries the phase across turns.
pub fn minor_move(state: &GameState, memory: &mut MinorMemory) -> Result<(usize, usize), StrategyError> {
    if state.is_over() {
        return Err(StrategyError::NoLegalMove);
    }
    if state.k() != 4 {
        return Err(StrategyError::Unsupported(format!(
            "the minor strategy plays the 4-game, not k = {}",
            state.k()
        )));
    }
    let turn = state.turn();
    if memory.phase == Phase::Matching {
        let stop = delta_of(state) >= 2 * memory.threshold();
        match matching_edge(state) {
            Some(e) if !stop => {
                memory.matching_edges.push(e);
                return Ok(e);
            }
            _ => {
                memory.round1_end = Some(turn);
                memory.big_component = pick_big(state);
                memory.enter(turn, Phase::Growth);
            }
        }
    }
    if memory.phase == Phase::Growth {
        let big = memory
            .big_component
            .filter(|&b| state.component_deficit(b) > 0)
            .or_else(|| pick_big(state));
        memory.big_component = big;
        match big {
            Some(b) if state.component_deficit(b) >= memory.threshold() => split(state, memory),
            Some(b) => {
                if let Some(e) = growth_edge(state, b) {
                    return Ok(e);
                }
            }
            None => {
                if let Some(e) = matching_edge(state) {
                    return Ok(e);
                }
            }
        }
    }
    if memory.phase == Phase::Join {
        prune_pending(state, memory);
        if memory.pending_pairs.is_empty() {
            memory.enter(turn, Phase::Done);
        } else if let Some(e) = join_edge(state, memory) {
            return Ok(e);
        } else {
            memory.replans += 1;
            split(state, memory);
            if memory.phase == Phase::Join {
                prune_pending(state, memory);
                if memory.pending_pairs.is_empty() {
                    memory.enter(turn, Phase::Done);
                } else if let Some(e) = join_edge(state, memory) {
                    return Ok(e);
                }
            } else if let Some(e) = memory.big_component.and_then(|b| growth_edge(state, b)) {
                return Ok(e);
            }
        }
    }
    state.first_legal_move().ok_or(StrategyError::NoLegalMove)
}

/// The minor player, tracking its phase between turns.
#[derive(Debug, Clone)]
pub struct MinorPlayer {
    memory: MinorMemory,
    seat: Option<Player>,
    round1_report: Option<DeltaReport>,
}

impl MinorPlayer {
    pub fn new(ell: usize) -> Self {
        MinorPlayer {
            memory: MinorMemory::new(ell),
            seat: None,
            round1_report: None,
        }
    }

    pub fn memory(&self) -> &MinorMemory {
        &self.memory
    }

    /// Branch sets once every pair is joined.
    pub fn certificate(&self) -> Option<&BranchDecomposition> {
        match self.memory.phase {
            Phase::Done => self.memory.branch_sets.as_ref(),
            _ => None,
        }
    }
}

impl Strategy for MinorPlayer {
    fn name(&self) -> String {
        format!("minor:{}", self.memory.target_ell)
    }

    fn choose(&mut self, state: &GameState) -> Result<(usize, usize), StrategyError> {
        let seat = *self.seat.get_or_insert(state.mover());
        let before = self.memory.round1_end;
        let was_done = self.memory.phase == Phase::Done;
        let edge = minor_move(state, &mut self.memory)?;
        if before.is_none() && self.memory.round1_end.is_some() {
            self.round1_report = Some(delta_statistic(state, seat));
        }
        if self.memory.phase == Phase::Done && !was_done {
            if let Some(bd) = &self.memory.branch_sets {
                debug_assert!(verify_minor_certificate(&state.edges(), bd));
            }
        }
        Ok(edge)
    }

    fn annotations(&self) -> Annotations {
        let m = &self.memory;
        let mut a = Annotations::new();
        a.insert("round1_end".into(), json!(m.round1_end));
        a.insert(
            "minor_certificate".into(),
            self.certificate().map_or(Value::Null, |bd| json!(bd)),
        );
        a.insert("minor_phases".into(), json!(m.phase_history));
        a.insert("minor_replans".into(), json!(m.replans));
        a.insert("matching_size".into(), json!(m.matching_edges.len()));
        if let Some(r) = &self.round1_report {
            a.insert("minor_delta_report".into(), json!(r));
        }
        a
    }
}
