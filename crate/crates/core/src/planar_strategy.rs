//! The planar player's strategy for the 3-game.
//!
//! After each of its moves the player keeps every component of Type 1, 2 or
//! 3 (at most one of Type 3), each drawable with its positive-deficit vertices
//! on the outer face. The reply to an opponent move depends only on the types
//! of the components the move touched, as classified right after the
//! player's own previous move:
//!
//! | case | opponent move                   | reply                                   |
//! |------|---------------------------------|-----------------------------------------|
//! | 1    | inside a Type 1/2, or 1 + 1     | free move                               |
//! | 2    | Type 2 side + Type 1 `C'`       | untouched side to `C'` (free if `C'` is full) |
//! | 3    | Type 2 `C` + Type 2 `C'`        | touched side of `C` to untouched side of `C'` |
//! | 4    | Type 3 part + Type 2 side       | partner part to the same side           |
//! | 5    | Type 3 part + Type 1 `C'`       | partner part to `C'` (free if `C'` is full) |
//! | 6    | inside the Type 3               | 3a: free move; 3b: a second cross edge  |
//! | 7    | (free move)                     | see [`free_move`]                       |
//!
//! The partner of an end part is its neighbouring middle part and the partner
//! of a middle part is its neighbouring end part. Endpoints are always the
//! lowest-indexed positive-deficit vertices that give a legal edge.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::classify::{check_condition_t, ConditionTChecker, ConditionTReport, TypeClassification, TypeKind};
use crate::game::{GameConfig, GameState, Move};
use crate::strategy::{Strategy, StrategyError};
use crate::transcript::Annotations;

/// Types of all components right after one of the planar player's moves.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanarMemory {
    /// `state.turn()` at the time of the snapshot.
    pub snapshot_turn: usize,
    /// Component id (smallest vertex) to its classification.
    pub tracked_types: BTreeMap<usize, Arc<TypeClassification>>,
    /// Component id of every vertex.
    pub comp_of: Vec<usize>,
    pub type3_handle: Option<usize>,
}

impl PlanarMemory {
    pub fn snapshot(state: &GameState, checker: &mut ConditionTChecker) -> Self {
        let sets = state.component_partition();
        let classes = checker.classify_partition(state, &sets);
        let mut comp_of = vec![0; state.n()];
        let mut tracked_types = BTreeMap::new();
        let mut type3_handle = None;
        for (vs, (c, _)) in sets.iter().zip(classes) {
            for &v in vs {
                comp_of[v] = vs[0];
            }
            if c.kind.is_type3() && type3_handle.is_none() {
                type3_handle = Some(vs[0]);
            }
            tracked_types.insert(vs[0], c);
        }
        PlanarMemory {
            snapshot_turn: state.turn(),
            tracked_types,
            comp_of,
            type3_handle,
        }
    }

    fn kind_of(&self, v: usize) -> TypeKind {
        self.tracked_types[&self.comp_of[v]].kind
    }

    fn class_of(&self, v: usize) -> &TypeClassification {
        &self.tracked_types[&self.comp_of[v]]
    }
}

/// Which rule of the response table applies to an opponent move.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Case {
    /// Edge inside a Type 1 or Type 2 component.
    InsideSmall,
    /// Two Type 1 components joined.
    JoinType1Type1,
    JoinType2Type1,
    JoinType2Type2,
    JoinType3Type2,
    JoinType3Type1,
    InsideType3,
}

impl Case {
    pub fn number(self) -> usize {
        match self {
            Case::InsideSmall | Case::JoinType1Type1 => 1,
            Case::JoinType2Type1 => 2,
            Case::JoinType2Type2 => 3,
            Case::JoinType3Type2 => 4,
            Case::JoinType3Type1 => 5,
            Case::InsideType3 => 6,
        }
    }
}

/// Classifies the opponent move `m` against the position in `memory`.
pub fn dispatch_case(memory: &PlanarMemory, m: &Move) -> Result<Case, StrategyError> {
    let (ku, kv) = (memory.kind_of(m.u), memory.kind_of(m.v));
    for k in [ku, kv] {
        if k == TypeKind::Unclassified {
            return Err(StrategyError::Precondition(format!(
                "move {m} touches an unclassified component"
            )));
        }
    }
    let same = memory.comp_of[m.u] == memory.comp_of[m.v];
    let rank = |k: TypeKind| match k {
        TypeKind::Type1 => 1,
        TypeKind::Type2 => 2,
        _ => 3,
    };
    if same {
        return Ok(if rank(ku) == 3 { Case::InsideType3 } else { Case::InsideSmall });
    }
    let (hi, lo) = (rank(ku).max(rank(kv)), rank(ku).min(rank(kv)));
    match (hi, lo) {
        (1, 1) => Ok(Case::JoinType1Type1),
        (2, 1) => Ok(Case::JoinType2Type1),
        (2, 2) => Ok(Case::JoinType2Type2),
        (3, 1) => Ok(Case::JoinType3Type1),
        (3, 2) => Ok(Case::JoinType3Type2),
        _ => Err(StrategyError::Precondition(format!("move {m} touches two type 3 components"))),
    }
}

/// Lowest legal pair `(a, b)` with `a` in `from` and `b` in `to`, both positive.
fn lowest_pair(state: &GameState, from: &[usize], to: &[usize]) -> Option<(usize, usize)> {
    for &a in from {
        if state.deficit_of(a) == 0 {
            continue;
        }
        for &b in to {
            if a != b && state.deficit_of(b) > 0 && !state.has_edge(a, b) {
                return Some((a.min(b), a.max(b)));
            }
        }
    }
    None
}

fn positive(state: &GameState, vs: &[usize]) -> bool {
    vs.iter().any(|&v| state.deficit_of(v) > 0)
}

/// Vertices of the component that contains `v` in `memory`.
fn component_members(memory: &PlanarMemory, v: usize) -> Vec<usize> {
    let c = &memory.tracked_types[&memory.comp_of[v]];
    let mut all: Vec<usize> = c.parts.iter().flat_map(|p| p.vertices.iter().copied()).collect();
    all.sort_unstable();
    all
}

fn partner(kind: TypeKind, part: usize) -> usize {
    match (kind, part) {
        (TypeKind::Type3a, 0) | (TypeKind::Type3a, 2) => 1,
        (TypeKind::Type3a, _) => 0,
        (_, 0) => 1,
        (_, 1) => 0,
        (_, 2) => 3,
        _ => 2,
    }
}

/// The first candidate edge after which the touched component still meets
/// the condition; falls back to the first candidate.
fn first_keeping_condition(
    state: &GameState,
    checker: &mut ConditionTChecker,
    candidates: &[(usize, usize)],
) -> Option<(usize, usize)> {
    for &(a, b) in candidates {
        let next = state.apply_move(Move::new(a, b, state.mover())).ok()?;
        let (c, apex) = checker.component(&next, a);
        if c.kind != TypeKind::Unclassified && apex {
            return Some((a, b));
        }
    }
    candidates.first().copied()
}

/// All positive pairs between two vertex sets, in lexicographic order.
fn all_pairs(state: &GameState, from: &[usize], to: &[usize]) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for &a in from {
        for &b in to {
            if a != b && state.deficit_of(a) > 0 && state.deficit_of(b) > 0 && !state.has_edge(a, b) {
                out.push((a.min(b), a.max(b)));
            }
        }
    }
    out.sort_unstable();
    out.dedup();
    out
}

/// The free-move chooser, in priority order:
/// 1. join the first two positive Type 1 components;
/// 2. otherwise reduce the Type 3 component (3a: `C0`–`C2`; 3b: `C1`–`C3`,
///    else `C0`–`C2`);
/// 3. otherwise join a positive Type 1 or a Type 2 component to a Type 2;
/// 4. otherwise play the lexicographically least legal move.
pub fn free_move(state: &GameState, checker: &mut ConditionTChecker) -> Result<(usize, usize), StrategyError> {
    let sets = state.component_partition();
    let classes = checker.classify_partition(state, &sets);
    let kinds: Vec<TypeKind> = classes.iter().map(|c| c.0.kind).collect();
    let type1: Vec<usize> = (0..sets.len())
        .filter(|&i| kinds[i] == TypeKind::Type1 && positive(state, sets.get(i)))
        .collect();
    if type1.len() >= 2 {
        if let Some(p) = lowest_pair(state, sets.get(type1[0]), sets.get(type1[1])) {
            return Ok(p);
        }
    }
    if let Some(i) = kinds.iter().position(|k| k.is_type3()) {
        let c = &classes[i].0;
        let pairs: &[(usize, usize)] = if c.kind == TypeKind::Type3a { &[(0, 2)] } else { &[(1, 3), (0, 2)] };
        let mut candidates = Vec::new();
        for &(a, b) in pairs {
            candidates.extend(all_pairs(state, &c.parts[a].vertices, &c.parts[b].vertices));
        }
        if let Some(p) = first_keeping_condition(state, checker, &candidates) {
            return Ok(p);
        }
    } else if let Some(j) = kinds.iter().position(|&k| k == TypeKind::Type2) {
        let other = (0..sets.len()).find(|&i| {
            i != j && (kinds[i] == TypeKind::Type2 || (kinds[i] == TypeKind::Type1 && positive(state, sets.get(i))))
        });
        if let Some(i) = other {
            if let Some(p) = lowest_pair(state, sets.get(i), sets.get(j)) {
                return Ok(p);
            }
        }
    }
    state.first_legal_move().ok_or(StrategyError::NoLegalMove)
}

/// What [`planar_respond`] decided.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Response {
    pub edge: (usize, usize),
    /// Table case, or `None` for an opening move.
    pub case: Option<Case>,
    /// True when the reply came from the free-move chooser.
    pub free: bool,
}

/// Reply to `last` (the opponent's move since the snapshot in `memory`).
pub fn planar_respond(
    state: &GameState,
    memory: &PlanarMemory,
    last: Option<&Move>,
    checker: &mut ConditionTChecker,
) -> Result<Response, StrategyError> {
    if state.is_over() {
        return Err(StrategyError::NoLegalMove);
    }
    let free = |checker: &mut ConditionTChecker, case| {
        free_move(state, checker).map(|edge| Response { edge, case, free: true })
    };
    let Some(m) = last else {
        return free(checker, None);
    };
    let case = dispatch_case(memory, m)?;
    let reply = |edge: Option<(usize, usize)>| edge.map(|edge| Response { edge, case: Some(case), free: false });
    let (x, y) = (m.u, m.v);
    let answer = match case {
        Case::InsideSmall | Case::JoinType1Type1 => None,
        Case::JoinType2Type1 => {
            let (c, other) = if memory.kind_of(x) == TypeKind::Type2 { (x, y) } else { (y, x) };
            let cls = memory.class_of(c);
            let side = cls.part_of(c).expect("endpoint lies in a side");
            reply(lowest_pair(state, &cls.parts[1 - side].vertices, &component_members(memory, other)))
        }
        Case::JoinType2Type2 => {
            let (cu, cv) = (memory.class_of(x), memory.class_of(y));
            let s = cu.part_of(x).expect("endpoint lies in a side");
            let t = cv.part_of(y).expect("endpoint lies in a side");
            let edge = lowest_pair(state, &cu.parts[s].vertices, &cv.parts[1 - t].vertices);
            if edge.is_none() {
                return Err(StrategyError::Precondition(format!("no reply edge for {m} in case 3")));
            }
            reply(edge)
        }
        Case::JoinType3Type2 | Case::JoinType3Type1 => {
            let (c, other) = if memory.kind_of(x).is_type3() { (x, y) } else { (y, x) };
            let cls = memory.class_of(c);
            let i = cls.part_of(c).expect("endpoint lies in a part");
            let from = &cls.parts[partner(cls.kind, i)].vertices;
            let target = if case == Case::JoinType3Type2 {
                let oc = memory.class_of(other);
                oc.parts[oc.part_of(other).expect("endpoint lies in a side")].vertices.clone()
            } else {
                component_members(memory, other)
            };
            let edge = lowest_pair(state, from, &target);
            if edge.is_none() && case == Case::JoinType3Type2 {
                return Err(StrategyError::Precondition(format!("no reply edge for {m} in case 4")));
            }
            reply(edge)
        }
        Case::InsideType3 => {
            let cls = memory.class_of(x);
            if cls.kind == TypeKind::Type3a {
                None
            } else {
                let mut candidates = all_pairs(state, &cls.parts[0].vertices, &cls.parts[2].vertices);
                candidates.extend(all_pairs(state, &cls.parts[1].vertices, &cls.parts[3].vertices));
                reply(first_keeping_condition(state, checker, &candidates))
            }
        }
    };
    match answer {
        Some(r) => Ok(r),
        None => free(checker, Some(case)),
    }
}

/// Checks the condition on `state` and that `memory` agrees with a fresh
/// classification of it.
pub fn self_check(state: &GameState, memory: &PlanarMemory) -> Result<ConditionTReport, StrategyError> {
    let report = check_condition_t(state);
    if memory.snapshot_turn != state.turn() {
        return Err(StrategyError::MemoryMismatch(format!(
            "snapshot from turn {}, position at turn {}",
            memory.snapshot_turn,
            state.turn()
        )));
    }
    let mut type3 = None;
    for r in &report.per_component {
        let id = r.component.id();
        match memory.tracked_types.get(&id) {
            Some(c) if **c == r.classification => {}
            Some(c) => {
                return Err(StrategyError::MemoryMismatch(format!(
                    "component {id} tracked as type {} but is type {}",
                    c.kind, r.classification.kind
                )))
            }
            None => return Err(StrategyError::MemoryMismatch(format!("component {id} is not tracked"))),
        }
        if r.component.vertices.iter().any(|&v| memory.comp_of[v] != id) {
            return Err(StrategyError::MemoryMismatch(format!("membership of component {id} differs")));
        }
        if r.classification.kind.is_type3() && type3.is_none() {
            type3 = Some(id);
        }
    }
    if memory.tracked_types.len() != report.per_component.len() {
        return Err(StrategyError::MemoryMismatch("stale components tracked".into()));
    }
    if type3 != memory.type3_handle {
        return Err(StrategyError::MemoryMismatch(format!(
            "type 3 handle {:?} but the type 3 component is {:?}",
            memory.type3_handle, type3
        )));
    }
    Ok(report)
}

/// [`Strategy`] wrapper keeping the memory between turns.
#[derive(Debug, Default)]
pub struct PlanarPlayer {
    memory: Option<PlanarMemory>,
    checker: ConditionTChecker,
    cases: BTreeMap<String, u64>,
    violations: Vec<Value>,
}

impl PlanarPlayer {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn memory(&self) -> Option<&PlanarMemory> {
        self.memory.as_ref()
    }

    /// Memory for the position before the opponent's last move.
    fn memory_before_last(&mut self, state: &GameState) -> PlanarMemory {
        if let Some(m) = self.memory.take() {
            if m.snapshot_turn + 1 == state.turn() {
                return m;
            }
        }
        let config: GameConfig = *state.config();
        let mut before = GameState::new(config).expect("config of a live game is valid");
        for &m in &state.history()[..state.turn().saturating_sub(1)] {
            before.play(m).expect("history replays");
        }
        // A fresh checker: the cached states must come from one monotone history.
        self.checker = ConditionTChecker::new();
        PlanarMemory::snapshot(&before, &mut self.checker)
    }
}

impl Strategy for PlanarPlayer {
    fn name(&self) -> String {
        "planar".into()
    }

    fn choose(&mut self, state: &GameState) -> Result<(usize, usize), StrategyError> {
        if state.k() != 3 {
            return Err(StrategyError::Unsupported(format!("planar strategy needs k = 3, got {}", state.k())));
        }
        if state.is_over() {
            return Err(StrategyError::NoLegalMove);
        }
        let last = state.last_move().copied();
        let memory = self.memory_before_last(state);
        let response = match planar_respond(state, &memory, last.as_ref(), &mut self.checker) {
            Ok(r) => r,
            Err(StrategyError::Precondition(reason)) => {
                self.violations.push(json!({"turn": state.turn() + 1, "reason": reason}));
                let edge = free_move(state, &mut self.checker)?;
                Response {
                    edge,
                    case: None,
                    free: true,
                }
            }
            Err(e) => return Err(e),
        };
        let key = match response.case {
            Some(c) if response.free => format!("case{}_free", c.number()),
            Some(c) => format!("case{}", c.number()),
            None => "opening".into(),
        };
        *self.cases.entry(key).or_insert(0) += 1;
        let (a, b) = response.edge;
        let next = state
            .apply_move(Move::new(a, b, state.mover()))
            .map_err(|e| StrategyError::Precondition(format!("chose illegal edge ({a}, {b}): {e}")))?;
        self.memory = Some(PlanarMemory::snapshot(&next, &mut self.checker));
        Ok(response.edge)
    }

    fn annotations(&self) -> Annotations {
        let mut a = Annotations::new();
        a.insert("planar_cases".into(), json!(self.cases));
        if !self.violations.is_empty() {
            a.insert("planar_precondition_violations".into(), Value::Array(self.violations.clone()));
        }
        a
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::classify_component;
    use crate::game::Player;

    fn game(n: usize) -> GameState {
        GameState::new(GameConfig::new(n, 3, Player::A, 0)).unwrap()
    }

    fn play(s: &mut GameState, u: usize, v: usize) {
        let p = s.mover();
        s.play(Move::new(u, v, p)).unwrap();
    }

    fn kind_at(s: &GameState, v: usize) -> TypeKind {
        classify_component(s, &s.view_of(s.component_vertices(v))).unwrap().kind
    }

    #[test]
    fn opening_joins_two_isolated_vertices() {
        let s = game(6);
        let mut p = PlanarPlayer::new();
        let e = p.choose(&s).unwrap();
        assert_eq!(e, (0, 1));
        let mut s = s;
        play(&mut s, e.0, e.1);
        assert_eq!(kind_at(&s, 0), TypeKind::Type2);
        self_check(&s, p.memory().unwrap()).unwrap();
    }

    #[test]
    fn two_type2_joined_becomes_type2() {
        // planar is B: A plays 0-1, B replies 2-3 (two type 2 edges), A joins 1-2.
        let mut s = game(8);
        let mut p = PlanarPlayer::new();
        play(&mut s, 0, 1);
        let e = p.choose(&s).unwrap();
        assert_eq!(e, (2, 3));
        play(&mut s, e.0, e.1);
        play(&mut s, 1, 2);
        let e = p.choose(&s).unwrap();
        // touched side of C = {1}, untouched side of C' = {3}
        assert_eq!(e, (1, 3));
        play(&mut s, e.0, e.1);
        let c = classify_component(&s, &s.view_of(s.component_vertices(0))).unwrap();
        assert_eq!(c.kind, TypeKind::Type2);
        assert_eq!(c.witness_bridges, vec![(0, 1)]);
        assert!(check_condition_t(&s).holds);
        self_check(&s, p.memory().unwrap()).unwrap();
    }

    #[test]
    fn free_move_joins_type1_to_type2_into_type3a() {
        // A triangle (deficit 3) and a single edge, nothing else positive.
        let mut s = game(5);
        for (u, v) in [(0, 1), (1, 2), (0, 2), (3, 4)] {
            play(&mut s, u, v);
        }
        let mut checker = ConditionTChecker::new();
        let e = free_move(&s, &mut checker).unwrap();
        play(&mut s, e.0, e.1);
        assert_eq!(kind_at(&s, 0), TypeKind::Type3a);
        assert!(check_condition_t(&s).holds);
    }

    #[test]
    fn corrupted_memory_is_detected() {
        let mut s = game(8);
        let mut p = PlanarPlayer::new();
        let e = p.choose(&s).unwrap();
        play(&mut s, e.0, e.1);
        let mut m = p.memory().unwrap().clone();
        self_check(&s, &m).unwrap();
        m.type3_handle = Some(0);
        assert!(matches!(self_check(&s, &m), Err(StrategyError::MemoryMismatch(_))));
    }

    #[test]
    fn two_type3_is_a_precondition_violation() {
        let mut s = game(8);
        for (u, v) in [(0, 1), (1, 2), (3, 4), (4, 5)] {
            play(&mut s, u, v);
        }
        let mut checker = ConditionTChecker::new();
        let memory = PlanarMemory::snapshot(&s, &mut checker);
        let m = Move::new(2, 3, s.mover());
        assert!(matches!(dispatch_case(&memory, &m), Err(StrategyError::Precondition(_))));
    }
}
