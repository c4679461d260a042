//! Component types for the 3-game and the condition the planar player keeps.
//!
//! With `D` the deficit of a component:
//!
//! * Type 1: `D <= 3`.
//! * Type 2: a bridge whose two sides each have deficit 2 (so `D = 4`).
//! * Type 3a: bridges `e1`, `e2`; the side of `e1` away from `e2` and the side
//!   of `e2` away from `e1` have deficit 2, the middle part deficit 1 (`D = 5`).
//! * Type 3b: bridges `e1`, `e2`, `e3` with `e1`, `e3` on different sides of
//!   `e2`; outer parts deficit 2, both middle parts deficit 1 (`D = 6`).
//!
//! Since the deficit alone decides which type can apply, precedence never has
//! to break a tie between types; it only fixes which witnesses are reported.
//! Witnesses are lexicographically least among valid choices.
//!
//! A component can be drawn with its positive-deficit vertices on the outer
//! face iff adding one apex adjacent to all of them keeps it planar.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::game::{ComponentView, GameState, Partition};
use crate::graph::{DfsTree, LocalGraph};
use crate::planarity::is_planar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TypeKind {
    #[serde(rename = "1")]
    Type1,
    #[serde(rename = "2")]
    Type2,
    #[serde(rename = "3a")]
    Type3a,
    #[serde(rename = "3b")]
    Type3b,
    #[serde(rename = "-")]
    Unclassified,
}

impl TypeKind {
    pub fn label(self) -> &'static str {
        match self {
            TypeKind::Type1 => "1",
            TypeKind::Type2 => "2",
            TypeKind::Type3a => "3a",
            TypeKind::Type3b => "3b",
            TypeKind::Unclassified => "-",
        }
    }

    pub fn is_type3(self) -> bool {
        matches!(self, TypeKind::Type3a | TypeKind::Type3b)
    }
}

impl fmt::Display for TypeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// A piece of a component after deleting its witness bridges.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Part {
    pub vertices: Vec<usize>,
    pub deficit: usize,
}

/// Type of a component with its witnesses.
///
/// `parts` follows the naming of the type definitions: for Type 2 the side
/// containing `witness_bridges[0].0` comes first; for Type 3a the parts are
/// `C0, C1, C2` and for Type 3b `C0, C1, C2, C3`, outer parts at the ends.
/// Type 1 has the whole component as its only part; Unclassified has none.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TypeClassification {
    pub kind: TypeKind,
    pub witness_bridges: Vec<(usize, usize)>,
    pub parts: Vec<Part>,
}

impl TypeClassification {
    /// Index of the part containing `v`.
    pub fn part_of(&self, v: usize) -> Option<usize> {
        self.parts.iter().position(|p| p.vertices.binary_search(&v).is_ok())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ClassifyError {
    #[error("vertex set {0:?}... is not a connected component of the state")]
    NotAComponent(Vec<usize>),
}

/// Classifies `comp`, which must be a component of `state`.
pub fn classify_component(state: &GameState, comp: &ComponentView) -> Result<TypeClassification, ClassifyError> {
    let vs = &comp.vertices;
    let not_component = || ClassifyError::NotAComponent(vs.iter().copied().take(8).collect());
    if vs.is_empty() || vs.windows(2).any(|w| w[0] >= w[1]) || *vs.last().unwrap() >= state.n() {
        return Err(not_component());
    }
    if state.component_size(vs[0]) != vs.len() || !vs.iter().all(|&v| state.same_component(v, vs[0])) {
        return Err(not_component());
    }
    Ok(classify_vertices(state, vs))
}

/// Classification of the component with the given sorted vertex list.
pub(crate) fn classify_vertices(state: &GameState, vs: &[usize]) -> TypeClassification {
    let def: Vec<usize> = vs.iter().map(|&v| state.deficit_of(v)).collect();
    let local = LocalGraph::induced(state, vs);
    classify_local(&local, &def, vs)
}

/// Classification of a connected local graph with per-vertex deficits.
/// `names` maps local indices to the vertex ids used in the result.
pub fn classify_local(g: &LocalGraph, def: &[usize], names: &[usize]) -> TypeClassification {
    let total: usize = def.iter().sum();
    if total <= 3 {
        let mut all = names.to_vec();
        all.sort_unstable();
        return TypeClassification {
            kind: TypeKind::Type1,
            witness_bridges: Vec::new(),
            parts: vec![Part {
                vertices: all,
                deficit: total,
            }],
        };
    }
    if total > 6 {
        return unclassified();
    }
    let tree = g.dfs_tree();
    let bridges = BridgeIndex::new(&tree, def, names);
    let witness = match total {
        4 => bridges.type2(),
        5 => bridges.type3a(),
        6 => bridges.type3b(),
        _ => unreachable!(),
    };
    let Some((kind, local_edges)) = witness else {
        return unclassified();
    };
    let (label, count) = g.components_without(&local_edges);
    let mut sets = vec![Vec::new(); count];
    let mut sums = vec![0; count];
    for (i, &l) in label.iter().enumerate() {
        sets[l].push(names[i]);
        sums[l] += def[i];
    }
    let order: Vec<usize> = match kind {
        TypeKind::Type2 => {
            let (a, b) = local_edges[0];
            vec![label[a], label[b]]
        }
        _ => {
            // Consecutive witness bridges share exactly one piece; walk the chain.
            let mut chain = Vec::new();
            for w in local_edges.windows(2) {
                let (a, b) = (label[w[0].0], label[w[0].1]);
                let (c, d) = (label[w[1].0], label[w[1].1]);
                let shared = if a == c || a == d { a } else { b };
                let outer = if shared == a { b } else { a };
                if chain.is_empty() {
                    chain.push(outer);
                }
                chain.push(shared);
            }
            let (c, d) = *local_edges.last().map(|&(x, y)| (label[x], label[y])).as_ref().unwrap();
            chain.push(if c == *chain.last().unwrap() { d } else { c });
            chain
        }
    };
    let parts = order
        .into_iter()
        .map(|l| {
            let mut vertices = std::mem::take(&mut sets[l]);
            vertices.sort_unstable();
            Part {
                vertices,
                deficit: sums[l],
            }
        })
        .collect();
    let witness_bridges = local_edges
        .iter()
        .map(|&(a, b)| {
            let (x, y) = (names[a], names[b]);
            (x.min(y), x.max(y))
        })
        .collect();
    TypeClassification {
        kind,
        witness_bridges,
        parts,
    }
}

fn unclassified() -> TypeClassification {
    TypeClassification {
        kind: TypeKind::Unclassified,
        witness_bridges: Vec::new(),
        parts: Vec::new(),
    }
}

/// Bridges of a DFS tree, each seen as (child endpoint, subtree deficit), with
/// the canonical global name used for lexicographic ordering.
struct BridgeIndex<'a> {
    tree: &'a DfsTree,
    total: usize,
    /// (global name, child local index, parent local index, subtree deficit), sorted by name.
    items: Vec<((usize, usize), usize, usize, usize)>,
}

impl<'a> BridgeIndex<'a> {
    fn new(tree: &'a DfsTree, def: &[usize], names: &[usize]) -> Self {
        let n = def.len();
        let mut sub = def.to_vec();
        for &v in tree.order.iter().rev() {
            let p = tree.parent[v];
            if p != usize::MAX {
                sub[p] += sub[v];
            }
        }
        let child_of = |a: usize, b: usize| if tree.parent[b] == a { b } else { a };
        let mut items: Vec<_> = tree
            .bridges
            .iter()
            .map(|&(a, b)| {
                let c = child_of(a, b);
                let p = tree.parent[c];
                let (x, y) = (names[a], names[b]);
                ((x.min(y), x.max(y)), c, p, sub[c])
            })
            .collect();
        items.sort_unstable();
        debug_assert!(items.iter().all(|it| it.1 < n));
        BridgeIndex {
            tree,
            total: sub[tree.order[0]],
            items,
        }
    }

    fn local(&self, i: usize) -> (usize, usize) {
        let it = &self.items[i];
        (it.2, it.1)
    }

    /// Is bridge `j` inside the subtree hanging below bridge `i`?
    fn below(&self, j: usize, i: usize) -> bool {
        self.tree.in_subtree(self.items[i].1, self.items[j].1) && i != j
    }

    /// Deficit of the side of bridge `i` that does not contain bridge `j`.
    fn away(&self, i: usize, j: usize) -> usize {
        if self.below(j, i) {
            self.total - self.items[i].3
        } else {
            self.items[i].3
        }
    }

    fn type2(&self) -> Option<(TypeKind, Vec<(usize, usize)>)> {
        let i = self.items.iter().position(|it| it.3 == 2)?;
        Some((TypeKind::Type2, vec![self.local(i)]))
    }

    fn type3a(&self) -> Option<(TypeKind, Vec<(usize, usize)>)> {
        let cand: Vec<usize> = (0..self.items.len())
            .filter(|&i| self.items[i].3 == 2 || self.items[i].3 == 3)
            .collect();
        for (x, &i) in cand.iter().enumerate() {
            for &j in &cand[x + 1..] {
                if self.away(i, j) == 2 && self.away(j, i) == 2 {
                    return Some((TypeKind::Type3a, vec![self.local(i), self.local(j)]));
                }
            }
        }
        None
    }

    fn type3b(&self) -> Option<(TypeKind, Vec<(usize, usize)>)> {
        let mut best: Option<(usize, usize, usize)> = None;
        for m in 0..self.items.len() {
            if self.items[m].3 != 3 {
                continue;
            }
            let mut below = None;
            let mut above = None;
            for i in 0..self.items.len() {
                if i == m || self.away(i, m) != 2 {
                    continue;
                }
                let slot = if self.below(i, m) { &mut below } else { &mut above };
                if slot.is_none() {
                    *slot = Some(i);
                }
                if below.is_some() && above.is_some() {
                    break;
                }
            }
            if let (Some(a), Some(b)) = (below, above) {
                let t = (a.min(b), m, a.max(b));
                if best.is_none_or(|cur| t < cur) {
                    best = Some(t);
                }
            }
        }
        let (a, m, b) = best?;
        Some((TypeKind::Type3b, vec![self.local(a), self.local(m), self.local(b)]))
    }
}

/// Is the graph plus one apex adjacent to every vertex of `special` planar?
/// Vertex ids are arbitrary; they are compacted internally.
pub fn apex_planar(edges: &[(usize, usize)], special: &[usize]) -> bool {
    let mut ids: Vec<usize> = edges.iter().flat_map(|&(a, b)| [a, b]).chain(special.iter().copied()).collect();
    ids.sort_unstable();
    ids.dedup();
    let idx = |v: usize| ids.binary_search(&v).unwrap();
    let apex = ids.len();
    let mut local: Vec<(usize, usize)> = edges.iter().map(|&(a, b)| (idx(a), idx(b))).collect();
    local.extend(special.iter().map(|&s| (idx(s), apex)));
    is_planar(&local, apex + 1)
}

/// Apex test for the component on sorted vertex list `vs`.
pub(crate) fn component_apex_planar(state: &GameState, vs: &[usize]) -> bool {
    let special = vs.iter().filter(|&&v| state.deficit_of(v) > 0).count();
    // Fewer than five vertices with the apex, or a tree plus an apex of small
    // degree, cannot be nonplanar; skip the test for the tiny cases.
    if vs.len() + 1 < 5 {
        return true;
    }
    let apex = vs.len();
    let mut edges = Vec::with_capacity(state.component_edge_count(vs[0]) + special);
    for (i, &v) in vs.iter().enumerate() {
        for w in state.neighbors(v) {
            if w > v {
                edges.push((i, vs.binary_search(&w).expect("component is closed")));
            }
        }
        if state.deficit_of(v) > 0 {
            edges.push((i, apex));
        }
    }
    is_planar(&edges, apex + 1)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComponentReport {
    pub component: ComponentView,
    pub classification: TypeClassification,
    pub apex_planar: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConditionTReport {
    pub holds: bool,
    pub per_component: Vec<ComponentReport>,
    pub type3_count: usize,
    pub failure_reason: Option<String>,
}

/// Full check of the condition on every component of `state`.
pub fn check_condition_t(state: &GameState) -> ConditionTReport {
    let per_component: Vec<ComponentReport> = state
        .components()
        .into_iter()
        .map(|c| {
            let classification = classify_vertices(state, &c.vertices);
            let apex_planar = component_apex_planar(state, &c.vertices);
            ComponentReport {
                component: c,
                classification,
                apex_planar,
            }
        })
        .collect();
    let kinds: Vec<(usize, TypeKind, bool)> = per_component
        .iter()
        .map(|r| (r.component.id(), r.classification.kind, r.apex_planar))
        .collect();
    let (holds, type3_count, failure_reason) = verdict(&kinds);
    ConditionTReport {
        holds,
        per_component,
        type3_count,
        failure_reason,
    }
}

fn verdict(kinds: &[(usize, TypeKind, bool)]) -> (bool, usize, Option<String>) {
    let type3_count = kinds.iter().filter(|k| k.1.is_type3()).count();
    let reason = if let Some(k) = kinds.iter().find(|k| k.1 == TypeKind::Unclassified) {
        Some(format!("component {} is unclassified", k.0))
    } else if let Some(k) = kinds.iter().find(|k| !k.2) {
        Some(format!(
            "component {} cannot be drawn with its positive-deficit vertices on the outer face",
            k.0
        ))
    } else if type3_count > 1 {
        Some(format!("{type3_count} components of type 3"))
    } else {
        None
    };
    (reason.is_none(), type3_count, reason)
}

/// Compact verdict from [`ConditionTChecker::check`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConditionTSummary {
    pub holds: bool,
    pub type3_count: usize,
    pub failure_reason: Option<String>,
}

type CacheKey = (usize, usize, usize);

/// Incremental checker for the states of one game.
///
/// Edges are only ever added, so within a single game a component is
/// determined by its smallest vertex, its size and its edge count; results are
/// cached under that key. Do not share one checker between games.
#[derive(Debug, Default)]
pub struct ConditionTChecker {
    /// (smallest vertex, size, edge count) to (classification, apex verdict, last use).
    cache: HashMap<CacheKey, (Arc<TypeClassification>, bool, u64)>,
    /// Isolated vertices are classified once each, outside the map.
    singletons: Vec<Option<Arc<TypeClassification>>>,
    generation: u64,
}

impl ConditionTChecker {
    pub fn new() -> Self {
        Self::default()
    }

    /// Classification and apex verdict for the component containing `v`.
    pub fn component(&mut self, state: &GameState, v: usize) -> (Arc<TypeClassification>, bool) {
        let vs = state.component_vertices(v);
        self.lookup(state, &vs)
    }

    fn lookup(&mut self, state: &GameState, vs: &[usize]) -> (Arc<TypeClassification>, bool) {
        if vs.len() == 1 {
            let v = vs[0];
            if self.singletons.len() < state.n() {
                self.singletons.resize(state.n(), None);
            }
            let c = self.singletons[v].get_or_insert_with(|| Arc::new(classify_vertices(state, vs)));
            return (c.clone(), true);
        }
        let key = (vs[0], vs.len(), state.component_edge_count(vs[0]));
        let generation = self.generation;
        if let Some(hit) = self.cache.get_mut(&key) {
            hit.2 = generation;
            return (hit.0.clone(), hit.1);
        }
        let c = Arc::new(classify_vertices(state, vs));
        let a = component_apex_planar(state, vs);
        self.cache.insert(key, (c.clone(), a, generation));
        (c, a)
    }

    /// Classification of every component, ordered by smallest vertex.
    pub fn classify_all(&mut self, state: &GameState) -> Vec<(Arc<TypeClassification>, bool)> {
        self.classify_partition(state, &state.component_partition())
    }

    /// As [`ConditionTChecker::classify_all`], for a partition already at hand.
    pub fn classify_partition(
        &mut self,
        state: &GameState,
        parts: &Partition,
    ) -> Vec<(Arc<TypeClassification>, bool)> {
        self.generation += 1;
        let out = parts.iter().map(|vs| self.lookup(state, vs)).collect();
        let g = self.generation;
        if self.cache.len() > 4 * state.n() + 64 {
            self.cache.retain(|_, e| e.2 == g);
        }
        out
    }

    pub fn check(&mut self, state: &GameState) -> ConditionTSummary {
        let parts = state.component_partition();
        let all = self.classify_partition(state, &parts);
        let kinds: Vec<(usize, TypeKind, bool)> =
            parts.iter().zip(&all).map(|(vs, (c, a))| (vs[0], c.kind, *a)).collect();
        let (holds, type3_count, failure_reason) = verdict(&kinds);
        ConditionTSummary {
            holds,
            type3_count,
            failure_reason,
        }
    }
}
