//! Planarity testing, clique-minor certificates and brute-force minor search.
//!
//! [`is_planar`] is the left-right planarity test (Brandes' formulation of
//! the de Fraysseix–Rosenstiehl criterion) in its test-only form: a DFS
//! orientation pass computing lowpoints and nesting depths, followed by a
//! testing pass that maintains the stack of conflict pairs. Both passes are
//! iterative so deep DFS trees on large boards do not exhaust the stack.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

const NONE: usize = usize::MAX;

/// Returns true iff the simple graph on `n` vertices with the given edges is
/// planar. Self-loops and repeated pairs are ignored.
pub fn is_planar(edges: &[(usize, usize)], n: usize) -> bool {
    let mut simple: Vec<(usize, usize)> = edges
        .iter()
        .filter(|(a, b)| a != b)
        .map(|&(a, b)| (a.min(b), a.max(b)))
        .collect();
    simple.sort_unstable();
    simple.dedup();
    if let Some(&(_, hi)) = simple.iter().max_by_key(|e| e.1) {
        assert!(hi < n, "edge endpoint {hi} out of range for n = {n}");
    }
    if n >= 3 && simple.len() > 3 * n - 6 {
        return false;
    }
    if n < 5 {
        return true;
    }
    LeftRight::new(n, &simple).run()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Interval {
    low: usize,
    high: usize,
}

impl Interval {
    const EMPTY: Interval = Interval {
        low: NONE,
        high: NONE,
    };

    fn is_empty(&self) -> bool {
        self.low == NONE && self.high == NONE
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct ConflictPair {
    left: Interval,
    right: Interval,
}

impl ConflictPair {
    fn swap(&mut self) {
        std::mem::swap(&mut self.left, &mut self.right);
    }
}

/// Adjacency lists of all vertices in one buffer; `start[v]..start[v + 1]`
/// indexes the entries of `v`.
struct Csr<T> {
    start: Vec<usize>,
    items: Vec<T>,
}

impl<T: Copy + Default> Csr<T> {
    /// Buckets `(key, item)` pairs by key, keeping their order within a key.
    fn build(n: usize, pairs: impl Iterator<Item = (usize, T)> + Clone) -> Self {
        let mut start = vec![0usize; n + 1];
        for (k, _) in pairs.clone() {
            start[k + 1] += 1;
        }
        for v in 0..n {
            start[v + 1] += start[v];
        }
        let mut fill = start.clone();
        let mut items = vec![T::default(); start[n]];
        for (k, x) in pairs {
            items[fill[k]] = x;
            fill[k] += 1;
        }
        Csr { start, items }
    }

    fn row(&self, v: usize) -> &[T] {
        &self.items[self.start[v]..self.start[v + 1]]
    }

    fn row_mut(&mut self, v: usize) -> &mut [T] {
        &mut self.items[self.start[v]..self.start[v + 1]]
    }

    fn len(&self) -> usize {
        self.start.len() - 1
    }
}

struct LeftRight {
    adj: Csr<(usize, usize)>,
    src: Vec<usize>,
    dst: Vec<usize>,
    height: Vec<usize>,
    parent_edge: Vec<usize>,
    lowpt: Vec<usize>,
    lowpt2: Vec<usize>,
    nesting: Vec<usize>,
    ordered: Csr<usize>,
    lowpt_edge: Vec<usize>,
    refs: Vec<usize>,
    stack_bottom: Vec<Option<ConflictPair>>,
    stack: Vec<ConflictPair>,
    roots: Vec<usize>,
}

impl LeftRight {
    fn new(n: usize, edges: &[(usize, usize)]) -> Self {
        let m = edges.len();
        let adj = Csr::build(
            n,
            edges
                .iter()
                .enumerate()
                .flat_map(|(id, &(a, b))| [(a, (b, id)), (b, (a, id))]),
        );
        LeftRight {
            adj,
            src: vec![NONE; m],
            dst: vec![NONE; m],
            height: vec![NONE; n],
            parent_edge: vec![NONE; n],
            lowpt: vec![0; m],
            lowpt2: vec![0; m],
            nesting: vec![0; m],
            ordered: Csr {
                start: Vec::new(),
                items: Vec::new(),
            },
            lowpt_edge: vec![NONE; m],
            refs: vec![NONE; m],
            stack_bottom: vec![None; m],
            stack: Vec::new(),
            roots: Vec::new(),
        }
    }

    fn run(mut self) -> bool {
        let n = self.adj.len();
        for v in 0..n {
            if self.height[v] == NONE {
                self.height[v] = 0;
                self.roots.push(v);
                self.orient(v);
            }
        }
        let src = &self.src;
        self.ordered = Csr::build(n, (0..src.len()).map(|e| (src[e], e)));
        for v in 0..n {
            let nesting = &self.nesting;
            self.ordered.row_mut(v).sort_by_key(|&e| nesting[e]);
        }
        let roots = std::mem::take(&mut self.roots);
        roots.into_iter().all(|r| self.test(r))
    }

    fn orient(&mut self, root: usize) {
        let n = self.adj.len();
        let mut next = vec![0usize; n];
        let mut resumed = vec![false; self.src.len()];
        let mut stack = vec![root];
        while let Some(&v) = stack.last() {
            let e = self.parent_edge[v];
            let mut descended = false;
            while next[v] < self.adj.row(v).len() {
                let (w, vw) = self.adj.row(v)[next[v]];
                if !resumed[vw] {
                    if self.src[vw] != NONE {
                        next[v] += 1;
                        continue;
                    }
                    self.src[vw] = v;
                    self.dst[vw] = w;
                    self.lowpt[vw] = self.height[v];
                    self.lowpt2[vw] = self.height[v];
                    if self.height[w] == NONE {
                        self.parent_edge[w] = vw;
                        self.height[w] = self.height[v] + 1;
                        resumed[vw] = true;
                        stack.push(w);
                        descended = true;
                        break;
                    }
                    self.lowpt[vw] = self.height[w];
                }
                self.nesting[vw] = 2 * self.lowpt[vw] + usize::from(self.lowpt2[vw] < self.height[v]);
                if e != NONE {
                    if self.lowpt[vw] < self.lowpt[e] {
                        self.lowpt2[e] = self.lowpt[e].min(self.lowpt2[vw]);
                        self.lowpt[e] = self.lowpt[vw];
                    } else if self.lowpt[vw] > self.lowpt[e] {
                        self.lowpt2[e] = self.lowpt2[e].min(self.lowpt[vw]);
                    } else {
                        self.lowpt2[e] = self.lowpt2[e].min(self.lowpt2[vw]);
                    }
                }
                next[v] += 1;
            }
            if !descended {
                stack.pop();
            }
        }
    }

    fn conflicting(&self, iv: Interval, b: usize) -> bool {
        !iv.is_empty() && self.lowpt[iv.high] > self.lowpt[b]
    }

    fn lowest(&self, p: &ConflictPair) -> usize {
        if p.left.is_empty() {
            return self.lowpt[p.right.low];
        }
        if p.right.is_empty() {
            return self.lowpt[p.left.low];
        }
        self.lowpt[p.left.low].min(self.lowpt[p.right.low])
    }

    fn set_ref(&mut self, at: usize, to: usize) {
        if at != NONE {
            self.refs[at] = to;
        }
    }

    fn test(&mut self, root: usize) -> bool {
        let n = self.adj.len();
        let mut next = vec![0usize; n];
        let mut resumed = vec![false; self.src.len()];
        let mut stack = vec![root];
        while let Some(v) = stack.pop() {
            let e = self.parent_edge[v];
            let mut descended = false;
            while next[v] < self.ordered.row(v).len() {
                let ei = self.ordered.row(v)[next[v]];
                let w = self.dst[ei];
                if !resumed[ei] {
                    self.stack_bottom[ei] = self.stack.last().copied();
                    if ei == self.parent_edge[w] {
                        resumed[ei] = true;
                        stack.push(v);
                        stack.push(w);
                        descended = true;
                        break;
                    }
                    self.lowpt_edge[ei] = ei;
                    self.stack.push(ConflictPair {
                        left: Interval::EMPTY,
                        right: Interval { low: ei, high: ei },
                    });
                }
                if self.lowpt[ei] < self.height[v] {
                    if ei == self.ordered.row(v)[0] {
                        self.lowpt_edge[e] = self.lowpt_edge[ei];
                    } else if !self.add_constraints(ei, e) {
                        return false;
                    }
                }
                next[v] += 1;
            }
            if !descended && e != NONE {
                self.remove_back_edges(e);
            }
        }
        true
    }

    fn add_constraints(&mut self, ei: usize, e: usize) -> bool {
        let mut p = ConflictPair {
            left: Interval::EMPTY,
            right: Interval::EMPTY,
        };
        while let Some(mut q) = self.stack.pop() {
            if !q.left.is_empty() {
                q.swap();
            }
            if !q.left.is_empty() {
                return false;
            }
            if self.lowpt[q.right.low] > self.lowpt[e] {
                if p.right.is_empty() {
                    p.right = q.right;
                } else {
                    self.set_ref(p.right.low, q.right.high);
                }
                p.right.low = q.right.low;
            } else {
                self.set_ref(q.right.low, self.lowpt_edge[e]);
            }
            if self.stack.last().copied() == self.stack_bottom[ei] {
                break;
            }
        }
        while let Some(&top) = self.stack.last() {
            if !(self.conflicting(top.left, ei) || self.conflicting(top.right, ei)) {
                break;
            }
            let mut q = self.stack.pop().expect("top exists");
            if self.conflicting(q.right, ei) {
                q.swap();
            }
            if self.conflicting(q.right, ei) {
                return false;
            }
            self.set_ref(p.right.low, q.right.high);
            if q.right.low != NONE {
                p.right.low = q.right.low;
            }
            if p.left.is_empty() {
                p.left = q.left;
            } else {
                self.set_ref(p.left.low, q.left.high);
            }
            p.left.low = q.left.low;
        }
        if !(p.left.is_empty() && p.right.is_empty()) {
            self.stack.push(p);
        }
        true
    }

    fn remove_back_edges(&mut self, e: usize) {
        let u = self.src[e];
        while let Some(top) = self.stack.last() {
            if self.lowest(top) == self.height[u] {
                self.stack.pop();
            } else {
                break;
            }
        }
        if let Some(mut p) = self.stack.pop() {
            while p.left.high != NONE && self.dst[p.left.high] == u {
                p.left.high = self.refs[p.left.high];
            }
            if p.left.high == NONE && p.left.low != NONE {
                self.refs[p.left.low] = p.right.low;
                p.left.low = NONE;
            }
            while p.right.high != NONE && self.dst[p.right.high] == u {
                p.right.high = self.refs[p.right.high];
            }
            if p.right.high == NONE && p.right.low != NONE {
                self.refs[p.right.low] = p.left.low;
                p.right.low = NONE;
            }
            self.stack.push(p);
        }
        if self.lowpt[e] < self.height[u] {
            if let Some(top) = self.stack.last() {
                let (hl, hr) = (top.left.high, top.right.high);
                self.refs[e] = if hl != NONE && (hr == NONE || self.lowpt[hl] > self.lowpt[hr]) {
                    hl
                } else {
                    hr
                };
            }
        }
    }
}

/// Branch sets witnessing a `K_target` minor.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BranchDecomposition {
    pub branch_sets: Vec<Vec<usize>>,
    pub target: usize,
}

/// True iff `bd` has `target` nonempty, pairwise disjoint branch sets, each
/// inducing a connected subgraph, with an edge between every pair of sets.
pub fn verify_minor_certificate(edges: &[(usize, usize)], bd: &BranchDecomposition) -> bool {
    let sets = &bd.branch_sets;
    if sets.len() != bd.target || sets.iter().any(Vec::is_empty) {
        return false;
    }
    let mut owner = std::collections::HashMap::new();
    for (i, set) in sets.iter().enumerate() {
        for &v in set {
            if owner.insert(v, i).is_some() {
                return false;
            }
        }
    }
    let t = sets.len();
    let mut inner: Vec<Vec<(usize, usize)>> = vec![Vec::new(); t];
    let mut joined = vec![vec![false; t]; t];
    for &(a, b) in edges {
        match (owner.get(&a), owner.get(&b)) {
            (Some(&i), Some(&j)) if i == j => inner[i].push((a, b)),
            (Some(&i), Some(&j)) => {
                joined[i][j] = true;
                joined[j][i] = true;
            }
            _ => {}
        }
    }
    for (i, set) in sets.iter().enumerate() {
        if !induces_connected(set, &inner[i]) {
            return false;
        }
    }
    (0..t).all(|i| (i + 1..t).all(|j| joined[i][j]))
}

fn induces_connected(set: &[usize], edges: &[(usize, usize)]) -> bool {
    let mut sorted = set.to_vec();
    sorted.sort_unstable();
    let idx = |v: usize| sorted.binary_search(&v).expect("edge inside set");
    let mut adj = vec![Vec::new(); sorted.len()];
    for &(a, b) in edges {
        adj[idx(a)].push(idx(b));
        adj[idx(b)].push(idx(a));
    }
    let mut seen = vec![false; sorted.len()];
    let mut stack = vec![0];
    seen[0] = true;
    let mut count = 1;
    while let Some(x) = stack.pop() {
        for &y in &adj[x] {
            if !seen[y] {
                seen[y] = true;
                count += 1;
                stack.push(y);
            }
        }
    }
    count == sorted.len()
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BruteForceError {
    #[error("instance too large for brute force: {vertices} vertices (max {max_vertices}), pattern order {order} (max {max_order})")]
    TooLarge {
        vertices: usize,
        max_vertices: usize,
        order: usize,
        max_order: usize,
    },
}

pub const BRUTE_FORCE_MAX_VERTICES: usize = 12;
pub const BRUTE_FORCE_MAX_CLIQUE: usize = 5;

/// Exhaustive `K_ell` minor test. Vertex count is taken from the largest
/// endpoint; at most 12 vertices and `ell <= 5`.
pub fn has_clique_minor_bruteforce(edges: &[(usize, usize)], ell: usize) -> Result<bool, BruteForceError> {
    let n = edges.iter().map(|&(a, b)| a.max(b) + 1).max().unwrap_or(0);
    has_clique_minor_bruteforce_n(edges, n, ell)
}

/// As [`has_clique_minor_bruteforce`] with an explicit vertex count.
pub fn has_clique_minor_bruteforce_n(
    edges: &[(usize, usize)],
    n: usize,
    ell: usize,
) -> Result<bool, BruteForceError> {
    if n > BRUTE_FORCE_MAX_VERTICES || ell > BRUTE_FORCE_MAX_CLIQUE {
        return Err(BruteForceError::TooLarge {
            vertices: n,
            max_vertices: BRUTE_FORCE_MAX_VERTICES,
            order: ell,
            max_order: BRUTE_FORCE_MAX_CLIQUE,
        });
    }
    let pattern: Vec<(usize, usize)> = (0..ell).flat_map(|a| (a + 1..ell).map(move |b| (a, b))).collect();
    Ok(has_minor_bruteforce(edges, n, ell, &pattern))
}

/// Exhaustive minor test for a small pattern graph `H` on `h` vertices.
///
/// `H` is a minor of `G` iff `H` is a subgraph of `G / P` for some partition
/// `P` of `V(G)` into connected parts. The search walks all such quotients by
/// repeated edge contraction (memoised on the contracted adjacency rows, which
/// are canonical for a given partition since a merged vertex keeps the lowest
/// position), and tests subgraph containment at each one.
pub fn has_minor_bruteforce(edges: &[(usize, usize)], n: usize, h: usize, pattern: &[(usize, usize)]) -> bool {
    assert!(n <= 16, "brute-force minor search is limited to 16 vertices");
    if h == 0 {
        return true;
    }
    let mut rows = vec![0u16; n];
    for &(a, b) in edges {
        if a != b {
            rows[a] |= 1 << b;
            rows[b] |= 1 << a;
        }
    }
    let mut hrows = vec![0u16; h];
    for &(a, b) in pattern {
        hrows[a] |= 1 << b;
        hrows[b] |= 1 << a;
    }
    let mut failed = HashSet::new();
    minor_search(rows, &hrows, pattern.len(), &mut failed)
}

fn minor_search(rows: Vec<u16>, h: &[u16], h_edges: usize, failed: &mut HashSet<Vec<u16>>) -> bool {
    let n = rows.len();
    if n < h.len() {
        return false;
    }
    let m = rows.iter().map(|r| r.count_ones() as usize).sum::<usize>() / 2;
    if m < h_edges {
        return false;
    }
    if contains_subgraph(&rows, h) {
        return true;
    }
    if n == h.len() {
        return false;
    }
    for a in 0..n {
        let mut nb = rows[a] & !((1u16 << (a + 1)) - 1);
        while nb != 0 {
            let b = nb.trailing_zeros() as usize;
            nb &= nb - 1;
            let child = contract(&rows, a, b);
            if failed.contains(&child) {
                continue;
            }
            if minor_search(child.clone(), h, h_edges, failed) {
                return true;
            }
            failed.insert(child);
        }
    }
    false
}

/// Contracts edge `a-b` (`a < b`): `b` merges into `a` and later indices shift down.
fn contract(rows: &[u16], a: usize, b: usize) -> Vec<u16> {
    let squeeze = |r: u16| -> u16 {
        let low = r & ((1u16 << b) - 1);
        let high = (r >> (b + 1)) << b;
        low | high
    };
    let mut out = Vec::with_capacity(rows.len() - 1);
    for (i, &r) in rows.iter().enumerate() {
        if i == b {
            continue;
        }
        let mut r = r;
        if i == a {
            r |= rows[b];
        }
        if r & (1 << b) != 0 {
            r |= 1 << a;
        }
        let mut r = squeeze(r);
        if i == a {
            r &= !(1 << a);
        }
        out.push(r);
    }
    out
}

/// Backtracking test for an injective homomorphism `H -> G` (not induced).
fn contains_subgraph(g: &[u16], h: &[u16]) -> bool {
    let mut map = vec![usize::MAX; h.len()];
    let mut used: u16 = 0;
    embed(g, h, 0, &mut map, &mut used)
}

fn embed(g: &[u16], h: &[u16], i: usize, map: &mut [usize], used: &mut u16) -> bool {
    if i == h.len() {
        return true;
    }
    let need = h[i].count_ones();
    for x in 0..g.len() {
        if *used & (1 << x) != 0 || g[x].count_ones() < need {
            continue;
        }
        let ok = (0..i).all(|j| h[i] & (1 << j) == 0 || g[x] & (1 << map[j]) != 0);
        if !ok {
            continue;
        }
        map[i] = x;
        *used |= 1 << x;
        if embed(g, h, i + 1, map, used) {
            return true;
        }
        *used &= !(1 << x);
    }
    false
}

/// Edges of `K_{3,3}` on vertices `0..6` (sides `{0,1,2}` and `{3,4,5}`).
pub fn k33_pattern() -> Vec<(usize, usize)> {
    (0..3).flat_map(|a| (3..6).map(move |b| (a, b))).collect()
}

/// Edges of the complete graph on `0..n`.
pub fn complete_graph(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn petersen() -> Vec<(usize, usize)> {
        let mut e = Vec::new();
        for i in 0..5 {
            e.push((i, (i + 1) % 5));
            e.push((i, i + 5));
            e.push((5 + i, 5 + (i + 2) % 5));
        }
        e
    }

    fn grid(w: usize, h: usize) -> Vec<(usize, usize)> {
        let mut e = Vec::new();
        for y in 0..h {
            for x in 0..w {
                let v = y * w + x;
                if x + 1 < w {
                    e.push((v, v + 1));
                }
                if y + 1 < h {
                    e.push((v, v + w));
                }
            }
        }
        e
    }

    #[test]
    fn kuratowski_graphs() {
        assert!(is_planar(&complete_graph(4), 4));
        assert!(!is_planar(&complete_graph(5), 5));
        assert!(!is_planar(&k33_pattern(), 6));
        assert!(!is_planar(&petersen(), 10));
        let mut k5_less = complete_graph(5);
        k5_less.pop();
        assert!(is_planar(&k5_less, 5));
    }

    #[test]
    fn large_planar_and_subdivided_obstructions() {
        let g = grid(100, 100);
        assert!(is_planar(&g, 10_000));
        // a long path then a K3,3 subdivision at the end
        let mut e: Vec<(usize, usize)> = (0..5000).map(|i| (i, i + 1)).collect();
        let base = 5001;
        for (a, b) in k33_pattern() {
            // subdivide every edge once
            let mid = base + 6 + e.len();
            e.push((base + a, mid));
            e.push((mid, base + b));
        }
        e.push((5000, base));
        let n = e.iter().map(|&(a, b)| a.max(b) + 1).max().unwrap();
        assert!(!is_planar(&e, n));
    }

    #[test]
    fn certificates() {
        let tri = BranchDecomposition {
            branch_sets: vec![vec![0], vec![1], vec![2]],
            target: 3,
        };
        assert!(verify_minor_certificate(&complete_graph(3), &tri));
        let p4 = vec![(0, 1), (1, 2), (2, 3)];
        for sets in [[0, 1, 2], [0, 1, 3], [0, 2, 3], [1, 2, 3]] {
            let bd = BranchDecomposition {
                branch_sets: sets.iter().map(|&v| vec![v]).collect(),
                target: 3,
            };
            assert!(!verify_minor_certificate(&p4, &bd));
        }
        // Petersen contracted along the spokes is K5.
        let bd = BranchDecomposition {
            branch_sets: (0..5).map(|i| vec![i, i + 5]).collect(),
            target: 5,
        };
        assert!(verify_minor_certificate(&petersen(), &bd));
        let overlapping = BranchDecomposition {
            branch_sets: vec![vec![0, 1], vec![1, 2]],
            target: 2,
        };
        assert!(!verify_minor_certificate(&complete_graph(3), &overlapping));
        let disconnected = BranchDecomposition {
            branch_sets: vec![vec![0, 2], vec![1]],
            target: 2,
        };
        assert!(!verify_minor_certificate(&[(0, 1), (1, 2)], &disconnected));
    }

    #[test]
    fn brute_force_examples() {
        assert!(has_clique_minor_bruteforce(&complete_graph(5), 5).unwrap());
        assert!(!has_clique_minor_bruteforce(&grid(3, 3), 5).unwrap());
        assert!(has_clique_minor_bruteforce(&k33_pattern(), 4).unwrap());
        assert!(!has_clique_minor_bruteforce(&k33_pattern(), 5).unwrap());
        assert!(has_clique_minor_bruteforce(&petersen(), 5).unwrap());
        assert!(matches!(
            has_clique_minor_bruteforce_n(&[], 13, 3),
            Err(BruteForceError::TooLarge { .. })
        ));
        assert!(matches!(
            has_clique_minor_bruteforce(&complete_graph(6), 6),
            Err(BruteForceError::TooLarge { .. })
        ));
        // Petersen has a K3,3 minor as well.
        assert!(has_minor_bruteforce(&petersen(), 10, 6, &k33_pattern()));
        assert!(!has_minor_bruteforce(&complete_graph(5), 5, 6, &k33_pattern()));
    }

    #[test]
    fn contraction_merges_neighbourhoods() {
        // path 0-1-2-3, contract 1-2 -> path on 3 vertices
        let rows = vec![0b0010, 0b0101, 0b1010, 0b0100];
        assert_eq!(contract(&rows, 1, 2), vec![0b010, 0b101, 0b010]);
    }
}
