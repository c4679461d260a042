//! Splitting a labeled tree into connected pieces of large label sum.
//!
//! For an edge `e` of a tree with label sums `a` and `b` on the two sides,
//! `e` is balanced when `1/Δ < a/b < Δ`. Starting from any edge, while the
//! current edge is unbalanced, step to the edge from the heavy endpoint into
//! its heaviest remaining branch; the light side only grows, so the walk ends
//! at a balanced edge provided the label sum exceeds `(Δ + 1)·b`.
//! Splitting at balanced edges `t` times yields `2^t` subtrees, each with at
//! least a `1/(Δ + 1)^t` share of the total.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// A tree on arbitrary vertex ids, with one label per node.
///
/// `max_degree` is the degree bound Δ used by the balance condition; it must
/// be at least 2 and at least the tree's own maximum degree.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledTree {
    pub nodes: Vec<usize>,
    pub edges: Vec<(usize, usize)>,
    /// `labels[i]` belongs to `nodes[i]`.
    pub labels: Vec<usize>,
    pub b: usize,
    pub max_degree: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SplitError {
    #[error("not a tree: {0}")]
    NotATree(String),
    #[error("label {label} at node {node} exceeds the bound {b}")]
    LabelOutOfRange { node: usize, label: usize, b: usize },
    #[error("precondition unmet: {0}")]
    Precondition(String),
    #[error("walk found no balanced edge after {0} steps")]
    WalkExhausted(usize),
    #[error("split produced a part of label sum {got} below the required {need}")]
    PartTooSmall { got: usize, need: usize },
}

/// Tree on local indices with labels, rooted at local 0.
struct Rooted {
    adj: Vec<Vec<usize>>,
    labels: Vec<usize>,
    parent: Vec<usize>,
    order: Vec<usize>,
    sub: Vec<usize>,
}

impl Rooted {
    fn new(adj: Vec<Vec<usize>>, labels: Vec<usize>) -> Self {
        let n = adj.len();
        let mut parent = vec![usize::MAX; n];
        let mut order = Vec::with_capacity(n);
        let mut seen = vec![false; n];
        if n > 0 {
            seen[0] = true;
            let mut stack = vec![0];
            while let Some(v) = stack.pop() {
                order.push(v);
                for &w in &adj[v] {
                    if !seen[w] {
                        seen[w] = true;
                        parent[w] = v;
                        stack.push(w);
                    }
                }
            }
        }
        let mut sub = labels.clone();
        for &v in order.iter().rev() {
            if parent[v] != usize::MAX {
                sub[parent[v]] += sub[v];
            }
        }
        Rooted {
            adj,
            labels,
            parent,
            order,
            sub,
        }
    }

    fn total(&self) -> usize {
        self.sub[0]
    }

    /// Label sum of the side of edge `{x, y}` containing `y`.
    fn branch(&self, x: usize, y: usize) -> usize {
        if self.parent[y] == x {
            self.sub[y]
        } else {
            self.total() - self.sub[x]
        }
    }

    fn balanced(&self, x: usize, y: usize, delta: usize) -> bool {
        let a = self.branch(x, y);
        let b = self.total() - a;
        let (lo, hi) = (a.min(b), a.max(b));
        lo * delta > hi
    }

    /// The walk; returns a balanced edge `(x, y)` in local indices.
    fn walk(&self, delta: usize) -> Result<(usize, usize), SplitError> {
        let start = *self.order.get(1).ok_or(SplitError::WalkExhausted(0))?;
        let (mut x, mut y) = (self.parent[start], start);
        for step in 0..self.adj.len() {
            if self.balanced(x, y, delta) {
                return Ok(self.refine(x, y));
            }
            // Orient so that y is the heavy endpoint, then step into its heaviest branch.
            if self.branch(x, y) < self.branch(y, x) {
                std::mem::swap(&mut x, &mut y);
            }
            let next = self.adj[y]
                .iter()
                .copied()
                .filter(|&z| z != x)
                .max_by_key(|&z| (self.branch(y, z), std::cmp::Reverse(z)));
            match next {
                Some(z) => {
                    x = y;
                    y = z;
                }
                None => return Err(SplitError::WalkExhausted(step + 1)),
            }
        }
        Err(SplitError::WalkExhausted(self.adj.len()))
    }

    /// Keeps walking towards the heavy side while that strictly improves the
    /// lighter side; on a path this ends at the most even edge.
    fn refine(&self, mut x: usize, mut y: usize) -> (usize, usize) {
        let lighter = |x: usize, y: usize| {
            let a = self.branch(x, y);
            a.min(self.total() - a)
        };
        loop {
            if self.branch(x, y) < self.branch(y, x) {
                std::mem::swap(&mut x, &mut y);
            }
            let next = self.adj[y]
                .iter()
                .copied()
                .filter(|&z| z != x)
                .max_by_key(|&z| (self.branch(y, z), std::cmp::Reverse(z)));
            match next {
                Some(z) if lighter(y, z) > lighter(x, y) => {
                    x = y;
                    y = z;
                }
                _ => return (x, y),
            }
        }
    }

    /// Edge maximising the lighter side.
    fn max_min_edge(&self) -> Option<(usize, usize)> {
        self.order
            .iter()
            .skip(1)
            .map(|&c| (self.parent[c], c))
            .max_by_key(|&(p, c)| {
                let a = self.sub[c];
                (a.min(self.total() - a), std::cmp::Reverse(c), p)
            })
    }
}

struct Indexed {
    ids: Vec<usize>,
    rooted: Rooted,
}

fn index(t: &LabeledTree) -> Result<Indexed, SplitError> {
    if t.nodes.is_empty() {
        return Err(SplitError::NotATree("no nodes".into()));
    }
    if t.labels.len() != t.nodes.len() {
        return Err(SplitError::NotATree(format!(
            "{} labels for {} nodes",
            t.labels.len(),
            t.nodes.len()
        )));
    }
    if t.edges.len() + 1 != t.nodes.len() {
        return Err(SplitError::NotATree(format!(
            "{} edges for {} nodes",
            t.edges.len(),
            t.nodes.len()
        )));
    }
    if t.max_degree < 2 {
        return Err(SplitError::Precondition("degree bound must be at least 2".into()));
    }
    let pos: HashMap<usize, usize> = t.nodes.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    if pos.len() != t.nodes.len() {
        return Err(SplitError::NotATree("repeated node".into()));
    }
    for (i, &l) in t.labels.iter().enumerate() {
        if l > t.b {
            return Err(SplitError::LabelOutOfRange {
                node: t.nodes[i],
                label: l,
                b: t.b,
            });
        }
    }
    let mut adj = vec![Vec::new(); t.nodes.len()];
    for &(a, b) in &t.edges {
        let (Some(&i), Some(&j)) = (pos.get(&a), pos.get(&b)) else {
            return Err(SplitError::NotATree(format!("edge ({a}, {b}) leaves the node set")));
        };
        if i == j {
            return Err(SplitError::NotATree(format!("self-loop at {a}")));
        }
        adj[i].push(j);
        adj[j].push(i);
    }
    if let Some(i) = adj.iter().position(|ns| ns.len() > t.max_degree) {
        return Err(SplitError::Precondition(format!(
            "node {} has degree {} above the bound {}",
            t.nodes[i],
            adj[i].len(),
            t.max_degree
        )));
    }
    let rooted = Rooted::new(adj, t.labels.clone());
    if rooted.order.len() != t.nodes.len() {
        return Err(SplitError::NotATree("disconnected".into()));
    }
    Ok(Indexed {
        ids: t.nodes.clone(),
        rooted,
    })
}

/// Smallest label sum for which a balanced edge is guaranteed to exist.
pub fn balanced_edge_guard(b: usize, max_degree: usize) -> usize {
    (max_degree + 1) * b + 1
}

/// Label sums `(side of a, side of b)` after removing tree edge `(a, b)`.
pub fn edge_sides(t: &LabeledTree, e: (usize, usize)) -> Result<(usize, usize), SplitError> {
    let ix = index(t)?;
    let find = |v: usize| ix.ids.iter().position(|&x| x == v);
    let (Some(a), Some(b)) = (find(e.0), find(e.1)) else {
        return Err(SplitError::Precondition(format!("{e:?} is not a tree edge")));
    };
    if !ix.rooted.adj[a].contains(&b) {
        return Err(SplitError::Precondition(format!("{e:?} is not a tree edge")));
    }
    let sb = ix.rooted.branch(a, b);
    Ok((ix.rooted.total() - sb, sb))
}

/// Finds an edge whose sides have label-sum ratio strictly inside `(1/Δ, Δ)`.
/// Requires a label sum above `(Δ + 1)·b`.
pub fn find_balanced_edge(t: &LabeledTree) -> Result<(usize, usize), SplitError> {
    let ix = index(t)?;
    let total = ix.rooted.total();
    let guard = balanced_edge_guard(t.b, t.max_degree);
    if total < guard {
        return Err(SplitError::Precondition(format!(
            "label sum {total} is below {guard} = (Δ+1)·b + 1"
        )));
    }
    let (x, y) = ix.rooted.walk(t.max_degree)?;
    debug_assert!(ix.rooted.balanced(x, y, t.max_degree));
    Ok((ix.ids[x], ix.ids[y]))
}

/// Splits `t` into `2^⌈log₂ count⌉` disjoint connected parts, each of label
/// sum at least `s`. Requires a label sum of at least `s·(Δ+1)^⌈log₂ count⌉`.
///
/// Splits use the balanced-edge walk while a part is above the walk's guard,
/// and otherwise the edge maximising the lighter side; every part is checked
/// against the per-level bound `s·(Δ+1)^r` (`r` levels remaining).
pub fn split_labeled_tree(t: &LabeledTree, s: usize, count: usize) -> Result<Vec<Vec<usize>>, SplitError> {
    if count == 0 {
        return Err(SplitError::Precondition("count must be at least 1".into()));
    }
    let ix = index(t)?;
    let depth = ceil_log2(count);
    let delta = t.max_degree;
    let need = s.saturating_mul((delta + 1).checked_pow(depth as u32).unwrap_or(usize::MAX));
    let total = ix.rooted.total();
    if total < need {
        return Err(SplitError::Precondition(format!(
            "label sum {total} is below s·(Δ+1)^t = {need}"
        )));
    }
    // Parts as local index lists into the original tree.
    let mut parts: Vec<Vec<usize>> = vec![(0..t.nodes.len()).collect()];
    for level in 0..depth {
        let remaining = depth - level - 1;
        let child_need = s * (delta + 1).pow(remaining as u32);
        let mut next = Vec::with_capacity(parts.len() * 2);
        for part in parts {
            let (a, b) = split_part(&ix.rooted, &part, t.b, delta)?;
            for side in [a, b] {
                let got: usize = side.iter().map(|&i| ix.rooted.labels[i]).sum();
                if got < child_need {
                    return Err(SplitError::PartTooSmall { got, need: child_need });
                }
                next.push(side);
            }
        }
        parts = next;
    }
    let parts: Vec<Vec<usize>> = parts
        .into_iter()
        .map(|p| {
            let mut ids: Vec<usize> = p.into_iter().map(|i| ix.ids[i]).collect();
            ids.sort_unstable();
            ids
        })
        .collect();
    debug_assert_eq!(check_split(t, &parts, s), Ok(()));
    Ok(parts)
}

/// Splits the connected sub-tree on `part` (local indices) into two halves.
fn split_part(full: &Rooted, part: &[usize], b: usize, delta: usize) -> Result<(Vec<usize>, Vec<usize>), SplitError> {
    let pos: HashMap<usize, usize> = part.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let adj: Vec<Vec<usize>> = part
        .iter()
        .map(|&v| full.adj[v].iter().filter_map(|w| pos.get(w).copied()).collect())
        .collect();
    let labels: Vec<usize> = part.iter().map(|&v| full.labels[v]).collect();
    let sub = Rooted::new(adj, labels);
    if sub.adj.len() < 2 {
        return Err(SplitError::PartTooSmall {
            got: sub.total(),
            need: sub.total() + 1,
        });
    }
    let (x, y) = if sub.total() >= balanced_edge_guard(b, delta) {
        sub.walk(delta)?
    } else {
        sub.max_min_edge().expect("part has an edge")
    };
    // Side containing y: flood from y without crossing {x, y}.
    let mut in_y = vec![false; sub.adj.len()];
    in_y[y] = true;
    let mut stack = vec![y];
    while let Some(v) = stack.pop() {
        for &w in &sub.adj[v] {
            if !in_y[w] && !(v == y && w == x) {
                in_y[w] = true;
                stack.push(w);
            }
        }
    }
    let (mut ys, mut xs) = (Vec::new(), Vec::new());
    for (i, &v) in part.iter().enumerate() {
        if in_y[i] {
            ys.push(v);
        } else {
            xs.push(v);
        }
    }
    Ok((xs, ys))
}

pub fn ceil_log2(count: usize) -> usize {
    let mut t = 0;
    while (1usize << t) < count {
        t += 1;
    }
    t
}

/// Checks that `parts` are pairwise disjoint node sets of `t`, each inducing a
/// connected subtree with label sum at least `s`.
pub fn check_split(t: &LabeledTree, parts: &[Vec<usize>], s: usize) -> Result<(), String> {
    let label: HashMap<usize, usize> = t.nodes.iter().copied().zip(t.labels.iter().copied()).collect();
    let mut owner: HashMap<usize, usize> = HashMap::new();
    for (i, p) in parts.iter().enumerate() {
        if p.is_empty() {
            return Err(format!("part {i} is empty"));
        }
        for &v in p {
            if !label.contains_key(&v) {
                return Err(format!("part {i} has foreign node {v}"));
            }
            if let Some(j) = owner.insert(v, i) {
                return Err(format!("node {v} in parts {j} and {i}"));
            }
        }
        let sum: usize = p.iter().map(|v| label[v]).sum();
        if sum < s {
            return Err(format!("part {i} has label sum {sum} < {s}"));
        }
    }
    // Connectivity: within a part, a subtree on k nodes has exactly k-1 inner edges.
    let mut inner = vec![0usize; parts.len()];
    for &(a, b) in &t.edges {
        if let (Some(&i), Some(&j)) = (owner.get(&a), owner.get(&b)) {
            if i == j {
                inner[i] += 1;
            }
        }
    }
    for (i, p) in parts.iter().enumerate() {
        if inner[i] + 1 != p.len() {
            return Err(format!("part {i} is not connected"));
        }
    }
    Ok(())
}
