//! Small graph utilities on compact (0-based, local) vertex indices.

use smallvec::SmallVec;

use crate::game::GameState;

/// Neighbour list; game graphs have degree at most `k`, so it rarely spills.
pub type Neighbors = SmallVec<[usize; 4]>;

/// A graph on local indices `0..len`, usually induced from a component.
#[derive(Debug, Clone, Default)]
pub struct LocalGraph {
    pub adj: Vec<Neighbors>,
}

impl LocalGraph {
    pub fn with_vertices(n: usize) -> Self {
        LocalGraph {
            adj: vec![Neighbors::new(); n],
        }
    }

    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Self {
        let mut g = LocalGraph::with_vertices(n);
        for &(a, b) in edges {
            g.add_edge(a, b);
        }
        g
    }

    /// Subgraph of `state` induced on the sorted vertex list `vertices`.
    pub fn induced(state: &GameState, vertices: &[usize]) -> Self {
        let mut g = LocalGraph::with_vertices(vertices.len());
        for (i, &v) in vertices.iter().enumerate() {
            for w in state.neighbors(v) {
                if let Ok(j) = vertices.binary_search(&w) {
                    g.adj[i].push(j);
                }
            }
        }
        g
    }

    pub fn add_edge(&mut self, a: usize, b: usize) {
        self.adj[a].push(b);
        self.adj[b].push(a);
    }

    pub fn len(&self) -> usize {
        self.adj.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adj.is_empty()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(|ns| ns.len()).sum::<usize>() / 2
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.edge_count());
        for (a, ns) in self.adj.iter().enumerate() {
            for &b in ns {
                if a < b {
                    out.push((a, b));
                }
            }
        }
        out
    }

    /// Bridges via one iterative depth-first lowpoint sweep. Assumes a simple
    /// graph, so skipping the parent vertex skips exactly the tree edge.
    pub fn bridges(&self) -> Vec<(usize, usize)> {
        self.dfs_tree().bridges
    }

    /// Depth-first forest with entry/exit times and lowpoints.
    pub fn dfs_tree(&self) -> DfsTree {
        const NONE: usize = usize::MAX;
        let n = self.adj.len();
        let mut t = DfsTree {
            parent: vec![NONE; n],
            tin: vec![NONE; n],
            tout: vec![0; n],
            low: vec![0; n],
            order: Vec::with_capacity(n),
            bridges: Vec::new(),
        };
        let mut timer = 0;
        let mut next = vec![0usize; n];
        for root in 0..n {
            if t.tin[root] != NONE {
                continue;
            }
            t.tin[root] = timer;
            t.low[root] = timer;
            timer += 1;
            t.order.push(root);
            let mut stack = vec![root];
            while let Some(&v) = stack.last() {
                if next[v] < self.adj[v].len() {
                    let w = self.adj[v][next[v]];
                    next[v] += 1;
                    if w == t.parent[v] {
                        continue;
                    }
                    if t.tin[w] == NONE {
                        t.parent[w] = v;
                        t.tin[w] = timer;
                        t.low[w] = timer;
                        timer += 1;
                        t.order.push(w);
                        stack.push(w);
                    } else {
                        t.low[v] = t.low[v].min(t.tin[w]);
                    }
                } else {
                    stack.pop();
                    t.tout[v] = timer - 1;
                    let p = t.parent[v];
                    if p != NONE {
                        t.low[p] = t.low[p].min(t.low[v]);
                        if t.low[v] > t.tin[p] {
                            t.bridges.push((p.min(v), p.max(v)));
                        }
                    }
                }
            }
        }
        t
    }

    /// Component label per vertex when the edges in `removed` are ignored.
    pub fn components_without(&self, removed: &[(usize, usize)]) -> (Vec<usize>, usize) {
        let skip = |a: usize, b: usize| {
            removed
                .iter()
                .any(|&(x, y)| (x == a && y == b) || (x == b && y == a))
        };
        let n = self.adj.len();
        let mut label = vec![usize::MAX; n];
        let mut count = 0;
        for s in 0..n {
            if label[s] != usize::MAX {
                continue;
            }
            label[s] = count;
            let mut stack = vec![s];
            while let Some(v) = stack.pop() {
                for &w in &self.adj[v] {
                    if label[w] == usize::MAX && !skip(v, w) {
                        label[w] = count;
                        stack.push(w);
                    }
                }
            }
            count += 1;
        }
        (label, count)
    }

    pub fn is_connected(&self) -> bool {
        self.adj.is_empty() || self.components_without(&[]).1 == 1
    }
}

/// Result of [`LocalGraph::dfs_tree`]. `tin`/`tout` give the subtree of `v`
/// as the interval of entry times `tin[v]..=tout[v]`.
#[derive(Debug, Clone)]
pub struct DfsTree {
    pub parent: Vec<usize>,
    pub tin: Vec<usize>,
    pub tout: Vec<usize>,
    pub low: Vec<usize>,
    /// Vertices in preorder.
    pub order: Vec<usize>,
    pub bridges: Vec<(usize, usize)>,
}

impl DfsTree {
    pub fn in_subtree(&self, root: usize, v: usize) -> bool {
        self.tin[root] <= self.tin[v] && self.tin[v] <= self.tout[root]
    }
}
