//! Rules of the k-regular graph game.
//!
//! Two players alternately add edges to an initially empty graph on `n`
//! vertices. An edge `{u, v}` is legal when `u` and `v` are distinct,
//! nonadjacent and both have degree at most `k - 1`. The game ends when no
//! legal pair remains; at that point the vertices of positive deficit are
//! pairwise adjacent, so there are at most `k` of them.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph;

/// Seat tag. Seat `A` is the first listed player of a match; which seat moves
/// first is decided by [`GameConfig::first_player`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Player {
    A,
    B,
}

impl Player {
    pub fn other(self) -> Player {
        match self {
            Player::A => Player::B,
            Player::B => Player::A,
        }
    }
}

impl fmt::Display for Player {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Player::A => "A",
            Player::B => "B",
        })
    }
}

impl FromStr for Player {
    type Err = GameError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "A" | "a" => Ok(Player::A),
            "B" | "b" => Ok(Player::B),
            other => Err(GameError::InvalidConfig(format!("unknown player tag {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GameConfig {
    pub k: usize,
    pub n: usize,
    #[serde(rename = "first")]
    pub first_player: Player,
    pub seed: u64,
}

impl GameConfig {
    pub fn new(n: usize, k: usize, first_player: Player, seed: u64) -> Self {
        GameConfig {
            k,
            n,
            first_player,
            seed,
        }
    }

    pub fn validate(&self) -> Result<(), GameError> {
        if self.n < 2 {
            return Err(GameError::InvalidConfig(format!(
                "vertex count must be at least 2, got {}",
                self.n
            )));
        }
        if self.k < 1 {
            return Err(GameError::InvalidConfig("degree cap must be at least 1".into()));
        }
        if self.n > u32::MAX as usize {
            return Err(GameError::InvalidConfig("vertex count too large".into()));
        }
        Ok(())
    }

    /// Upper bound on the number of moves of any game under this config.
    pub fn max_moves(&self) -> usize {
        self.k * self.n / 2
    }
}

/// A single edge placement. Endpoints are stored with `u < v`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Move {
    pub u: usize,
    pub v: usize,
    pub player: Player,
}

impl Move {
    pub fn new(a: usize, b: usize, player: Player) -> Move {
        let (u, v) = if a <= b { (a, b) } else { (b, a) };
        Move { u, v, player }
    }

    pub fn pair(&self) -> (usize, usize) {
        (self.u, self.v)
    }
}

impl fmt::Display for Move {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}-{}", self.player, self.u, self.v)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GameError {
    #[error("invalid game configuration: {0}")]
    InvalidConfig(String),
    #[error("vertex {vertex} out of range (n = {n})")]
    VertexOutOfRange { vertex: usize, n: usize },
    #[error("not {got}'s turn (mover is {expected})")]
    WrongPlayer { expected: Player, got: Player },
    #[error("self-loop at vertex {0}")]
    SelfLoop(usize),
    #[error("vertices {0} and {1} are already adjacent")]
    AlreadyAdjacent(usize, usize),
    #[error("vertex {0} is saturated")]
    Saturated(usize),
    #[error("the game is over")]
    GameOver,
}

impl GameError {
    /// Short machine-friendly reason used by the HTTP layer.
    pub fn reason(&self) -> &'static str {
        match self {
            GameError::InvalidConfig(_) => "invalid config",
            GameError::VertexOutOfRange { .. } => "out of range",
            GameError::WrongPlayer { .. } => "not your turn",
            GameError::SelfLoop(_) => "self-loop",
            GameError::AlreadyAdjacent(..) => "adjacent",
            GameError::Saturated(_) => "saturated",
            GameError::GameOver => "game over",
        }
    }
}

/// One connected component with its deficit and bridges.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComponentView {
    pub vertices: Vec<usize>,
    pub deficit: usize,
    pub edge_count: usize,
    pub bridges: Vec<(usize, usize)>,
}

impl ComponentView {
    /// Smallest member; used as the component identifier.
    pub fn id(&self) -> usize {
        self.vertices[0]
    }

    pub fn contains(&self, v: usize) -> bool {
        self.vertices.binary_search(&v).is_ok()
    }
}

/// Position of the game: the evolving graph plus whose turn it is.
///
/// Besides the adjacency lists the state keeps a union-find over the
/// components (components only ever merge) and the set of vertices that can
/// still receive an edge, so that termination and move sampling stay cheap on
/// large boards.
#[derive(Debug, Clone)]
pub struct GameState {
    config: GameConfig,
    /// `k` neighbour slots per vertex, the first `deg[v]` of them in use.
    nbr: Vec<u32>,
    deg: Vec<u32>,
    history: Vec<Move>,
    mover: Player,
    /// Bitset of positive-deficit vertices, for ordered scans.
    open_bits: Vec<u64>,
    open_list: Vec<u32>,
    open_pos: Vec<u32>,
    uf_parent: Vec<u32>,
    uf_size: Vec<u32>,
    uf_edges: Vec<u32>,
}

const NOT_OPEN: u32 = u32::MAX;

/// Vertex sets of all components, ordered by smallest member, each sorted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    start: Vec<usize>,
    items: Vec<usize>,
}

impl Partition {
    pub fn len(&self) -> usize {
        self.start.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get(&self, i: usize) -> &[usize] {
        &self.items[self.start[i]..self.start[i + 1]]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[usize]> + '_ {
        (0..self.len()).map(|i| self.get(i))
    }
}

/// Ascending scan of a vertex bitset.
struct OpenIter<'a> {
    bits: &'a [u64],
    word: usize,
    cur: u64,
}

impl Iterator for OpenIter<'_> {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        while self.cur == 0 {
            self.word += 1;
            self.cur = *self.bits.get(self.word)?;
        }
        let bit = self.cur.trailing_zeros() as usize;
        self.cur &= self.cur - 1;
        Some(64 * self.word + bit)
    }
}

pub fn new_game(config: GameConfig) -> Result<GameState, GameError> {
    GameState::new(config)
}

impl GameState {
    pub fn new(config: GameConfig) -> Result<GameState, GameError> {
        config.validate()?;
        let n = config.n;
        Ok(GameState {
            config,
            nbr: vec![0; n * config.k],
            deg: vec![0; n],
            history: Vec::new(),
            mover: config.first_player,
            open_bits: (0..n.div_ceil(64))
                .map(|i| if 64 * (i + 1) <= n { u64::MAX } else { (1u64 << (n % 64)) - 1 })
                .collect(),
            open_list: (0..n as u32).collect(),
            open_pos: (0..n as u32).collect(),
            uf_parent: (0..n as u32).collect(),
            uf_size: vec![1; n],
            uf_edges: vec![0; n],
        })
    }

    pub fn config(&self) -> &GameConfig {
        &self.config
    }

    pub fn n(&self) -> usize {
        self.config.n
    }

    pub fn k(&self) -> usize {
        self.config.k
    }

    pub fn mover(&self) -> Player {
        self.mover
    }

    /// Number of moves played so far (equal to the number of edges).
    pub fn turn(&self) -> usize {
        self.history.len()
    }

    pub fn history(&self) -> &[Move] {
        &self.history
    }

    pub fn last_move(&self) -> Option<&Move> {
        self.history.last()
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        self.history.iter().map(Move::pair).collect()
    }

    pub fn degree(&self, v: usize) -> usize {
        self.deg[v] as usize
    }

    fn nbr_slice(&self, v: usize) -> &[u32] {
        let k = self.config.k;
        &self.nbr[v * k..v * k + self.deg[v] as usize]
    }

    pub fn neighbors(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.nbr_slice(v).iter().map(|&w| w as usize)
    }

    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        (0..self.n()).map(|v| self.neighbors(v).collect()).collect()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.nbr_slice(u).contains(&(v as u32))
    }

    pub fn deficit(&self, v: usize) -> Result<usize, GameError> {
        self.check_vertex(v)?;
        Ok(self.deficit_of(v))
    }

    /// Deficit without the range check.
    pub(crate) fn deficit_of(&self, v: usize) -> usize {
        self.config.k - self.deg[v] as usize
    }

    pub fn total_deficit(&self) -> usize {
        self.config.k * self.n() - 2 * self.history.len()
    }

    /// Vertices of positive deficit, ascending.
    pub fn unsaturated(&self) -> impl Iterator<Item = usize> + '_ {
        OpenIter {
            bits: &self.open_bits,
            word: 0,
            cur: self.open_bits.first().copied().unwrap_or(0),
        }
    }

    /// Positive-deficit vertices greater than `v`, ascending.
    fn open_after(&self, v: usize) -> OpenIter<'_> {
        let next = v + 1;
        let word = next / 64;
        let cur = match self.open_bits.get(word) {
            Some(&w) if next.is_multiple_of(64) => w,
            Some(&w) => w & !((1u64 << (next % 64)) - 1),
            None => 0,
        };
        OpenIter {
            bits: &self.open_bits,
            word,
            cur,
        }
    }

    pub fn unsaturated_count(&self) -> usize {
        self.open_list.len()
    }

    /// Unsaturated vertex by position in an unordered index, for sampling.
    pub(crate) fn unsaturated_at(&self, i: usize) -> usize {
        self.open_list[i] as usize
    }

    fn check_vertex(&self, v: usize) -> Result<(), GameError> {
        if v >= self.config.n {
            Err(GameError::VertexOutOfRange {
                vertex: v,
                n: self.config.n,
            })
        } else {
            Ok(())
        }
    }

    /// Checks the edge rule only (not turn order).
    pub fn check_pair(&self, u: usize, v: usize) -> Result<(), GameError> {
        self.check_vertex(u)?;
        self.check_vertex(v)?;
        if u == v {
            return Err(GameError::SelfLoop(u));
        }
        if self.deficit_of(u) == 0 {
            return Err(GameError::Saturated(u));
        }
        if self.deficit_of(v) == 0 {
            return Err(GameError::Saturated(v));
        }
        if self.has_edge(u, v) {
            return Err(GameError::AlreadyAdjacent(u.min(v), u.max(v)));
        }
        Ok(())
    }

    pub fn is_legal(&self, u: usize, v: usize) -> bool {
        self.check_pair(u, v).is_ok()
    }

    /// All legal pairs in lexicographic order.
    pub fn legal_moves(&self) -> Vec<(usize, usize)> {
        let open: Vec<usize> = self.unsaturated().collect();
        let mut out = Vec::new();
        for (i, &u) in open.iter().enumerate() {
            for &v in &open[i + 1..] {
                if !self.has_edge(u, v) {
                    out.push((u, v));
                }
            }
        }
        out
    }

    /// Lexicographically least legal pair.
    pub fn first_legal_move(&self) -> Option<(usize, usize)> {
        for u in self.unsaturated() {
            // u has at most k-1 neighbours, so this inner scan is short.
            if let Some(v) = self.open_after(u).find(|&v| !self.has_edge(u, v)) {
                return Some((u, v));
            }
        }
        None
    }

    /// Lexicographically least legal pair with one endpoint in `from`.
    pub fn first_legal_move_from(&self, from: &[usize]) -> Option<(usize, usize)> {
        let mut best: Option<(usize, usize)> = None;
        for &u in from {
            if self.deficit_of(u) == 0 {
                continue;
            }
            for v in self.unsaturated() {
                if v != u && !self.has_edge(u, v) {
                    let p = (u.min(v), u.max(v));
                    if best.is_none_or(|b| p < b) {
                        best = Some(p);
                    }
                    break;
                }
            }
        }
        best
    }

    /// True iff no legal pair remains.
    pub fn is_over(&self) -> bool {
        let open = self.open_list.len();
        if open < 2 {
            return true;
        }
        // A positive-deficit vertex has at most k-1 neighbours, so more than k
        // of them cannot be pairwise adjacent.
        if open > self.config.k {
            return false;
        }
        self.first_legal_move().is_none()
    }

    /// Applies `m` to a copy of the state.
    pub fn apply_move(&self, m: Move) -> Result<GameState, GameError> {
        let mut next = self.clone();
        next.play(m)?;
        Ok(next)
    }

    /// Applies `m` in place.
    pub fn play(&mut self, m: Move) -> Result<(), GameError> {
        if m.player != self.mover {
            return Err(GameError::WrongPlayer {
                expected: self.mover,
                got: m.player,
            });
        }
        self.check_pair(m.u, m.v)?;
        let m = Move::new(m.u, m.v, m.player);
        let k = self.config.k;
        for (a, b) in [(m.u, m.v), (m.v, m.u)] {
            self.nbr[a * k + self.deg[a] as usize] = b as u32;
            self.deg[a] += 1;
        }
        for w in [m.u, m.v] {
            if self.deficit_of(w) == 0 {
                self.close(w);
            }
        }
        self.union(m.u, m.v);
        self.history.push(m);
        self.mover = self.mover.other();
        Ok(())
    }

    fn close(&mut self, w: usize) {
        self.open_bits[w / 64] &= !(1u64 << (w % 64));
        let pos = self.open_pos[w];
        debug_assert_ne!(pos, NOT_OPEN);
        let last = self.open_list.pop().expect("open list tracks open set");
        if last as usize != w {
            self.open_list[pos as usize] = last;
            self.open_pos[last as usize] = pos;
        }
        self.open_pos[w] = NOT_OPEN;
    }

    fn find(&self, v: usize) -> usize {
        let mut x = v;
        while self.uf_parent[x] as usize != x {
            x = self.uf_parent[x] as usize;
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let mut ra = self.find(a);
        let mut rb = self.find(b);
        if ra == rb {
            self.uf_edges[ra] += 1;
            return;
        }
        if self.uf_size[ra] < self.uf_size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.uf_parent[rb] = ra as u32;
        self.uf_size[ra] += self.uf_size[rb];
        self.uf_edges[ra] += self.uf_edges[rb] + 1;
    }

    /// Union-find representative of `v`'s component. Stable only between
    /// moves; use [`ComponentView::id`] for a identifier that survives.
    pub fn component_root(&self, v: usize) -> usize {
        self.find(v)
    }

    pub fn same_component(&self, u: usize, v: usize) -> bool {
        self.find(u) == self.find(v)
    }

    pub fn component_size(&self, v: usize) -> usize {
        self.uf_size[self.find(v)] as usize
    }

    pub fn component_edge_count(&self, v: usize) -> usize {
        self.uf_edges[self.find(v)] as usize
    }

    pub fn component_deficit(&self, v: usize) -> usize {
        let r = self.find(v);
        self.config.k * self.uf_size[r] as usize - 2 * self.uf_edges[r] as usize
    }

    /// Vertex lists of all components, each sorted, ordered by smallest member.
    pub fn component_vertex_sets(&self) -> Vec<Vec<usize>> {
        let n = self.config.n;
        let mut slot = vec![usize::MAX; n];
        let mut sets: Vec<Vec<usize>> = Vec::new();
        for v in 0..n {
            let r = self.find(v);
            if slot[r] == usize::MAX {
                slot[r] = sets.len();
                sets.push(Vec::with_capacity(self.uf_size[r] as usize));
            }
            sets[slot[r]].push(v);
        }
        sets
    }

    /// All components in one buffer: same order and contents as
    /// [`GameState::component_vertex_sets`], without a vector per component.
    pub fn component_partition(&self) -> Partition {
        let n = self.config.n;
        let mut slot = vec![usize::MAX; n];
        let mut start = vec![0usize];
        for v in 0..n {
            let r = self.find(v);
            if slot[r] == usize::MAX {
                slot[r] = start.len() - 1;
                start.push(start[start.len() - 1] + self.uf_size[r] as usize);
            }
        }
        let mut fill = start.clone();
        let mut items = vec![0usize; n];
        for v in 0..n {
            let s = slot[self.find(v)];
            items[fill[s]] = v;
            fill[s] += 1;
        }
        Partition { start, items }
    }

    /// Sorted vertex list of the component containing `v`.
    pub fn component_vertices(&self, v: usize) -> Vec<usize> {
        let size = self.component_size(v);
        if size <= 64 {
            // Small components: a linear membership test beats a mark array.
            let mut seen = vec![v];
            let mut i = 0;
            while i < seen.len() {
                let x = seen[i];
                for y in self.neighbors(x) {
                    if !seen.contains(&y) {
                        seen.push(y);
                    }
                }
                i += 1;
            }
            seen.sort_unstable();
            return seen;
        }
        let r = self.find(v);
        (0..self.n()).filter(|&w| self.find(w) == r).collect()
    }

    /// Full view (deficit, edge count, bridges) of the component on `vertices`.
    pub fn view_of(&self, vertices: Vec<usize>) -> ComponentView {
        let local = graph::LocalGraph::induced(self, &vertices);
        let bridges = local
            .bridges()
            .into_iter()
            .map(|(a, b)| {
                let (x, y) = (vertices[a], vertices[b]);
                (x.min(y), x.max(y))
            })
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let deficit = vertices.iter().map(|&v| self.deficit_of(v)).sum();
        ComponentView {
            edge_count: local.edge_count(),
            deficit,
            bridges,
            vertices,
        }
    }

    /// Connected components ordered by smallest member, bridges sorted.
    pub fn components(&self) -> Vec<ComponentView> {
        self.component_vertex_sets()
            .into_iter()
            .map(|vs| {
                if vs.len() == 1 {
                    ComponentView {
                        deficit: self.deficit_of(vs[0]),
                        vertices: vs,
                        edge_count: 0,
                        bridges: Vec::new(),
                    }
                } else {
                    self.view_of(vs)
                }
            })
            .collect()
    }
}

/// Free-function form of [`GameState::deficit`].
pub fn deficit(state: &GameState, v: usize) -> Result<usize, GameError> {
    state.deficit(v)
}

/// Free-function form of [`GameState::legal_moves`].
pub fn legal_moves(state: &GameState) -> Vec<(usize, usize)> {
    state.legal_moves()
}

/// Free-function form of [`GameState::apply_move`].
pub fn apply_move(state: &GameState, m: Move) -> Result<GameState, GameError> {
    state.apply_move(m)
}

/// Free-function form of [`GameState::is_over`].
pub fn is_over(state: &GameState) -> bool {
    state.is_over()
}

/// Free-function form of [`GameState::components`].
pub fn components(state: &GameState) -> Vec<ComponentView> {
    state.components()
}
