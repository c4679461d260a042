//! Engine, strategies and verification tools for the k-regular graph game.
//!
//! Two players alternately add edges to an empty graph on `n` vertices, never
//! exceeding degree `k`. For `k = 3` one player can keep the final graph
//! planar ([`planar_strategy`]); for `k = 4` one player can force a clique
//! minor of any fixed order ([`minor_strategy`]).

pub mod adversaries;
pub mod arena;
pub mod classify;
pub mod game;
pub mod graph;
pub mod minor_strategy;
pub mod planar_strategy;
pub mod planarity;
pub mod strategy;
pub mod transcript;
pub mod tree_split;

pub use game::{ComponentView, GameConfig, GameError, GameState, Move, Partition, Player};
