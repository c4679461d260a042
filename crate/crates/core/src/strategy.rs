//! Common interface of all players, and selection by name.

use std::fmt;
use std::str::FromStr;

use serde_json::Value;
use thiserror::Error;

use crate::adversaries::{Connector, GreedyNonplanar, GreedyStructure, RandomPlayer};
use crate::game::{GameConfig, GameState, Player};
use crate::minor_strategy::MinorPlayer;
use crate::planar_strategy::PlanarPlayer;
use crate::transcript::Annotations;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StrategyError {
    #[error("no legal move: the game is over")]
    NoLegalMove,
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("strategy memory is inconsistent with the position: {0}")]
    MemoryMismatch(String),
    #[error("position unsupported by this strategy: {0}")]
    Unsupported(String),
}

/// A player. `choose` is only called when it is this player's turn and the
/// game is not over; the returned pair must be legal.
pub trait Strategy: Send {
    fn name(&self) -> String;

    fn choose(&mut self, state: &GameState) -> Result<(usize, usize), StrategyError>;

    /// Strategy-side facts for the transcript (phase history, certificates).
    fn annotations(&self) -> Annotations {
        Annotations::new()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StrategySpec {
    Planar,
    Minor { ell: usize },
    Random,
    GreedyNonplanar,
    GreedyStructure,
    Connector,
}

pub const STRATEGY_NAMES: [&str; 6] = ["planar", "minor", "random", "greedy_nonplanar", "greedy_structure", "connector"];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown strategy {0:?} (expected one of planar, minor[:ELL], random, greedy_nonplanar, greedy_structure, connector)")]
pub struct UnknownStrategy(pub String);

impl StrategySpec {
    /// Parses a name, using `ell` for `minor` when no `:ELL` suffix is given.
    pub fn parse_with_ell(s: &str, ell: usize) -> Result<Self, UnknownStrategy> {
        match s {
            "minor" => Ok(StrategySpec::Minor { ell }),
            other => other.parse(),
        }
    }

    pub fn build(self, config: &GameConfig, seat: Player) -> Box<dyn Strategy> {
        let seed = seat_seed(config.seed, seat);
        match self {
            StrategySpec::Planar => Box::new(PlanarPlayer::new()),
            StrategySpec::Minor { ell } => Box::new(MinorPlayer::new(ell)),
            StrategySpec::Random => Box::new(RandomPlayer::new(seed)),
            StrategySpec::GreedyNonplanar => Box::new(GreedyNonplanar),
            StrategySpec::GreedyStructure => Box::new(GreedyStructure),
            StrategySpec::Connector => Box::new(Connector),
        }
    }

    pub fn to_value(self) -> Value {
        Value::String(self.to_string())
    }
}

/// Per-seat seed so that two stochastic players in one game differ.
pub fn seat_seed(seed: u64, seat: Player) -> u64 {
    // splitmix64 finaliser
    let mut z = seed.wrapping_add(match seat {
        Player::A => 0x9E37_79B9_7F4A_7C15,
        Player::B => 0x3C6E_F372_FE94_F82A,
    });
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl fmt::Display for StrategySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StrategySpec::Planar => f.write_str("planar"),
            StrategySpec::Minor { ell } => write!(f, "minor:{ell}"),
            StrategySpec::Random => f.write_str("random"),
            StrategySpec::GreedyNonplanar => f.write_str("greedy_nonplanar"),
            StrategySpec::GreedyStructure => f.write_str("greedy_structure"),
            StrategySpec::Connector => f.write_str("connector"),
        }
    }
}

impl FromStr for StrategySpec {
    type Err = UnknownStrategy;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if let Some(rest) = s.strip_prefix("minor:") {
            let ell = rest.parse().map_err(|_| UnknownStrategy(s.to_string()))?;
            if ell < 2 {
                return Err(UnknownStrategy(s.to_string()));
            }
            return Ok(StrategySpec::Minor { ell });
        }
        match s {
            "planar" => Ok(StrategySpec::Planar),
            "minor" => Ok(StrategySpec::Minor { ell: 4 }),
            "random" => Ok(StrategySpec::Random),
            "greedy_nonplanar" => Ok(StrategySpec::GreedyNonplanar),
            "greedy_structure" => Ok(StrategySpec::GreedyStructure),
            "connector" => Ok(StrategySpec::Connector),
            other => Err(UnknownStrategy(other.to_string())),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for spec in [
            StrategySpec::Planar,
            StrategySpec::Minor { ell: 3 },
            StrategySpec::Random,
            StrategySpec::GreedyNonplanar,
            StrategySpec::GreedyStructure,
            StrategySpec::Connector,
        ] {
            assert_eq!(spec.to_string().parse::<StrategySpec>().unwrap(), spec);
        }
        assert_eq!(StrategySpec::parse_with_ell("minor", 5).unwrap(), StrategySpec::Minor { ell: 5 });
        assert!("minor:1".parse::<StrategySpec>().is_err());
        assert!("nope".parse::<StrategySpec>().is_err());
    }

    #[test]
    fn seats_get_distinct_seeds() {
        assert_ne!(seat_seed(7, Player::A), seat_seed(7, Player::B));
        assert_eq!(seat_seed(7, Player::A), seat_seed(7, Player::A));
    }
}
