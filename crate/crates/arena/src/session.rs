//! A human-versus-engine game, shared by the terminal and HTTP front ends.

use serde::{Deserialize, Serialize};

use kgame_core::classify::{ConditionTChecker, TypeKind};
use kgame_core::planarity::is_planar;
use kgame_core::strategy::{Strategy, StrategySpec};
use kgame_core::{GameConfig, GameState, Move, Player};

/// Largest board the interactive front ends accept.
pub const MAX_INTERACTIVE_N: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComponentSummary {
    pub vertices: Vec<usize>,
    #[serde(rename = "type")]
    pub kind: TypeKind,
    pub deficit: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Snapshot {
    pub k: usize,
    pub n: usize,
    pub edges: Vec<(usize, usize)>,
    pub deficits: Vec<usize>,
    pub components: Vec<ComponentSummary>,
    pub planar: bool,
    /// Condition T of the position; only meaningful in the 3-game.
    pub condition_t: Option<bool>,
    pub over: bool,
    pub mover: Player,
    pub human: Player,
    pub engine: String,
    pub turn: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeJson {
    pub u: usize,
    pub v: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MoveOutcome {
    pub accepted: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub engine_move: Option<EdgeJson>,
}

pub struct Session {
    state: GameState,
    engine: Box<dyn Strategy>,
    engine_name: String,
    human: Player,
    checker: ConditionTChecker,
}

impl Session {
    /// Starts a game; the engine moves at once when the human is second.
    pub fn new(config: GameConfig, engine: StrategySpec, human_first: bool) -> Result<Session, String> {
        config.validate().map_err(|e| e.to_string())?;
        if config.n > MAX_INTERACTIVE_N {
            return Err(format!("n = {} exceeds the interactive limit {MAX_INTERACTIVE_N}", config.n));
        }
        match engine {
            StrategySpec::Planar if config.k != 3 => return Err("the planar engine plays the 3-game".into()),
            StrategySpec::Minor { .. } if config.k != 4 => return Err("the minor engine plays the 4-game".into()),
            _ => {}
        }
        let first = config.first_player;
        let human = if human_first { first } else { first.other() };
        let state = GameState::new(config).map_err(|e| e.to_string())?;
        let mut s = Session {
            state,
            engine: engine.build(&config, human.other()),
            engine_name: engine.to_string(),
            human,
            checker: ConditionTChecker::new(),
        };
        if !human_first {
            s.engine_reply()?;
        }
        Ok(s)
    }

    pub fn state(&self) -> &GameState {
        &self.state
    }

    pub fn human(&self) -> Player {
        self.human
    }

    fn engine_reply(&mut self) -> Result<Option<(usize, usize)>, String> {
        if self.state.is_over() || self.state.mover() == self.human {
            return Ok(None);
        }
        let (u, v) = self.engine.choose(&self.state).map_err(|e| e.to_string())?;
        let seat = self.state.mover();
        self.state
            .play(Move::new(u, v, seat))
            .map_err(|e| format!("engine played an illegal move ({u}, {v}): {e}"))?;
        Ok(Some((u, v)))
    }

    /// Applies the human's edge and the engine's reply. Rejections leave the
    /// position untouched; `Err` is an engine failure.
    pub fn human_move(&mut self, u: usize, v: usize) -> Result<MoveOutcome, String> {
        let reject = |reason: &str| {
            Ok(MoveOutcome {
                accepted: false,
                reason: Some(reason.to_string()),
                engine_move: None,
            })
        };
        if self.state.is_over() {
            return reject("game over");
        }
        if self.state.mover() != self.human {
            return reject("not your turn");
        }
        if let Err(e) = self.state.play(Move::new(u, v, self.human)) {
            return reject(e.reason());
        }
        let reply = self.engine_reply()?;
        Ok(MoveOutcome {
            accepted: true,
            reason: None,
            engine_move: reply.map(|(u, v)| EdgeJson { u, v }),
        })
    }

    pub fn snapshot(&mut self) -> Snapshot {
        let s = &self.state;
        let k3 = s.k() == 3;
        let sets = s.component_partition();
        let classified = if k3 { Some(self.checker.classify_partition(s, &sets)) } else { None };
        let components = sets
            .iter()
            .enumerate()
            .map(|(i, vertices)| ComponentSummary {
                deficit: s.component_deficit(vertices[0]),
                kind: classified.as_ref().map_or(TypeKind::Unclassified, |c| c[i].0.kind),
                vertices: vertices.to_vec(),
            })
            .collect();
        let condition_t = k3.then(|| self.checker.check(s).holds);
        let s = &self.state;
        Snapshot {
            k: s.k(),
            n: s.n(),
            edges: s.edges(),
            deficits: (0..s.n()).map(|v| s.k() - s.degree(v)).collect(),
            components,
            planar: is_planar(&s.edges(), s.n()),
            condition_t,
            over: s.is_over(),
            mover: s.mover(),
            human: self.human,
            engine: self.engine_name.clone(),
            turn: s.turn(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn engine_first_plays_a_matching_edge() {
        let cfg = GameConfig::new(60, 4, Player::A, 0);
        let mut s = Session::new(cfg, StrategySpec::Minor { ell: 4 }, false).unwrap();
        let snap = s.snapshot();
        assert_eq!(snap.edges, vec![(0, 1)]);
        assert_eq!(snap.mover, Player::B);
        assert_eq!(snap.condition_t, None);
    }

    #[test]
    fn rejections_leave_position() {
        let cfg = GameConfig::new(12, 3, Player::A, 0);
        let mut s = Session::new(cfg, StrategySpec::Planar, true).unwrap();
        let out = s.human_move(0, 1).unwrap();
        assert!(out.accepted);
        let reply = out.engine_move.unwrap();
        let before = s.snapshot();
        assert_eq!(before.condition_t, Some(true));
        assert_eq!(s.human_move(0, 1).unwrap().reason.as_deref(), Some("adjacent"));
        assert_eq!(s.human_move(reply.u, reply.v).unwrap().reason.as_deref(), Some("adjacent"));
        assert_eq!(s.human_move(3, 3).unwrap().reason.as_deref(), Some("self-loop"));
        assert_eq!(s.snapshot(), before);
        assert!(Session::new(cfg, StrategySpec::Minor { ell: 3 }, true).is_err());
    }
}
