//! JSON-lines transcripts.
//!
//! A transcript is a header line with the game config, one line per move, and
//! optionally a final `{"annotations": {...}}` line carrying verdicts:
//!
//! ```text
//! {"k":3,"n":20,"first":"A","seed":42}
//! {"t":1,"player":"A","u":0,"v":1}
//! {"annotations":{"planar_final":true}}
//! ```
//!
//! Several transcripts may follow each other in one file; each starts with
//! its own header line.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::game::{GameConfig, GameError, GameState, Move, Player};

pub type Annotations = BTreeMap<String, Value>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transcript {
    pub config: GameConfig,
    pub moves: Vec<Move>,
    pub annotations: Option<Annotations>,
}

#[derive(Debug, Error)]
pub enum TranscriptError {
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("illegal move at turn {turn}: {source}")]
    IllegalMove {
        turn: usize,
        #[source]
        source: GameError,
    },
    #[error("invalid config on line {line}: {source}")]
    Config {
        line: usize,
        #[source]
        source: GameError,
    },
    #[error("empty transcript stream")]
    Empty,
}

impl TranscriptError {
    /// 1-based turn of the offending move, for replay errors.
    pub fn turn(&self) -> Option<usize> {
        match self {
            TranscriptError::IllegalMove { turn, .. } => Some(*turn),
            _ => None,
        }
    }
}

#[derive(Serialize, Deserialize)]
struct MoveLine {
    t: usize,
    player: Player,
    u: usize,
    v: usize,
}

#[derive(Serialize, Deserialize)]
struct AnnotationLine {
    annotations: Annotations,
}

impl Transcript {
    pub fn new(config: GameConfig) -> Self {
        Transcript {
            config,
            moves: Vec::new(),
            annotations: None,
        }
    }

    /// Transcript of the moves played in `state`.
    pub fn from_state(state: &GameState) -> Self {
        Transcript {
            config: *state.config(),
            moves: state.history().to_vec(),
            annotations: None,
        }
    }

    /// Replays the moves from the empty graph.
    pub fn replay(&self) -> Result<GameState, TranscriptError> {
        let mut state = GameState::new(self.config).map_err(|source| TranscriptError::Config { line: 1, source })?;
        for (i, &m) in self.moves.iter().enumerate() {
            state
                .play(m)
                .map_err(|source| TranscriptError::IllegalMove { turn: i + 1, source })?;
        }
        Ok(state)
    }

    /// The annotations map, created on first use.
    pub fn annotations_mut(&mut self) -> &mut Annotations {
        self.annotations.get_or_insert_with(BTreeMap::new)
    }

    pub fn annotation(&self, key: &str) -> Option<&Value> {
        self.annotations.as_ref()?.get(key)
    }
}

/// Encodes one transcript as JSON lines, each terminated by `\n`.
pub fn encode_transcript(t: &Transcript) -> String {
    let mut out = serde_json::to_string(&t.config).expect("config serialises");
    out.push('\n');
    for (i, m) in t.moves.iter().enumerate() {
        let line = MoveLine {
            t: i + 1,
            player: m.player,
            u: m.u,
            v: m.v,
        };
        out.push_str(&serde_json::to_string(&line).expect("move serialises"));
        out.push('\n');
    }
    if let Some(a) = &t.annotations {
        let line = AnnotationLine { annotations: a.clone() };
        out.push_str(&serde_json::to_string(&line).expect("annotations serialise"));
        out.push('\n');
    }
    out
}

/// Decodes exactly one transcript, validating that every move is legal.
pub fn decode_transcript(bytes: &[u8]) -> Result<Transcript, TranscriptError> {
    let mut all = decode_transcripts(bytes)?;
    if all.len() > 1 {
        return Err(TranscriptError::Malformed {
            line: 0,
            message: format!("expected one transcript, found {}", all.len()),
        });
    }
    Ok(all.pop().expect("non-empty"))
}

/// Decodes a stream of concatenated transcripts.
pub fn decode_transcripts(bytes: &[u8]) -> Result<Vec<Transcript>, TranscriptError> {
    let text = std::str::from_utf8(bytes).map_err(|e| TranscriptError::Malformed {
        line: 0,
        message: format!("not UTF-8: {e}"),
    })?;
    let mut out: Vec<Transcript> = Vec::new();
    let mut current: Option<(Transcript, GameState, bool)> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let value: Value = serde_json::from_str(raw).map_err(|e| TranscriptError::Malformed {
            line,
            message: e.to_string(),
        })?;
        let malformed = |message: String| TranscriptError::Malformed { line, message };
        let obj = value.as_object().ok_or_else(|| malformed("expected a JSON object".into()))?;
        if obj.contains_key("k") {
            let config: GameConfig =
                serde_json::from_value(value.clone()).map_err(|e| malformed(format!("bad header: {e}")))?;
            let state = GameState::new(config).map_err(|source| TranscriptError::Config { line, source })?;
            if let Some((t, _, _)) = current.take() {
                out.push(t);
            }
            current = Some((Transcript::new(config), state, false));
        } else if obj.contains_key("annotations") {
            let (t, _, closed) = current
                .as_mut()
                .ok_or_else(|| malformed("annotations before header".into()))?;
            if *closed {
                return Err(malformed("second annotations line".into()));
            }
            let a: AnnotationLine = serde_json::from_value(value).map_err(|e| malformed(e.to_string()))?;
            t.annotations = Some(a.annotations);
            *closed = true;
        } else {
            let (t, state, closed) = current.as_mut().ok_or_else(|| malformed("move before header".into()))?;
            if *closed {
                return Err(malformed("move after annotations".into()));
            }
            let m: MoveLine = serde_json::from_value(value).map_err(|e| malformed(format!("bad move: {e}")))?;
            let turn = t.moves.len() + 1;
            if m.t != turn {
                return Err(malformed(format!("turn index {} where {turn} was expected", m.t)));
            }
            let mv = Move::new(m.u, m.v, m.player);
            if m.u > m.v {
                return Err(malformed(format!("endpoints {} > {} are not canonical", m.u, m.v)));
            }
            state
                .play(mv)
                .map_err(|source| TranscriptError::IllegalMove { turn, source })?;
            t.moves.push(mv);
        }
    }
    if let Some((t, _, _)) = current {
        out.push(t);
    }
    if out.is_empty() {
        return Err(TranscriptError::Empty);
    }
    Ok(out)
}
