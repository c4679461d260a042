//! Game loop, batches and transcript verification.
//!
//! Checks run beside the strategies and never feed back into them: the
//! arena keeps its own condition-T checker and recomputes every verdict from
//! the position itself. A failing check is recorded and the game continues,
//! so the whole trace is kept.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::classify::ConditionTChecker;
use crate::game::{GameConfig, GameError, GameState, Move, Player};
use crate::minor_strategy::round1_accounting_check;
use crate::planarity::{is_planar, verify_minor_certificate, BranchDecomposition};
use crate::strategy::{StrategySpec, UnknownStrategy};
use crate::transcript::{Transcript, TranscriptError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Check {
    ConditionT,
    Planarity,
    MinorCertificate,
    Accounting,
}

impl Check {
    pub const ALL: [Check; 4] = [Check::ConditionT, Check::Planarity, Check::MinorCertificate, Check::Accounting];

    pub fn name(self) -> &'static str {
        match self {
            Check::ConditionT => "condition_t",
            Check::Planarity => "planarity",
            Check::MinorCertificate => "minor_certificate",
            Check::Accounting => "accounting",
        }
    }

    /// Game size this check belongs to.
    pub fn k(self) -> usize {
        match self {
            Check::ConditionT | Check::Planarity => 3,
            Check::MinorCertificate | Check::Accounting => 4,
        }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Checks to run. The move-rule checks (legality, deficit bookkeeping,
/// endgame law) always run.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct CheckSet(pub BTreeSet<Check>);

impl CheckSet {
    /// Every check that applies to the `k`-game.
    pub fn for_k(k: usize) -> Self {
        CheckSet(Check::ALL.into_iter().filter(|c| c.k() == k).collect())
    }

    pub fn contains(&self, c: Check) -> bool {
        self.0.contains(&c)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown check {0:?} (expected condition_t, planarity, minor_certificate, accounting or all)")]
pub struct UnknownCheck(pub String);

impl FromStr for CheckSet {
    type Err = UnknownCheck;

    /// Comma-separated names; `all` selects everything. An empty string
    /// selects nothing.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut set = BTreeSet::new();
        for name in s.split(',').map(str::trim).filter(|n| !n.is_empty()) {
            if name == "all" {
                set.extend(Check::ALL);
                continue;
            }
            let c = Check::ALL
                .into_iter()
                .find(|c| c.name() == name)
                .ok_or_else(|| UnknownCheck(name.to_string()))?;
            set.insert(c);
        }
        Ok(CheckSet(set))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MatchError {
    #[error(transparent)]
    Game(#[from] GameError),
    #[error(transparent)]
    Strategy(#[from] UnknownStrategy),
    #[error("{strategy} plays the {need}-game, not the {k}-game")]
    WrongGame { strategy: String, need: usize, k: usize },
    #[error("check {check} applies to the {need}-game, not the {k}-game")]
    CheckNotApplicable { check: Check, need: usize, k: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatchConfig {
    pub game: GameConfig,
    pub player_a: StrategySpec,
    pub player_b: StrategySpec,
    pub checks: CheckSet,
}

impl MatchConfig {
    /// A match running every check applicable to `game.k`.
    pub fn new(game: GameConfig, player_a: StrategySpec, player_b: StrategySpec) -> Self {
        MatchConfig {
            checks: CheckSet::for_k(game.k),
            game,
            player_a,
            player_b,
        }
    }

    pub fn spec(&self, seat: Player) -> StrategySpec {
        match seat {
            Player::A => self.player_a,
            Player::B => self.player_b,
        }
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        let mut c = self.clone();
        c.game.seed = seed;
        c
    }

    pub fn validate(&self) -> Result<(), MatchError> {
        self.game.validate()?;
        let k = self.game.k;
        for spec in [self.player_a, self.player_b] {
            let need = match spec {
                StrategySpec::Planar => Some(3),
                StrategySpec::Minor { .. } => Some(4),
                _ => None,
            };
            if let Some(need) = need.filter(|&need| need != k) {
                return Err(MatchError::WrongGame {
                    strategy: spec.to_string(),
                    need,
                    k,
                });
            }
        }
        for &check in &self.checks.0 {
            if check.k() != k {
                return Err(MatchError::CheckNotApplicable { check, need: check.k(), k });
            }
        }
        Ok(())
    }

    /// Players annotation: `{"A": name, "B": name}`.
    pub fn players_value(&self) -> Value {
        json!({ "A": self.player_a.to_string(), "B": self.player_b.to_string() })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckFailure {
    /// Number of moves played when the check ran (0 for the empty board).
    pub turn: usize,
    pub check: String,
    pub message: String,
}

impl fmt::Display for CheckFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "turn {}: {}: {}", self.turn, self.check, self.message)
    }
}

/// Per-turn and end-of-game checks shared by [`run_game`] and
/// [`verify_transcript`].
struct Checker {
    checks: CheckSet,
    planar_seats: Vec<Player>,
    condition_t: ConditionTChecker,
    condition_t_runs: usize,
    condition_t_held: usize,
    failures: Vec<CheckFailure>,
    total_deficit: usize,
}

impl Checker {
    fn new(state: &GameState, checks: CheckSet, planar_seats: Vec<Player>) -> Self {
        Checker {
            checks,
            planar_seats,
            condition_t: ConditionTChecker::new(),
            condition_t_runs: 0,
            condition_t_held: 0,
            failures: Vec::new(),
            total_deficit: state.total_deficit(),
        }
    }

    fn fail(&mut self, turn: usize, check: &str, message: String) {
        self.failures.push(CheckFailure {
            turn,
            check: check.into(),
            message,
        });
    }

    /// Returns the condition-T verdict when it was checked.
    fn after_move(&mut self, state: &GameState, m: Move) -> Option<bool> {
        let turn = state.turn();
        // Recount from the degrees rather than trusting the engine's counter.
        let total: usize = (0..state.n()).map(|v| state.k() - state.degree(v)).sum();
        if total + 2 != self.total_deficit {
            self.fail(turn, "deficit", format!("total deficit went {} -> {total}", self.total_deficit));
        }
        self.total_deficit = total;
        if self.checks.contains(Check::ConditionT) && self.planar_seats.contains(&m.player) {
            let s = self.condition_t.check(state);
            self.condition_t_runs += 1;
            if s.holds {
                self.condition_t_held += 1;
            } else {
                let reason = s.failure_reason.unwrap_or_default();
                self.fail(turn, Check::ConditionT.name(), reason);
            }
            return Some(s.holds);
        }
        None
    }

    fn endgame(&mut self, state: &GameState) {
        let turn = state.turn();
        let open: Vec<usize> = state.unsaturated().collect();
        if !state.is_over() {
            self.fail(turn, "endgame", "game stopped before it was over".into());
        }
        if open.len() > state.k() {
            self.fail(turn, "endgame", format!("{} positive-deficit vertices remain", open.len()));
        }
        for (i, &u) in open.iter().enumerate() {
            for &v in &open[i + 1..] {
                if !state.has_edge(u, v) {
                    self.fail(turn, "endgame", format!("positive-deficit vertices {u} and {v} are not adjacent"));
                }
            }
        }
        if turn > state.config().max_moves() {
            self.fail(turn, "endgame", format!("{turn} moves exceed the bound {}", state.config().max_moves()));
        }
    }

    fn condition_t_value(&self) -> Value {
        json!({ "checked": self.condition_t_runs, "held": self.condition_t_held })
    }
}

fn planar_seats(players: &BTreeMap<Player, StrategySpec>) -> Vec<Player> {
    players
        .iter()
        .filter(|(_, s)| **s == StrategySpec::Planar)
        .map(|(p, _)| *p)
        .collect()
}

/// End-of-game verdicts: planarity, certificate and round-1 accounting.
fn final_checks(
    checker: &mut Checker,
    transcript: &mut Transcript,
    state: &GameState,
    players: &BTreeMap<Player, StrategySpec>,
) {
    let turn = state.turn();
    let edges = state.edges();
    let annotations = transcript.annotations_mut();
    let has_planar = players.values().any(|s| *s == StrategySpec::Planar);
    let minor_seat = players
        .iter()
        .find(|(_, s)| matches!(s, StrategySpec::Minor { .. }))
        .map(|(p, s)| (*p, *s));
    if checker.checks.contains(Check::Planarity) {
        let planar = is_planar(&edges, state.n());
        annotations.insert("planar_final".into(), json!(planar));
        if has_planar && !planar {
            checker.fail(turn, Check::Planarity.name(), "final graph is not planar".into());
        }
    }
    if checker.checks.contains(Check::ConditionT) {
        annotations.insert("condition_t".into(), checker.condition_t_value());
    }
    let Some((seat, spec)) = minor_seat else { return };
    let StrategySpec::Minor { ell } = spec else { return };
    if checker.checks.contains(Check::MinorCertificate) {
        let cert = annotations
            .get("minor_certificate")
            .and_then(|v| serde_json::from_value::<BranchDecomposition>(v.clone()).ok());
        let found = cert
            .as_ref()
            .is_some_and(|bd| bd.target == ell && verify_minor_certificate(&edges, bd));
        annotations.insert("minor_found".into(), json!(found));
        if !found {
            let msg = match cert {
                None => format!("no K{ell} certificate was produced"),
                Some(_) => format!("K{ell} certificate does not verify"),
            };
            checker.fail(turn, Check::MinorCertificate.name(), msg);
        }
    }
    if checker.checks.contains(Check::Accounting) {
        let round1_end = annotations.get("round1_end").and_then(Value::as_u64);
        match round1_end {
            Some(r) => {
                let bare = Transcript {
                    config: transcript.config,
                    moves: transcript.moves.clone(),
                    annotations: None,
                };
                match round1_accounting_check(&bare, r as usize, seat) {
                    Ok(report) => {
                        transcript.annotations_mut().insert("delta_report".into(), json!(report));
                    }
                    Err(e) => checker.fail(r as usize, Check::Accounting.name(), e.to_string()),
                }
            }
            None => checker.fail(turn, Check::Accounting.name(), "round 1 never ended".into()),
        }
    }
}

fn players_map(cfg: &MatchConfig) -> BTreeMap<Player, StrategySpec> {
    BTreeMap::from([(Player::A, cfg.player_a), (Player::B, cfg.player_b)])
}

/// Plays one game to the end and returns its annotated transcript.
///
/// Annotations: `players`, the strategies' own annotations, `fatal` if a
/// strategy failed or returned an illegal move, `check_failures`, and the
/// verdicts of the configured checks (`planar_final`, `condition_t`,
/// `minor_found`, `delta_report`).
pub fn run_game(cfg: &MatchConfig) -> Result<Transcript, MatchError> {
    cfg.validate()?;
    let mut state = GameState::new(cfg.game)?;
    let players = players_map(cfg);
    let mut a = cfg.player_a.build(&cfg.game, Player::A);
    let mut b = cfg.player_b.build(&cfg.game, Player::B);
    let mut checker = Checker::new(&state, cfg.checks.clone(), planar_seats(&players));
    let mut fatal = None;
    while !state.is_over() {
        let seat = state.mover();
        let strategy = match seat {
            Player::A => &mut a,
            Player::B => &mut b,
        };
        let turn = state.turn() + 1;
        let choice = match strategy.choose(&state) {
            Ok(e) => e,
            Err(e) => {
                fatal = Some(json!({ "turn": turn, "player": seat, "message": e.to_string() }));
                break;
            }
        };
        let m = Move::new(choice.0, choice.1, seat);
        if let Err(e) = state.play(m) {
            fatal = Some(json!({
                "turn": turn,
                "player": seat,
                "message": format!("illegal move ({}, {}): {e}", choice.0, choice.1),
            }));
            break;
        }
        checker.after_move(&state, m);
    }
    let mut transcript = Transcript::from_state(&state);
    {
        let ann = transcript.annotations_mut();
        ann.insert("players".into(), cfg.players_value());
        for s in [&a, &b] {
            ann.extend(s.annotations());
        }
    }
    if fatal.is_none() {
        checker.endgame(&state);
        final_checks(&mut checker, &mut transcript, &state, &players);
    }
    let ann = transcript.annotations_mut();
    if let Some(f) = fatal {
        ann.insert("fatal".into(), f);
    }
    ann.insert("check_failures".into(), json!(checker.failures));
    Ok(transcript)
}

/// Check failures recorded in a transcript produced by [`run_game`].
pub fn recorded_failures(t: &Transcript) -> Vec<CheckFailure> {
    t.annotation("check_failures")
        .and_then(|v| serde_json::from_value(v.clone()).ok())
        .unwrap_or_default()
}

fn flag(t: &Transcript, key: &str) -> bool {
    t.annotation(key).and_then(Value::as_bool).unwrap_or(false)
}

/// Aggregate of a batch; a pure function of the match and the seeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchSummary {
    pub games: usize,
    /// `planar_final`, `minor_found`, `check_failures` (games with at least one
    /// failure), `fatal`, and `clean` (games with neither; `clean` plus
    /// games counted under `check_failures` or `fatal` is `games`).
    pub verdict_counts: BTreeMap<String, usize>,
    pub total_moves: usize,
    pub mean_moves: f64,
    pub max_moves: usize,
}

impl BatchSummary {
    pub fn from_transcripts(ts: &[Transcript]) -> Self {
        let mut counts: BTreeMap<String, usize> = ["planar_final", "minor_found", "check_failures", "fatal", "clean"]
            .into_iter()
            .map(|k| (k.to_string(), 0))
            .collect();
        let mut total = 0;
        let mut max = 0;
        for t in ts {
            let moves = t.moves.len();
            total += moves;
            max = max.max(moves);
            let fatal = t.annotation("fatal").is_some();
            let failed = !recorded_failures(t).is_empty();
            for (key, hit) in [
                ("planar_final", flag(t, "planar_final")),
                ("minor_found", flag(t, "minor_found")),
                ("check_failures", failed && !fatal),
                ("fatal", fatal),
                ("clean", !failed && !fatal),
            ] {
                if hit {
                    *counts.get_mut(key).expect("preset") += 1;
                }
            }
        }
        BatchSummary {
            games: ts.len(),
            verdict_counts: counts,
            total_moves: total,
            mean_moves: if ts.is_empty() { 0.0 } else { total as f64 / ts.len() as f64 },
            max_moves: max,
        }
    }

    pub fn count(&self, key: &str) -> usize {
        self.verdict_counts.get(key).copied().unwrap_or(0)
    }
}

#[derive(Debug, Clone)]
pub struct Batch {
    pub summary: BatchSummary,
    /// In seed order.
    pub transcripts: Vec<Transcript>,
    /// Informational only.
    pub elapsed: std::time::Duration,
}

/// Runs games with seeds `seed_base..seed_base + games` in parallel; the
/// result is merged in seed order and does not depend on scheduling.
pub fn run_batch(cfg: &MatchConfig, games: usize, seed_base: u64) -> Result<Batch, MatchError> {
    batch(cfg, games, seed_base, true)
}

/// [`run_batch`] on the calling thread.
pub fn run_batch_serial(cfg: &MatchConfig, games: usize, seed_base: u64) -> Result<Batch, MatchError> {
    batch(cfg, games, seed_base, false)
}

fn batch(cfg: &MatchConfig, games: usize, seed_base: u64, parallel: bool) -> Result<Batch, MatchError> {
    cfg.validate()?;
    let start = std::time::Instant::now();
    let seeds: Vec<u64> = (0..games as u64).map(|i| seed_base.wrapping_add(i)).collect();
    let one = |&seed: &u64| run_game(&cfg.with_seed(seed));
    let results: Vec<Result<Transcript, MatchError>> = if parallel {
        seeds.par_iter().map(one).collect()
    } else {
        seeds.iter().map(one).collect()
    };
    let transcripts = results.into_iter().collect::<Result<Vec<_>, _>>()?;
    Ok(Batch {
        summary: BatchSummary::from_transcripts(&transcripts),
        transcripts,
        elapsed: start.elapsed(),
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TurnCheck {
    pub turn: usize,
    pub player: Player,
    pub u: usize,
    pub v: usize,
    pub deficit_ok: bool,
    /// Condition T after this move, for moves of a planar player.
    pub condition_t: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub config: GameConfig,
    pub moves: usize,
    pub players: Option<BTreeMap<Player, String>>,
    pub turns: Vec<TurnCheck>,
    pub planar_final: Option<bool>,
    pub minor_certificate: Option<bool>,
    pub delta_report: Option<Value>,
    pub failures: Vec<CheckFailure>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Replays `t` and reruns every check from scratch.
///
/// Roles come from the `players` annotation when present; only the
/// certificate and the round-1 boundary are taken from the annotations, and
/// both are re-verified against the replayed graph. Without roles, only the
/// move rules, the endgame law and any certificate are checked.
pub fn verify_transcript(t: &Transcript) -> Result<VerifyReport, TranscriptError> {
    let players: Option<BTreeMap<Player, String>> = t
        .annotation("players")
        .and_then(|v| serde_json::from_value(v.clone()).ok());
    let specs: BTreeMap<Player, StrategySpec> = players
        .iter()
        .flatten()
        .filter_map(|(p, name)| name.parse().ok().map(|s| (*p, s)))
        .collect();
    let mut state = GameState::new(t.config).map_err(|source| TranscriptError::Config { line: 1, source })?;
    let mut checker = Checker::new(&state, CheckSet::for_k(t.config.k), planar_seats(&specs));
    let mut turns = Vec::with_capacity(t.moves.len());
    for (i, &m) in t.moves.iter().enumerate() {
        state
            .play(m)
            .map_err(|source| TranscriptError::IllegalMove { turn: i + 1, source })?;
        let before = checker.failures.len();
        let condition_t = checker.after_move(&state, m);
        let deficit_ok = !checker.failures[before..].iter().any(|f| f.check == "deficit");
        turns.push(TurnCheck {
            turn: i + 1,
            player: m.player,
            u: m.u,
            v: m.v,
            deficit_ok,
            condition_t,
        });
    }
    checker.endgame(&state);
    let edges = state.edges();
    let mut report = VerifyReport {
        config: t.config,
        moves: t.moves.len(),
        players,
        turns,
        planar_final: None,
        minor_certificate: None,
        delta_report: None,
        failures: Vec::new(),
    };
    if t.config.k == 3 {
        let planar = is_planar(&edges, state.n());
        report.planar_final = Some(planar);
        if specs.values().any(|s| *s == StrategySpec::Planar) && !planar {
            checker.fail(state.turn(), Check::Planarity.name(), "final graph is not planar".into());
        }
    }
    if let Some(v) = t.annotation("minor_certificate").filter(|v| !v.is_null()) {
        let ok = serde_json::from_value::<BranchDecomposition>(v.clone())
            .is_ok_and(|bd| verify_minor_certificate(&edges, &bd));
        report.minor_certificate = Some(ok);
        if !ok {
            checker.fail(state.turn(), Check::MinorCertificate.name(), "certificate does not verify".into());
        }
    }
    let minor_seat = specs
        .iter()
        .find(|(_, s)| matches!(s, StrategySpec::Minor { .. }))
        .map(|(p, _)| *p);
    if let (Some(seat), Some(r)) = (minor_seat, t.annotation("round1_end").and_then(Value::as_u64)) {
        match round1_accounting_check(t, r as usize, seat) {
            Ok(d) => report.delta_report = Some(json!(d)),
            Err(e) => checker.fail(r as usize, Check::Accounting.name(), e.to_string()),
        }
    }
    report.failures = checker.failures;
    Ok(report)
}
