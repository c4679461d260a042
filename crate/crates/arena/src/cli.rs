//! Subcommand implementations. Each returns a process exit code.

use std::fs;
use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use kgame_core::arena::{recorded_failures, run_batch, verify_transcript, CheckSet, MatchConfig};
use kgame_core::strategy::StrategySpec;
use kgame_core::transcript::{decode_transcripts, encode_transcript};
use kgame_core::{GameConfig, Player};

use crate::exit;
use crate::session::Session;

#[derive(Debug, Parser)]
#[command(name = "kgame", version, about = "Simulate, verify and play the k-regular graph game")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a batch of seeded games and write their transcripts.
    Simulate(SimulateArgs),
    /// Replay transcripts and rerun every check.
    Verify(VerifyArgs),
    /// Play against an engine in the terminal.
    Play(PlayArgs),
    /// Serve the JSON API and the browser client.
    Serve(ServeArgs),
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub k: usize,
    #[arg(long)]
    pub n: usize,
    /// Strategy for the first player (planar, minor[:ELL], random,
    /// greedy_nonplanar, greedy_structure, connector).
    #[arg(long)]
    pub p1: String,
    #[arg(long)]
    pub p2: String,
    /// Clique order for a bare `minor`.
    #[arg(long, default_value_t = 4)]
    pub ell: usize,
    #[arg(long, default_value_t = 1)]
    pub games: usize,
    /// Seed of the first game; game i uses seed + i.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Comma-separated checks, or `all`; defaults to those applicable to k.
    #[arg(long)]
    pub checks: Option<String>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Print a line for every turn, not just failures.
    #[arg(long)]
    pub verbose: bool,
}

#[derive(Debug, Args)]
pub struct PlayArgs {
    #[arg(long)]
    pub k: usize,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub engine: String,
    #[arg(long, default_value_t = 4)]
    pub ell: usize,
    #[arg(long)]
    pub human_first: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, default_value_t = 8080)]
    pub port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    pub host: std::net::IpAddr,
    /// Directory of static files for the browser client.
    #[arg(long = "static")]
    pub static_dir: Option<PathBuf>,
}

fn usage(msg: impl std::fmt::Display) -> i32 {
    eprintln!("error: {msg}");
    exit::USAGE
}

pub fn simulate(args: &SimulateArgs) -> i32 {
    let parse = |s: &str| StrategySpec::parse_with_ell(s, args.ell);
    let (p1, p2) = match (parse(&args.p1), parse(&args.p2)) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(e), _) | (_, Err(e)) => return usage(e),
    };
    let game = GameConfig::new(args.n, args.k, Player::A, args.seed);
    let mut cfg = MatchConfig::new(game, p1, p2);
    if let Some(list) = &args.checks {
        match list.parse::<CheckSet>() {
            Ok(c) => cfg.checks = c,
            Err(e) => return usage(e),
        }
    }
    if let Err(e) = cfg.validate() {
        return usage(e);
    }
    let batch = match run_batch(&cfg, args.games, args.seed) {
        Ok(b) => b,
        Err(e) => return usage(e),
    };
    if let Some(out) = &args.out {
        let text: String = batch.transcripts.iter().map(encode_transcript).collect();
        if let Err(e) = fs::write(out, text) {
            eprintln!("error: cannot write {}: {e}", out.display());
            return exit::IO;
        }
    }
    for (i, t) in batch.transcripts.iter().enumerate() {
        for f in recorded_failures(t) {
            eprintln!("game {i} (seed {}): {f}", t.config.seed);
        }
        if let Some(fatal) = t.annotation("fatal") {
            eprintln!("game {i} (seed {}): fatal: {fatal}", t.config.seed);
        }
    }
    let summary = serde_json::json!({
        "summary": batch.summary,
        "elapsed_ms": batch.elapsed.as_millis() as u64,
    });
    println!("{}", serde_json::to_string_pretty(&summary).expect("summary serialises"));
    if batch.summary.count("clean") == batch.summary.games {
        exit::SUCCESS
    } else {
        exit::CHECK_FAILURE
    }
}

pub fn verify(args: &VerifyArgs) -> i32 {
    verify_path(&args.input, args.verbose, &mut std::io::stdout())
}

pub fn verify_path(path: &Path, verbose: bool, out: &mut impl Write) -> i32 {
    let bytes = match fs::read(path) {
        Ok(b) => b,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", path.display());
            return exit::IO;
        }
    };
    let transcripts = match decode_transcripts(&bytes) {
        Ok(t) => t,
        Err(e) => {
            let _ = writeln!(out, "FAIL {}: {e}", path.display());
            return exit::CHECK_FAILURE;
        }
    };
    let mut all_ok = true;
    for (i, t) in transcripts.iter().enumerate() {
        let report = match verify_transcript(t) {
            Ok(r) => r,
            Err(e) => {
                all_ok = false;
                let _ = writeln!(out, "FAIL transcript {i}: {e}");
                continue;
            }
        };
        if verbose {
            for tc in &report.turns {
                let _ = writeln!(
                    out,
                    "  turn {} {} ({}, {}) deficit={} condition_t={}",
                    tc.turn,
                    tc.player,
                    tc.u,
                    tc.v,
                    if tc.deficit_ok { "ok" } else { "FAIL" },
                    tc.condition_t.map_or("-".to_string(), |b| b.to_string()),
                );
            }
        }
        for f in &report.failures {
            let _ = writeln!(out, "  {f}");
        }
        let verdicts = [
            report.planar_final.map(|p| format!("planar={p}")),
            report.minor_certificate.map(|c| format!("certificate={c}")),
            report.delta_report.as_ref().map(|d| format!("delta={}", d["delta"])),
        ];
        let extra: Vec<String> = verdicts.into_iter().flatten().collect();
        let _ = writeln!(
            out,
            "{} transcript {i}: k={} n={} seed={} moves={} {}",
            if report.passed() { "PASS" } else { "FAIL" },
            t.config.k,
            t.config.n,
            t.config.seed,
            report.moves,
            extra.join(" "),
        );
        all_ok &= report.passed();
    }
    if all_ok {
        exit::SUCCESS
    } else {
        exit::CHECK_FAILURE
    }
}

fn print_board(session: &mut Session, out: &mut impl Write) {
    let snap = session.snapshot();
    let _ = writeln!(out, "turn {}: {} edges, mover {}", snap.turn, snap.edges.len(), snap.mover);
    for c in &snap.components {
        if c.vertices.len() > 1 {
            let _ = writeln!(out, "  component {:?} type {} deficit {}", c.vertices, c.kind, c.deficit);
        }
    }
    let open: Vec<String> = snap
        .deficits
        .iter()
        .enumerate()
        .filter(|(_, &d)| d > 0)
        .map(|(v, d)| format!("{v}:{d}"))
        .collect();
    let _ = writeln!(out, "  open vertices (vertex:deficit): {}", open.join(" "));
    let mut verdict = format!("  planar={}", snap.planar);
    if let Some(t) = snap.condition_t {
        verdict.push_str(&format!(" condition_t={t}"));
    }
    let _ = writeln!(out, "{verdict}");
}

/// Interactive loop reading `u v` lines; `q` or end of input stops.
pub fn play(args: &PlayArgs, input: &mut impl BufRead, out: &mut impl Write) -> i32 {
    let engine = match StrategySpec::parse_with_ell(&args.engine, args.ell) {
        Ok(e) => e,
        Err(e) => return usage(e),
    };
    let config = GameConfig::new(args.n, args.k, Player::A, args.seed);
    let mut session = match Session::new(config, engine, args.human_first) {
        Ok(s) => s,
        Err(e) => return usage(e),
    };
    let _ = writeln!(out, "you are player {}; enter moves as `u v`, `q` to quit", session.human());
    if let Some(m) = session.state().last_move() {
        let _ = writeln!(out, "engine plays ({}, {})", m.u, m.v);
    }
    print_board(&mut session, out);
    let mut line = String::new();
    while !session.state().is_over() {
        let _ = write!(out, "> ");
        let _ = out.flush();
        line.clear();
        match input.read_line(&mut line) {
            Ok(0) => return exit::SUCCESS,
            Ok(_) => {}
            Err(e) => {
                eprintln!("error: {e}");
                return exit::IO;
            }
        }
        let words: Vec<&str> = line.split_whitespace().collect();
        if words.first() == Some(&"q") {
            return exit::SUCCESS;
        }
        let (u, v) = match words.as_slice() {
            [a, b] => match (a.parse(), b.parse()) {
                (Ok(u), Ok(v)) => (u, v),
                _ => {
                    let _ = writeln!(out, "expected two vertex numbers");
                    continue;
                }
            },
            _ => {
                let _ = writeln!(out, "expected `u v`");
                continue;
            }
        };
        match session.human_move(u, v) {
            Ok(o) if o.accepted => {
                if let Some(e) = o.engine_move {
                    let _ = writeln!(out, "engine plays ({}, {})", e.u, e.v);
                }
                print_board(&mut session, out);
            }
            Ok(o) => {
                let _ = writeln!(out, "rejected: {}", o.reason.unwrap_or_default());
            }
            Err(e) => {
                eprintln!("engine failure: {e}");
                return exit::CHECK_FAILURE;
            }
        }
    }
    let snap = session.snapshot();
    let _ = writeln!(out, "game over after {} moves; planar={}", snap.turn, snap.planar);
    exit::SUCCESS
}

pub fn serve(args: &ServeArgs) -> i32 {
    let runtime = match tokio::runtime::Runtime::new() {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return exit::IO;
        }
    };
    let addr = std::net::SocketAddr::new(args.host, args.port);
    eprintln!("listening on http://{addr}");
    match runtime.block_on(crate::server::serve(addr, args.static_dir.clone())) {
        Ok(()) => exit::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            exit::IO
        }
    }
}

pub fn run(cli: Cli) -> i32 {
    match &cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Verify(a) => verify(a),
        Command::Play(a) => play(a, &mut std::io::stdin().lock(), &mut std::io::stdout()),
        Command::Serve(a) => serve(a),
    }
}
