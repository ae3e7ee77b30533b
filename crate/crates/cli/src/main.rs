//! `qchess`: hot-seat play, log replay, demonstrations and bound tables.

use std::io::{self, BufRead, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use sha2::{Digest, Sha256};

use qchess::bounds::{heatmap, heatmap_csv, max_superposition_size, naive_bound, Guard, GuardMode};
use qchess::demos::{run_demo, DemoName};
use qchess::game::render_board;
use qchess::notation::{PositionDocument, SaveDocument};
use qchess::{Game, GameError, GameState, TurnPolicy};

const EXIT_PARSE: u8 = 3;
const EXIT_RULE: u8 = 4;
const EXIT_IO: u8 = 5;
const EXIT_VERIFY: u8 = 6;

#[derive(Parser)]
#[command(name = "qchess", version, about = "Quantum chess in the terminal")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Policy {
    Alternate,
    Free,
    Sandbox,
}

impl From<Policy> for TurnPolicy {
    fn from(p: Policy) -> Self {
        match p {
            Policy::Alternate => TurnPolicy::Alternate,
            Policy::Free => TurnPolicy::Free,
            Policy::Sandbox => TurnPolicy::Sandbox,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum GuardArg {
    Off,
    Warn,
    Deny,
}

#[derive(clap::Args)]
struct Setup {
    /// FEN, JSON position document, or a file holding either.
    #[arg(long)]
    position: Option<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "alternate")]
    policy: Policy,
}

#[derive(Subcommand)]
enum Command {
    /// Read moves from stdin and print the board after each one.
    Play {
        #[command(flatten)]
        setup: Setup,
        #[arg(long, value_enum, default_value = "warn")]
        guard: GuardArg,
        /// Term ceiling for the guard.
        #[arg(long, default_value_t = qchess::bounds::DEFAULT_CEILING)]
        ceiling: usize,
        /// Write the move log here on exit.
        #[arg(long)]
        log: Option<PathBuf>,
        /// Write a save document here on exit.
        #[arg(long)]
        save: Option<PathBuf>,
    },
    /// Replay a move log, or verify a save document, and print the final
    /// state hash.
    Replay {
        logfile: PathBuf,
        #[command(flatten)]
        setup: Setup,
    },
    /// Run a scripted demonstration and check it against its expected values.
    Demo {
        #[arg(value_parser = parse_demo)]
        name: DemoName,
    },
    /// Superposition-size bounds.
    Bounds {
        /// Exact naive bound over all occupancy patterns.
        #[arg(long, group = "which")]
        naive: bool,
        /// Largest bound over feasible piece budgets, with its maximizer.
        #[arg(long, group = "which")]
        max: bool,
        /// CSV grid of log10 S(s, m) over inclusive ranges `m0..m1 s0..s1`.
        #[arg(long, group = "which", num_args = 2, value_names = ["M_RANGE", "S_RANGE"])]
        heatmap: Option<Vec<String>>,
    },
}

fn parse_demo(s: &str) -> Result<DemoName, String> {
    s.parse()
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Failure {
            code,
            message: message.into(),
        }
    }
}

impl From<GameError> for Failure {
    fn from(e: GameError) -> Self {
        // Inside a replay any rule failure means the log is corrupt: a
        // tampered outcome usually surfaces as an illegal move later on.
        let code = match e.code() {
            "parse_error" | "bad_document" => EXIT_PARSE,
            "corrupt_log" => EXIT_VERIFY,
            _ => EXIT_RULE,
        };
        Failure::new(code, e.to_string())
    }
}

fn io_failure(path: &Path, e: io::Error) -> Failure {
    Failure::new(EXIT_IO, format!("{}: {e}", path.display()))
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| io_failure(path, e))
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text).map_err(|e| io_failure(path, e))
}

fn initial_state(position: Option<&str>) -> Result<GameState, Failure> {
    let Some(text) = position else {
        return Ok(GameState::start());
    };
    let text = if Path::new(text).is_file() {
        read(Path::new(text))?
    } else {
        text.to_string()
    };
    PositionDocument::parse(&text).map_err(|e| Failure::new(EXIT_PARSE, e.to_string()))
}

/// SHA-256 of the state triple's document with amplitudes in key order.
fn state_hash(state: &GameState) -> String {
    let mut doc = PositionDocument::from_state(state);
    if let Some(a) = doc.amplitudes.as_mut() {
        a.sort_by(|x, y| x.0.cmp(&y.0));
    }
    format!("{:x}", Sha256::digest(doc.to_json().as_bytes()))
}

fn print_outcome(game: &Game, turn: &qchess::game::TurnOutcome) {
    if let (Some(o), Some(p)) = (turn.outcome, turn.probability) {
        println!("measured {} with probability {p:.4}", if o { 1 } else { 0 });
    }
    if turn.accepted {
        println!("{}", turn.notation);
        print!("{}", render_board(&game.snapshot()));
    } else {
        println!("{}: no effect, same player to move", turn.notation);
    }
    if let qchess::bounds::GuardVerdict::Warn { terms, ceiling } = turn.guard {
        println!("warning: {terms} terms exceed the ceiling of {ceiling}");
    }
}

fn play(
    setup: Setup,
    guard: Guard,
    log: Option<PathBuf>,
    save: Option<PathBuf>,
) -> Result<(), Failure> {
    let state = initial_state(setup.position.as_deref())?;
    let mut game = Game::from_state(state, setup.seed, setup.policy.into()).with_guard(guard);
    print!("{}", render_board(&game.snapshot()));
    let stdin = io::stdin();
    let mut lines = stdin.lock().lines();
    while !game.status().is_over() {
        print!("{}> ", game.classical().flags.turn);
        io::stdout()
            .flush()
            .map_err(|e| Failure::new(EXIT_IO, e.to_string()))?;
        let Some(line) = lines.next() else { break };
        let line = line.map_err(|e| Failure::new(EXIT_IO, e.to_string()))?;
        let text = line.trim();
        match text {
            "" => continue,
            "quit" | "exit" => break,
            "board" => print!("{}", render_board(&game.snapshot())),
            "log" => print!("{}", game.log_text()),
            _ => match game.submit_move(text) {
                Ok(turn) => print_outcome(&game, &turn),
                Err(e) => println!("error ({}): {e}", e.code()),
            },
        }
    }
    if game.status().is_over() {
        println!("game over: {}", game.status().as_str());
    }
    println!("ply {} hash {}", game.ply(), state_hash(game.state()));
    if let Some(p) = log {
        write(&p, &game.log_text())?;
    }
    if let Some(p) = save {
        write(&p, &game.save().to_json())?;
    }
    Ok(())
}

fn replay(logfile: &Path, setup: Setup) -> Result<(), Failure> {
    let text = read(logfile)?;
    let game = if text.trim_start().starts_with('{') {
        let doc =
            SaveDocument::from_json(&text).map_err(|e| Failure::new(EXIT_PARSE, e.to_string()))?;
        Game::load(&doc)?
    } else {
        let initial = initial_state(setup.position.as_deref())?;
        Game::replay_text(initial, setup.seed, setup.policy.into(), &text)?
    };
    print!("{}", render_board(&game.snapshot()));
    println!("status {}", game.status().as_str());
    println!("ply {} hash {}", game.ply(), state_hash(game.state()));
    Ok(())
}

fn demo(name: DemoName) -> Result<(), Failure> {
    let report = run_demo(name)?;
    println!("{name}: {}", name.moves().join(" "));
    print!("{}", render_board(&report.game.snapshot()));
    if let Some(([hi, lo], amps)) = report.pair {
        println!("amplitudes on |{hi},{lo}⟩:");
        for (k, a) in amps.iter().enumerate() {
            println!("  |{}{}⟩ {:+.6} {:+.6}i", k >> 1, k & 1, a.re, a.im);
        }
    } else {
        for s in ["a1", "a2", "b1", "b2"] {
            println!(
                "p({s}) = {:.6}",
                report.game.state().marginal(qchess::sq(s))
            );
        }
    }
    for c in &report.checks {
        let verdict = if c.passed() { "PASS" } else { "FAIL" };
        println!(
            "{verdict} {}: {:.9} (expected {:.9} ± {:e})",
            c.label, c.actual, c.expected, c.tolerance
        );
    }
    if report.passed() {
        Ok(())
    } else {
        Err(Failure::new(
            EXIT_VERIFY,
            format!("{name} did not reproduce its expected values"),
        ))
    }
}

fn parse_range(text: &str) -> Result<(u32, u32), Failure> {
    let bad = || Failure::new(EXIT_PARSE, format!("bad range `{text}`, expected a..b"));
    let (a, b) = text.split_once("..").ok_or_else(bad)?;
    let (a, b): (u32, u32) = (a.parse().map_err(|_| bad())?, b.parse().map_err(|_| bad())?);
    if a > b {
        return Err(bad());
    }
    Ok((a, b))
}

fn bounds(naive: bool, max: bool, grid: Option<Vec<String>>) -> Result<(), Failure> {
    if naive {
        println!("{}", naive_bound());
    } else if max {
        let (value, budget) = max_superposition_size();
        println!("{value}");
        println!("piece,squares,multiplicity");
        for (p, z) in budget.entries() {
            println!("{p},{},{}", z.squares, z.multiplicity);
        }
    } else if let Some(r) = grid {
        let m = parse_range(&r[0])?;
        let s = parse_range(&r[1])?;
        if s.1 > 64 {
            return Err(Failure::new(EXIT_PARSE, "s ranges over at most 64 squares"));
        }
        print!("{}", heatmap_csv(&heatmap(m, s)));
    } else {
        return Err(Failure::new(
            EXIT_PARSE,
            "choose one of --naive, --max, --heatmap",
        ));
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Play {
            setup,
            guard,
            ceiling,
            log,
            save,
        } => {
            let mode = match guard {
                GuardArg::Off => GuardMode::Off,
                GuardArg::Warn => GuardMode::Warn,
                GuardArg::Deny => GuardMode::Deny,
            };
            play(setup, Guard { ceiling, mode }, log, save)
        }
        Command::Replay { logfile, setup } => replay(&logfile, setup),
        Command::Demo { name } => demo(name),
        Command::Bounds {
            naive,
            max,
            heatmap,
        } => bounds(naive, max, heatmap),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("qchess: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
