//! Turn loop and rules arbiter.
//!
//! A [`Game`] owns the state triple, the generator and the log of accepted
//! moves. Moves that change nothing are reported and not logged, and the
//! same player moves again. Rejected attempts leave the generator where it
//! was, so the log alone determines every draw.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bounds::{Guard, GuardVerdict};
use crate::measure::{RngStream, RNG_ALGORITHM};
use crate::moves::{
    classify, effective_moves, execute, Move, MoveError, MoveShape, OutcomeSource, Variant,
};
use crate::notation::{
    format_move, parse_move, ParseError, PositionDocument, SaveDocument, SaveError,
};
use crate::piece::{Color, Piece};
use crate::qstate::{ClassicalLayer, GameState as State};
use crate::scalar::Scalar;
use crate::square::Square;

type GameState = State<f64>;

/// Who may move next.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TurnPolicy {
    /// White first, then strict alternation on accepted moves.
    #[default]
    Alternate,
    /// Either side may move at any time; the turn flag still flips.
    Free,
    /// Free turns and no win, draw or no-move status. For demonstrations on
    /// positions that lack a king.
    Sandbox,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GameStatus {
    Ongoing,
    WhiteWins,
    BlackWins,
    Draw,
    /// The side to move has no move that changes the state. No result is
    /// assigned.
    NoLegalMoves,
}

impl GameStatus {
    pub fn is_over(self) -> bool {
        !matches!(self, GameStatus::Ongoing)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            GameStatus::Ongoing => "ongoing",
            GameStatus::WhiteWins => "white_wins",
            GameStatus::BlackWins => "black_wins",
            GameStatus::Draw => "draw",
            GameStatus::NoLegalMoves => "no_legal_moves",
        }
    }
}

#[derive(Debug, Error)]
pub enum GameError {
    #[error("parse error: {0}")]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Move(#[from] MoveError),
    #[error("game is over ({})", .0.as_str())]
    Over(GameStatus),
    #[error("outcome suffixes are only accepted when replaying a log")]
    OutcomeInLivePlay,
    #[error("move would let the superposition pass {ceiling} terms (now {terms})")]
    GuardDenied { terms: usize, ceiling: usize },
    #[error("log line {line}: {source}")]
    Replay { line: usize, source: Box<GameError> },
    #[error("log move `{0}` has no effect")]
    IneffectiveLogMove(String),
    #[error(transparent)]
    Save(#[from] SaveError),
    #[error("saved state does not match its replayed log")]
    SaveMismatch,
}

impl GameError {
    /// Stable machine-readable code.
    pub fn code(&self) -> &'static str {
        match self {
            GameError::Parse(_) => "parse_error",
            GameError::Move(e) => e.code(),
            GameError::Over(_) => "game_over",
            GameError::OutcomeInLivePlay => "unexpected_outcome",
            GameError::GuardDenied { .. } => "guard_denied",
            GameError::Replay { source, .. } => match source.code() {
                "parse_error" => "parse_error",
                _ => "corrupt_log",
            },
            GameError::IneffectiveLogMove(_) => "corrupt_log",
            GameError::Save(_) => "bad_document",
            GameError::SaveMismatch => "corrupt_log",
        }
    }

    /// Failures of the move text itself, as opposed to the rules.
    pub fn is_parse(&self) -> bool {
        self.code() == "parse_error"
    }
}

/// Result of one submitted move.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TurnOutcome {
    /// The move changed the state and was logged.
    pub accepted: bool,
    /// Canonical text with outcome suffix, as logged.
    pub notation: String,
    pub variant: Variant,
    pub outcome: Option<bool>,
    pub probability: Option<f64>,
    /// `no_effect` when the move left the state unchanged.
    pub code: Option<&'static str>,
    pub status: GameStatus,
    pub guard: GuardVerdict,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SquareView {
    pub square: Square,
    pub piece: Option<char>,
    pub probability: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CapturedView {
    pub index: usize,
    pub piece: Option<char>,
    pub origin: Square,
    pub ply: u32,
    /// Probability the ancilla holds the piece.
    pub probability: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LastMove {
    pub notation: String,
    pub outcome: Option<bool>,
}

/// Read-only view of a game for display.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DisplayState {
    pub version: u32,
    /// 64 entries, a1 first.
    pub squares: Vec<SquareView>,
    pub captured: Vec<CapturedView>,
    pub flags: String,
    pub turn: Color,
    pub status: GameStatus,
    pub terms: usize,
    pub ply: u32,
    pub last_move: Option<LastMove>,
}

#[derive(Debug, Clone)]
pub struct Game {
    state: GameState,
    initial: GameState,
    rng: RngStream,
    log: Vec<Move>,
    policy: TurnPolicy,
    guard: Guard,
    status: GameStatus,
}

impl Game {
    /// Standard start position, white to move.
    pub fn new(seed: u64) -> Game {
        Game::from_state(GameState::start(), seed, TurnPolicy::Alternate)
    }

    pub fn from_state(state: GameState, seed: u64, policy: TurnPolicy) -> Game {
        let mut g = Game {
            initial: state.clone(),
            state,
            rng: RngStream::new(seed),
            log: Vec::new(),
            policy,
            guard: Guard::default(),
            status: GameStatus::Ongoing,
        };
        g.status = g.compute_status();
        g
    }

    /// Accepts a FEN string or a JSON position document.
    pub fn from_position(text: &str, seed: u64, policy: TurnPolicy) -> Result<Game, GameError> {
        Ok(Game::from_state(
            PositionDocument::parse(text)?,
            seed,
            policy,
        ))
    }

    pub fn with_guard(mut self, guard: Guard) -> Game {
        self.guard = guard;
        self
    }

    pub fn state(&self) -> &GameState {
        &self.state
    }

    pub fn initial(&self) -> &GameState {
        &self.initial
    }

    pub fn classical(&self) -> &ClassicalLayer {
        &self.state.classical
    }

    pub fn status(&self) -> GameStatus {
        self.status
    }

    pub fn policy(&self) -> TurnPolicy {
        self.policy
    }

    pub fn guard(&self) -> Guard {
        self.guard
    }

    pub fn rng(&self) -> &RngStream {
        &self.rng
    }

    pub fn log(&self) -> &[Move] {
        &self.log
    }

    pub fn ply(&self) -> u32 {
        self.log.len() as u32
    }

    /// One line per accepted move.
    pub fn log_text(&self) -> String {
        crate::notation::format_log(&self.log)
    }

    /// Parses and plays a move, sampling any measurement.
    pub fn submit_move(&mut self, text: &str) -> Result<TurnOutcome, GameError> {
        let mv = parse_move(text)?;
        if mv.outcome.is_some() {
            return Err(GameError::OutcomeInLivePlay);
        }
        self.play(mv, None)
    }

    /// Plays a parsed move. `forced` replays a recorded outcome instead of
    /// sampling.
    fn play(
        &mut self,
        mut mv: Move,
        forced: Option<Option<bool>>,
    ) -> Result<TurnOutcome, GameError> {
        if self.status.is_over() {
            return Err(GameError::Over(self.status));
        }
        let source = mv.source();
        let mover = self
            .state
            .classical
            .get(source)
            .ok_or(MoveError::EmptySource(source))?;
        let turn = self.state.classical.flags.turn;
        if self.policy == TurnPolicy::Alternate && mover.color != turn {
            return Err(MoveError::WrongColor {
                square: source,
                expected: turn,
                found: mover.color,
            }
            .into());
        }
        if let MoveShape::Promotion {
            source,
            target,
            piece,
        } = mv.shape
        {
            mv.shape = MoveShape::Promotion {
                source,
                target,
                piece: Piece::new(mover.color, piece.kind),
            };
        }
        let plan = classify(&mv, &self.state.classical)?;
        if let GuardVerdict::Deny { terms, ceiling } = self
            .guard
            .check_move(self.state.psi.len(), plan.variant.is_split_or_merge())
        {
            return Err(GameError::GuardDenied { terms, ceiling });
        }

        let ply = self.ply() + 1;
        let result = match forced {
            Some(o) => execute(&self.state, &plan, OutcomeSource::Forced(o), ply)?,
            None => {
                let mut rng = self.rng.clone();
                let r = execute(&self.state, &plan, OutcomeSource::Sample(&mut rng), ply)?;
                if r.legal {
                    self.rng = rng;
                }
                r
            }
        };
        let logged = Move {
            shape: mv.shape,
            outcome: result.outcome,
        };
        let notation = format_move(&logged);
        if !result.legal {
            return Ok(TurnOutcome {
                accepted: false,
                notation,
                variant: result.variant,
                outcome: result.outcome,
                probability: result.probability,
                code: Some("no_effect"),
                status: self.status,
                guard: self.guard.check(self.state.psi.len()),
            });
        }
        self.state = result.state;
        self.log.push(logged);
        self.status = self.compute_status();
        Ok(TurnOutcome {
            accepted: true,
            notation,
            variant: result.variant,
            outcome: result.outcome,
            probability: result.probability,
            code: None,
            status: self.status,
            guard: self.guard.check(self.state.psi.len()),
        })
    }

    /// Win, draw and no-move conditions from king presence.
    fn compute_status(&self) -> GameStatus {
        if self.policy == TurnPolicy::Sandbox {
            return GameStatus::Ongoing;
        }
        let z = f64::ZERO_PROB;
        let white = self.state.king_presence(Color::White) > z;
        let black = self.state.king_presence(Color::Black) > z;
        match (white, black) {
            (false, false) => return GameStatus::Draw,
            (false, true) => return GameStatus::BlackWins,
            (true, false) => return GameStatus::WhiteWins,
            (true, true) => {}
        }
        let movers: &[Color] = match self.policy {
            TurnPolicy::Alternate => &[self.state.classical.flags.turn],
            TurnPolicy::Free | TurnPolicy::Sandbox => &[Color::White, Color::Black],
        };
        if movers
            .iter()
            .all(|&c| effective_moves(&self.state, c).is_empty())
        {
            GameStatus::NoLegalMoves
        } else {
            GameStatus::Ongoing
        }
    }

    pub fn snapshot(&self) -> DisplayState {
        let marginals = self.state.psi.board_marginals();
        let squares = Square::all()
            .map(|s| SquareView {
                square: s,
                piece: self.state.classical.get(s).map(|p| p.fen_char()),
                probability: marginals[s.index()],
            })
            .collect();
        let captured = self
            .state
            .ancillas
            .entries()
            .iter()
            .map(|e| CapturedView {
                index: e.index,
                piece: e.captured.map(|p| p.fen_char()),
                origin: e.origin,
                ply: e.ply,
                probability: self
                    .state
                    .psi
                    .marginal(e.index)
                    .expect("registered ancilla"),
            })
            .collect();
        DisplayState {
            version: crate::notation::SAVE_VERSION,
            squares,
            captured,
            flags: self.state.classical.flags.to_string(),
            turn: self.state.classical.flags.turn,
            status: self.status,
            terms: self.state.psi.len(),
            ply: self.ply(),
            last_move: self.log.last().map(|m| LastMove {
                notation: format_move(m),
                outcome: m.outcome,
            }),
        }
    }

    /// Replays `moves` from `initial` with their recorded outcomes. The
    /// generator is advanced by one draw per measured move.
    pub fn replay(
        initial: GameState,
        seed: u64,
        policy: TurnPolicy,
        moves: &[Move],
    ) -> Result<Game, GameError> {
        let mut g = Game::from_state(initial, seed, policy);
        for (i, &mv) in moves.iter().enumerate() {
            let wrap = |e: GameError| GameError::Replay {
                line: i + 1,
                source: Box::new(e),
            };
            let r = g
                .play(mv.with_outcome(None), Some(mv.outcome))
                .map_err(wrap)?;
            if !r.accepted {
                return Err(wrap(GameError::IneffectiveLogMove(format_move(&mv))));
            }
            if mv.outcome.is_some() {
                g.rng.draw();
            }
        }
        Ok(g)
    }

    /// Replays a newline-separated log.
    pub fn replay_text(
        initial: GameState,
        seed: u64,
        policy: TurnPolicy,
        log: &str,
    ) -> Result<Game, GameError> {
        let moves = crate::notation::parse_log(log).map_err(|(line, e)| GameError::Replay {
            line,
            source: Box::new(GameError::Parse(e)),
        })?;
        Game::replay(initial, seed, policy, &moves)
    }

    pub fn save(&self) -> SaveDocument {
        SaveDocument {
            position: PositionDocument::from_state(&self.state),
            initial: PositionDocument::from_state(&self.initial),
            policy: self.policy,
            seed: self.rng.seed(),
            rng: RNG_ALGORITHM.to_string(),
            draws: self.rng.draws(),
            move_log: self.log.iter().map(format_move).collect(),
        }
    }

    /// Restores a saved game by replaying its log, then checks the replay
    /// against the stored state.
    pub fn load(doc: &SaveDocument) -> Result<Game, GameError> {
        let initial = doc.initial.to_state()?;
        let moves = doc
            .move_log
            .iter()
            .enumerate()
            .map(|(i, l)| {
                parse_move(l).map_err(|e| GameError::Replay {
                    line: i + 1,
                    source: Box::new(e.into()),
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        let mut g = Game::replay(initial, doc.seed, doc.policy, &moves)?;
        if g.state != doc.position.to_state()? || g.rng.draws() > doc.draws {
            return Err(GameError::SaveMismatch);
        }
        g.rng = RngStream::resume(doc.seed, doc.draws);
        Ok(g)
    }
}

/// Board diagram: each cell shows the value letter and integer percent.
pub fn render_board(snapshot: &DisplayState) -> String {
    let mut out = String::new();
    for rank in (0..8).rev() {
        out.push_str(&format!("{} ", rank + 1));
        for file in 0..8 {
            let cell = &snapshot.squares[rank * 8 + file];
            match cell.piece {
                Some(c) => {
                    let pct = (cell.probability * 100.0).round() as u32;
                    out.push_str(&format!(" {c}{pct:<3}"))
                }
                None => out.push_str(" .   "),
            }
        }
        out.push('\n');
    }
    out.push_str("  ");
    for f in 'a'..='h' {
        out.push_str(&format!(" {f}   "));
    }
    out.push('\n');
    out
}
