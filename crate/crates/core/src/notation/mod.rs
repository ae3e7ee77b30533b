//! Quantum chess algebraic notation.
//!
//! ```text
//! move     := standard | split | merge | promotion, then optional suffix
//! standard := SQ SQ
//! split    := SQ ('^' | '∧') SQ SQ
//! merge    := SQ SQ ('^' | '∧') SQ
//! promote  := SQ SQ [QRBNqrbn]
//! suffix   := '.' 'm' ('0' | '1')
//! ```
//!
//! Square order is semantic: `b1^a3c3` and `b1^c3a3` are different moves.
//! Castling is written as the king's source and target.

mod save;

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

pub use save::{PositionDocument, SaveDocument, SaveError, SAVE_VERSION};

use crate::moves::{Move, MoveShape};
use crate::piece::{Piece, PieceKind};
use crate::square::Square;

/// Measurement label written in outcome suffixes.
pub const MEASUREMENT_LABEL: char = 'm';

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParseErrorKind {
    Empty,
    ExpectedFile,
    ExpectedRank,
    ExpectedSplitOrEnd,
    ExpectedLabel,
    ExpectedOutcome,
    TrailingInput,
    DuplicateSquare,
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ParseErrorKind::Empty => "empty move",
            ParseErrorKind::ExpectedFile => "expected a file letter a-h",
            ParseErrorKind::ExpectedRank => "expected a rank digit 1-8",
            ParseErrorKind::ExpectedSplitOrEnd => {
                "expected a square, `^`, a promotion piece or an outcome suffix"
            }
            ParseErrorKind::ExpectedLabel => "expected measurement label `m`",
            ParseErrorKind::ExpectedOutcome => "expected outcome 0 or 1",
            ParseErrorKind::TrailingInput => "unexpected trailing input",
            ParseErrorKind::DuplicateSquare => "square repeated in move",
        })
    }
}

/// Syntax error at a 1-based character column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("column {column}: {kind}")]
pub struct ParseError {
    pub column: usize,
    pub kind: ParseErrorKind,
}

struct Cursor {
    chars: Vec<char>,
    pos: usize,
}

impl Cursor {
    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn err(&self, kind: ParseErrorKind) -> ParseError {
        ParseError {
            column: self.pos + 1,
            kind,
        }
    }

    fn square(&mut self) -> Result<Square, ParseError> {
        let f = match self.peek() {
            Some(c @ 'a'..='h') => c as u8 - b'a',
            _ => return Err(self.err(ParseErrorKind::ExpectedFile)),
        };
        self.pos += 1;
        let r = match self.peek() {
            Some(c @ '1'..='8') => c as u8 - b'1',
            _ => return Err(self.err(ParseErrorKind::ExpectedRank)),
        };
        self.pos += 1;
        Ok(Square::from_coords(f, r).expect("file and rank in range"))
    }

    fn split_marker(&mut self) -> bool {
        if matches!(self.peek(), Some('^' | '∧')) {
            self.pos += 1;
            true
        } else {
            false
        }
    }
}

/// Parses one move; surrounding whitespace is ignored.
pub fn parse_move(text: &str) -> Result<Move, ParseError> {
    let lead = text.chars().take_while(|c| c.is_whitespace()).count();
    let trimmed = text.trim();
    let mut cur = Cursor {
        chars: trimmed.chars().collect(),
        pos: 0,
    };
    let shift = |mut e: ParseError| {
        e.column += lead;
        e
    };
    if cur.chars.is_empty() {
        return Err(shift(cur.err(ParseErrorKind::Empty)));
    }
    let first_col = cur.pos;
    let s = cur.square().map_err(shift)?;
    let (shape, squares) = if cur.split_marker() {
        let t1 = cur.square().map_err(shift)?;
        let t2 = cur.square().map_err(shift)?;
        (
            MoveShape::Split {
                source: s,
                targets: [t1, t2],
            },
            vec![s, t1, t2],
        )
    } else {
        let second = cur.square().map_err(shift)?;
        if cur.split_marker() {
            let t = cur.square().map_err(shift)?;
            (
                MoveShape::Merge {
                    sources: [s, second],
                    target: t,
                },
                vec![s, second, t],
            )
        } else if let Some(kind) = cur.peek().and_then(promotion_kind) {
            let c = cur.peek().unwrap();
            cur.pos += 1;
            let piece = Piece::new(
                if c.is_ascii_uppercase() {
                    crate::piece::Color::White
                } else {
                    crate::piece::Color::Black
                },
                kind,
            );
            (
                MoveShape::Promotion {
                    source: s,
                    target: second,
                    piece,
                },
                vec![s, second],
            )
        } else {
            (
                MoveShape::Standard {
                    source: s,
                    target: second,
                },
                vec![s, second],
            )
        }
    };
    for (i, a) in squares.iter().enumerate() {
        if squares[..i].contains(a) {
            return Err(shift(ParseError {
                column: first_col + 1,
                kind: ParseErrorKind::DuplicateSquare,
            }));
        }
    }
    let outcome = match cur.peek() {
        None => None,
        Some('.') => {
            cur.pos += 1;
            if cur.peek() != Some(MEASUREMENT_LABEL) {
                return Err(shift(cur.err(ParseErrorKind::ExpectedLabel)));
            }
            cur.pos += 1;
            let o = match cur.peek() {
                Some('0') => false,
                Some('1') => true,
                _ => return Err(shift(cur.err(ParseErrorKind::ExpectedOutcome))),
            };
            cur.pos += 1;
            Some(o)
        }
        Some(_) => {
            let kind = if squares.len() == 2 && matches!(shape, MoveShape::Standard { .. }) {
                ParseErrorKind::ExpectedSplitOrEnd
            } else {
                ParseErrorKind::TrailingInput
            };
            return Err(shift(cur.err(kind)));
        }
    };
    if cur.peek().is_some() {
        return Err(shift(cur.err(ParseErrorKind::TrailingInput)));
    }
    Ok(Move { shape, outcome })
}

fn promotion_kind(c: char) -> Option<PieceKind> {
    PieceKind::from_letter(c).filter(|k| PieceKind::PROMOTIONS.contains(k))
}

/// Canonical text of `mv`, with the outcome suffix when one is recorded.
pub fn format_move(mv: &Move) -> String {
    let mut out = match mv.shape {
        MoveShape::Standard { source, target } => format!("{source}{target}"),
        MoveShape::Split {
            source,
            targets: [t1, t2],
        } => format!("{source}^{t1}{t2}"),
        MoveShape::Merge {
            sources: [s1, s2],
            target,
        } => format!("{s1}{s2}^{target}"),
        MoveShape::Promotion {
            source,
            target,
            piece,
        } => format!("{source}{target}{}", piece.fen_char()),
    };
    if let Some(o) = mv.outcome {
        out.push('.');
        out.push(MEASUREMENT_LABEL);
        out.push(if o { '1' } else { '0' });
    }
    out
}

impl fmt::Display for Move {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_move(self))
    }
}

impl FromStr for Move {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_move(s)
    }
}

/// Parses a newline-separated log, skipping blank lines and `#` comments.
/// Errors carry the 1-based line number.
pub fn parse_log(text: &str) -> Result<Vec<Move>, (usize, ParseError)> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| {
            let t = l.trim();
            !t.is_empty() && !t.starts_with('#')
        })
        .map(|(i, l)| parse_move(l).map_err(|e| (i + 1, e)))
        .collect()
}

pub fn format_log(moves: &[Move]) -> String {
    moves.iter().map(|m| format_move(m) + "\n").collect()
}
