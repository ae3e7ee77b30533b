use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::piece::{value_char, Color, Piece, PieceKind};
use crate::square::Square;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ClassicalParseError {
    #[error("piece placement: {0}")]
    Placement(String),
    #[error("flags: {0}")]
    Flags(String),
}

/// Turn, castling rights and the en-passant file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FlagSet {
    pub turn: Color,
    pub castle_white_king: bool,
    pub castle_white_queen: bool,
    pub castle_black_king: bool,
    pub castle_black_queen: bool,
    /// File (0 = a) of a pawn that two-stepped on the previous ply.
    pub ep_file: Option<u8>,
}

impl FlagSet {
    pub const fn start() -> FlagSet {
        FlagSet {
            turn: Color::White,
            castle_white_king: true,
            castle_white_queen: true,
            castle_black_king: true,
            castle_black_queen: true,
            ep_file: None,
        }
    }

    pub const fn no_rights(turn: Color) -> FlagSet {
        FlagSet {
            turn,
            castle_white_king: false,
            castle_white_queen: false,
            castle_black_king: false,
            castle_black_queen: false,
            ep_file: None,
        }
    }

    pub fn can_castle_king_side(&self, c: Color) -> bool {
        match c {
            Color::White => self.castle_white_king,
            Color::Black => self.castle_black_king,
        }
    }

    pub fn can_castle_queen_side(&self, c: Color) -> bool {
        match c {
            Color::White => self.castle_white_queen,
            Color::Black => self.castle_black_queen,
        }
    }

    /// Clears rights whose king or rook home square is among `touched`.
    pub fn clear_castling_for(&mut self, touched: impl IntoIterator<Item = Square>) {
        for s in touched {
            match s.index() {
                4 => {
                    self.castle_white_king = false;
                    self.castle_white_queen = false;
                }
                7 => self.castle_white_king = false,
                0 => self.castle_white_queen = false,
                60 => {
                    self.castle_black_king = false;
                    self.castle_black_queen = false;
                }
                63 => self.castle_black_king = false,
                56 => self.castle_black_queen = false,
                _ => {}
            }
        }
    }

    fn castling_string(&self) -> String {
        let mut s = String::new();
        for (on, c) in [
            (self.castle_white_king, 'K'),
            (self.castle_white_queen, 'Q'),
            (self.castle_black_king, 'k'),
            (self.castle_black_queen, 'q'),
        ] {
            if on {
                s.push(c);
            }
        }
        if s.is_empty() {
            s.push('-');
        }
        s
    }
}

impl Default for FlagSet {
    fn default() -> Self {
        FlagSet::start()
    }
}

/// `"w KQkq -"`: turn, castling rights, en-passant file.
impl fmt::Display for FlagSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ep = self.ep_file.map_or('-', |file| (b'a' + file) as char);
        write!(
            f,
            "{} {} {}",
            self.turn.fen_char(),
            self.castling_string(),
            ep
        )
    }
}

impl FromStr for FlagSet {
    type Err = ClassicalParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = |m: &str| ClassicalParseError::Flags(format!("{m} in `{s}`"));
        let fields: Vec<&str> = s.split_whitespace().collect();
        let [turn, castle, ep] = fields[..] else {
            return Err(bad("expected three fields"));
        };
        let turn = match turn {
            "w" => Color::White,
            "b" => Color::Black,
            _ => return Err(bad("bad turn")),
        };
        let mut flags = FlagSet::no_rights(turn);
        if castle != "-" {
            for c in castle.chars() {
                let slot = match c {
                    'K' => &mut flags.castle_white_king,
                    'Q' => &mut flags.castle_white_queen,
                    'k' => &mut flags.castle_black_king,
                    'q' => &mut flags.castle_black_queen,
                    _ => return Err(bad("bad castling right")),
                };
                if *slot {
                    return Err(bad("repeated castling right"));
                }
                *slot = true;
            }
        }
        flags.ep_file = match ep.as_bytes() {
            b"-" => None,
            [f @ b'a'..=b'h'] => Some(f - b'a'),
            // Full FEN gives a target square; only its file matters.
            [f @ b'a'..=b'h', b'3' | b'6'] => Some(f - b'a'),
            _ => return Err(bad("bad en-passant field")),
        };
        Ok(flags)
    }
}

/// Per-square piece values plus flags.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ClassicalLayer {
    values: [Option<Piece>; 64],
    pub flags: FlagSet,
}

impl ClassicalLayer {
    pub fn empty(turn: Color) -> ClassicalLayer {
        ClassicalLayer {
            values: [None; 64],
            flags: FlagSet::no_rights(turn),
        }
    }

    pub fn start() -> ClassicalLayer {
        use PieceKind::*;
        let mut layer = ClassicalLayer {
            values: [None; 64],
            flags: FlagSet::start(),
        };
        let back = [Rook, Knight, Bishop, Queen, King, Bishop, Knight, Rook];
        for (file, kind) in back.into_iter().enumerate() {
            let f = file as u8;
            layer.values[Square::at(f, 0).index()] = Some(Piece::white(kind));
            layer.values[Square::at(f, 1).index()] = Some(Piece::white(Pawn));
            layer.values[Square::at(f, 6).index()] = Some(Piece::black(Pawn));
            layer.values[Square::at(f, 7).index()] = Some(Piece::black(kind));
        }
        layer
    }

    #[inline]
    pub fn get(&self, s: Square) -> Option<Piece> {
        self.values[s.index()]
    }

    #[inline]
    pub fn set(&mut self, s: Square, v: Option<Piece>) {
        self.values[s.index()] = v;
    }

    pub fn values(&self) -> &[Option<Piece>; 64] {
        &self.values
    }

    /// Bitboard of squares with a nonzero value.
    pub fn occupied_mask(&self) -> u64 {
        Square::all()
            .filter(|s| self.get(*s).is_some())
            .fold(0, |m, s| m | 1u64 << s.index())
    }

    /// Bitboard of squares holding `color`'s pieces.
    pub fn color_mask(&self, color: Color) -> u64 {
        Square::all()
            .filter(|s| self.get(*s).is_some_and(|p| p.color == color))
            .fold(0, |m, s| m | 1u64 << s.index())
    }

    /// 64 characters, a1..h1 then a2.., `0` for empty.
    pub fn value_string(&self) -> String {
        self.values.iter().map(|v| value_char(*v)).collect()
    }

    pub fn from_value_string(
        s: &str,
        flags: FlagSet,
    ) -> Result<ClassicalLayer, ClassicalParseError> {
        let chars: Vec<char> = s.chars().collect();
        if chars.len() != 64 {
            return Err(ClassicalParseError::Placement(format!(
                "expected 64 values, found {}",
                chars.len()
            )));
        }
        let mut values = [None; 64];
        for (i, c) in chars.into_iter().enumerate() {
            values[i] = match c {
                '0' => None,
                c => Some(Piece::from_fen_char(c).ok_or_else(|| {
                    ClassicalParseError::Placement(format!("bad value `{c}` at index {i}"))
                })?),
            };
        }
        Ok(ClassicalLayer { values, flags })
    }

    /// FEN piece-placement field (rank 8 first).
    pub fn placement(&self) -> String {
        let mut out = String::new();
        for rank in (0..8).rev() {
            let mut gap = 0;
            for file in 0..8 {
                match self.get(Square::at(file, rank)) {
                    None => gap += 1,
                    Some(p) => {
                        if gap > 0 {
                            out.push(char::from_digit(gap, 10).unwrap());
                            gap = 0;
                        }
                        out.push(p.fen_char());
                    }
                }
            }
            if gap > 0 {
                out.push(char::from_digit(gap, 10).unwrap());
            }
            if rank > 0 {
                out.push('/');
            }
        }
        out
    }

    /// Parses a FEN document. Trailing clock fields are accepted and ignored.
    pub fn from_fen(fen: &str) -> Result<ClassicalLayer, ClassicalParseError> {
        let mut fields = fen.split_whitespace();
        let placement = fields
            .next()
            .ok_or_else(|| ClassicalParseError::Placement("empty document".into()))?;
        let rest: Vec<&str> = fields.take(3).collect();
        let flags: FlagSet = match rest.len() {
            0 => FlagSet::no_rights(Color::White),
            3 => rest.join(" ").parse()?,
            _ => {
                return Err(ClassicalParseError::Flags(format!(
                    "incomplete flags in `{fen}`"
                )))
            }
        };
        let ranks: Vec<&str> = placement.split('/').collect();
        if ranks.len() != 8 {
            return Err(ClassicalParseError::Placement(format!(
                "expected 8 ranks, found {}",
                ranks.len()
            )));
        }
        let mut values = [None; 64];
        for (k, row) in ranks.iter().enumerate() {
            let rank = 7 - k as u8;
            let mut file = 0u8;
            for c in row.chars() {
                if let Some(d) = c.to_digit(10).filter(|d| (1..=8).contains(d)) {
                    file += d as u8;
                } else {
                    let p = Piece::from_fen_char(c).ok_or_else(|| {
                        ClassicalParseError::Placement(format!("bad piece `{c}`"))
                    })?;
                    if file >= 8 {
                        return Err(ClassicalParseError::Placement(format!(
                            "rank {} overflows",
                            rank + 1
                        )));
                    }
                    values[Square::at(file, rank).index()] = Some(p);
                    file += 1;
                }
                if file > 8 {
                    return Err(ClassicalParseError::Placement(format!(
                        "rank {} overflows",
                        rank + 1
                    )));
                }
            }
            if file != 8 {
                return Err(ClassicalParseError::Placement(format!(
                    "rank {} has {} files",
                    rank + 1,
                    file
                )));
            }
        }
        Ok(ClassicalLayer { values, flags })
    }

    pub fn to_fen(&self) -> String {
        format!("{} {}", self.placement(), self.flags)
    }
}
