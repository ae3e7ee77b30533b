use crate::piece::{Color, Piece, PieceKind};
use crate::qstate::FlagSet;
use crate::square::Square;

const KNIGHT: [(i8, i8); 8] = [
    (1, 2),
    (2, 1),
    (2, -1),
    (1, -2),
    (-1, -2),
    (-2, -1),
    (-2, 1),
    (-1, 2),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PawnGeometry {
    Step,
    TwoStep,
    Diagonal,
    /// Diagonal whose target file matches the en-passant flag.
    EpEligible,
    None,
}

/// Displacement `(df, dr)` from `s` to `t`.
fn delta(t: Square, s: Square) -> (i8, i8) {
    (
        t.file() as i8 - s.file() as i8,
        t.rank() as i8 - s.rank() as i8,
    )
}

pub fn pawn_geometry(t: Square, s: Square, color: Color, flags: &FlagSet) -> PawnGeometry {
    let (df, dr) = delta(t, s);
    let fwd = color.forward();
    if df == 0 && dr == fwd {
        PawnGeometry::Step
    } else if df == 0 && dr == 2 * fwd && s.rank() == color.pawn_rank() {
        PawnGeometry::TwoStep
    } else if df.abs() == 1 && dr == fwd {
        if flags.ep_file == Some(t.file()) {
            PawnGeometry::EpEligible
        } else {
            PawnGeometry::Diagonal
        }
    } else {
        PawnGeometry::None
    }
}

/// Standard movement pattern of `piece` from `s` to `t`, ignoring occupancy.
/// Castling is not a king pattern here.
pub fn valid_pattern(t: Square, s: Square, piece: Piece) -> bool {
    if t == s {
        return false;
    }
    let (df, dr) = delta(t, s);
    match piece.kind {
        PieceKind::Knight => KNIGHT.contains(&(df, dr)),
        PieceKind::King => df.abs() <= 1 && dr.abs() <= 1,
        PieceKind::Rook => df == 0 || dr == 0,
        PieceKind::Bishop => df.abs() == dr.abs(),
        PieceKind::Queen => df == 0 || dr == 0 || df.abs() == dr.abs(),
        PieceKind::Pawn => {
            let no_ep = FlagSet::no_rights(piece.color);
            pawn_geometry(t, s, piece.color, &no_ep) != PawnGeometry::None
        }
    }
}

/// Squares strictly between `s` and `t` on a shared line; empty for
/// adjacent squares and for non-aligned pairs.
pub fn path_between(s: Square, t: Square) -> Vec<Square> {
    let (df, dr) = delta(t, s);
    let aligned = df == 0 || dr == 0 || df.abs() == dr.abs();
    if !aligned || (df, dr) == (0, 0) {
        return Vec::new();
    }
    let (sf, sr) = (df.signum(), dr.signum());
    let steps = df.abs().max(dr.abs());
    (1..steps)
        .map(|k| s.offset(sf * k, sr * k).expect("between two board squares"))
        .collect()
}
