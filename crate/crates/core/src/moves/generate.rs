use super::classify::classify;
use super::execute::{execute, OutcomeSource};
use super::geometry::valid_pattern;
use super::Move;
use crate::piece::{Color, PieceKind};
use crate::qstate::{ClassicalLayer, GameState};
use crate::scalar::Scalar;
use crate::square::Square;

/// Squares a piece on `s` could reach by pattern alone, castling included.
fn pattern_targets(layer: &ClassicalLayer, s: Square) -> Vec<Square> {
    let Some(v) = layer.get(s) else {
        return Vec::new();
    };
    Square::all()
        .filter(|&t| {
            valid_pattern(t, s, v)
                || (v.kind == PieceKind::King
                    && s.file() == 4
                    && t.rank() == s.rank()
                    && (t.file() == 2 || t.file() == 6))
        })
        .collect()
}

fn candidates(layer: &ClassicalLayer, color: Color) -> Vec<Move> {
    let sources: Vec<Square> = Square::all()
        .filter(|&s| layer.get(s).is_some_and(|p| p.color == color))
        .collect();
    let mut out = Vec::new();
    for &s in &sources {
        let v = layer.get(s).unwrap();
        let targets = pattern_targets(layer, s);
        for &t in &targets {
            if v.kind == PieceKind::Pawn && t.rank() == color.last_rank() {
                for kind in PieceKind::PROMOTIONS {
                    out.push(Move::promotion(s, t, crate::piece::Piece::new(color, kind)));
                }
            } else {
                out.push(Move::standard(s, t));
            }
        }
        if v.kind.is_jumper() || v.kind.is_slider() {
            for &t1 in &targets {
                for &t2 in &targets {
                    if t1 != t2 {
                        out.push(Move::split(s, t1, t2));
                    }
                }
            }
            for &s2 in &sources {
                if s2 == s || layer.get(s2) != Some(v) {
                    continue;
                }
                for &t in &targets {
                    out.push(Move::merge(s, s2, t));
                }
            }
        }
    }
    out
}

/// Moves of `color` that classify into a variant on `layer`. These are
/// possible moves; some may leave the state unchanged when executed.
pub fn legal_moves(layer: &ClassicalLayer, color: Color) -> Vec<Move> {
    candidates(layer, color)
        .into_iter()
        .filter(|m| classify(m, layer).is_ok())
        .collect()
}

/// Possible moves of `color` with at least one outcome of nonzero
/// probability that changes the state.
pub fn effective_moves<T: Scalar>(state: &GameState<T>, color: Color) -> Vec<Move> {
    legal_moves(&state.classical, color)
        .into_iter()
        .filter(|m| {
            let plan = classify(m, &state.classical).expect("legal move classifies");
            let outcomes: &[Option<bool>] = if plan.measurement.is_some() {
                &[Some(false), Some(true)]
            } else {
                &[None]
            };
            outcomes
                .iter()
                .any(|&o| execute(state, &plan, OutcomeSource::Forced(o), 0).is_ok_and(|r| r.legal))
        })
        .collect()
}
