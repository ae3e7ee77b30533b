use smallvec::{smallvec, SmallVec};

use super::geometry::{path_between, pawn_geometry, valid_pattern, PawnGeometry};
use super::{ImpossibleReason, Move, MoveError, MoveShape, Variant};
use crate::measure::MeasurementSpec;
use crate::piece::{Color, Piece, PieceKind};
use crate::predicate::Predicate;
use crate::qstate::ClassicalLayer;
use crate::square::Square;

/// A classified move: its variant, operands and measurement.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MovePlan {
    pub variant: Variant,
    pub mover: Piece,
    /// One source, or two for a merge.
    pub sources: SmallVec<[Square; 2]>,
    /// One target, or two for a split.
    pub targets: SmallVec<[Square; 2]>,
    /// Slide paths, one per leg in operand order; empty for jumps.
    pub paths: SmallVec<[Vec<Square>; 2]>,
    /// Square of the pawn taken en passant.
    pub ep_square: Option<Square>,
    /// Castling rook source and target.
    pub rook: Option<(Square, Square)>,
    pub promotion: Option<Piece>,
    pub measurement: Option<MeasurementSpec>,
}

impl MovePlan {
    /// Squares the move involves, for castling-right bookkeeping.
    pub fn touched(&self) -> impl Iterator<Item = Square> + '_ {
        self.sources
            .iter()
            .chain(&self.targets)
            .copied()
            .chain(self.rook.into_iter().flat_map(|(a, b)| [a, b]))
    }

    /// Values written to squares that may receive a piece.
    pub fn placements(&self) -> SmallVec<[(Square, Piece); 2]> {
        let value = self.promotion.unwrap_or(self.mover);
        let mut out: SmallVec<[(Square, Piece); 2]> =
            self.targets.iter().map(|&t| (t, value)).collect();
        if let Some((_, rook_to)) = self.rook {
            out.push((rook_to, Piece::new(self.mover.color, PieceKind::Rook)));
        }
        out
    }

    pub fn source(&self) -> Square {
        self.sources[0]
    }

    pub fn target(&self) -> Square {
        self.targets[0]
    }
}

/// Value lookups relative to the mover's color.
struct Side {
    color: Color,
}

impl Side {
    fn own(&self, v: Option<Piece>) -> bool {
        v.is_some_and(|p| p.color == self.color)
    }

    fn opp(&self, v: Option<Piece>) -> bool {
        v.is_some_and(|p| p.color != self.color)
    }

    fn is(&self, v: Option<Piece>, kind: PieceKind) -> bool {
        v == Some(Piece::new(self.color, kind))
    }

    fn is_opp(&self, v: Option<Piece>, kind: PieceKind) -> bool {
        v == Some(Piece::new(self.color.opponent(), kind))
    }
}

fn ep_square(s: Square, t: Square) -> Square {
    Square::from_coords(t.file(), s.rank()).expect("on board")
}

fn castle_squares(color: Color, king_side: bool) -> (Square, Square, Square, Square) {
    let r = color.home_rank();
    let at = |f| Square::from_coords(f, r).unwrap();
    if king_side {
        // king from, king to, rook from, rook to
        (at(4), at(6), at(7), at(5))
    } else {
        (at(4), at(2), at(0), at(3))
    }
}

/// Every variant whose possibility equation holds, each equation evaluated
/// on its own. A well-formed taxonomy yields at most one.
pub fn possible_variants(mv: &Move, layer: &ClassicalLayer) -> Result<Vec<Variant>, MoveError> {
    let source = mv.source();
    let vs = layer.get(source).ok_or(MoveError::EmptySource(source))?;
    let side = Side { color: vs.color };
    let jumper = vs.kind.is_jumper();
    let slider = vs.kind.is_slider();
    let pawn = vs.kind == PieceKind::Pawn;
    let mut out = Vec::new();
    let mut push = |holds: bool, v: Variant| {
        if holds {
            out.push(v);
        }
    };
    match mv.shape {
        MoveShape::Standard {
            source: s,
            target: t,
        }
        | MoveShape::Promotion {
            source: s,
            target: t,
            ..
        } => {
            let vt = layer.get(t);
            let valid = valid_pattern(t, s, vs);
            let free_or_same = vt.is_none() || vt == Some(vs);
            push(jumper && valid && free_or_same, Variant::StandardJump);
            push(
                jumper && valid && vt != Some(vs) && side.own(vt),
                Variant::BlockedJump,
            );
            push(jumper && valid && side.opp(vt), Variant::CaptureJump);
            push(slider && valid && free_or_same, Variant::StandardSlide);
            push(
                slider && valid && vt != Some(vs) && side.own(vt),
                Variant::BlockedSlide,
            );
            push(slider && valid && side.opp(vt), Variant::CaptureSlide);

            let g = pawn_geometry(t, s, vs.color, &layer.flags);
            let step = g == PawnGeometry::Step;
            let two_step = g == PawnGeometry::TwoStep;
            let diagonal = matches!(g, PawnGeometry::Diagonal | PawnGeometry::EpEligible);
            let ep_rank = (vs.color.pawn_rank() as i8 + 3 * vs.color.forward()) as u8;
            let ep = g == PawnGeometry::EpEligible
                && s.rank() == ep_rank
                && layer.flags.turn == vs.color;
            let ep_pawn = diagonal && side.is_opp(layer.get(ep_square(s, t)), PieceKind::Pawn);
            let vt_free_or_pawn = vt.is_none() || side.is(vt, PieceKind::Pawn);
            push(pawn && vt_free_or_pawn && step, Variant::PawnStep);
            push(pawn && !vt_free_or_pawn && step, Variant::BlockedPawnStep);
            push(pawn && vt_free_or_pawn && two_step, Variant::PawnTwoStep);
            push(
                pawn && !vt_free_or_pawn && two_step,
                Variant::BlockedPawnTwoStep,
            );
            push(
                pawn && side.opp(vt) && diagonal && !(ep && ep_pawn),
                Variant::PawnCapture,
            );
            push(
                pawn && vt_free_or_pawn && ep_pawn && ep,
                Variant::StandardEp,
            );
            push(
                pawn && side.own(vt) && !side.is(vt, PieceKind::Pawn) && ep_pawn && ep,
                Variant::BlockedEp,
            );
            push(pawn && side.opp(vt) && ep_pawn && ep, Variant::CaptureEp);

            for (king_side, variant) in [
                (true, Variant::CastleKingSide),
                (false, Variant::CastleQueenSide),
            ] {
                let (k_from, k_to, r_from, _) = castle_squares(vs.color, king_side);
                let right = if king_side {
                    layer.flags.can_castle_king_side(vs.color)
                } else {
                    layer.flags.can_castle_queen_side(vs.color)
                };
                push(
                    s == k_from
                        && t == k_to
                        && side.is(Some(vs), PieceKind::King)
                        && side.is(layer.get(r_from), PieceKind::Rook)
                        && right,
                    variant,
                );
            }
        }
        MoveShape::Split {
            source: s,
            targets: [t1, t2],
        } => {
            let ok = |t: Square| {
                let vt = layer.get(t);
                valid_pattern(t, s, vs) && (vt.is_none() || vt == Some(vs))
            };
            let holds = t1 != t2 && ok(t1) && ok(t2);
            push(jumper && holds, Variant::SplitJump);
            push(slider && holds, Variant::SplitSlide);
        }
        MoveShape::Merge {
            sources: [s1, s2],
            target: t,
        } => {
            let vt = layer.get(t);
            let holds = layer.get(s2) == Some(vs)
                && valid_pattern(t, s1, vs)
                && valid_pattern(t, s2, vs)
                && s1 != s2
                && (vt.is_none() || vt == Some(vs));
            push(jumper && holds, Variant::MergeJump);
            push(slider && holds, Variant::MergeSlide);
        }
    }
    Ok(out)
}

/// Classifies `mv` into its unique possible variant and builds the plan.
pub fn classify(mv: &Move, layer: &ClassicalLayer) -> Result<MovePlan, MoveError> {
    let variants = possible_variants(mv, layer)?;
    assert!(
        variants.len() <= 1,
        "possibility equations overlap for {mv:?}: {variants:?}"
    );
    let Some(&variant) = variants.first() else {
        if let MoveShape::Merge {
            sources: [s1, s2], ..
        } = mv.shape
        {
            if layer.get(s1) != layer.get(s2) {
                return Err(MoveError::Impossible(ImpossibleReason::MergeSourcesDiffer));
            }
        }
        return Err(MoveError::Impossible(ImpossibleReason::NoVariant));
    };
    let mover = layer
        .get(mv.source())
        .expect("checked by possible_variants");

    let promotion = match mv.shape {
        MoveShape::Promotion { piece, .. } => Some(piece),
        _ => None,
    };
    let promotes = matches!(
        mv.shape,
        MoveShape::Standard { target, .. } | MoveShape::Promotion { target, .. }
            if mover.kind == PieceKind::Pawn && target.rank() == mover.color.last_rank()
    );
    match (promotes, promotion) {
        (true, None) => return Err(MoveError::Impossible(ImpossibleReason::PromotionRequired)),
        (false, Some(_)) => {
            return Err(MoveError::Impossible(ImpossibleReason::PromotionNotAllowed))
        }
        (true, Some(p)) if p.color != mover.color => {
            return Err(MoveError::Impossible(ImpossibleReason::PromotionColor))
        }
        _ => {}
    }

    let mut plan = MovePlan {
        variant,
        mover,
        sources: SmallVec::new(),
        targets: SmallVec::new(),
        paths: SmallVec::new(),
        ep_square: None,
        rook: None,
        promotion,
        measurement: None,
    };
    let occ = |s: Square| Predicate::occupied(s.index());
    let empty = |s: Square| Predicate::empty(s.index());
    let idx = |p: &[Square]| p.iter().map(|s| s.index()).collect::<Vec<_>>();

    match mv.shape {
        MoveShape::Standard {
            source: s,
            target: t,
        }
        | MoveShape::Promotion {
            source: s,
            target: t,
            ..
        } => {
            plan.sources = smallvec![s];
            plan.targets = smallvec![t];
            use Variant::*;
            match variant {
                StandardSlide | BlockedSlide | CaptureSlide | PawnTwoStep | BlockedPawnTwoStep => {
                    plan.paths = smallvec![path_between(s, t)];
                }
                StandardEp | BlockedEp | CaptureEp => plan.ep_square = Some(ep_square(s, t)),
                CastleKingSide | CastleQueenSide => {
                    let (_, _, r_from, r_to) =
                        castle_squares(mover.color, variant == CastleKingSide);
                    plan.rook = Some((r_from, r_to));
                }
                _ => {}
            }
            plan.measurement = match variant {
                BlockedJump | BlockedPawnStep | BlockedSlide | BlockedPawnTwoStep | BlockedEp => {
                    Some(MeasurementSpec::new(empty(t), "target empty"))
                }
                CaptureJump | PawnCapture | CaptureEp => {
                    Some(MeasurementSpec::new(occ(s), "source occupied"))
                }
                CaptureSlide => {
                    let path = idx(&plan.paths[0]);
                    Some(MeasurementSpec::new(
                        Predicate::all_empty(&path)
                            .and(occ(s))
                            .or(Predicate::any_occupied(&path).and(empty(t))),
                        "path clear and source occupied, or path blocked and target empty",
                    ))
                }
                CastleKingSide | CastleQueenSide => {
                    let (_, k_to, _, r_to) = castle_squares(mover.color, variant == CastleKingSide);
                    Some(MeasurementSpec::new(
                        Predicate::all_empty(&[k_to.index(), r_to.index()]),
                        "castling squares empty",
                    ))
                }
                _ => None,
            };
        }
        MoveShape::Split {
            source: s,
            targets: [t1, t2],
        } => {
            plan.sources = smallvec![s];
            plan.targets = smallvec![t1, t2];
            if variant == Variant::SplitSlide {
                let (p1, p2) = (path_between(s, t1), path_between(s, t2));
                if p1.contains(&t2) || p2.contains(&t1) {
                    return Err(MoveError::Impossible(ImpossibleReason::OverlappingLegs));
                }
                plan.paths = smallvec![p1, p2];
            }
        }
        MoveShape::Merge {
            sources: [s1, s2],
            target: t,
        } => {
            plan.sources = smallvec![s1, s2];
            plan.targets = smallvec![t];
            if variant == Variant::MergeSlide {
                let (p1, p2) = (path_between(s1, t), path_between(s2, t));
                if p1.contains(&s2) || p2.contains(&s1) {
                    return Err(MoveError::Impossible(ImpossibleReason::OverlappingLegs));
                }
                plan.paths = smallvec![p1, p2];
            }
        }
    }
    Ok(plan)
}
