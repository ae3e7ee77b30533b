//! Move taxonomy: classification of a move against the classical layer,
//! the per-variant operators, and execution with legality checking.

mod classify;
mod execute;
mod generate;
pub mod geometry;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use classify::{classify, possible_variants, MovePlan};
pub use execute::{execute, MoveResult, OutcomeSource};
pub use generate::{effective_moves, legal_moves};
pub use geometry::{path_between, pawn_geometry, valid_pattern, PawnGeometry};

use crate::measure::MeasureError;
use crate::piece::{Color, Piece};
use crate::square::Square;
use crate::unitaries::UnitaryError;

/// Squares named by a move, in notation order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MoveShape {
    Standard {
        source: Square,
        target: Square,
    },
    Split {
        source: Square,
        targets: [Square; 2],
    },
    Merge {
        sources: [Square; 2],
        target: Square,
    },
    Promotion {
        source: Square,
        target: Square,
        piece: Piece,
    },
}

/// A parsed move with an optional recorded measurement outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Move {
    pub shape: MoveShape,
    pub outcome: Option<bool>,
}

impl Move {
    pub fn standard(source: Square, target: Square) -> Move {
        MoveShape::Standard { source, target }.into()
    }

    pub fn split(source: Square, t1: Square, t2: Square) -> Move {
        MoveShape::Split {
            source,
            targets: [t1, t2],
        }
        .into()
    }

    pub fn merge(s1: Square, s2: Square, target: Square) -> Move {
        MoveShape::Merge {
            sources: [s1, s2],
            target,
        }
        .into()
    }

    pub fn promotion(source: Square, target: Square, piece: Piece) -> Move {
        MoveShape::Promotion {
            source,
            target,
            piece,
        }
        .into()
    }

    pub fn with_outcome(self, outcome: Option<bool>) -> Move {
        Move { outcome, ..self }
    }

    /// First source square; decides the mover.
    pub fn source(&self) -> Square {
        match self.shape {
            MoveShape::Standard { source, .. }
            | MoveShape::Split { source, .. }
            | MoveShape::Promotion { source, .. } => source,
            MoveShape::Merge { sources, .. } => sources[0],
        }
    }
}

impl From<MoveShape> for Move {
    fn from(shape: MoveShape) -> Self {
        Move {
            shape,
            outcome: None,
        }
    }
}

/// Executable move variants, one per possibility equation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    StandardJump,
    BlockedJump,
    CaptureJump,
    StandardSlide,
    BlockedSlide,
    CaptureSlide,
    SplitJump,
    SplitSlide,
    MergeJump,
    MergeSlide,
    PawnStep,
    BlockedPawnStep,
    PawnTwoStep,
    BlockedPawnTwoStep,
    PawnCapture,
    StandardEp,
    BlockedEp,
    CaptureEp,
    CastleKingSide,
    CastleQueenSide,
}

impl Variant {
    pub const ALL: [Variant; 20] = [
        Variant::StandardJump,
        Variant::BlockedJump,
        Variant::CaptureJump,
        Variant::StandardSlide,
        Variant::BlockedSlide,
        Variant::CaptureSlide,
        Variant::SplitJump,
        Variant::SplitSlide,
        Variant::MergeJump,
        Variant::MergeSlide,
        Variant::PawnStep,
        Variant::BlockedPawnStep,
        Variant::PawnTwoStep,
        Variant::BlockedPawnTwoStep,
        Variant::PawnCapture,
        Variant::StandardEp,
        Variant::BlockedEp,
        Variant::CaptureEp,
        Variant::CastleKingSide,
        Variant::CastleQueenSide,
    ];

    /// Variants that introduce capture ancillas.
    pub fn captures(self) -> usize {
        match self {
            Variant::CaptureJump
            | Variant::CaptureSlide
            | Variant::PawnCapture
            | Variant::StandardEp
            | Variant::BlockedEp => 1,
            Variant::CaptureEp => 2,
            _ => 0,
        }
    }

    pub fn is_split_or_merge(self) -> bool {
        matches!(
            self,
            Variant::SplitJump | Variant::SplitSlide | Variant::MergeJump | Variant::MergeSlide
        )
    }

    pub fn name(self) -> &'static str {
        match self {
            Variant::StandardJump => "standard_jump",
            Variant::BlockedJump => "blocked_jump",
            Variant::CaptureJump => "capture_jump",
            Variant::StandardSlide => "standard_slide",
            Variant::BlockedSlide => "blocked_slide",
            Variant::CaptureSlide => "capture_slide",
            Variant::SplitJump => "split_jump",
            Variant::SplitSlide => "split_slide",
            Variant::MergeJump => "merge_jump",
            Variant::MergeSlide => "merge_slide",
            Variant::PawnStep => "pawn_step",
            Variant::BlockedPawnStep => "blocked_pawn_step",
            Variant::PawnTwoStep => "pawn_two_step",
            Variant::BlockedPawnTwoStep => "blocked_pawn_two_step",
            Variant::PawnCapture => "pawn_capture",
            Variant::StandardEp => "standard_ep",
            Variant::BlockedEp => "blocked_ep",
            Variant::CaptureEp => "capture_ep",
            Variant::CastleKingSide => "castle_king_side",
            Variant::CastleQueenSide => "castle_queen_side",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ImpossibleReason {
    /// No possibility equation holds for the move's geometry and values.
    NoVariant,
    /// A split target or merge source sits on the other leg's path.
    OverlappingLegs,
    PromotionRequired,
    PromotionNotAllowed,
    PromotionColor,
    /// Merge sources hold different values.
    MergeSourcesDiffer,
}

impl fmt::Display for ImpossibleReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ImpossibleReason::NoVariant => "no move variant is possible",
            ImpossibleReason::OverlappingLegs => "one leg of the move crosses the other",
            ImpossibleReason::PromotionRequired => "pawn reaching the last rank must promote",
            ImpossibleReason::PromotionNotAllowed => "only a pawn reaching the last rank promotes",
            ImpossibleReason::PromotionColor => "promotion piece belongs to the other side",
            ImpossibleReason::MergeSourcesDiffer => "merge sources hold different pieces",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MoveError {
    #[error("no piece on {0}")]
    EmptySource(Square),
    #[error("{square} holds a {found} piece but {expected} is to move")]
    WrongColor {
        square: Square,
        expected: Color,
        found: Color,
    },
    #[error("impossible move: {0}")]
    Impossible(ImpossibleReason),
    #[error("move needs a recorded measurement outcome")]
    MissingOutcome,
    #[error("move has no measurement but an outcome was recorded")]
    UnexpectedOutcome,
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error(transparent)]
    Unitary(#[from] UnitaryError),
}

impl MoveError {
    /// Stable machine-readable code.
    pub fn code(&self) -> &'static str {
        match self {
            MoveError::EmptySource(_) => "empty_source",
            MoveError::WrongColor { .. } => "wrong_color",
            MoveError::Impossible(_) => "impossible",
            MoveError::MissingOutcome => "missing_outcome",
            MoveError::UnexpectedOutcome => "unexpected_outcome",
            MoveError::Measure(MeasureError::ZeroProbability { .. }) => "corrupt_log",
            MoveError::Measure(_) | MoveError::Unitary(_) => "internal",
        }
    }
}
