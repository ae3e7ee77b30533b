//! Hybrid game state: the occupancy superposition, the classical value map
//! with its flags, and the ancilla registry.

mod ancilla;
mod basis;
mod classical;
mod superposition;

use thiserror::Error;

pub use ancilla::{AncillaEntry, AncillaKind, AncillaRegistry};
pub use basis::BasisState;
pub use classical::{ClassicalLayer, ClassicalParseError, FlagSet};
pub(crate) use superposition::Accumulator;
pub use superposition::{Superposition, BOARD_BITS};

use crate::piece::{Color, Piece, PieceKind};
use crate::scalar::Scalar;
use crate::square::Square;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QStateError {
    #[error("bit {index} outside state width {width}")]
    IndexOutOfRange { index: usize, width: usize },
    #[error("bit {0} is in both the ones and zeros sets")]
    OverlappingSets(usize),
    #[error("width mismatch: {left} vs {right}")]
    WidthMismatch { left: usize, right: usize },
    #[error("projection onto an empty subspace")]
    ZeroNorm,
    #[error("squared norm {0} differs from one")]
    NotNormalized(f64),
    #[error("non-finite amplitude")]
    NonFinite,
    #[error("square {square} has value `{value}` but occupancy probability {probability}")]
    Inconsistent {
        square: Square,
        value: char,
        probability: f64,
    },
    #[error("ancilla registry holds {registry} entries but the state has {state} ancilla bits")]
    AncillaMismatch { registry: usize, state: usize },
}

/// The state triple plus the ancilla bookkeeping that accompanies `psi`.
#[derive(Debug, Clone, PartialEq)]
pub struct GameState<T> {
    pub psi: Superposition<T>,
    pub classical: ClassicalLayer,
    pub ancillas: AncillaRegistry,
}

impl<T: Scalar> GameState<T> {
    pub fn start() -> Self {
        Self::from_classical(ClassicalLayer::start())
    }

    /// Definite state matching the occupied squares of `classical`.
    pub fn from_classical(classical: ClassicalLayer) -> Self {
        GameState {
            psi: Superposition::classical(classical.occupied_mask()),
            classical,
            ancillas: AncillaRegistry::new(),
        }
    }

    /// Validates norm, ancilla bookkeeping and the value-map consistency rule.
    pub fn new(
        psi: Superposition<T>,
        classical: ClassicalLayer,
        ancillas: AncillaRegistry,
    ) -> Result<Self, QStateError> {
        let s = GameState {
            psi,
            classical,
            ancillas,
        };
        s.check()?;
        Ok(s)
    }

    pub fn check(&self) -> Result<(), QStateError> {
        if self.ancillas.len() != self.psi.ancilla_width() || !self.ancillas.is_contiguous() {
            return Err(QStateError::AncillaMismatch {
                registry: self.ancillas.len(),
                state: self.psi.ancilla_width(),
            });
        }
        let n = self.psi.norm_sqr();
        if (n - T::one()).abs() > T::NORM {
            return Err(QStateError::NotNormalized(n.to_f64().unwrap_or(f64::NAN)));
        }
        let marginals = self.psi.board_marginals();
        for s in Square::all() {
            let p = marginals[s.index()];
            let v = self.classical.get(s);
            if v.is_some() != (p > T::ZERO_PROB) {
                return Err(QStateError::Inconsistent {
                    square: s,
                    value: crate::piece::value_char(v),
                    probability: p.to_f64().unwrap_or(f64::NAN),
                });
            }
        }
        Ok(())
    }

    /// Appends a capture ancilla for a piece that may be taken from `origin`.
    pub fn append_ancilla(&mut self, captured: Option<Piece>, origin: Square, ply: u32) -> usize {
        let index = self.psi.append_ancilla();
        let recorded = self.ancillas.push(captured, origin, ply);
        debug_assert_eq!(index, recorded);
        index
    }

    pub fn marginal(&self, s: Square) -> T {
        self.psi.marginal(s.index()).expect("board square in range")
    }

    /// Probability that at least one square valued as `color`'s king is
    /// occupied.
    pub fn king_presence(&self, color: Color) -> T {
        let king = Piece::new(color, PieceKind::King);
        let mask = Square::all()
            .filter(|s| self.classical.get(*s) == Some(king))
            .fold(0u64, |m, s| m | 1 << s.index());
        self.psi.probability_where(|b| b.board() & mask != 0)
    }
}
