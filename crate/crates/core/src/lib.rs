//! Quantum chess engine: occupancy superpositions over a classical value map,
//! movement unitaries, no-double-occupancy measurements, notation and
//! superposition-size bounds.
//!
//! Everything amplitude-bearing is generic over [`Scalar`]; the aliases at the
//! crate root fix the default `f64` precision.

pub mod bounds;
pub mod demos;
pub mod game;
pub mod measure;
pub mod moves;
pub mod notation;
pub mod piece;
pub mod predicate;
pub mod qstate;
pub mod scalar;
pub mod square;
pub mod unitaries;

pub use game::{Game, GameError, GameStatus, TurnPolicy};
pub use moves::{classify, execute, Move, MoveError, MoveShape, Variant};
pub use piece::{Color, Piece, PieceKind};
pub use predicate::Predicate;
pub use qstate::{BasisState, ClassicalLayer, FlagSet};
pub use scalar::{Amp, Scalar};
pub use square::{sq, Square};

pub type Superposition = qstate::Superposition<f64>;
pub type GameState = qstate::GameState<f64>;
