//! Versioned JSON documents for positions and saved games.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::game::TurnPolicy;
use crate::qstate::{
    AncillaRegistry, BasisState, ClassicalLayer, ClassicalParseError, FlagSet, GameState,
    QStateError, Superposition, BOARD_BITS,
};
use crate::scalar::{Amp, Scalar};

pub const SAVE_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum SaveError {
    #[error("malformed document: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported document version {0}")]
    Version(u32),
    #[error("document scalar `{0}` is not f64")]
    Scalar(String),
    #[error("unsupported generator `{0}`")]
    Rng(String),
    #[error(transparent)]
    Classical(#[from] ClassicalParseError),
    #[error("basis key `{0}` does not fit the declared width")]
    Basis(String),
    #[error(transparent)]
    State(#[from] QStateError),
}

/// One amplitude: little-endian hex basis key, real part, imaginary part.
pub type AmplitudeEntry = (String, f64, f64);

/// A state triple. Classical-only documents omit `amplitudes`, in which
/// case the occupancy is the definite board of `v`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PositionDocument {
    pub version: u32,
    pub scalar: String,
    /// 64 value characters, a1 first, `.` for empty.
    pub v: String,
    pub flags: String,
    #[serde(default = "board_bits")]
    pub width: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amplitudes: Option<Vec<AmplitudeEntry>>,
    #[serde(default)]
    pub ancillas: AncillaRegistry,
}

fn board_bits() -> usize {
    BOARD_BITS
}

impl PositionDocument {
    pub fn from_state(state: &GameState<f64>) -> Self {
        let width = state.psi.width();
        PositionDocument {
            version: SAVE_VERSION,
            scalar: f64::NAME.to_string(),
            v: state.classical.value_string(),
            flags: state.classical.flags.to_string(),
            width,
            amplitudes: Some(
                state
                    .psi
                    .terms()
                    .map(|(b, a)| (b.to_hex(width), a.re, a.im))
                    .collect(),
            ),
            ancillas: state.ancillas.clone(),
        }
    }

    /// Classical-only document for a layer with a definite board.
    pub fn classical(layer: &ClassicalLayer) -> Self {
        PositionDocument {
            version: SAVE_VERSION,
            scalar: f64::NAME.to_string(),
            v: layer.value_string(),
            flags: layer.flags.to_string(),
            width: BOARD_BITS,
            amplitudes: None,
            ancillas: AncillaRegistry::new(),
        }
    }

    /// Rebuilds and validates the state triple.
    pub fn to_state(&self) -> Result<GameState<f64>, SaveError> {
        if self.version != SAVE_VERSION {
            return Err(SaveError::Version(self.version));
        }
        if self.scalar != f64::NAME {
            return Err(SaveError::Scalar(self.scalar.clone()));
        }
        let flags: FlagSet = self.flags.parse()?;
        let classical = ClassicalLayer::from_value_string(&self.v, flags)?;
        let psi = match &self.amplitudes {
            None => Superposition::classical(classical.occupied_mask())
                .widened(self.width.saturating_sub(BOARD_BITS)),
            Some(list) => {
                let mut terms = Vec::with_capacity(list.len());
                for (hex, re, im) in list {
                    let b = BasisState::from_hex(hex, self.width)
                        .ok_or_else(|| SaveError::Basis(hex.clone()))?;
                    terms.push((b, Amp::new(*re, *im)));
                }
                Superposition::from_terms(self.width, terms)?
            }
        };
        Ok(GameState::new(psi, classical, self.ancillas.clone())?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("position documents serialize")
    }

    /// Accepts a JSON position document or a FEN string.
    pub fn parse(text: &str) -> Result<GameState<f64>, SaveError> {
        let t = text.trim();
        if t.starts_with('{') {
            serde_json::from_str::<PositionDocument>(t)?.to_state()
        } else {
            Ok(GameState::from_classical(ClassicalLayer::from_fen(t)?))
        }
    }
}

/// A saved game: the current triple plus everything needed to replay it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SaveDocument {
    #[serde(flatten)]
    pub position: PositionDocument,
    pub initial: PositionDocument,
    pub policy: TurnPolicy,
    pub seed: u64,
    pub rng: String,
    /// Generator draws consumed so far.
    pub draws: u64,
    /// Accepted moves with outcome suffixes, in order.
    pub move_log: Vec<String>,
}

impl SaveDocument {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("save documents serialize")
    }

    pub fn from_json(text: &str) -> Result<SaveDocument, SaveError> {
        let doc: SaveDocument = serde_json::from_str(text)?;
        if doc.position.version != SAVE_VERSION {
            return Err(SaveError::Version(doc.position.version));
        }
        if doc.rng != crate::measure::RNG_ALGORITHM {
            return Err(SaveError::Rng(doc.rng));
        }
        Ok(doc)
    }
}
