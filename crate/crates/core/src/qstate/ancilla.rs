use serde::{Deserialize, Serialize};

use crate::piece::Piece;
use crate::square::Square;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AncillaKind {
    /// Receives a captured piece's occupancy.
    Captured,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AncillaEntry {
    pub index: usize,
    /// Value of the piece that may have been swapped in.
    pub captured: Option<Piece>,
    pub origin: Square,
    pub ply: u32,
    pub kind: AncillaKind,
}

/// Append-only record of ancilla qubits; entry `k` describes bit `64 + k`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AncillaRegistry {
    entries: Vec<AncillaEntry>,
}

impl AncillaRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn entries(&self) -> &[AncillaEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn next_index(&self) -> usize {
        64 + self.entries.len()
    }

    pub(crate) fn push(&mut self, captured: Option<Piece>, origin: Square, ply: u32) -> usize {
        let index = self.next_index();
        self.entries.push(AncillaEntry {
            index,
            captured,
            origin,
            ply,
            kind: AncillaKind::Captured,
        });
        index
    }

    /// True when indices run contiguously from 64.
    pub fn is_contiguous(&self) -> bool {
        self.entries
            .iter()
            .enumerate()
            .all(|(k, e)| e.index == 64 + k)
    }
}
