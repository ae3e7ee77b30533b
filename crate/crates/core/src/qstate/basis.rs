use std::fmt;

use smallvec::SmallVec;

/// One classical occupancy configuration: bits `0..64` are the board squares,
/// bits from 64 upward are ancillas in append order.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct BasisState {
    words: SmallVec<[u64; 2]>,
}

impl BasisState {
    /// Board-only basis state.
    pub fn from_board(board: u64) -> BasisState {
        let mut words = SmallVec::new();
        words.push(board);
        BasisState { words }
    }

    /// Basis state of total `width` bits with the given bits set.
    pub fn with_bits(width: usize, ones: impl IntoIterator<Item = usize>) -> BasisState {
        let mut b = BasisState::zeros(width);
        for i in ones {
            assert!(i < width, "bit {i} outside width {width}");
            b.set(i, true);
        }
        b
    }

    pub fn zeros(width: usize) -> BasisState {
        let n = width.max(64).div_ceil(64);
        BasisState {
            words: SmallVec::from_elem(0, n),
        }
    }

    #[inline]
    pub fn board(&self) -> u64 {
        self.words[0]
    }

    #[inline]
    pub fn get(&self, bit: usize) -> bool {
        self.words
            .get(bit / 64)
            .is_some_and(|w| (w >> (bit % 64)) & 1 == 1)
    }

    #[inline]
    pub fn set(&mut self, bit: usize, value: bool) {
        let w = bit / 64;
        if w >= self.words.len() {
            self.words.resize(w + 1, 0);
        }
        let mask = 1u64 << (bit % 64);
        if value {
            self.words[w] |= mask;
        } else {
            self.words[w] &= !mask;
        }
    }

    /// Occupied bits overall (board plus ancillas).
    pub fn popcount(&self) -> u32 {
        self.words.iter().map(|w| w.count_ones()).sum()
    }

    /// Occupied ancilla bits.
    pub fn ancilla_popcount(&self) -> u32 {
        self.words[1..].iter().map(|w| w.count_ones()).sum()
    }

    /// Makes room for bit `width - 1` so that every key of a given width has
    /// the same word layout.
    pub(crate) fn ensure_width(&mut self, width: usize) {
        let n = width.max(64).div_ceil(64);
        if self.words.len() < n {
            self.words.resize(n, 0);
        }
    }

    pub(crate) fn word_count(&self) -> usize {
        self.words.len()
    }

    /// Little-endian hex: the first character holds bits 0..4, and within a
    /// character bit `4k + j` has weight `2^j`.
    pub fn to_hex(&self, width: usize) -> String {
        let digits = width.div_ceil(4);
        (0..digits)
            .map(|k| {
                let word = self.words.get(k * 4 / 64).copied().unwrap_or(0);
                let nib = (word >> ((k * 4) % 64)) & 0xf;
                char::from_digit(nib as u32, 16).unwrap()
            })
            .collect()
    }

    /// Inverse of [`BasisState::to_hex`]; rejects set bits at or beyond `width`.
    pub fn from_hex(hex: &str, width: usize) -> Option<BasisState> {
        if hex.len() != width.div_ceil(4) {
            return None;
        }
        let mut b = BasisState::zeros(width);
        for (k, c) in hex.chars().enumerate() {
            let nib = c.to_digit(16)? as u64;
            for j in 0..4 {
                if nib >> j & 1 == 1 {
                    let bit = 4 * k + j;
                    if bit >= width {
                        return None;
                    }
                    b.set(bit, true);
                }
            }
        }
        Some(b)
    }
}

impl fmt::Debug for BasisState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "|")?;
        let mut first = true;
        for (w, word) in self.words.iter().enumerate() {
            let mut rest = *word;
            while rest != 0 {
                let bit = w * 64 + rest.trailing_zeros() as usize;
                rest &= rest - 1;
                if !first {
                    write!(f, ",")?;
                }
                first = false;
                if bit < 64 {
                    write!(f, "{}", crate::Square::new(bit as u8).unwrap())?;
                } else {
                    write!(f, "#{bit}")?;
                }
            }
        }
        write!(f, "⟩")
    }
}
