use std::collections::HashMap;

use num_traits::{One, Zero};

use super::{BasisState, QStateError};
use crate::scalar::{Amp, Scalar};

/// Sparse occupancy superposition: basis states with complex amplitudes.
///
/// Terms are kept sorted by basis state so that every derived quantity,
/// including floating-point accumulation order, is reproducible.
#[derive(Debug, Clone, PartialEq)]
pub struct Superposition<T> {
    terms: Vec<(BasisState, Amp<T>)>,
    width: usize,
}

pub const BOARD_BITS: usize = 64;

impl<T: Scalar> Superposition<T> {
    /// A single board configuration with amplitude one.
    pub fn classical(board: u64) -> Self {
        Superposition {
            terms: vec![(BasisState::from_board(board), Amp::one())],
            width: BOARD_BITS,
        }
    }

    /// Builds a state from raw terms. Duplicate keys are summed, tiny
    /// amplitudes pruned; the norm is checked but not altered.
    pub fn from_terms(
        width: usize,
        terms: impl IntoIterator<Item = (BasisState, Amp<T>)>,
    ) -> Result<Self, QStateError> {
        if width < BOARD_BITS {
            return Err(QStateError::WidthMismatch {
                left: width,
                right: BOARD_BITS,
            });
        }
        let mut acc = Accumulator::new(width);
        for (mut b, a) in terms {
            if !(a.re.is_finite() && a.im.is_finite()) {
                return Err(QStateError::NonFinite);
            }
            if b.word_count() > BasisState::zeros(width).word_count() || high_bit(&b) >= width {
                return Err(QStateError::IndexOutOfRange {
                    index: high_bit(&b),
                    width,
                });
            }
            b.ensure_width(width);
            acc.add(b, a);
        }
        let s = acc.finish();
        let n = s.norm_sqr();
        if (n - T::one()).abs() > T::NORM {
            return Err(QStateError::NotNormalized(n.to_f64().unwrap_or(f64::NAN)));
        }
        Ok(s)
    }

    /// Total bit width: 64 board bits plus ancillas.
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn ancilla_width(&self) -> usize {
        self.width - BOARD_BITS
    }

    /// Number of stored basis terms.
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl ExactSizeIterator<Item = (&BasisState, &Amp<T>)> {
        self.terms.iter().map(|(b, a)| (b, a))
    }

    pub fn amplitude(&self, b: &BasisState) -> Amp<T> {
        match self.terms.binary_search_by(|(k, _)| k.cmp(b)) {
            Ok(i) => self.terms[i].1,
            Err(_) => Amp::zero(),
        }
    }

    pub fn norm_sqr(&self) -> T {
        self.terms
            .iter()
            .fold(T::zero(), |acc, (_, a)| acc + a.norm_sqr())
    }

    fn check_index(&self, i: usize) -> Result<(), QStateError> {
        if i < self.width {
            Ok(())
        } else {
            Err(QStateError::IndexOutOfRange {
                index: i,
                width: self.width,
            })
        }
    }

    /// Probability that bit `i` (square or ancilla) is occupied.
    pub fn marginal(&self, i: usize) -> Result<T, QStateError> {
        self.check_index(i)?;
        Ok(self.probability_where(|b| b.get(i)))
    }

    /// Occupancy probability of every board square, computed in one pass.
    pub fn board_marginals(&self) -> [T; 64] {
        let mut out = [T::zero(); 64];
        for (b, a) in &self.terms {
            let p = a.norm_sqr();
            let mut rest = b.board();
            while rest != 0 {
                out[rest.trailing_zeros() as usize] = out[rest.trailing_zeros() as usize] + p;
                rest &= rest - 1;
            }
        }
        out
    }

    /// Probability that every bit in `ones` is set and every bit in `zeros`
    /// is clear.
    pub fn joint_probability(&self, ones: &[usize], zeros: &[usize]) -> Result<T, QStateError> {
        for &i in ones.iter().chain(zeros) {
            self.check_index(i)?;
        }
        if let Some(&i) = ones.iter().find(|i| zeros.contains(i)) {
            return Err(QStateError::OverlappingSets(i));
        }
        Ok(self.probability_where(|b| {
            ones.iter().all(|&i| b.get(i)) && zeros.iter().all(|&i| !b.get(i))
        }))
    }

    /// Born-rule probability of the subspace selected by `pred`.
    pub fn probability_where(&self, pred: impl Fn(&BasisState) -> bool) -> T {
        self.terms
            .iter()
            .filter(|(b, _)| pred(b))
            .fold(T::zero(), |acc, (_, a)| acc + a.norm_sqr())
    }

    /// Tensors in one fresh ancilla in state `|0⟩`, returning its bit index.
    pub fn append_ancilla(&mut self) -> usize {
        let index = self.width;
        self.width += 1;
        for (b, _) in &mut self.terms {
            b.ensure_width(self.width);
        }
        // Widening never reorders: new zero words compare equal across keys.
        index
    }

    /// Widened copy with `n` extra zero ancillas.
    pub fn widened(&self, n: usize) -> Self {
        let mut s = self.clone();
        for _ in 0..n {
            s.append_ancilla();
        }
        s
    }

    /// Equality up to a global phase, fixed by this state's
    /// largest-magnitude term.
    pub fn equal_mod_global_phase(&self, other: &Self, tol: T) -> Result<bool, QStateError> {
        if self.width != other.width {
            return Err(QStateError::WidthMismatch {
                left: self.width,
                right: other.width,
            });
        }
        let Some((key, a)) = self
            .terms
            .iter()
            .max_by(|x, y| x.1.norm_sqr().partial_cmp(&y.1.norm_sqr()).unwrap())
        else {
            return Ok(other.terms.is_empty());
        };
        let b = other.amplitude(key);
        if b.norm() <= tol {
            return Ok(false);
        }
        let ratio = *a / b;
        let phase = ratio / ratio.norm();
        let close = |x: Amp<T>, y: Amp<T>| (x - phase * y).norm() <= tol;
        let forward = self
            .terms
            .iter()
            .all(|(k, x)| close(*x, other.amplitude(k)));
        let backward = other
            .terms
            .iter()
            .all(|(k, y)| close(self.amplitude(k), *y));
        Ok(forward && backward)
    }

    /// Drops terms below the prune threshold and rescales to unit norm.
    pub fn prune_and_renormalize(self) -> Result<Self, QStateError> {
        let width = self.width;
        let mut terms: Vec<_> = self
            .terms
            .into_iter()
            .filter(|(_, a)| a.norm() >= T::PRUNE)
            .collect();
        let n = terms
            .iter()
            .fold(T::zero(), |acc, (_, a)| acc + a.norm_sqr());
        if n <= T::zero() || !n.is_finite() {
            return Err(QStateError::ZeroNorm);
        }
        let scale = n.sqrt().recip();
        for (_, a) in &mut terms {
            *a = *a * scale;
        }
        terms.retain(|(_, a)| a.norm() >= T::PRUNE);
        Ok(Superposition { terms, width })
    }

    /// Keeps only the terms selected by `pred`, renormalized.
    pub fn project(&self, pred: impl Fn(&BasisState) -> bool) -> Result<Self, QStateError> {
        Superposition {
            terms: self
                .terms
                .iter()
                .filter(|(b, _)| pred(b))
                .cloned()
                .collect(),
            width: self.width,
        }
        .prune_and_renormalize()
    }

    /// Linear map given per basis term. `f` pushes `(output, amplitude)`
    /// contributions for one input term.
    pub(crate) fn map_linear<F>(&self, mut f: F) -> Result<Self, QStateError>
    where
        F: FnMut(&BasisState, Amp<T>, &mut Accumulator<T>),
    {
        let mut acc = Accumulator::with_capacity(self.width, self.terms.len() * 2);
        for (b, a) in &self.terms {
            f(b, *a, &mut acc);
        }
        acc.finish().prune_and_renormalize()
    }

    /// Board-square bits only, grouped: each distinct board pattern with its
    /// total probability.
    pub fn board_distribution(&self) -> Vec<(u64, T)> {
        let mut out: Vec<(u64, T)> = Vec::new();
        let mut map: HashMap<u64, usize> = HashMap::new();
        for (b, a) in &self.terms {
            let e = *map.entry(b.board()).or_insert_with(|| {
                out.push((b.board(), T::zero()));
                out.len() - 1
            });
            out[e].1 = out[e].1 + a.norm_sqr();
        }
        out.sort_by_key(|(k, _)| *k);
        out
    }
}

fn high_bit(b: &BasisState) -> usize {
    let n = b.word_count();
    for w in (0..n).rev() {
        for bit in (0..64).rev() {
            if b.get(w * 64 + bit) {
                return w * 64 + bit;
            }
        }
    }
    0
}

/// Order-stable sum of contributions keyed by basis state.
pub(crate) struct Accumulator<T> {
    map: HashMap<BasisState, Amp<T>>,
    width: usize,
}

impl<T: Scalar> Accumulator<T> {
    pub(crate) fn new(width: usize) -> Self {
        Accumulator {
            map: HashMap::new(),
            width,
        }
    }

    pub(crate) fn with_capacity(width: usize, cap: usize) -> Self {
        Accumulator {
            map: HashMap::with_capacity(cap),
            width,
        }
    }

    #[inline]
    pub(crate) fn add(&mut self, b: BasisState, a: Amp<T>) {
        let slot = self.map.entry(b).or_insert_with(Amp::zero);
        *slot = *slot + a;
    }

    pub(crate) fn finish(self) -> Superposition<T> {
        let mut terms: Vec<_> = self
            .map
            .into_iter()
            .filter(|(_, a)| a.norm() >= T::PRUNE)
            .collect();
        terms.sort_by(|x, y| x.0.cmp(&y.0));
        Superposition {
            terms,
            width: self.width,
        }
    }
}
