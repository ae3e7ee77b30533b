//! Upper bounds on superposition size and the runtime size guard.
//!
//! A piece value `v` spread over `s_v` squares with at most `m_v` copies
//! present spans `S_v = sum_{j <= m_v} C(s_v, j)` occupancy patterns. Values
//! occupy disjoint squares, so the whole board is bounded by the product of
//! the `S_v` over all twelve values.

use std::collections::HashMap;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::piece::{Color, Piece, PieceKind};
use crate::qstate::GameState;
use crate::scalar::Scalar;
use crate::square::Square;

/// Largest multiplicity any value can reach: two starting pieces plus eight
/// promotions.
pub const MAX_MULTIPLICITY: u32 = 10;

/// Promotions available to each side.
pub const PAWNS_PER_SIDE: u32 = 8;

/// Exact binomial coefficient.
pub fn binomial(n: u32, k: u32) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc *= n - i;
        acc /= i + 1;
    }
    acc
}

/// `S(s, m) = sum_{j=0}^{m} C(s, j)`.
pub fn subspace_size(s: u32, m: u32) -> BigUint {
    (0..=m.min(s)).map(|j| binomial(s, j)).sum()
}

/// Arrangements of up to 32 pieces on 64 squares, ignoring piece values.
pub fn naive_bound() -> BigUint {
    (0..=32).map(|k| binomial(64, k)).sum()
}

/// Squares and multiplicity for one piece value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Zeta {
    pub squares: u32,
    pub multiplicity: u32,
}

impl Zeta {
    pub const fn new(squares: u32, multiplicity: u32) -> Zeta {
        Zeta {
            squares,
            multiplicity,
        }
    }
}

/// Starting multiplicity of a value.
pub fn start_multiplicity(kind: PieceKind) -> u32 {
    match kind {
        PieceKind::Pawn => 8,
        PieceKind::Knight | PieceKind::Bishop | PieceKind::Rook => 2,
        PieceKind::Queen | PieceKind::King => 1,
    }
}

/// Promotions a multiplicity choice consumes: pawns still on the board plus
/// copies beyond the starting count of each promotable value.
fn promotion_cost(kind: PieceKind, m: u32) -> u32 {
    match kind {
        PieceKind::Pawn => m,
        PieceKind::King => 0,
        _ => m.saturating_sub(start_multiplicity(kind)),
    }
}

fn max_multiplicity(kind: PieceKind) -> u32 {
    match kind {
        PieceKind::Pawn => PAWNS_PER_SIDE,
        PieceKind::King => 1,
        k => start_multiplicity(k) + PAWNS_PER_SIDE,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BudgetError {
    #[error("budget uses {0} squares")]
    TooManySquares(u32),
    #[error("{0} must have multiplicity 1")]
    King(Color),
    #[error("{0} spends {1} promotions")]
    Promotions(Color, u32),
}

/// A per-value budget of squares and multiplicities.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PieceBudget {
    entries: Vec<(Piece, Zeta)>,
}

impl PieceBudget {
    /// Values absent from `entries` get `{0, 0}`, except kings which need an
    /// explicit entry.
    pub fn new(entries: impl IntoIterator<Item = (Piece, Zeta)>) -> PieceBudget {
        let mut map: HashMap<Piece, Zeta> = entries.into_iter().collect();
        let entries = all_values()
            .map(|p| (p, map.remove(&p).unwrap_or(Zeta::new(0, 0))))
            .collect();
        PieceBudget { entries }
    }

    pub fn get(&self, p: Piece) -> Zeta {
        self.entries
            .iter()
            .find(|(q, _)| *q == p)
            .map(|(_, z)| *z)
            .unwrap()
    }

    pub fn entries(&self) -> &[(Piece, Zeta)] {
        &self.entries
    }

    pub fn validate(&self) -> Result<(), BudgetError> {
        let squares: u32 = self.entries.iter().map(|(_, z)| z.squares).sum();
        if squares > 64 {
            return Err(BudgetError::TooManySquares(squares));
        }
        for color in [Color::White, Color::Black] {
            if self.get(Piece::new(color, PieceKind::King)).multiplicity != 1 {
                return Err(BudgetError::King(color));
            }
            let spent: u32 = PieceKind::ALL
                .iter()
                .map(|&k| promotion_cost(k, self.get(Piece::new(color, k)).multiplicity))
                .sum();
            if spent > PAWNS_PER_SIDE {
                return Err(BudgetError::Promotions(color, spent));
            }
        }
        Ok(())
    }

    /// Product of the per-value subspace sizes.
    pub fn size(&self) -> BigUint {
        self.entries
            .iter()
            .map(|(_, z)| subspace_size(z.squares, z.multiplicity))
            .product()
    }

    /// The bound for a constrained budget.
    pub fn checked_size(&self) -> Result<BigUint, BudgetError> {
        self.validate()?;
        Ok(self.size())
    }

    /// Budget realized by a state: `s_v` counts squares valued `v` and `m_v`
    /// is the largest number of them occupied in a single basis term.
    pub fn of_state<T: Scalar>(state: &GameState<T>) -> PieceBudget {
        let mut masks: HashMap<Piece, u64> = HashMap::new();
        for s in Square::all() {
            if let Some(p) = state.classical.get(s) {
                *masks.entry(p).or_default() |= 1 << s.index();
            }
        }
        PieceBudget::new(masks.into_iter().map(|(p, mask)| {
            let m = state
                .psi
                .terms()
                .map(|(b, _)| (b.board() & mask).count_ones())
                .max()
                .unwrap_or(0);
            (p, Zeta::new(mask.count_ones(), m))
        }))
    }
}

fn all_values() -> impl Iterator<Item = Piece> {
    [Color::White, Color::Black]
        .into_iter()
        .flat_map(|c| PieceKind::ALL.into_iter().map(move |k| Piece::new(c, k)))
}

/// Table of `S(s, m)` for `s <= 64`, `m <= MAX_MULTIPLICITY`.
struct SizeTable(Vec<Vec<BigUint>>);

impl SizeTable {
    fn new() -> Self {
        SizeTable(
            (0..=64)
                .map(|s| {
                    (0..=MAX_MULTIPLICITY)
                        .map(|m| subspace_size(s, m))
                        .collect()
                })
                .collect(),
        )
    }

    fn get(&self, s: u32, m: u32) -> &BigUint {
        &self.0[s as usize][m as usize]
    }
}

/// A product together with the choices that produced it.
type Scored = (BigUint, Vec<(Piece, Zeta)>);

/// Best single-color assignment: `best[q]` maximizes the product over the
/// six values using at most `q` squares.
fn best_for_color(color: Color, table: &SizeTable) -> Vec<Scored> {
    let budget = PAWNS_PER_SIDE as usize;
    // dp[q][b]: best product and choice list using at most q squares and b promotions
    let mut dp: Vec<Vec<Scored>> = vec![vec![(BigUint::one(), Vec::new()); budget + 1]; 65];
    for kind in PieceKind::ALL {
        let piece = Piece::new(color, kind);
        let mut next: Vec<Vec<Scored>> = vec![vec![(BigUint::zero(), Vec::new()); budget + 1]; 65];
        let m_range = if kind == PieceKind::King {
            1..=1
        } else {
            0..=max_multiplicity(kind)
        };
        for q in 0..=64u32 {
            for b in 0..=budget {
                let mut best: Option<(BigUint, Zeta)> = None;
                let mut best_prev = (0usize, 0usize);
                for m in m_range.clone() {
                    let cost = promotion_cost(kind, m) as usize;
                    if cost > b {
                        continue;
                    }
                    for s in 0..=q {
                        let prev = &dp[(q - s) as usize][b - cost];
                        let v = table.get(s, m) * &prev.0;
                        if best.as_ref().is_none_or(|(bv, _)| v > *bv) {
                            best = Some((v, Zeta::new(s, m)));
                            best_prev = ((q - s) as usize, b - cost);
                        }
                    }
                }
                if let Some((v, z)) = best {
                    let mut choice = dp[best_prev.0][best_prev.1].1.clone();
                    choice.push((piece, z));
                    next[q as usize][b] = (v, choice);
                }
            }
        }
        dp = next;
    }
    dp.into_iter().map(|row| row[budget].clone()).collect()
}

/// Exhaustive maximization of the product bound over all feasible budgets.
pub fn max_superposition_size() -> (BigUint, PieceBudget) {
    let table = SizeTable::new();
    let white = best_for_color(Color::White, &table);
    let black = best_for_color(Color::Black, &table);
    let mut best: Option<(BigUint, usize)> = None;
    for q in 0..=64usize {
        let v = &white[q].0 * &black[64 - q].0;
        if best.as_ref().is_none_or(|(bv, _)| v > *bv) {
            best = Some((v, q));
        }
    }
    let (value, q) = best.expect("nonempty range");
    let budget = PieceBudget::new(white[q].1.iter().chain(&black[64 - q].1).copied());
    (value, budget)
}

/// `log10` of a big integer, accurate to double precision.
pub fn log10(x: &BigUint) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    let bits = x.bits();
    if bits <= 1000 {
        return x.to_f64().expect("fits in f64").log10();
    }
    let shift = bits - 64;
    (x >> shift).to_f64().unwrap().log10() + shift as f64 * std::f64::consts::LOG10_2
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HeatmapCell {
    pub m: u32,
    pub s: u32,
    pub log10_bound: f64,
}

/// Single-piece bound `log10 S(s, m)` over the given inclusive ranges.
pub fn heatmap(m_range: (u32, u32), s_range: (u32, u32)) -> Vec<HeatmapCell> {
    let mut out = Vec::new();
    for m in m_range.0..=m_range.1 {
        for s in s_range.0..=s_range.1 {
            out.push(HeatmapCell {
                m,
                s,
                log10_bound: log10(&subspace_size(s, m)),
            });
        }
    }
    out
}

/// Smallest `s <= 64` with `S(s, m) >= threshold`, per multiplicity.
pub fn contour(threshold: &BigUint, m_range: (u32, u32)) -> Vec<(u32, Option<u32>)> {
    (m_range.0..=m_range.1)
        .map(|m| (m, (0..=64).find(|&s| subspace_size(s, m) >= *threshold)))
        .collect()
}

pub fn heatmap_csv(cells: &[HeatmapCell]) -> String {
    let mut out = String::from("m,s,log10_bound\n");
    for c in cells {
        out.push_str(&format!("{},{},{:.6}\n", c.m, c.s, c.log10_bound));
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GuardMode {
    Off,
    Warn,
    /// Also refuses splits and merges when doubling the term count would
    /// pass the ceiling.
    Deny,
}

/// Ceiling on stored terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Guard {
    pub ceiling: usize,
    pub mode: GuardMode,
}

pub const DEFAULT_CEILING: usize = 1_000_000;

impl Default for Guard {
    fn default() -> Self {
        Guard {
            ceiling: DEFAULT_CEILING,
            mode: GuardMode::Warn,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum GuardVerdict {
    Ok { terms: usize },
    Warn { terms: usize, ceiling: usize },
    Deny { terms: usize, ceiling: usize },
}

impl Guard {
    /// Verdict on the current term count.
    pub fn check(&self, terms: usize) -> GuardVerdict {
        if self.mode != GuardMode::Off && terms > self.ceiling {
            GuardVerdict::Warn {
                terms,
                ceiling: self.ceiling,
            }
        } else {
            GuardVerdict::Ok { terms }
        }
    }

    /// Verdict before a move; a split or merge can at most double the terms.
    pub fn check_move(&self, terms: usize, split_or_merge: bool) -> GuardVerdict {
        if self.mode == GuardMode::Deny && split_or_merge && terms.saturating_mul(2) > self.ceiling
        {
            GuardVerdict::Deny {
                terms,
                ceiling: self.ceiling,
            }
        } else {
            GuardVerdict::Ok { terms }
        }
    }
}
