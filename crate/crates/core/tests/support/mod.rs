//! Shared test oracles.
//!
//! `matrices` holds the movement operators typed in as dense row-major
//! arrays. `Dense` is an independent state-vector simulator over a handful of
//! squares that runs each move variant as an explicit circuit: measurement
//! and path conditions are copied into work qubits, operators are applied as
//! full matrices, and work qubits are checked to be classical functions of
//! the register before they are dropped.

#![allow(dead_code)]

use std::collections::BTreeSet;

use num_complex::Complex64 as C;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qchess::measure::RngStream;
use qchess::moves::{legal_moves, MovePlan, OutcomeSource};
use qchess::{
    classify, execute, sq, ClassicalLayer, Color, FlagSet, GameState, Move, MoveShape, Piece,
    PieceKind, Square, Superposition, Variant,
};

pub type Mat = Vec<Vec<C>>;

pub mod matrices {
    use super::{Mat, C};

    const Z: C = C::new(0.0, 0.0);
    const O: C = C::new(1.0, 0.0);
    const I: C = C::new(0.0, 1.0);
    const NI: C = C::new(0.0, -1.0);

    fn h() -> f64 {
        std::f64::consts::FRAC_1_SQRT_2
    }

    fn rows<const N: usize>(r: [[C; N]; N]) -> Mat {
        r.iter().map(|row| row.to_vec()).collect()
    }

    /// Basis `|t,s⟩`.
    pub fn jump() -> Mat {
        rows([[O, Z, Z, Z], [Z, Z, I, Z], [Z, I, Z, Z], [Z, Z, Z, O]])
    }

    /// Basis `|p,t,s⟩`; identity when the path bit is set.
    pub fn slide() -> Mat {
        let mut m = identity(8);
        m[1][1] = Z;
        m[2][2] = Z;
        m[1][2] = I;
        m[2][1] = I;
        m
    }

    /// `√iSwap(s,t1)` on `|t2,t1,s⟩`.
    pub fn root_iswap_s_t1() -> Mat {
        let a = C::new(h(), 0.0);
        let b = C::new(0.0, h());
        rows([
            [O, Z, Z, Z, Z, Z, Z, Z],
            [Z, a, b, Z, Z, Z, Z, Z],
            [Z, b, a, Z, Z, Z, Z, Z],
            [Z, Z, Z, O, Z, Z, Z, Z],
            [Z, Z, Z, Z, O, Z, Z, Z],
            [Z, Z, Z, Z, Z, a, b, Z],
            [Z, Z, Z, Z, Z, b, a, Z],
            [Z, Z, Z, Z, Z, Z, Z, O],
        ])
    }

    /// `iSwap(s,t2)` on `|t2,t1,s⟩`. Entry (4,4) is zero: a one there would
    /// break unitarity.
    pub fn iswap_s_t2() -> Mat {
        rows([
            [O, Z, Z, Z, Z, Z, Z, Z],
            [Z, Z, Z, Z, I, Z, Z, Z],
            [Z, Z, O, Z, Z, Z, Z, Z],
            [Z, Z, Z, Z, Z, Z, I, Z],
            [Z, I, Z, Z, Z, Z, Z, Z],
            [Z, Z, Z, Z, Z, O, Z, Z],
            [Z, Z, Z, I, Z, Z, Z, Z],
            [Z, Z, Z, Z, Z, Z, Z, O],
        ])
    }

    /// `iSwap(s,t1)` on `|t2,t1,s⟩`.
    pub fn iswap_s_t1() -> Mat {
        rows([
            [O, Z, Z, Z, Z, Z, Z, Z],
            [Z, Z, I, Z, Z, Z, Z, Z],
            [Z, I, Z, Z, Z, Z, Z, Z],
            [Z, Z, Z, O, Z, Z, Z, Z],
            [Z, Z, Z, Z, O, Z, Z, Z],
            [Z, Z, Z, Z, Z, Z, I, Z],
            [Z, Z, Z, Z, Z, I, Z, Z],
            [Z, Z, Z, Z, Z, Z, Z, O],
        ])
    }

    /// Basis `|t2,t1,s⟩`.
    pub fn split() -> Mat {
        let p = C::new(h(), 0.0);
        let n = C::new(-h(), 0.0);
        let q = C::new(0.0, h());
        rows([
            [O, Z, Z, Z, Z, Z, Z, Z],
            [Z, Z, Z, Z, I, Z, Z, Z],
            [Z, q, p, Z, Z, Z, Z, Z],
            [Z, Z, Z, Z, Z, n, q, Z],
            [Z, q, n, Z, Z, Z, Z, Z],
            [Z, Z, Z, Z, Z, q, n, Z],
            [Z, Z, Z, I, Z, Z, Z, Z],
            [Z, Z, Z, Z, Z, Z, Z, O],
        ])
    }

    /// Basis `|s1,s2,t⟩`.
    pub fn merge() -> Mat {
        let p = C::new(h(), 0.0);
        let n = C::new(-h(), 0.0);
        let nq = C::new(0.0, -h());
        rows([
            [O, Z, Z, Z, Z, Z, Z, Z],
            [Z, Z, nq, Z, nq, Z, Z, Z],
            [Z, Z, p, Z, n, Z, Z, Z],
            [Z, Z, Z, Z, Z, Z, NI, Z],
            [Z, NI, Z, Z, Z, Z, Z, Z],
            [Z, Z, Z, n, Z, nq, Z, Z],
            [Z, Z, Z, nq, Z, n, Z, Z],
            [Z, Z, Z, Z, Z, Z, Z, O],
        ])
    }

    /// `iSwap†(s2,t)` on `|s1,s2,t⟩`.
    pub fn iswap_dag_s2_t() -> Mat {
        let mut m = identity(8);
        for (a, b) in [(1, 2), (5, 6)] {
            m[a][a] = Z;
            m[b][b] = Z;
            m[a][b] = NI;
            m[b][a] = NI;
        }
        m
    }

    /// `iSwap†(s1,t)` on `|s1,s2,t⟩`.
    pub fn iswap_dag_s1_t() -> Mat {
        let mut m = identity(8);
        for (a, b) in [(1, 4), (3, 6)] {
            m[a][a] = Z;
            m[b][b] = Z;
            m[a][b] = NI;
            m[b][a] = NI;
        }
        m
    }

    /// Basis `|p2,p1,t2,t1,s⟩`.
    pub fn split_slide() -> Mat {
        block_diag(&[split(), iswap_s_t2(), iswap_s_t1(), identity(8)])
    }

    /// Basis `|p2,p1,s1,s2,t⟩`.
    pub fn merge_slide() -> Mat {
        block_diag(&[merge(), iswap_dag_s2_t(), iswap_dag_s1_t(), identity(8)])
    }

    pub fn identity(n: usize) -> Mat {
        (0..n)
            .map(|r| (0..n).map(|c| if r == c { O } else { Z }).collect())
            .collect()
    }

    pub fn block_diag(blocks: &[Mat]) -> Mat {
        let n: usize = blocks.iter().map(Vec::len).sum();
        let mut m = vec![vec![Z; n]; n];
        let mut off = 0;
        for b in blocks {
            for (r, row) in b.iter().enumerate() {
                for (c, x) in row.iter().enumerate() {
                    m[off + r][off + c] = *x;
                }
            }
            off += b.len();
        }
        m
    }

    pub fn mul(a: &Mat, b: &Mat) -> Mat {
        let n = a.len();
        (0..n)
            .map(|r| {
                (0..n)
                    .map(|c| (0..n).map(|k| a[r][k] * b[k][c]).sum())
                    .collect()
            })
            .collect()
    }

    pub fn adjoint(a: &Mat) -> Mat {
        let n = a.len();
        (0..n)
            .map(|r| (0..n).map(|c| a[c][r].conj()).collect())
            .collect()
    }

    pub fn max_diff(a: &Mat, b: &Mat) -> f64 {
        a.iter()
            .flatten()
            .zip(b.iter().flatten())
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max)
    }
}

/// Matrix of an engine operator on `k` qubits, read column by column from
/// its action on basis states. `op` receives the state and the board bit
/// assigned to each local index bit.
pub fn engine_matrix(k: usize, op: impl Fn(&Superposition, &[usize]) -> Superposition) -> Mat {
    // Spread operands over the board so none is adjacent to another.
    let bits: Vec<usize> = (0..k).map(|q| 9 * q + 3).collect();
    let n = 1 << k;
    let mut m = vec![vec![C::new(0.0, 0.0); n]; n];
    for col in 0..n {
        let board = (0..k)
            .filter(|q| col >> q & 1 == 1)
            .fold(0u64, |b, q| b | 1 << bits[q]);
        let out = op(&Superposition::classical(board), &bits);
        for (b, a) in out.terms() {
            let row = (0..k)
                .filter(|&q| b.get(bits[q]))
                .fold(0, |r, q| r | 1 << q);
            let stray = b.board() & !bits.iter().fold(0u64, |m, &i| m | 1 << i);
            assert_eq!(stray, 0, "operator touched a bit outside its operands");
            m[row][col] = *a;
        }
    }
    m
}

/// What a dense qubit stands for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Label {
    /// Engine bit: a board square index or `64 + k` for ancilla `k`.
    Bit(usize),
    Work,
}

/// Full state vector; dense qubit `q` is bit `q` of the amplitude index.
#[derive(Debug, Clone)]
pub struct Dense {
    pub labels: Vec<Label>,
    pub amps: Vec<C>,
}

const ENTANGLED_TOL: f64 = 1e-12;

impl Dense {
    /// Imports an engine state whose occupied board bits all lie in `region`.
    pub fn from_psi(psi: &Superposition, region: &[Square]) -> Result<Dense, String> {
        let mut labels: Vec<Label> = region.iter().map(|s| Label::Bit(s.index())).collect();
        labels.extend((64..psi.width()).map(Label::Bit));
        let mut d = Dense {
            amps: vec![C::new(0.0, 0.0); 1 << labels.len()],
            labels,
        };
        for (b, a) in psi.terms() {
            let idx = d.index_of(b)?;
            d.amps[idx] = *a;
        }
        Ok(d)
    }

    fn index_of(&self, b: &qchess::BasisState) -> Result<usize, String> {
        let mut idx = 0usize;
        let mut covered = 0u64;
        for (q, l) in self.labels.iter().enumerate() {
            if let Label::Bit(i) = *l {
                if b.get(i) {
                    idx |= 1 << q;
                }
                if i < 64 {
                    covered |= 1 << i;
                }
            }
        }
        if b.board() & !covered != 0 {
            return Err(format!("term {:#x} leaves the oracle region", b.board()));
        }
        Ok(idx)
    }

    pub fn qubits(&self) -> usize {
        self.labels.len()
    }

    pub fn pos(&self, s: Square) -> usize {
        self.labels
            .iter()
            .position(|&l| l == Label::Bit(s.index()))
            .unwrap_or_else(|| panic!("{s} not in oracle register"))
    }

    pub fn occupied(&self, idx: usize, s: Square) -> bool {
        idx >> self.pos(s) & 1 == 1
    }

    /// Appends a qubit in `|0⟩` as the new most-significant bit.
    pub fn add_qubit(&mut self, label: Label) -> usize {
        self.amps.resize(self.amps.len() * 2, C::new(0.0, 0.0));
        self.labels.push(label);
        self.labels.len() - 1
    }

    pub fn next_ancilla(&self) -> usize {
        64 + self
            .labels
            .iter()
            .filter(|l| matches!(l, Label::Bit(i) if *i >= 64))
            .count()
    }

    /// Applies `m` with `ops[k]` as bit `k` of the local index.
    pub fn apply(&mut self, ops: &[usize], m: &Mat) {
        let k = ops.len();
        assert_eq!(m.len(), 1 << k);
        let mask: usize = ops.iter().map(|q| 1 << q).sum();
        let local = |j: usize| -> usize {
            (0..k)
                .filter(|b| j >> b & 1 == 1)
                .map(|b| 1 << ops[b])
                .sum()
        };
        let offsets: Vec<usize> = (0..1 << k).map(local).collect();
        for base in 0..self.amps.len() {
            if base & mask != 0 {
                continue;
            }
            let v: Vec<C> = offsets.iter().map(|&o| self.amps[base | o]).collect();
            for (r, &o) in offsets.iter().enumerate() {
                self.amps[base | o] = m[r].iter().zip(&v).map(|(x, y)| x * y).sum();
            }
        }
    }

    /// `w ^= f(index)`; `f` must not read `w`.
    pub fn xor_into(&mut self, w: usize, f: impl Fn(&Dense, usize) -> bool) {
        let bit = 1 << w;
        for idx in 0..self.amps.len() {
            if idx & bit == 0 && f(self, idx) {
                self.amps.swap(idx, idx | bit);
            }
        }
    }

    /// Projects `w` onto `outcome` and renormalizes; returns the outcome's
    /// probability.
    pub fn measure(&mut self, w: usize, outcome: bool) -> Result<f64, String> {
        let bit = 1 << w;
        let p: f64 = self
            .amps
            .iter()
            .enumerate()
            .filter(|(i, _)| (i & bit != 0) == outcome)
            .map(|(_, a)| a.norm_sqr())
            .sum();
        if p <= 1e-12 {
            return Err(format!("outcome {outcome} has probability {p}"));
        }
        let scale = p.sqrt().recip();
        for (i, a) in self.amps.iter_mut().enumerate() {
            *a = if (i & bit != 0) == outcome {
                *a * scale
            } else {
                C::new(0.0, 0.0)
            };
        }
        Ok(p)
    }

    /// Removes qubit `q`, which must be a function of the other qubits.
    pub fn discard(&mut self, q: usize) -> Result<(), String> {
        let bit = 1 << q;
        let mut out = vec![C::new(0.0, 0.0); self.amps.len() / 2];
        for idx in 0..self.amps.len() {
            if idx & bit != 0 {
                continue;
            }
            let (a0, a1) = (self.amps[idx], self.amps[idx | bit]);
            if a0.norm() > ENTANGLED_TOL && a1.norm() > ENTANGLED_TOL {
                return Err(format!("work qubit {q} is entangled with the register"));
            }
            out[(idx >> (q + 1)) << q | (idx & (bit - 1))] = a0 + a1;
        }
        self.amps = out;
        self.labels.remove(q);
        Ok(())
    }

    fn overlap(&self, other: &Dense) -> C {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// `other` equals this state times a unit phase, entry-wise within `tol`.
    pub fn equal_up_to_phase(&self, other: &Dense, tol: f64) -> bool {
        let o = self.overlap(other);
        if o.norm() < 0.5 {
            return false;
        }
        let phase = o / o.norm();
        self.amps
            .iter()
            .zip(&other.amps)
            .all(|(a, b)| (a * phase - b).norm() <= tol)
    }

    /// Largest entry-wise difference from an engine state with the same
    /// ancilla count.
    pub fn deviation(&self, psi: &Superposition) -> Result<f64, String> {
        if self.labels.contains(&Label::Work) {
            return Err("work qubit left in register".into());
        }
        if self.next_ancilla() != psi.width() {
            return Err(format!(
                "oracle has {} ancillas, engine {}",
                self.next_ancilla() - 64,
                psi.width() - 64
            ));
        }
        let mut engine = vec![C::new(0.0, 0.0); self.amps.len()];
        for (b, a) in psi.terms() {
            engine[self.index_of(b)?] = *a;
        }
        Ok(engine
            .iter()
            .zip(&self.amps)
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max))
    }
}

/// Result of running one plan through the oracle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleStep {
    pub measured: bool,
    pub probability: Option<f64>,
    pub legal: bool,
}

/// Condition on one basis index of a register.
type Condition<'a> = Box<dyn Fn(&Dense, usize) -> bool + 'a>;

/// Whether the variant measures first, and the measured condition.
fn measurement(plan: &MovePlan) -> Option<Condition<'_>> {
    use Variant::*;
    let s = plan.source();
    let t = plan.target();
    Some(match plan.variant {
        BlockedJump | BlockedSlide | BlockedPawnStep | BlockedPawnTwoStep | BlockedEp => {
            Box::new(move |d, i| !d.occupied(i, t))
        }
        CaptureJump | PawnCapture | CaptureEp => Box::new(move |d, i| d.occupied(i, s)),
        CaptureSlide => Box::new(move |d, i| {
            let blocked = plan.paths[0].iter().any(|&p| d.occupied(i, p));
            if blocked {
                !d.occupied(i, t)
            } else {
                d.occupied(i, s)
            }
        }),
        CastleKingSide | CastleQueenSide => {
            let (_, rook_to) = plan.rook.expect("castle plan");
            Box::new(move |d, i| !d.occupied(i, t) && !d.occupied(i, rook_to))
        }
        _ => return None,
    })
}

fn path_flag(d: &mut Dense, path: &[Square]) -> usize {
    let w = d.add_qubit(Label::Work);
    let path = path.to_vec();
    d.xor_into(w, move |d, i| path.iter().any(|&p| d.occupied(i, p)));
    w
}

fn capture_qubit(d: &mut Dense) -> usize {
    let label = Label::Bit(d.next_ancilla());
    d.add_qubit(label)
}

/// Runs the variant's circuit on the register.
fn operate(d: &mut Dense, plan: &MovePlan) -> Result<(), String> {
    use matrices::*;
    use Variant::*;
    let s = plan.source();
    let t = plan.target();
    let (ps, pt) = (d.pos(s), d.pos(t));
    match plan.variant {
        StandardJump | BlockedJump | PawnStep | BlockedPawnStep => d.apply(&[ps, pt], &jump()),
        StandardSlide | BlockedSlide | PawnTwoStep | BlockedPawnTwoStep => {
            let p = path_flag(d, &plan.paths[0]);
            d.apply(&[ps, pt, p], &slide());
            d.discard(p)?;
        }
        CaptureJump => {
            let c = capture_qubit(d);
            d.apply(&[pt, c], &jump());
            d.apply(&[ps, pt], &jump());
        }
        CaptureSlide => {
            let c = capture_qubit(d);
            let p = path_flag(d, &plan.paths[0]);
            d.apply(&[pt, c, p], &slide());
            d.apply(&[ps, pt, p], &slide());
            d.discard(p)?;
        }
        PawnCapture => {
            let c = capture_qubit(d);
            let p = d.add_qubit(Label::Work);
            d.xor_into(p, move |d, i| !(d.occupied(i, s) && d.occupied(i, t)));
            d.apply(&[pt, c, p], &slide());
            d.apply(&[ps, pt, p], &slide());
            d.discard(p)?;
        }
        StandardEp | BlockedEp => {
            let ep = plan.ep_square.expect("en passant plan");
            let pe = d.pos(ep);
            let c = capture_qubit(d);
            let p = d.add_qubit(Label::Work);
            d.xor_into(p, move |d, i| !(d.occupied(i, s) && d.occupied(i, ep)));
            d.apply(&[pe, c, p], &slide());
            d.apply(&[ps, pt, p], &slide());
            d.discard(p)?;
        }
        CaptureEp => {
            let ep = plan.ep_square.expect("en passant plan");
            let pe = d.pos(ep);
            let c1 = capture_qubit(d);
            let c2 = capture_qubit(d);
            let p = d.add_qubit(Label::Work);
            d.xor_into(p, move |d, i| {
                !(d.occupied(i, s) && (d.occupied(i, t) || d.occupied(i, ep)))
            });
            d.apply(&[pe, c1, p], &slide());
            d.apply(&[pt, c2, p], &slide());
            d.apply(&[ps, pt, p], &slide());
            d.discard(p)?;
        }
        CastleKingSide => {
            let (h, f) = plan.rook.expect("castle plan");
            let (ph, pf) = (d.pos(h), d.pos(f));
            d.apply(&[ps, pt], &jump());
            d.apply(&[ph, pf], &jump());
        }
        CastleQueenSide => {
            let (a, dsq) = plan.rook.expect("castle plan");
            let b = Square::from_coords(1, s.rank()).unwrap();
            let (pa, pd) = (d.pos(a), d.pos(dsq));
            let p = path_flag(d, &[b]);
            d.apply(&[ps, pt, p], &slide());
            d.apply(&[pa, pd, p], &slide());
            d.discard(p)?;
        }
        SplitJump => {
            let ops = [ps, d.pos(plan.targets[0]), d.pos(plan.targets[1])];
            d.apply(&ops, &split());
        }
        SplitSlide => {
            let (p1t, p2t) = (d.pos(plan.targets[0]), d.pos(plan.targets[1]));
            let p1 = path_flag(d, &plan.paths[0]);
            let p2 = path_flag(d, &plan.paths[1]);
            d.apply(&[ps, p1t, p2t, p1, p2], &split_slide());
            d.discard(p2)?;
            d.discard(p1)?;
        }
        MergeJump => {
            let ops = [pt, d.pos(plan.sources[1]), d.pos(plan.sources[0])];
            d.apply(&ops, &merge());
        }
        MergeSlide => {
            let (s1, s2) = (d.pos(plan.sources[0]), d.pos(plan.sources[1]));
            let p1 = path_flag(d, &plan.paths[0]);
            let p2 = path_flag(d, &plan.paths[1]);
            d.apply(&[pt, s2, s1, p1, p2], &merge_slide());
            d.discard(p2)?;
            d.discard(p1)?;
        }
    }
    Ok(())
}

/// Applies `plan` with the given outcome; an unchanged register is rolled
/// back, capture qubits included.
pub fn apply_plan(
    d: &mut Dense,
    plan: &MovePlan,
    outcome: Option<bool>,
) -> Result<OracleStep, String> {
    let pre = d.clone();
    let mut probability = None;
    let mut applied = true;
    let measured = if let Some(m1) = measurement(plan) {
        let o = outcome.ok_or("measuring variant without an outcome")?;
        let a = d.add_qubit(Label::Work);
        d.xor_into(a, m1);
        probability = Some(d.measure(a, o)?);
        d.discard(a)?;
        applied = o;
        true
    } else {
        if outcome.is_some() {
            return Err("outcome given for a variant without measurement".into());
        }
        false
    };
    if applied {
        operate(d, plan)?;
    }
    let mut widened = pre.clone();
    while widened.qubits() < d.qubits() {
        let label = d.labels[widened.qubits()];
        widened.add_qubit(label);
    }
    let legal = !widened.equal_up_to_phase(d, 1e-9);
    if !legal {
        *d = pre;
    }
    Ok(OracleStep {
        measured,
        probability,
        legal,
    })
}

/// Sub-boards small enough for the dense oracle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Region {
    /// a1 to c3.
    Corner,
    /// a1 to c4, room for pawn two-steps.
    Column,
    /// a5 to c7 with black pawns at home for en passant.
    Passant,
    /// The white back rank with castling rights.
    BackRank,
}

impl Region {
    pub const ALL: [Region; 4] = [
        Region::Corner,
        Region::Column,
        Region::Passant,
        Region::BackRank,
    ];

    pub fn squares(self) -> Vec<Square> {
        let (files, ranks) = match self {
            Region::Corner => (0..3, 0..3),
            Region::Column => (0..3, 0..4),
            Region::Passant => (0..3, 4..7),
            Region::BackRank => (0..8, 0..1),
        };
        ranks
            .flat_map(|r| {
                files
                    .clone()
                    .map(move |f| Square::from_coords(f, r).unwrap())
            })
            .collect()
    }

    pub fn contains(self, s: Square) -> bool {
        self.squares().contains(&s)
    }

    pub fn random_layer(self, rng: &mut ChaCha8Rng) -> ClassicalLayer {
        let squares = self.squares();
        let mut layer = ClassicalLayer::empty(if rng.random() {
            Color::White
        } else {
            Color::Black
        });
        let free =
            |layer: &ClassicalLayer, rng: &mut ChaCha8Rng, pool: &[Square]| -> Option<Square> {
                let open: Vec<Square> = pool
                    .iter()
                    .copied()
                    .filter(|&s| layer.get(s).is_none())
                    .collect();
                (!open.is_empty()).then(|| open[rng.random_range(0..open.len())])
            };
        match self {
            Region::Corner | Region::Column => {
                let n = rng.random_range(2..=4);
                let mut kings = [false; 2];
                for _ in 0..n {
                    let color = if rng.random() {
                        Color::White
                    } else {
                        Color::Black
                    };
                    let mut kind = PieceKind::ALL[rng.random_range(0..6)];
                    if kind == PieceKind::King
                        && std::mem::replace(&mut kings[(color == Color::Black) as usize], true)
                    {
                        kind = PieceKind::Knight;
                    }
                    let pool: Vec<Square> = squares
                        .iter()
                        .copied()
                        .filter(|s| kind != PieceKind::Pawn || s.rank() != 0)
                        .collect();
                    if let Some(s) = free(&layer, rng, &pool) {
                        layer.set(s, Some(Piece::new(color, kind)));
                    }
                }
            }
            Region::Passant => {
                layer.flags.turn = Color::Black;
                let home: Vec<Square> = ["a7", "b7", "c7"].map(sq).to_vec();
                let fifth: Vec<Square> = ["a5", "b5", "c5"].map(sq).to_vec();
                for _ in 0..rng.random_range(1..=2) {
                    let s = free(&layer, rng, &home).unwrap();
                    layer.set(s, Some(Piece::black(PieceKind::Pawn)));
                }
                for _ in 0..rng.random_range(1..=2) {
                    let s = free(&layer, rng, &fifth).unwrap();
                    layer.set(s, Some(Piece::white(PieceKind::Pawn)));
                }
                if rng.random_bool(0.6) {
                    let kind = [PieceKind::Knight, PieceKind::Bishop, PieceKind::Rook]
                        [rng.random_range(0..3)];
                    let color = if rng.random() {
                        Color::White
                    } else {
                        Color::Black
                    };
                    if let Some(s) = free(&layer, rng, &squares) {
                        layer.set(s, Some(Piece::new(color, kind)));
                    }
                }
            }
            Region::BackRank => {
                layer.flags = FlagSet::no_rights(Color::White);
                layer.set(sq("e1"), Some(Piece::white(PieceKind::King)));
                let (qs, ks) = match rng.random_range(0..3) {
                    0 => (true, false),
                    1 => (false, true),
                    _ => (true, true),
                };
                if qs {
                    layer.set(sq("a1"), Some(Piece::white(PieceKind::Rook)));
                    layer.flags.castle_white_queen = true;
                }
                if ks {
                    layer.set(sq("h1"), Some(Piece::white(PieceKind::Rook)));
                    layer.flags.castle_white_king = true;
                }
                for _ in 0..rng.random_range(1..=2) {
                    let kind = [
                        PieceKind::Queen,
                        PieceKind::Rook,
                        PieceKind::Bishop,
                        PieceKind::Knight,
                    ][rng.random_range(0..4)];
                    let color = if rng.random_bool(0.7) {
                        Color::White
                    } else {
                        Color::Black
                    };
                    if let Some(s) = free(&layer, rng, &squares) {
                        layer.set(s, Some(Piece::new(color, kind)));
                    }
                }
            }
        }
        layer
    }
}

fn move_squares(m: &Move) -> Vec<Square> {
    match m.shape {
        MoveShape::Standard { source, target } | MoveShape::Promotion { source, target, .. } => {
            vec![source, target]
        }
        MoveShape::Split { source, targets } => vec![source, targets[0], targets[1]],
        MoveShape::Merge { sources, target } => vec![sources[0], sources[1], target],
    }
}

fn plan_in_region(plan: &MovePlan, region: Region) -> bool {
    plan.touched()
        .chain(plan.paths.iter().flatten().copied())
        .chain(plan.ep_square)
        .all(|s| region.contains(s))
}

/// Picks a possible move confined to `region`, favoring the side to move
/// and splits or merges.
pub fn pick_move(
    layer: &ClassicalLayer,
    region: Region,
    rng: &mut ChaCha8Rng,
) -> Option<(Move, MovePlan)> {
    let first = if rng.random_bool(0.75) {
        layer.flags.turn
    } else {
        layer.flags.turn.opponent()
    };
    for color in [first, first.opponent()] {
        let moves: Vec<(Move, MovePlan)> = legal_moves(layer, color)
            .into_iter()
            .filter(|m| move_squares(m).iter().all(|&s| region.contains(s)))
            .filter_map(|m| {
                let plan = classify(&m, layer).ok()?;
                plan_in_region(&plan, region).then_some((m, plan))
            })
            .collect();
        if moves.is_empty() {
            continue;
        }
        let quantum: Vec<usize> = (0..moves.len())
            .filter(|&i| moves[i].1.variant.is_split_or_merge())
            .collect();
        let i = if !quantum.is_empty() && rng.random_bool(0.4) {
            quantum[rng.random_range(0..quantum.len())]
        } else {
            rng.random_range(0..moves.len())
        };
        return Some(moves[i].clone());
    }
    None
}

pub const MAX_ORACLE_QUBITS: usize = 16;
pub const ORACLE_PLIES: u32 = 12;
pub const ORACLE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Default)]
pub struct OracleGameReport {
    pub plies: u32,
    pub variants: BTreeSet<Variant>,
    pub max_deviation: f64,
}

/// Engine state and oracle register advanced in lockstep.
pub struct OracleRun {
    pub state: GameState,
    pub dense: Dense,
    pub stream: RngStream,
    pub report: OracleGameReport,
    pub label: String,
}

impl OracleRun {
    pub fn new(layer: ClassicalLayer, region: Region, seed: u64) -> Result<OracleRun, String> {
        let state = GameState::from_classical(layer);
        let dense = Dense::from_psi(&state.psi, &region.squares())?;
        Ok(OracleRun {
            state,
            dense,
            stream: RngStream::new(seed),
            report: OracleGameReport::default(),
            label: format!("seed {seed}"),
        })
    }

    /// Whether the register can absorb `plan` without passing the qubit cap.
    pub fn fits(&self, plan: &MovePlan) -> bool {
        self.dense.qubits() + plan.variant.captures() + 2 <= MAX_ORACLE_QUBITS
    }

    /// Executes a sampled move on both sides and compares them.
    pub fn play(&mut self, mv: &Move, plan: &MovePlan) -> Result<(), String> {
        let ply = self.report.plies + 1;
        let ctx = |e: String| format!("{} ply {ply} {mv} ({}): {e}", self.label, plan.variant);
        let r = execute(
            &self.state,
            plan,
            OutcomeSource::Sample(&mut self.stream),
            ply,
        )
        .map_err(|e| ctx(e.to_string()))?;
        let step = apply_plan(&mut self.dense, plan, r.outcome).map_err(ctx)?;
        if step.measured != plan.measurement.is_some() {
            return Err(ctx("measurement presence differs".into()));
        }
        if let (Some(a), Some(b)) = (step.probability, r.probability) {
            if (a - b).abs() > ORACLE_TOL {
                return Err(ctx(format!("outcome probability {b} vs oracle {a}")));
            }
        }
        if step.legal != r.legal {
            return Err(ctx(format!(
                "engine legal={} oracle legal={}",
                r.legal, step.legal
            )));
        }
        r.state.check().map_err(|e| ctx(e.to_string()))?;
        let dev = self.dense.deviation(&r.state.psi).map_err(ctx)?;
        if dev > ORACLE_TOL {
            return Err(ctx(format!("amplitude deviation {dev:e}")));
        }
        self.state = r.state;
        self.report.max_deviation = self.report.max_deviation.max(dev);
        self.report.variants.insert(plan.variant);
        self.report.plies = ply;
        Ok(())
    }

    /// Parses, classifies and plays `text`.
    pub fn play_text(&mut self, text: &str) -> Result<Variant, String> {
        let mv: Move = text.parse().map_err(|e| format!("{text}: {e}"))?;
        let plan = classify(&mv, &self.state.classical).map_err(|e| format!("{text}: {e}"))?;
        self.play(&mv, &plan)?;
        Ok(plan.variant)
    }
}

/// Plays one seeded random game on a sub-board, checking the engine
/// against the dense oracle after every ply.
pub fn oracle_game(seed: u64) -> Result<OracleGameReport, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let region = Region::ALL[(seed % 4) as usize];
    let mut run = OracleRun::new(region.random_layer(&mut rng), region, seed)?;
    for _ in 0..ORACLE_PLIES {
        let Some((mv, plan)) = pick_move(&run.state.classical, region, &mut rng) else {
            break;
        };
        if !run.fits(&plan) {
            break;
        }
        run.play(&mv, &plan)?;
    }
    Ok(run.report)
}

/// Outcome-1 probability of `plan` on `state`, evaluated by the oracle's
/// own measurement circuit on the squares the state and move involve.
pub fn oracle_p1(state: &GameState, plan: &MovePlan) -> Result<f64, String> {
    let mut squares: Vec<Square> = Square::all()
        .filter(|&s| state.marginal(s) > 0.0)
        .chain(plan.touched())
        .chain(plan.paths.iter().flatten().copied())
        .chain(plan.ep_square)
        .collect();
    squares.sort();
    squares.dedup();
    let mut d = Dense::from_psi(&state.psi, &squares)?;
    let m1 = measurement(plan).ok_or("variant does not measure")?;
    let a = d.add_qubit(Label::Work);
    d.xor_into(a, m1);
    let one: f64 = d
        .amps
        .iter()
        .enumerate()
        .filter(|(i, _)| i >> a & 1 == 1)
        .map(|(_, x)| x.norm_sqr())
        .sum();
    Ok(one)
}

#[derive(Debug, Clone, Copy, Default)]
pub struct FuzzReport {
    pub executions: u64,
    pub legal: u64,
    pub games: u64,
    pub max_terms: usize,
}

/// Piece values of one branch: board squares by the value map, capture
/// ancillas by the value recorded when they were allocated.
fn branch_inventory(state: &GameState, b: &qchess::BasisState) -> Vec<Piece> {
    let mut out: Vec<Piece> = Square::all()
        .filter(|s| b.get(s.index()))
        .filter_map(|s| state.classical.get(s))
        .collect();
    out.extend(
        state
            .ancillas
            .entries()
            .iter()
            .filter(|e| b.get(e.index))
            .filter_map(|e| e.captured),
    );
    out.sort();
    out
}

fn fuzz_start(rng: &mut ChaCha8Rng) -> GameState {
    if rng.random_bool(0.5) {
        return GameState::start();
    }
    let mut layer = ClassicalLayer::empty(Color::White);
    for color in [Color::White, Color::Black] {
        let kinds = [
            PieceKind::King,
            PieceKind::Queen,
            PieceKind::Rook,
            PieceKind::Bishop,
            PieceKind::Knight,
            PieceKind::Knight,
            PieceKind::Pawn,
            PieceKind::Pawn,
            PieceKind::Pawn,
        ];
        for kind in kinds {
            let s = loop {
                let s = Square::new(rng.random_range(0..64)).unwrap();
                let pawn_ok = kind != PieceKind::Pawn || (1..7).contains(&s.rank());
                if layer.get(s).is_none() && pawn_ok {
                    break s;
                }
            };
            layer.set(s, Some(Piece::new(color, kind)));
        }
    }
    GameState::from_classical(layer)
}

/// Random executions checking that every branch keeps its piece count and,
/// until a promotion, its exact piece inventory. The value map must agree
/// with occupancy and the number of board patterns must stay within the
/// bound of the state's own piece budget.
pub fn conservation_fuzz(seed: u64, executions: u64) -> Result<FuzzReport, String> {
    const PLIES: u32 = 80;
    const SPLIT_TERM_CAP: usize = 64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut stream = RngStream::new(seed);
    let mut report = FuzzReport::default();
    while report.executions < executions {
        report.games += 1;
        let mut state = fuzz_start(&mut rng);
        let count = state.psi.terms().next().unwrap().0.popcount();
        let inventory = branch_inventory(&state, state.psi.terms().next().unwrap().0);
        let mut promoted = false;
        for ply in 1..=PLIES {
            if report.executions >= executions {
                break;
            }
            let color = if rng.random_bool(0.8) {
                state.classical.flags.turn
            } else {
                state.classical.flags.turn.opponent()
            };
            let mut moves = legal_moves(&state.classical, color);
            if state.psi.len() > SPLIT_TERM_CAP {
                moves.retain(|m| {
                    matches!(
                        m.shape,
                        MoveShape::Standard { .. } | MoveShape::Promotion { .. }
                    )
                });
            }
            if moves.is_empty() {
                break;
            }
            let mv = &moves[rng.random_range(0..moves.len())];
            let ctx = |e: String| format!("seed {seed} game {} ply {ply} {mv}: {e}", report.games);
            let plan = classify(mv, &state.classical).map_err(|e| ctx(e.to_string()))?;
            let r = execute(&state, &plan, OutcomeSource::Sample(&mut stream), ply)
                .map_err(|e| ctx(e.to_string()))?;
            report.executions += 1;
            if !r.legal {
                continue;
            }
            report.legal += 1;
            state = r.state;
            promoted |= plan.promotion.is_some();
            state.check().map_err(|e| ctx(e.to_string()))?;
            report.max_terms = report.max_terms.max(state.psi.len());
            let patterns = state.psi.board_distribution().len();
            let bound = qchess::bounds::PieceBudget::of_state(&state).size();
            if num_bigint::BigUint::from(patterns) > bound {
                return Err(ctx(format!(
                    "{patterns} board patterns exceed the budget bound {bound}"
                )));
            }
            for (b, _) in state.psi.terms() {
                if b.popcount() != count {
                    return Err(ctx(format!("popcount {} != {count}", b.popcount())));
                }
                if !promoted && branch_inventory(&state, b) != inventory {
                    return Err(ctx("a branch's piece inventory changed".into()));
                }
            }
        }
    }
    Ok(report)
}

/// Plays a random game through the public game API.
pub fn random_game(seed: u64, plies: u32, policy: qchess::TurnPolicy) -> qchess::Game {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9);
    let mut game = qchess::Game::from_state(GameState::start(), seed, policy);
    for _ in 0..plies {
        if game.status().is_over() {
            break;
        }
        let mut moves = qchess::moves::effective_moves(game.state(), game.classical().flags.turn);
        if game.state().psi.len() > 32 {
            moves.retain(|m| {
                matches!(
                    m.shape,
                    MoveShape::Standard { .. } | MoveShape::Promotion { .. }
                )
            });
        }
        if moves.is_empty() {
            break;
        }
        // Favor measuring moves so logs carry outcome suffixes.
        let measuring: Vec<_> = moves
            .iter()
            .filter(|m| classify(m, game.classical()).is_ok_and(|p| p.measurement.is_some()))
            .cloned()
            .collect();
        if !measuring.is_empty() && rng.random_bool(0.5) {
            moves = measuring;
        }
        let text = moves[rng.random_range(0..moves.len())].to_string();
        game.submit_move(&text)
            .expect("generated moves are well formed");
    }
    game
}

/// Bitwise equality of two states, amplitudes compared by bit pattern.
pub fn bit_identical(a: &GameState, b: &GameState) -> bool {
    a.classical == b.classical
        && a.ancillas == b.ancillas
        && a.psi.width() == b.psi.width()
        && a.psi.len() == b.psi.len()
        && a.psi
            .terms()
            .zip(b.psi.terms())
            .all(|((ka, va), (kb, vb))| {
                ka == kb && va.re.to_bits() == vb.re.to_bits() && va.im.to_bits() == vb.im.to_bits()
            })
}

/// A uniformly drawn well-formed move of any shape, with or without an
/// outcome suffix.
pub fn random_move(rng: &mut ChaCha8Rng) -> Move {
    let mut sq3: Vec<Square> = Vec::new();
    while sq3.len() < 3 {
        let s = Square::new(rng.random_range(0..64)).unwrap();
        if !sq3.contains(&s) {
            sq3.push(s);
        }
    }
    let shape = rng.random_range(0..4);
    let m = match shape {
        0 => Move::standard(sq3[0], sq3[1]),
        1 => Move::split(sq3[0], sq3[1], sq3[2]),
        2 => Move::merge(sq3[0], sq3[1], sq3[2]),
        _ => {
            let kind = PieceKind::PROMOTIONS[rng.random_range(0..4)];
            let color = if rng.random() {
                Color::White
            } else {
                Color::Black
            };
            Move::promotion(sq3[0], sq3[1], Piece::new(color, kind))
        }
    };
    let outcome = match rng.random_range(0..3) {
        0 => None,
        1 => Some(false),
        _ => Some(true),
    };
    m.with_outcome(outcome)
}

/// Round-trips generated moves through text and feeds noise to the
/// parser, which must never panic.
pub fn notation_fuzz(seed: u64, count: u32) -> Result<(), String> {
    const NOISE: &[char] = &[
        'a', 'b', 'c', 'h', 'i', 'z', '0', '1', '2', '8', '9', '^', '∧', '.', 'm', 'Q', 'q', 'K',
        'n', 'x', ' ', '-', '#', 'é',
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..count {
        let m = random_move(&mut rng);
        let text = m.to_string();
        let back: Move = text
            .parse()
            .map_err(|e| format!("`{text}` failed to parse: {e}"))?;
        if back != m || back.to_string() != text {
            return Err(format!("`{text}` round-tripped to `{back}`"));
        }
        let len = rng.random_range(0..12);
        let noise: String = (0..len)
            .map(|_| NOISE[rng.random_range(0..NOISE.len())])
            .collect();
        let parsed = std::panic::catch_unwind(|| noise.parse::<Move>());
        match parsed {
            Err(_) => return Err(format!("parser panicked on `{noise}`")),
            Ok(Ok(mv)) => {
                let again: Move = mv
                    .to_string()
                    .parse()
                    .map_err(|e| format!("{noise}: {e}"))?;
                if again != mv {
                    return Err(format!("`{noise}` parsed but its canonical form differs"));
                }
            }
            Ok(Err(e)) if e.column == 0 || e.column > noise.chars().count() + 1 => {
                return Err(format!("`{noise}`: column {} out of range", e.column));
            }
            Ok(Err(_)) => {}
        }
    }
    Ok(())
}

pub const TRIALS: u32 = 100_000;

/// Position, preparation moves and the measured move for each measuring
/// variant; every preparation leaves the measured condition at one half.
pub const CASES: [(Variant, &str, &[&str], &str); 11] = [
    (
        Variant::BlockedJump,
        "8/8/8/8/8/8/1K6/1N6 w - -",
        &["b1^a3c3"],
        "b2c3",
    ),
    (
        Variant::BlockedSlide,
        "8/8/8/8/8/8/8/RN6 w - -",
        &["b1^a3c3"],
        "a1a3",
    ),
    (
        Variant::CaptureJump,
        "8/8/8/3p4/8/8/8/1N6 w - -",
        &["b1^a3c3"],
        "c3d5",
    ),
    (
        Variant::CaptureSlide,
        "8/8/p7/8/8/8/8/R7 w - -",
        &["a1^a3b1"],
        "a3a6",
    ),
    (
        Variant::BlockedPawnStep,
        "8/8/8/8/8/8/P7/1N6 w - -",
        &["b1^a3c3"],
        "a2a3",
    ),
    (
        Variant::BlockedPawnTwoStep,
        "8/8/8/8/8/8/PN6/8 w - -",
        &["b2^a4c4"],
        "a2a4",
    ),
    (
        Variant::PawnCapture,
        "8/8/8/2p5/8/8/1P6/N7 w - -",
        &["a1^b3c2", "b2b4"],
        "b4c5",
    ),
    (
        Variant::BlockedEp,
        "8/2p5/8/NP6/8/8/8/8 w - -",
        &["a5^c6b7", "c7c5"],
        "b5c6",
    ),
    (
        Variant::CaptureEp,
        "n7/1p6/8/8/8/8/P7/1N6 w - -",
        &["b1^a3c3", "a2a4", "a4a5", "a8^b6c7", "b7b5"],
        "a5b6",
    ),
    (
        Variant::CastleKingSide,
        "8/8/8/8/8/5N2/8/4K2R w K -",
        &["f3^g1h4"],
        "e1g1",
    ),
    (
        Variant::CastleQueenSide,
        "8/8/8/8/8/2N5/8/R3K3 w Q -",
        &["c3^d1b5"],
        "e1c1",
    ),
];

/// Runs one case: returns (variant, analytic p1, observed frequency, sigma).
pub fn run_case(fen: &str, setup: &[&str], measured: &str, seed: u64) -> (Variant, f64, f64, f64) {
    let mut game = qchess::Game::from_position(fen, seed, qchess::TurnPolicy::Sandbox).unwrap();
    for m in setup {
        assert!(game.submit_move(m).unwrap().accepted, "{m}");
    }
    let state = game.state().clone();
    let mv: Move = measured.parse().unwrap();
    let plan = classify(&mv, &state.classical).unwrap();
    let p1 = oracle_p1(&state, &plan).unwrap();
    let mut stream = RngStream::new(seed);
    let mut ones = 0u32;
    for _ in 0..TRIALS {
        let r = execute(&state, &plan, OutcomeSource::Sample(&mut stream), 1).unwrap();
        ones += (r.outcome == Some(true)) as u32;
    }
    let freq = f64::from(ones) / f64::from(TRIALS);
    let sigma = (p1 * (1.0 - p1) / f64::from(TRIALS)).sqrt();
    (plan.variant, p1, freq, sigma)
}

pub const IRRATIONAL_TOL: f64 = 1e-12;

/// Entries in {0, ±1, ±i} must match exactly; the rest within 1e-12.
pub fn conforms(name: &str, engine: &Mat, reference: &Mat) -> Result<(), String> {
    for (r, (er, rr)) in engine.iter().zip(reference).enumerate() {
        for (c, (e, x)) in er.iter().zip(rr).enumerate() {
            let exact = [x.re, x.im].iter().all(|v| [0.0, 1.0, -1.0].contains(v));
            let ok = if exact {
                e == x
            } else {
                (e - x).norm() <= IRRATIONAL_TOL
            };
            if !ok {
                return Err(format!("{name}[{r}][{c}]: engine {e}, reference {x}"));
            }
        }
    }
    Ok(())
}

pub fn assert_conforms(name: &str, engine: &Mat, reference: &Mat) {
    conforms(name, engine, reference).unwrap_or_else(|e| panic!("{e}"));
}

/// Pascal's triangle in u128; row 64 peaks near 1.8e18, well inside range.
pub fn pascal(n: usize) -> Vec<Vec<u128>> {
    let mut rows = vec![vec![1u128]];
    for i in 1..=n {
        let prev = &rows[i - 1];
        let mut row = vec![1u128; i + 1];
        for k in 1..i {
            row[k] = prev[k - 1] + prev[k];
        }
        rows.push(row);
    }
    rows
}

pub fn s_oracle(p: &[Vec<u128>], s: usize, m: usize) -> u128 {
    p[s][..=m.min(s)].iter().sum()
}

/// Budget of the known maximizer; `swap` exchanges rooks and knights.
pub fn known_maximizer(swap: bool) -> qchess::bounds::PieceBudget {
    let (r, n) = if swap {
        (
            qchess::bounds::Zeta::new(3, 2),
            qchess::bounds::Zeta::new(24, 10),
        )
    } else {
        (
            qchess::bounds::Zeta::new(24, 10),
            qchess::bounds::Zeta::new(3, 2),
        )
    };
    qchess::bounds::PieceBudget::new([Color::White, Color::Black].into_iter().flat_map(move |c| {
        [
            (
                Piece::new(c, PieceKind::Pawn),
                qchess::bounds::Zeta::new(0, 0),
            ),
            (
                Piece::new(c, PieceKind::King),
                qchess::bounds::Zeta::new(1, 1),
            ),
            (
                Piece::new(c, PieceKind::Queen),
                qchess::bounds::Zeta::new(1, 1),
            ),
            (
                Piece::new(c, PieceKind::Bishop),
                qchess::bounds::Zeta::new(3, 2),
            ),
            (Piece::new(c, PieceKind::Knight), n),
            (Piece::new(c, PieceKind::Rook), r),
        ]
    }))
}
