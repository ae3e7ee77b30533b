//! Scripted sequences showing entanglement and interference, each checked
//! against its expected result.

use std::fmt;
use std::str::FromStr;

use crate::game::{Game, GameError, TurnPolicy};
use crate::qstate::Superposition;
use crate::scalar::Amp;
use crate::square::{sq, Square};

const LONE_KING: &str = "8/8/8/8/8/8/8/K7 w - -";
const CAPTURE_BELL: &str = "8/8/8/8/8/1k6/8/1nB5 b - -";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DemoName {
    BellPsiPlus,
    BellPsiMinus,
    BellPhiMinus,
    BellPhiPlus,
    Interference,
    InterferenceSwapped,
}

impl DemoName {
    pub const ALL: [DemoName; 6] = [
        DemoName::BellPsiPlus,
        DemoName::BellPsiMinus,
        DemoName::BellPhiMinus,
        DemoName::BellPhiPlus,
        DemoName::Interference,
        DemoName::InterferenceSwapped,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            DemoName::BellPsiPlus => "bell-psi+",
            DemoName::BellPsiMinus => "bell-psi-",
            DemoName::BellPhiMinus => "bell-phi-",
            DemoName::BellPhiPlus => "bell-phi+",
            DemoName::Interference => "interference",
            DemoName::InterferenceSwapped => "interference-swapped",
        }
    }

    pub fn position(self) -> &'static str {
        match self {
            DemoName::BellPhiMinus | DemoName::BellPhiPlus => CAPTURE_BELL,
            _ => LONE_KING,
        }
    }

    pub fn moves(self) -> &'static [&'static str] {
        match self {
            DemoName::BellPsiPlus => &["a1^a2b1", "b1a1", "a2b1"],
            DemoName::BellPsiMinus => &["a1^a2b1", "b1a1", "a2b1", "a1a2", "a2a1"],
            DemoName::BellPhiMinus => &["b3^b2a3", "c1a3", "b1a3", "b2b1"],
            DemoName::BellPhiPlus => &["b3^b2a3", "c1a3", "b1a3", "b2b1", "b1b2", "b2b1"],
            DemoName::Interference => &["a1^a2b1", "a2^a1b2", "b1^a1b2"],
            DemoName::InterferenceSwapped => &["a1^a2b1", "a2^a1b2", "b1^b2a1"],
        }
    }
}

impl fmt::Display for DemoName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DemoName {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        DemoName::ALL
            .into_iter()
            .find(|d| d.as_str() == s)
            .ok_or_else(|| format!("unknown demo `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DemoCheck {
    pub label: String,
    pub expected: f64,
    pub actual: f64,
    pub tolerance: f64,
}

impl DemoCheck {
    pub fn passed(&self) -> bool {
        (self.actual - self.expected).abs() <= self.tolerance
    }
}

#[derive(Debug, Clone)]
pub struct DemoReport {
    pub name: DemoName,
    pub game: Game,
    /// Two-square amplitudes for Bell demos, high square first.
    pub pair: Option<([Square; 2], [Amp<f64>; 4])>,
    pub checks: Vec<DemoCheck>,
}

impl DemoReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(DemoCheck::passed)
    }
}

/// Amplitudes on `|hi, lo⟩` after dropping every other bit, which must be
/// constant across terms or, for ancillas, in one-to-one correspondence
/// with the pair's pattern.
pub fn reduce_to_pair(psi: &Superposition<f64>, hi: Square, lo: Square) -> Option<[Amp<f64>; 4]> {
    let keep = 1u64 << hi.index() | 1u64 << lo.index();
    let mut rest_board: Option<u64> = None;
    let mut out = [Amp::new(0.0, 0.0); 4];
    let mut seen = [false; 4];
    for (b, a) in psi.terms() {
        let board = b.board();
        match rest_board {
            None => rest_board = Some(board & !keep),
            Some(r) if r != board & !keep => return None,
            Some(_) => {}
        }
        let k = (b.get(hi.index()) as usize) << 1 | b.get(lo.index()) as usize;
        if seen[k] {
            return None;
        }
        seen[k] = true;
        out[k] = *a;
    }
    Some(out)
}

/// Largest entry-wise deviation after aligning global phase on the largest
/// entry of `expected`.
pub fn phase_distance(actual: &[Amp<f64>; 4], expected: &[Amp<f64>; 4]) -> f64 {
    let k = (0..4)
        .max_by(|&i, &j| expected[i].norm().total_cmp(&expected[j].norm()))
        .unwrap();
    if actual[k].norm() == 0.0 {
        return f64::INFINITY;
    }
    let phase = expected[k] / actual[k];
    let phase = phase / phase.norm();
    (0..4)
        .map(|i| (actual[i] * phase - expected[i]).norm())
        .fold(0.0, f64::max)
}

fn bell(name: DemoName) -> [Amp<f64>; 4] {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let z = Amp::new(0.0, 0.0);
    let p = Amp::new(h, 0.0);
    let n = Amp::new(-h, 0.0);
    match name {
        DemoName::BellPsiPlus => [z, p, p, z],
        DemoName::BellPsiMinus => [z, p, n, z],
        DemoName::BellPhiMinus => [p, z, z, n],
        DemoName::BellPhiPlus => [p, z, z, p],
        _ => unreachable!("not a Bell demo"),
    }
}

pub fn run_demo(name: DemoName) -> Result<DemoReport, GameError> {
    let mut game = Game::from_position(name.position(), 0, TurnPolicy::Sandbox)?;
    for m in name.moves() {
        let r = game.submit_move(m)?;
        debug_assert!(r.accepted, "{m} had no effect");
    }
    let mut checks = Vec::new();
    let mut pair = None;
    match name {
        DemoName::Interference | DemoName::InterferenceSwapped => {
            let r2 = std::f64::consts::SQRT_2;
            let high = (3.0 + 2.0 * r2) / 8.0;
            let low = (3.0 - 2.0 * r2) / 8.0;
            let (a1, b2) = if name == DemoName::Interference {
                (high, low)
            } else {
                (low, high)
            };
            for (label, expected) in [("a1", a1), ("b2", b2), ("b1", 0.25)] {
                checks.push(DemoCheck {
                    label: format!("p({label})"),
                    expected,
                    actual: game.state().marginal(sq(label)),
                    tolerance: 1e-9,
                });
            }
        }
        _ => {
            let squares = match name {
                DemoName::BellPsiPlus | DemoName::BellPsiMinus => [sq("b1"), sq("a1")],
                _ => [sq("b1"), sq("c1")],
            };
            let reduced = reduce_to_pair(&game.state().psi, squares[0], squares[1]);
            let distance = reduced.map_or(f64::INFINITY, |r| phase_distance(&r, &bell(name)));
            checks.push(DemoCheck {
                label: format!(
                    "distance to {} on |{},{}⟩",
                    name.as_str(),
                    squares[0],
                    squares[1]
                ),
                expected: 0.0,
                actual: distance,
                tolerance: 1e-9,
            });
            pair = reduced.map(|r| (squares, r));
        }
    }
    Ok(DemoReport {
        name,
        game,
        pair,
        checks,
    })
}
