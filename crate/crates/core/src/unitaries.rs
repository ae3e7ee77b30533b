//! Movement unitaries applied at basis-state granularity.
//!
//! Operands are qubit indices. Within a local operator the first operand is
//! the least-significant bit of the matrix index, so for a jump on `|t,s⟩`
//! the operand list is `[s, t]`. Path conditions are evaluated on each input
//! term instead of being copied into ancilla qubits.

use smallvec::SmallVec;
use thiserror::Error;

use crate::predicate::Predicate;
use crate::qstate::{Accumulator, BasisState, QStateError, Superposition};
use crate::scalar::{amp, times_i, times_neg_i, Amp, Scalar};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum UnitaryError {
    #[error("qubit {0} used twice")]
    OperandCollision(usize),
    #[error("qubit {index} outside state width {width}")]
    OutOfRange { index: usize, width: usize },
    #[error("control qubit {0} is also an operand")]
    ControlOverlap(usize),
    #[error(transparent)]
    State(#[from] QStateError),
}

/// Classical control: fires when every `zeros` bit is clear and every `ones`
/// bit is set.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ControlSpec {
    pub zeros: Vec<usize>,
    pub ones: Vec<usize>,
}

impl ControlSpec {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn zeros(bits: &[usize]) -> Self {
        ControlSpec {
            zeros: bits.to_vec(),
            ones: Vec::new(),
        }
    }

    pub fn ones(bits: &[usize]) -> Self {
        ControlSpec {
            zeros: Vec::new(),
            ones: bits.to_vec(),
        }
    }

    #[inline]
    pub fn fires(&self, b: &BasisState) -> bool {
        self.zeros.iter().all(|&i| !b.get(i)) && self.ones.iter().all(|&i| b.get(i))
    }
}

type Column<T> = SmallVec<[(u8, Amp<T>); 2]>;

/// Column-sparse operator on `k` operand qubits: column `j` lists the
/// `(row, amplitude)` pairs of the image of local basis vector `j`.
struct LocalGate<T> {
    columns: Vec<Column<T>>,
}

impl<T: Scalar> LocalGate<T> {
    fn from_columns(cols: Vec<Vec<(u8, Amp<T>)>>) -> Self {
        LocalGate {
            columns: cols.into_iter().map(SmallVec::from_vec).collect(),
        }
    }

    /// iSwap on `[s, t]`; `phase` is `i` or `-i` (adjoint).
    fn iswap(adjoint: bool) -> Self {
        let one = Amp::new(T::one(), T::zero());
        let ph = if adjoint {
            times_neg_i(one)
        } else {
            times_i(one)
        };
        Self::from_columns(vec![
            vec![(0b00, one)],
            vec![(0b10, ph)],
            vec![(0b01, ph)],
            vec![(0b11, one)],
        ])
    }

    /// Split on `[s, t1, t2]`, local index `t2 t1 s`.
    fn split() -> Self {
        let h = T::frac_1_sqrt_2().to_f64().unwrap();
        let c = |re: f64, im: f64| amp::<T>(re, im);
        Self::from_columns(vec![
            vec![(0b000, c(1.0, 0.0))],
            vec![(0b010, c(0.0, h)), (0b100, c(0.0, h))],
            vec![(0b010, c(h, 0.0)), (0b100, c(-h, 0.0))],
            vec![(0b110, c(0.0, 1.0))],
            vec![(0b001, c(0.0, 1.0))],
            vec![(0b011, c(-h, 0.0)), (0b101, c(0.0, h))],
            vec![(0b011, c(0.0, h)), (0b101, c(-h, 0.0))],
            vec![(0b111, c(1.0, 0.0))],
        ])
    }

    /// Merge on `[t, s2, s1]`, local index `s1 s2 t`.
    fn merge() -> Self {
        let h = T::frac_1_sqrt_2().to_f64().unwrap();
        let c = |re: f64, im: f64| amp::<T>(re, im);
        Self::from_columns(vec![
            vec![(0b000, c(1.0, 0.0))],
            vec![(0b100, c(0.0, -1.0))],
            vec![(0b001, c(0.0, -h)), (0b010, c(h, 0.0))],
            vec![(0b101, c(-h, 0.0)), (0b110, c(0.0, -h))],
            vec![(0b001, c(0.0, -h)), (0b010, c(-h, 0.0))],
            vec![(0b101, c(0.0, -h)), (0b110, c(-h, 0.0))],
            vec![(0b011, c(0.0, -1.0))],
            vec![(0b111, c(1.0, 0.0))],
        ])
    }
}

fn check_operands(width: usize, ops: &[usize]) -> Result<(), UnitaryError> {
    for (k, &q) in ops.iter().enumerate() {
        if q >= width {
            return Err(UnitaryError::OutOfRange { index: q, width });
        }
        if ops[..k].contains(&q) {
            return Err(UnitaryError::OperandCollision(q));
        }
    }
    Ok(())
}

fn check_controls(width: usize, ops: &[usize], ctrl: &[usize]) -> Result<(), UnitaryError> {
    for &q in ctrl {
        if q >= width {
            return Err(UnitaryError::OutOfRange { index: q, width });
        }
        if ops.contains(&q) {
            return Err(UnitaryError::ControlOverlap(q));
        }
    }
    Ok(())
}

/// Applies, per input term, the gate chosen by `select` (or identity).
fn apply_selected<'g, T, F>(
    state: &Superposition<T>,
    select: F,
) -> Result<Superposition<T>, UnitaryError>
where
    T: Scalar,
    F: Fn(&BasisState) -> Option<(&'g LocalGate<T>, &'g [usize])>,
{
    Ok(
        state.map_linear(|b, a, acc: &mut Accumulator<T>| match select(b) {
            None => acc.add(b.clone(), a),
            Some((gate, ops)) => {
                let col = ops
                    .iter()
                    .enumerate()
                    .fold(0usize, |j, (k, &q)| j | (b.get(q) as usize) << k);
                for &(row, c) in &gate.columns[col] {
                    let mut out = b.clone();
                    for (k, &q) in ops.iter().enumerate() {
                        out.set(q, row >> k & 1 == 1);
                    }
                    acc.add(out, a * c);
                }
            }
        })?,
    )
}

fn any_set(b: &BasisState, bits: &[usize]) -> bool {
    bits.iter().any(|&i| b.get(i))
}

/// iSwap on `|t,s⟩` for every term where `ctrl` fires.
pub fn apply_jump<T: Scalar>(
    state: &Superposition<T>,
    s: usize,
    t: usize,
    ctrl: &ControlSpec,
) -> Result<Superposition<T>, UnitaryError> {
    let ops = [s, t];
    check_operands(state.width(), &ops)?;
    check_controls(state.width(), &ops, &ctrl.zeros)?;
    check_controls(state.width(), &ops, &ctrl.ones)?;
    let gate = LocalGate::iswap(false);
    apply_selected(state, |b| ctrl.fires(b).then_some((&gate, &ops[..])))
}

/// Jump controlled on every `path` square being empty.
pub fn apply_slide<T: Scalar>(
    state: &Superposition<T>,
    s: usize,
    t: usize,
    path: &[usize],
) -> Result<Superposition<T>, UnitaryError> {
    apply_jump(state, s, t, &ControlSpec::zeros(path))
}

/// Split on `|t2,t1,s⟩`.
pub fn apply_split<T: Scalar>(
    state: &Superposition<T>,
    s: usize,
    t1: usize,
    t2: usize,
) -> Result<Superposition<T>, UnitaryError> {
    apply_split_slide(state, s, t1, t2, &[], &[])
}

/// Merge on `|s1,s2,t⟩`; undoes `apply_split(t, s2, s1)`.
pub fn apply_merge<T: Scalar>(
    state: &Superposition<T>,
    s1: usize,
    s2: usize,
    t: usize,
) -> Result<Superposition<T>, UnitaryError> {
    apply_merge_slide(state, s1, s2, t, &[], &[])
}

/// Split with path controls: both paths clear gives the split, one blocked
/// path gives a full iSwap to the other target, both blocked is identity.
pub fn apply_split_slide<T: Scalar>(
    state: &Superposition<T>,
    s: usize,
    t1: usize,
    t2: usize,
    path1: &[usize],
    path2: &[usize],
) -> Result<Superposition<T>, UnitaryError> {
    let ops = [s, t1, t2];
    check_operands(state.width(), &ops)?;
    check_controls(state.width(), &ops, path1)?;
    check_controls(state.width(), &ops, path2)?;
    let split = LocalGate::split();
    let iswap = LocalGate::iswap(false);
    let to_t1 = [s, t1];
    let to_t2 = [s, t2];
    apply_selected(state, |b| match (any_set(b, path1), any_set(b, path2)) {
        (false, false) => Some((&split, &ops[..])),
        (true, false) => Some((&iswap, &to_t2[..])),
        (false, true) => Some((&iswap, &to_t1[..])),
        (true, true) => None,
    })
}

/// Merge with path controls, the adjoint-block mirror of
/// [`apply_split_slide`]; `path1` runs from `s1`, `path2` from `s2`.
pub fn apply_merge_slide<T: Scalar>(
    state: &Superposition<T>,
    s1: usize,
    s2: usize,
    t: usize,
    path1: &[usize],
    path2: &[usize],
) -> Result<Superposition<T>, UnitaryError> {
    let ops = [t, s2, s1];
    check_operands(state.width(), &ops)?;
    check_controls(state.width(), &ops, path1)?;
    check_controls(state.width(), &ops, path2)?;
    let merge = LocalGate::merge();
    let iswap_dag = LocalGate::iswap(true);
    let from_s1 = [s1, t];
    let from_s2 = [s2, t];
    apply_selected(state, |b| match (any_set(b, path1), any_set(b, path2)) {
        (false, false) => Some((&merge, &ops[..])),
        (true, false) => Some((&iswap_dag, &from_s2[..])),
        (false, true) => Some((&iswap_dag, &from_s1[..])),
        (true, true) => None,
    })
}

/// Product of jumps applied in order to every term satisfying `cond`; the
/// condition is read once, on the input term.
pub fn apply_jump_sequence<T: Scalar>(
    state: &Superposition<T>,
    jumps: &[(usize, usize)],
    cond: &Predicate,
) -> Result<Superposition<T>, UnitaryError> {
    let width = state.width();
    for &(x, y) in jumps {
        check_operands(width, &[x, y])?;
    }
    if let Some(i) = cond.max_bit().filter(|&i| i >= width) {
        return Err(UnitaryError::OutOfRange { index: i, width });
    }
    Ok(state.map_linear(|b, a, acc: &mut Accumulator<T>| {
        if !cond.eval(b) {
            acc.add(b.clone(), a);
            return;
        }
        let mut out = b.clone();
        let mut a = a;
        for &(x, y) in jumps {
            let (bx, by) = (out.get(x), out.get(y));
            if bx != by {
                out.set(x, by);
                out.set(y, bx);
                a = times_i(a);
            }
        }
        acc.add(out, a);
    })?)
}
