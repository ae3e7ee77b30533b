use super::classify::MovePlan;
use super::{MoveError, Variant};
use crate::measure::{forced_measure, measure, RngStream};
use crate::predicate::Predicate;
use crate::qstate::{GameState, Superposition};
use crate::scalar::Scalar;
use crate::square::Square;
use crate::unitaries::{
    apply_jump, apply_jump_sequence, apply_merge, apply_merge_slide, apply_slide, apply_split,
    apply_split_slide, ControlSpec,
};

/// Where the measurement outcome of a move comes from.
#[derive(Debug)]
pub enum OutcomeSource<'a> {
    /// Sample with one draw from the stream.
    Sample(&'a mut RngStream),
    /// Use a recorded outcome; `None` for moves without a measurement.
    Forced(Option<bool>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct MoveResult<T> {
    pub variant: Variant,
    /// The post-state differs from the pre-state modulo global phase.
    pub legal: bool,
    pub outcome: Option<bool>,
    /// Probability of the outcome that occurred.
    pub probability: Option<T>,
    /// Whether the variant's operator ran.
    pub applied: bool,
    /// Successor when legal, otherwise the unchanged input.
    pub state: GameState<T>,
}

/// Runs `plan` on `state`: optional measurement, then the operator on
/// outcome 1 or when nothing is measured, then the legality check and the
/// classical update.
pub fn execute<T: Scalar>(
    state: &GameState<T>,
    plan: &MovePlan,
    source: OutcomeSource<'_>,
    ply: u32,
) -> Result<MoveResult<T>, MoveError> {
    let (outcome, probability, measured) = match (&plan.measurement, source) {
        (Some(spec), OutcomeSource::Sample(rng)) => {
            let m = measure(&state.psi, spec, rng)?;
            (Some(m.outcome), Some(m.probability), m.state)
        }
        (Some(spec), OutcomeSource::Forced(Some(o))) => {
            let m = forced_measure(&state.psi, spec, o)?;
            (Some(o), Some(m.probability), m.state)
        }
        (Some(_), OutcomeSource::Forced(None)) => return Err(MoveError::MissingOutcome),
        (None, OutcomeSource::Forced(Some(_))) => return Err(MoveError::UnexpectedOutcome),
        (None, _) => (None, None, state.psi.clone()),
    };
    let applied = outcome != Some(false);

    let mut next = GameState {
        psi: measured,
        classical: state.classical,
        ancillas: state.ancillas.clone(),
    };
    if applied {
        next.psi = apply_operator(&mut next, plan, ply)?;
    }

    let added = next.psi.width() - state.psi.width();
    let unchanged = next
        .psi
        .equal_mod_global_phase(&state.psi.widened(added), T::EQUALITY)
        .map_err(crate::unitaries::UnitaryError::from)?;
    if unchanged {
        return Ok(MoveResult {
            variant: plan.variant,
            legal: false,
            outcome,
            probability,
            applied,
            state: state.clone(),
        });
    }

    update_classical(&mut next, plan, applied);
    Ok(MoveResult {
        variant: plan.variant,
        legal: true,
        outcome,
        probability,
        applied,
        state: next,
    })
}

/// Allocates any capture ancillas on `st` and returns the transformed state.
fn apply_operator<T: Scalar>(
    st: &mut GameState<T>,
    plan: &MovePlan,
    ply: u32,
) -> Result<Superposition<T>, MoveError> {
    use Variant::*;
    let i = |s: Square| s.index();
    let path_bits = |k: usize| plan.paths[k].iter().map(|s| s.index()).collect::<Vec<_>>();
    let s = plan.source();
    let t = plan.target();
    let capture = |st: &mut GameState<T>, origin: Square| {
        let captured = st.classical.get(origin);
        st.append_ancilla(captured, origin, ply)
    };

    let out = match plan.variant {
        StandardJump | PawnStep | BlockedJump | BlockedPawnStep => {
            apply_jump(&st.psi, i(s), i(t), &ControlSpec::none())?
        }
        StandardSlide | BlockedSlide | PawnTwoStep | BlockedPawnTwoStep => {
            apply_slide(&st.psi, i(s), i(t), &path_bits(0))?
        }
        CaptureJump => {
            let c = capture(st, t);
            apply_jump_sequence(&st.psi, &[(i(t), c), (i(s), i(t))], &Predicate::True)?
        }
        CaptureSlide => {
            let c = capture(st, t);
            let cond = Predicate::all_empty(&path_bits(0));
            apply_jump_sequence(&st.psi, &[(i(t), c), (i(s), i(t))], &cond)?
        }
        PawnCapture => {
            let c = capture(st, t);
            let cond = Predicate::occupied(i(s)).and(Predicate::occupied(i(t)));
            apply_jump_sequence(&st.psi, &[(i(t), c), (i(s), i(t))], &cond)?
        }
        StandardEp | BlockedEp => {
            let ep = plan.ep_square.expect("en passant plan");
            let c = capture(st, ep);
            let cond = Predicate::occupied(i(s)).and(Predicate::occupied(i(ep)));
            apply_jump_sequence(&st.psi, &[(i(ep), c), (i(s), i(t))], &cond)?
        }
        CaptureEp => {
            let ep = plan.ep_square.expect("en passant plan");
            let c1 = capture(st, ep);
            let c2 = capture(st, t);
            let cond = Predicate::occupied(i(s))
                .and(Predicate::occupied(i(t)).or(Predicate::occupied(i(ep))));
            apply_jump_sequence(&st.psi, &[(i(ep), c1), (i(t), c2), (i(s), i(t))], &cond)?
        }
        SplitJump => apply_split(&st.psi, i(s), i(plan.targets[0]), i(plan.targets[1]))?,
        SplitSlide => apply_split_slide(
            &st.psi,
            i(s),
            i(plan.targets[0]),
            i(plan.targets[1]),
            &path_bits(0),
            &path_bits(1),
        )?,
        MergeJump => apply_merge(&st.psi, i(plan.sources[0]), i(plan.sources[1]), i(t))?,
        MergeSlide => apply_merge_slide(
            &st.psi,
            i(plan.sources[0]),
            i(plan.sources[1]),
            i(t),
            &path_bits(0),
            &path_bits(1),
        )?,
        CastleKingSide => {
            let (h, f) = plan.rook.expect("castle plan");
            apply_jump_sequence(&st.psi, &[(i(f), i(h)), (i(s), i(t))], &Predicate::True)?
        }
        CastleQueenSide => {
            let (a, d) = plan.rook.expect("castle plan");
            let b = Square::from_coords(1, s.rank()).expect("on board");
            apply_jump_sequence(
                &st.psi,
                &[(i(t), i(s)), (i(a), i(d))],
                &Predicate::empty(i(b)),
            )?
        }
    };
    Ok(out)
}

/// Legal-move value update followed by clearing of unoccupied squares and
/// the flag update.
fn update_classical<T: Scalar>(st: &mut GameState<T>, plan: &MovePlan, applied: bool) {
    if applied {
        for (t, v) in plan.placements() {
            st.classical.set(t, Some(v));
        }
    }
    let marginals = st.psi.board_marginals();
    for s in Square::all() {
        if marginals[s.index()] <= T::ZERO_PROB {
            st.classical.set(s, None);
        }
    }
    let flags = &mut st.classical.flags;
    flags.clear_castling_for(plan.touched());
    flags.ep_file = (applied && plan.variant == Variant::PawnTwoStep).then(|| plan.source().file());
    flags.turn = plan.mover.color.opponent();
}
