//! Two-outcome projective measurements with seeded, replayable sampling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use thiserror::Error;

use crate::predicate::Predicate;
use crate::qstate::{QStateError, Superposition};
use crate::scalar::Scalar;

/// Name of the generator recorded in save documents.
pub const RNG_ALGORITHM: &str = "chacha20";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MeasureError {
    #[error("recorded outcome {outcome} has probability {probability}")]
    ZeroProbability { outcome: u8, probability: f64 },
    #[error(transparent)]
    State(#[from] QStateError),
}

/// `M1` is the subspace where `predicate` holds; `M0` is its complement.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MeasurementSpec {
    pub predicate: Predicate,
    pub description: &'static str,
}

impl MeasurementSpec {
    pub fn new(predicate: Predicate, description: &'static str) -> Self {
        MeasurementSpec {
            predicate,
            description,
        }
    }
}

/// Seeded uniform source; every measurement consumes exactly one draw.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    draws: u64,
    rng: ChaCha20Rng,
}

impl RngStream {
    pub fn new(seed: u64) -> Self {
        RngStream {
            seed,
            draws: 0,
            rng: ChaCha20Rng::seed_from_u64(seed),
        }
    }

    /// Stream positioned after `draws` draws from `seed`.
    pub fn resume(seed: u64, draws: u64) -> Self {
        let mut s = RngStream::new(seed);
        for _ in 0..draws {
            s.draw();
        }
        s
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn draws(&self) -> u64 {
        self.draws
    }

    /// Uniform in `[0, 1)`.
    pub fn draw(&mut self) -> f64 {
        self.draws += 1;
        self.rng.random::<f64>()
    }
}

impl PartialEq for RngStream {
    fn eq(&self, other: &Self) -> bool {
        self.seed == other.seed && self.draws == other.draws
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeasureOutcome<T> {
    pub outcome: bool,
    pub state: Superposition<T>,
    /// Probability of the outcome that occurred.
    pub probability: T,
}

pub fn probability_of_one<T: Scalar>(state: &Superposition<T>, spec: &MeasurementSpec) -> T {
    state.probability_where(|b| spec.predicate.eval(b))
}

/// Samples an outcome, consuming one draw even when the result is certain.
pub fn measure<T: Scalar>(
    state: &Superposition<T>,
    spec: &MeasurementSpec,
    rng: &mut RngStream,
) -> Result<MeasureOutcome<T>, MeasureError> {
    let p1 = probability_of_one(state, spec).min(T::one());
    let u = rng.draw();
    let outcome = if p1 <= T::ZERO_PROB {
        false
    } else if p1 >= T::one() - T::ZERO_PROB {
        true
    } else {
        T::lit(u) < p1
    };
    project(state, spec, outcome, p1)
}

/// Projects onto a recorded outcome without touching any generator.
pub fn forced_measure<T: Scalar>(
    state: &Superposition<T>,
    spec: &MeasurementSpec,
    outcome: bool,
) -> Result<MeasureOutcome<T>, MeasureError> {
    let p1 = probability_of_one(state, spec).min(T::one());
    let p = if outcome { p1 } else { T::one() - p1 };
    if p <= T::ZERO_PROB {
        return Err(MeasureError::ZeroProbability {
            outcome: outcome as u8,
            probability: p.to_f64().unwrap_or(f64::NAN),
        });
    }
    project(state, spec, outcome, p1)
}

fn project<T: Scalar>(
    state: &Superposition<T>,
    spec: &MeasurementSpec,
    outcome: bool,
    p1: T,
) -> Result<MeasureOutcome<T>, MeasureError> {
    let probability = if outcome { p1 } else { T::one() - p1 };
    let projected = state.project(|b| spec.predicate.eval(b) == outcome)?;
    Ok(MeasureOutcome {
        outcome,
        state: projected,
        probability,
    })
}
