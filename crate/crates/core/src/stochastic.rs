//! Seeded random streams and the time distributions used by the simulator.
//!
//! Every random quantity comes from a ChaCha8 stream keyed by
//! `(master seed, purpose)` and positioned on stream number `trial`:
//!
//! ```text
//! key    = master.to_le_bytes() ‖ (purpose as u64).to_le_bytes() ‖ b"relaywalk/stream"
//! stream = trial index
//! ```
//!
//! Trials therefore never share a stream, can run in any order, and two
//! scenarios that differ only in code parameters see the same relay
//! placement, start vertices and walk choices for a given trial index.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum TimeModelError {
    #[error("rate λ must be positive and finite, got {0}")]
    Rate(f64),
    #[error("mean step time must be positive and finite, got {0}")]
    MeanStep(f64),
    #[error("chunk length must be non-negative and finite, got {0}")]
    Shift(f64),
    #[error("observation window W must be positive and finite, got {0}")]
    Window(f64),
}

/// What a random stream is used for. The discriminant is part of the key.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Purpose {
    Graph = 0,
    Placement = 1,
    AliceWalk = 2,
    BobWalk = 3,
    AliceClock = 4,
    BobClock = 5,
    Warden = 6,
    Message = 7,
}

const STREAM_TAG: &[u8; 16] = b"relaywalk/stream";

/// The generator for `(master, purpose, trial)`.
pub fn stream(master: u64, purpose: Purpose, trial: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&master.to_le_bytes());
    key[8..16].copy_from_slice(&(purpose as u64).to_le_bytes());
    key[16..].copy_from_slice(STREAM_TAG);
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(trial);
    rng
}

/// Time taken by one walk step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepTimeModel {
    /// Every step takes one time unit.
    Constant,
    /// Every step takes exactly the given mean.
    Deterministic(f64),
    /// Exponentially distributed steps with the given mean.
    Exponential(f64),
}

impl StepTimeModel {
    pub fn mean(&self) -> f64 {
        match *self {
            StepTimeModel::Constant => 1.0,
            StepTimeModel::Deterministic(m) | StepTimeModel::Exponential(m) => m,
        }
    }

    pub fn validate(&self) -> Result<(), TimeModelError> {
        let m = self.mean();
        if m > 0.0 && m.is_finite() {
            Ok(())
        } else {
            Err(TimeModelError::MeanStep(m))
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            StepTimeModel::Constant => "constant",
            StepTimeModel::Deterministic(_) => "deterministic",
            StepTimeModel::Exponential(_) => "exponential",
        }
    }
}

/// Chunk transmission time: a shifted exponential with support `[shift, ∞)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChunkTimeModel {
    /// One time unit per transmitted symbol, so this is the chunk length.
    pub shift: f64,
    pub rate: f64,
}

impl ChunkTimeModel {
    pub fn new(shift: f64, rate: f64) -> Result<Self, TimeModelError> {
        if !(shift >= 0.0 && shift.is_finite()) {
            return Err(TimeModelError::Shift(shift));
        }
        if !(rate > 0.0 && rate.is_finite()) {
            return Err(TimeModelError::Rate(rate));
        }
        Ok(Self { shift, rate })
    }

    pub fn mean(&self) -> f64 {
        self.shift + 1.0 / self.rate
    }

    /// `P(t > x)`.
    pub fn survival(&self, x: f64) -> f64 {
        if x <= self.shift {
            1.0
        } else {
            (-self.rate * (x - self.shift)).exp()
        }
    }
}

pub fn sample_chunk_time<R: Rng + ?Sized>(model: &ChunkTimeModel, rng: &mut R) -> f64 {
    let exp = Exp::new(model.rate).expect("rate validated at construction");
    model.shift + exp.sample(rng)
}

pub fn sample_step_time<R: Rng + ?Sized>(model: &StepTimeModel, rng: &mut R) -> f64 {
    match *model {
        StepTimeModel::Constant => 1.0,
        StepTimeModel::Deterministic(m) => m,
        StepTimeModel::Exponential(m) => Exp::new(1.0 / m).expect("validated mean").sample(rng),
    }
}

/// Warden arrival offset, uniform on `[0, window]`.
pub fn sample_warden_arrival<R: Rng + ?Sized>(window: f64, rng: &mut R) -> Result<f64, TimeModelError> {
    if !(window > 0.0 && window.is_finite()) {
        return Err(TimeModelError::Window(window));
    }
    Ok(rng.random::<f64>() * window)
}
