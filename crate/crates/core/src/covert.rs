//! Warden detection models and the covertness probability.
//!
//! A message passes covertly when none of its `n + k` chunk transmissions
//! (`n` deposits, `k` pickups) is detected. Detections are independent, so
//! `P_c = (1 − P_d)^{n+k}`.

use rand::Rng;
use thiserror::Error;

use crate::graph::{GraphError, GraphSpec};
use crate::stochastic::{sample_chunk_time, sample_warden_arrival, ChunkTimeModel, TimeModelError};

#[derive(Debug, Error, PartialEq)]
pub enum CovertError {
    #[error("patrolling needs at least one warden")]
    NoWardens,
    #[error("{name} must be positive and finite, got {value}")]
    NonPositive { name: &'static str, value: f64 },
    #[error("n must be at least 1")]
    ZeroN,
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Time(#[from] TimeModelError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DetectionModel {
    /// `β` walking wardens detect any transmission they meet:
    /// `P_d = β / (θ_d v)`.
    PatrollingConstant { wardens: u32, graph: GraphSpec },
    /// Walking wardens whose detection chance grows with chunk length:
    /// `P_d = ℓ β / (m θ_d v)`.
    PatrollingLinear { wardens: u32, graph: GraphSpec, message_len: f64 },
    /// A warden arriving at `U(0, W)` after a transmission starts detects it
    /// if the transmission (`SExp(ℓ, λ)`) is still running.
    Surveillance { window: f64, rate: f64 },
}

fn positive(name: &'static str, value: f64) -> Result<(), CovertError> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(CovertError::NonPositive { name, value })
    }
}

impl DetectionModel {
    pub fn validate(&self) -> Result<(), CovertError> {
        match *self {
            DetectionModel::PatrollingConstant { wardens, graph } => {
                if wardens == 0 {
                    return Err(CovertError::NoWardens);
                }
                graph.theta_v()?;
            }
            DetectionModel::PatrollingLinear { wardens, graph, message_len } => {
                if wardens == 0 {
                    return Err(CovertError::NoWardens);
                }
                graph.theta_v()?;
                positive("m", message_len)?;
            }
            DetectionModel::Surveillance { window, rate } => {
                positive("W", window)?;
                positive("λ", rate)?;
            }
        }
        Ok(())
    }

    pub fn label(&self) -> &'static str {
        match self {
            DetectionModel::PatrollingConstant { .. } => "patrolling-constant",
            DetectionModel::PatrollingLinear { .. } => "patrolling-linear",
            DetectionModel::Surveillance { .. } => "surveillance",
        }
    }

    pub fn is_patrolling(&self) -> bool {
        !matches!(self, DetectionModel::Surveillance { .. })
    }
}

/// Probability that one transmission of a chunk of length `chunk_len` is
/// detected, clamped to `[0, 1]`.
pub fn detect_prob(model: &DetectionModel, chunk_len: f64) -> Result<f64, CovertError> {
    model.validate()?;
    positive("ℓ", chunk_len)?;
    let p = match *model {
        DetectionModel::PatrollingConstant { wardens, graph } => wardens as f64 / graph.theta_v()?,
        DetectionModel::PatrollingLinear { wardens, graph, message_len } => {
            chunk_len * wardens as f64 / (message_len * graph.theta_v()?)
        }
        DetectionModel::Surveillance { window, rate } => {
            if window < chunk_len {
                1.0
            } else {
                // 1/(λW) + ℓ/W − e^{−λ(W−ℓ)}/(λW), without the cancellation.
                chunk_len / window - (-rate * (window - chunk_len)).exp_m1() / (rate * window)
            }
        }
    };
    Ok(p.clamp(0.0, 1.0))
}

/// `(1 − P_d)^{n+k}`.
pub fn covertness(p_d: f64, n: usize, k: usize) -> f64 {
    debug_assert!((0.0..=1.0).contains(&p_d));
    (1.0 - p_d).powi((n + k) as i32)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CovertnessReport {
    pub p_d: f64,
    pub p_c: f64,
    pub transmissions: usize,
}

/// Detection and covertness for an `(n, k)` code on an `m`-symbol message.
pub fn covertness_report(
    model: &DetectionModel,
    message_len: f64,
    n: usize,
    k: usize,
) -> Result<CovertnessReport, CovertError> {
    let p_d = detect_prob(model, message_len / k as f64)?;
    Ok(CovertnessReport { p_d, p_c: covertness(p_d, n, k), transmissions: n + k })
}

/// The `k` maximising covertness for a given `n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CovertOptimum {
    pub k: usize,
    pub p_c: f64,
    /// What the monotonicity argument predicts for patrolling wardens:
    /// `k = 1` for constant detection, `k = n` for length-linear detection
    /// (valid while `β ≤ θ_d v`). `None` for surveillance.
    pub closed_form: Option<usize>,
}

/// Exhaustive argmax of `P_c(k)` over `k ∈ [1, n]`; ties go to the smaller `k`.
pub fn argmax_k_covertness(model: &DetectionModel, n: usize, message_len: f64) -> Result<CovertOptimum, CovertError> {
    if n == 0 {
        return Err(CovertError::ZeroN);
    }
    positive("m", message_len)?;
    let mut best = (0usize, f64::NEG_INFINITY);
    for k in 1..=n {
        let p = covertness_report(model, message_len, n, k)?.p_c;
        if p > best.1 {
            best = (k, p);
        }
    }
    let closed_form = match *model {
        DetectionModel::PatrollingConstant { .. } => Some(1),
        DetectionModel::PatrollingLinear { wardens, graph, .. } if wardens as f64 <= graph.theta_v()? => Some(n),
        _ => None,
    };
    Ok(CovertOptimum { k: best.0, p_c: best.1, closed_form })
}

/// Draws whether one transmission of length `chunk_len` is detected.
/// Surveillance draws its own transmission time.
pub fn sample_detection<R: Rng + ?Sized>(
    model: &DetectionModel,
    chunk_len: f64,
    rng: &mut R,
) -> Result<bool, CovertError> {
    match *model {
        DetectionModel::Surveillance { window, rate } => {
            let t = sample_chunk_time(&ChunkTimeModel::new(chunk_len, rate)?, rng);
            Ok(sample_warden_arrival(window, rng)? <= t)
        }
        _ => sample_detection_during(model, chunk_len, f64::NAN, rng),
    }
}

/// Draws whether a transmission that lasted `duration` is detected.
/// Patrolling models ignore the duration.
pub fn sample_detection_during<R: Rng + ?Sized>(
    model: &DetectionModel,
    chunk_len: f64,
    duration: f64,
    rng: &mut R,
) -> Result<bool, CovertError> {
    match *model {
        DetectionModel::Surveillance { window, .. } => Ok(sample_warden_arrival(window, rng)? <= duration),
        _ => {
            let p = detect_prob(model, chunk_len)?;
            Ok(rng.random::<f64>() < p)
        }
    }
}
