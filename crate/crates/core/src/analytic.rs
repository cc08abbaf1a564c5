//! Closed-form expected delays and the code parameters that minimise them.
//!
//! All delays scale with `θ_d·v`, the expected number of steps to reach one
//! particular vertex from stationarity; complete graphs use `θ = 1`.

use thiserror::Error;

use crate::graph::{GraphError, GraphSpec};

#[derive(Debug, Error, PartialEq)]
pub enum AnalyticError {
    #[error("parameters must satisfy k ≤ n ≤ r ≤ v (got k={k}, n={n}, r={r}, v={v})")]
    Ordering { k: usize, n: usize, r: usize, v: usize },
    #[error("k must be at least 1")]
    ZeroK,
    #[error("{name} must be positive and finite, got {value}")]
    NonPositive { name: &'static str, value: f64 },
    #[error("optimal n = {best} falls outside [k, ⌈√(rk+k)−1⌉] = [{k}, {upper}]")]
    RangeViolation { best: usize, k: usize, upper: usize },
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Relative tolerance under which two delay values count as tied.
pub const TIE_TOLERANCE: f64 = 1e-12;

/// Expected delay split into the time spent transmitting and walking.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DelayEstimate {
    pub value: f64,
    pub transmission: f64,
    pub walking: f64,
}

impl DelayEstimate {
    fn new(transmission: f64, walking: f64) -> Self {
        Self { value: transmission + walking, transmission, walking }
    }
}

/// Parameters of the random-transmission-time model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RandomTiming {
    /// Message length `m` in symbols; a chunk takes `m/k` time units to send.
    pub message_len: f64,
    /// Rate `λ` of the exponential part of a chunk transmission.
    pub rate: f64,
    /// Mean step time `E[η]`.
    pub mean_step: f64,
}

impl RandomTiming {
    pub fn validate(&self) -> Result<(), AnalyticError> {
        // m = 0 is allowed: it is the no-transmission-shift limit.
        if !(self.message_len >= 0.0 && self.message_len.is_finite()) {
            return Err(AnalyticError::NonPositive { name: "m", value: self.message_len });
        }
        for (name, value) in [("λ", self.rate), ("E[η]", self.mean_step)] {
            if value.is_nan() || value <= 0.0 {
                return Err(AnalyticError::NonPositive { name, value });
            }
        }
        Ok(())
    }
}

/// `H_n = Σ_{i=1..n} 1/i`, summed from the small terms up.
pub fn harmonic(n: usize) -> f64 {
    (1..=n).rev().map(|i| 1.0 / i as f64).sum()
}

fn check_order(g: &GraphSpec, r: usize, n: usize, k: usize) -> Result<f64, AnalyticError> {
    if k == 0 {
        return Err(AnalyticError::ZeroK);
    }
    if !(k <= n && n <= r && r <= g.vertices) {
        return Err(AnalyticError::Ordering { k, n, r, v: g.vertices });
    }
    Ok(g.theta_v()?)
}

/// Steps to drop `n` chunks on `r` relays, in units of `θ_d·v`.
fn dissemination_units(r: usize, n: usize) -> f64 {
    harmonic(r) - harmonic(r - n)
}

/// Steps to pick up `k` of `n` chunks, in units of `θ_d·v`.
fn collection_units(n: usize, k: usize) -> f64 {
    harmonic(n) - harmonic(n - k)
}

/// `H_r + H_n − H_{r−n} − H_{n−k}`.
pub fn walk_units(r: usize, n: usize, k: usize) -> f64 {
    dissemination_units(r, n) + collection_units(n, k)
}

/// Expected dissemination steps `θ_d v (H_r − H_{r−n})`.
pub fn expected_dissemination_steps(g: &GraphSpec, r: usize, n: usize) -> Result<f64, AnalyticError> {
    let tv = check_order(g, r, n, 1)?;
    Ok(tv * dissemination_units(r, n))
}

/// Expected collection steps `θ_d v (H_n − H_{n−k})`.
pub fn expected_collection_steps(g: &GraphSpec, n: usize, k: usize) -> Result<f64, AnalyticError> {
    let tv = check_order(g, n, n, k)?;
    Ok(tv * collection_units(n, k))
}

/// Expected message passing delay with constant transmission time:
/// `θ_d v (H_r + H_n − H_{r−n} − H_{n−k})`.
pub fn expected_delay_const(g: &GraphSpec, r: usize, n: usize, k: usize) -> Result<DelayEstimate, AnalyticError> {
    let tv = check_order(g, r, n, k)?;
    Ok(DelayEstimate::new(0.0, tv * walk_units(r, n, k)))
}

/// Expected dissemination time with random transmission time:
/// `n/λ + n m/k + θ_d v E[η] (H_r − H_{r−n})`.
pub fn expected_dissemination_random(
    g: &GraphSpec,
    r: usize,
    n: usize,
    k: usize,
    t: &RandomTiming,
) -> Result<DelayEstimate, AnalyticError> {
    let tv = check_order(g, r, n, k)?;
    t.validate()?;
    let nf = n as f64;
    let transmission = nf / t.rate + nf * t.message_len / k as f64;
    Ok(DelayEstimate::new(transmission, tv * t.mean_step * dissemination_units(r, n)))
}

/// Expected collection time with random transmission time:
/// `k/λ + m + θ_d v E[η] (H_n − H_{n−k})`.
pub fn expected_collection_random(
    g: &GraphSpec,
    r: usize,
    n: usize,
    k: usize,
    t: &RandomTiming,
) -> Result<DelayEstimate, AnalyticError> {
    let tv = check_order(g, r, n, k)?;
    t.validate()?;
    let kf = k as f64;
    let transmission = kf / t.rate + t.message_len;
    Ok(DelayEstimate::new(transmission, tv * t.mean_step * collection_units(n, k)))
}

/// Expected message passing delay with random transmission time:
/// `(n+k)/λ + (n/k + 1) m + θ_d v E[η] (H_r + H_n − H_{r−n} − H_{n−k})`,
/// the sum of the dissemination and collection expectations.
pub fn expected_delay_random(
    g: &GraphSpec,
    r: usize,
    n: usize,
    k: usize,
    t: &RandomTiming,
) -> Result<DelayEstimate, AnalyticError> {
    let a = expected_dissemination_random(g, r, n, k, t)?;
    let b = expected_collection_random(g, r, n, k, t)?;
    Ok(DelayEstimate::new(a.transmission + b.transmission, a.walking + b.walking))
}

fn nearly_equal(a: f64, b: f64) -> bool {
    (a - b).abs() <= TIE_TOLERANCE * a.abs().max(b.abs())
}

/// Index of the smallest value, preferring the earliest among ties.
/// Returns the index and whether a later value tied with it.
fn argmin_first(values: impl IntoIterator<Item = f64>) -> Option<(usize, bool)> {
    let mut best: Option<(usize, f64, bool)> = None;
    for (i, v) in values.into_iter().enumerate() {
        best = match best {
            None => Some((i, v, false)),
            Some((_, bv, _)) if v < bv && !nearly_equal(v, bv) => Some((i, v, false)),
            Some((bi, bv, tied)) => Some((bi, bv, tied || nearly_equal(v, bv))),
        };
    }
    best.map(|(i, _, t)| (i, t))
}

/// Minimiser of the constant-transmission-time delay over `n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimalN {
    pub n: usize,
    /// The other integer neighbour of `√(rk+k) − 1` gives the same delay.
    pub tie: bool,
    /// The real stationary point `√(rk+k) − 1`.
    pub stationary: f64,
}

/// Optimal number of coded chunks under constant transmission time.
///
/// The delay, seen as a function of `n`, decreases while `(n+1)² < k(r+1)`
/// and increases afterwards, so the optimum is the floor or ceiling of
/// `s = √(rk+k) − 1`, clamped to `[k, r]`. Both are evaluated and the
/// smaller wins; when `s` is an integer, `s` and `s + 1` tie exactly and the
/// smaller is returned with `tie` set.
pub fn optimal_n_const(r: usize, k: usize) -> Result<OptimalN, AnalyticError> {
    if k == 0 {
        return Err(AnalyticError::ZeroK);
    }
    if k > r {
        return Err(AnalyticError::Ordering { k, n: k, r, v: r });
    }
    let stationary = ((r * k + k) as f64).sqrt() - 1.0;
    // ⌊s⌋ + 1 covers ⌈s⌉, and is the tie partner when s is an integer.
    let lo = (stationary.floor() as usize).clamp(k, r);
    let hi = (stationary.floor() as usize + 1).clamp(k, r);
    if lo == hi {
        return Ok(OptimalN { n: lo, tie: false, stationary });
    }
    let (i, tie) = argmin_first([walk_units(r, lo, k), walk_units(r, hi, k)]).expect("two candidates");
    Ok(OptimalN { n: [lo, hi][i], tie, stationary })
}

/// Optimum of the random-transmission-time delay over `n ∈ [k, r]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimalNRandom {
    pub n: usize,
    pub delay: f64,
    /// The interval `[k, √(rk+k) − 1]` known to contain the optimum.
    pub range: (f64, f64),
}

pub fn optimal_n_random(g: &GraphSpec, r: usize, k: usize, t: &RandomTiming) -> Result<OptimalNRandom, AnalyticError> {
    check_order(g, r, k, k)?;
    let delays =
        (k..=r).map(|n| expected_delay_random(g, r, n, k, t).map(|d| d.value)).collect::<Result<Vec<_>, _>>()?;
    let (i, _) = argmin_first(delays.iter().copied()).expect("k ≤ r");
    let n = k + i;
    let upper = ((r * k + k) as f64).sqrt() - 1.0;
    let upper_int = (upper.ceil() as usize).max(k);
    if n > upper_int {
        return Err(AnalyticError::RangeViolation { best: n, k, upper: upper_int });
    }
    Ok(OptimalNRandom { n, delay: delays[i], range: (k as f64, upper) })
}

/// Number of data chunks minimising the random-transmission-time delay
/// for a given `n`; ties go to the smaller `k`.
pub fn optimal_k_random(g: &GraphSpec, r: usize, n: usize, t: &RandomTiming) -> Result<usize, AnalyticError> {
    check_order(g, r, n, 1)?;
    let delays =
        (1..=n).map(|k| expected_delay_random(g, r, n, k, t).map(|d| d.value)).collect::<Result<Vec<_>, _>>()?;
    Ok(1 + argmin_first(delays).expect("n ≥ 1").0)
}

/// Same as [`optimal_k_random`] for constant transmission time. The delay
/// is strictly increasing in `k`, so this is always 1; it is computed rather
/// than assumed.
pub fn optimal_k_const(g: &GraphSpec, r: usize, n: usize) -> Result<usize, AnalyticError> {
    check_order(g, r, n, 1)?;
    let delays = (1..=n).map(|k| expected_delay_const(g, r, n, k).map(|d| d.value)).collect::<Result<Vec<_>, _>>()?;
    Ok(1 + argmin_first(delays).expect("n ≥ 1").0)
}
