//! Delay versus covertness: per-`n` strategy sweeps and Pareto filtering.

use std::fmt;
use std::ops::RangeInclusive;
use std::str::FromStr;

use thiserror::Error;

use crate::analytic::{
    expected_delay_const, expected_delay_random, optimal_k_const, optimal_k_random, AnalyticError, RandomTiming,
};
use crate::coding::{CodeParams, CodingError};
use crate::covert::{argmax_k_covertness, covertness_report, CovertError, DetectionModel};
use crate::graph::GraphSpec;
use crate::protocol::{DelayModel, ProtocolError, ScenarioConfig, Simulator};
use crate::stats::Summary;

#[derive(Debug, Error, PartialEq)]
pub enum TradeoffError {
    #[error("sweep range {lo}..={hi} must lie within [1, r = {r}]")]
    Range { lo: usize, hi: usize, r: usize },
    #[error("unknown strategy {0:?} (expected min-delay, max-prob, k=<c> or k=n-<c>)")]
    UnknownStrategy(String),
    #[error(transparent)]
    Analytic(#[from] AnalyticError),
    #[error(transparent)]
    Covert(#[from] CovertError),
    #[error(transparent)]
    Coding(#[from] CodingError),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
}

/// How `k` is chosen for each `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Strategy {
    MinDelay,
    MaxProb,
    /// `k = c`; skipped where `c > n`.
    FixedK(usize),
    /// `k = n − c`; skipped where that is below 1.
    FixedOffset(usize),
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Strategy::MinDelay => f.write_str("min-delay"),
            Strategy::MaxProb => f.write_str("max-prob"),
            Strategy::FixedK(c) => write!(f, "k={c}"),
            Strategy::FixedOffset(c) => write!(f, "k=n-{c}"),
        }
    }
}

impl FromStr for Strategy {
    type Err = TradeoffError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || TradeoffError::UnknownStrategy(s.to_string());
        let t = s.trim();
        match t {
            "min-delay" => return Ok(Strategy::MinDelay),
            "max-prob" => return Ok(Strategy::MaxProb),
            _ => {}
        }
        let rhs = t.strip_prefix("k=").ok_or_else(bad)?.trim();
        if let Some(c) = rhs.strip_prefix("n-") {
            let c: usize = c.trim().parse().map_err(|_| bad())?;
            return Ok(Strategy::FixedOffset(c));
        }
        let c: usize = rhs.parse().map_err(|_| bad())?;
        if c == 0 {
            return Err(bad());
        }
        Ok(Strategy::FixedK(c))
    }
}

/// Everything a sweep needs except the code dimensions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepConfig {
    pub graph: GraphSpec,
    pub relays: usize,
    /// Message length `m`.
    pub message_len: usize,
    pub delay: DelayModel,
    pub warden: DetectionModel,
}

/// Monte Carlo settings for simulated sweeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Simulation {
    pub trials: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub strategy: Strategy,
    pub n: usize,
    pub k: usize,
    pub delay: Summary,
    pub p_c: Summary,
}

impl SweepConfig {
    fn timing(&self) -> Option<RandomTiming> {
        match self.delay {
            DelayModel::ConstantTransmission => None,
            DelayModel::RandomTransmission { step, rate } => {
                Some(RandomTiming { message_len: self.message_len as f64, rate, mean_step: step.mean() })
            }
        }
    }

    /// Closed-form expected delay for `(n, k)`.
    pub fn expected_delay(&self, n: usize, k: usize) -> Result<f64, AnalyticError> {
        Ok(match self.timing() {
            None => expected_delay_const(&self.graph, self.relays, n, k)?.value,
            Some(t) => expected_delay_random(&self.graph, self.relays, n, k, &t)?.value,
        })
    }

    pub fn covertness(&self, n: usize, k: usize) -> Result<f64, CovertError> {
        Ok(covertness_report(&self.warden, self.message_len as f64, n, k)?.p_c)
    }

    /// The `k` the strategy picks for `n`, or `None` if it has none.
    pub fn choose_k(&self, strategy: Strategy, n: usize) -> Result<Option<usize>, TradeoffError> {
        Ok(match strategy {
            Strategy::MinDelay => Some(match self.timing() {
                None => optimal_k_const(&self.graph, self.relays, n)?,
                Some(t) => optimal_k_random(&self.graph, self.relays, n, &t)?,
            }),
            Strategy::MaxProb => Some(argmax_k_covertness(&self.warden, n, self.message_len as f64)?.k),
            Strategy::FixedK(c) => (1..=n).contains(&c).then_some(c),
            Strategy::FixedOffset(c) => n.checked_sub(c).filter(|&k| k >= 1),
        })
    }
}

/// Evaluates one strategy for every `n` in `range`.
///
/// `k` is always chosen from the closed forms. With `simulation` set, the
/// delay and covertness reported for that `(n, k)` are Monte Carlo estimates
/// instead.
pub fn sweep(
    cfg: &SweepConfig,
    strategy: Strategy,
    range: RangeInclusive<usize>,
    simulation: Option<Simulation>,
) -> Result<Vec<SweepPoint>, TradeoffError> {
    let (lo, hi) = (*range.start(), *range.end());
    if lo == 0 || lo > hi || hi > cfg.relays {
        return Err(TradeoffError::Range { lo, hi, r: cfg.relays });
    }
    let graph = match simulation {
        Some(sim) => Some(cfg.graph.build(sim.seed).map_err(ProtocolError::from)?),
        None => None,
    };
    let mut points = Vec::new();
    for n in range {
        let Some(k) = cfg.choose_k(strategy, n)? else { continue };
        let (delay, p_c) = match simulation {
            None => (Summary::exact(cfg.expected_delay(n, k)?), Summary::exact(cfg.covertness(n, k)?)),
            Some(sim) => {
                let graph = graph.clone().expect("graph built for simulated sweeps");
                let scenario = ScenarioConfig {
                    graph: cfg.graph,
                    relays: cfg.relays,
                    code: CodeParams::new(cfg.message_len, k, n)?,
                    delay: cfg.delay,
                    warden: Some(cfg.warden),
                    trials: sim.trials,
                    seed: sim.seed,
                };
                let stats = Simulator::with_graph(scenario, graph)?.run()?.stats;
                (stats.t_ab, stats.covert)
            }
        };
        points.push(SweepPoint { strategy, n, k, delay, p_c });
    }
    Ok(points)
}

fn dominates(a: &SweepPoint, b: &SweepPoint) -> bool {
    let (ad, bd) = (a.delay.mean, b.delay.mean);
    let (ap, bp) = (a.p_c.mean, b.p_c.mean);
    ad <= bd && ap >= bp && (ad < bd || ap > bp)
}

/// For each point, whether no other point has lower-or-equal delay and
/// higher-or-equal covertness with at least one strict.
pub fn pareto_flags(points: &[SweepPoint]) -> Vec<bool> {
    points.iter().map(|p| !points.iter().any(|q| dominates(q, p))).collect()
}

/// The non-dominated points, stably ordered by `n`.
pub fn pareto(points: &[SweepPoint]) -> Vec<SweepPoint> {
    let mut front: Vec<SweepPoint> =
        points.iter().zip(pareto_flags(points)).filter_map(|(p, keep)| keep.then_some(*p)).collect();
    front.sort_by_key(|p| p.n);
    front
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stochastic::StepTimeModel;

    const G: GraphSpec = GraphSpec { vertices: 100, degree: crate::graph::Degree::Regular(5) };

    fn patrolling(linear: bool) -> SweepConfig {
        let warden = if linear {
            DetectionModel::PatrollingLinear { wardens: 10, graph: G, message_len: 100.0 }
        } else {
            DetectionModel::PatrollingConstant { wardens: 10, graph: G }
        };
        SweepConfig { graph: G, relays: 15, message_len: 100, delay: DelayModel::ConstantTransmission, warden }
    }

    fn point(n: usize, delay: f64, p_c: f64) -> SweepPoint {
        SweepPoint { strategy: Strategy::MinDelay, n, k: 1, delay: Summary::exact(delay), p_c: Summary::exact(p_c) }
    }

    #[test]
    fn strategy_parsing() {
        for s in ["min-delay", "max-prob", "k=2", "k=n-1"] {
            assert_eq!(s.parse::<Strategy>().unwrap().to_string(), s);
        }
        assert!("k=0".parse::<Strategy>().is_err());
        assert!("fastest".parse::<Strategy>().is_err());
    }

    #[test]
    fn constant_patrolling_strategies_coincide() {
        let cfg = patrolling(false);
        let a = sweep(&cfg, Strategy::MinDelay, 1..=10, None).unwrap();
        let b = sweep(&cfg, Strategy::MaxProb, 1..=10, None).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_eq!((x.n, x.k), (y.n, y.k));
            assert_eq!(x.k, 1);
            assert_eq!(x.delay, y.delay);
        }
        // Delay bottoms out at n = 3 or 4 (exact tie), covertness falls with n.
        let best = a.iter().map(|p| p.delay.mean).fold(f64::INFINITY, f64::min);
        assert!((a[2].delay.mean - best).abs() < 1e-9 && (a[3].delay.mean - best).abs() < 1e-9);
        assert!(a.windows(2).all(|w| w[1].p_c.mean < w[0].p_c.mean));
    }

    #[test]
    fn linear_patrolling_strategies_diverge() {
        let cfg = patrolling(true);
        let a = sweep(&cfg, Strategy::MinDelay, 1..=10, None).unwrap();
        let b = sweep(&cfg, Strategy::MaxProb, 1..=10, None).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.k, 1);
            assert_eq!(y.k, y.n);
        }
        let mut all = a.clone();
        all.extend(&b);
        let front = pareto(&all);
        assert!(front.iter().any(|p| p.strategy == Strategy::MinDelay && p.n > 1));
        assert!(front.iter().any(|p| p.strategy == Strategy::MaxProb && p.n > 1));
        assert!(front.windows(2).all(|w| w[0].n <= w[1].n));
    }

    #[test]
    fn fixed_strategies_skip_infeasible_n() {
        let cfg = patrolling(true);
        let two = sweep(&cfg, Strategy::FixedK(2), 1..=10, None).unwrap();
        assert_eq!(two.first().map(|p| p.n), Some(2));
        assert!(two.iter().all(|p| p.k == 2));
        let off = sweep(&cfg, Strategy::FixedOffset(1), 1..=10, None).unwrap();
        assert!(off.iter().all(|p| p.k == p.n - 1));
        assert_eq!(off.len(), 9);
    }

    #[test]
    fn bad_ranges() {
        let cfg = patrolling(false);
        assert!(sweep(&cfg, Strategy::MinDelay, 0..=3, None).is_err());
        assert!(sweep(&cfg, Strategy::MinDelay, 1..=16, None).is_err());
    }

    #[test]
    fn pareto_basics() {
        let p = point(1, 10.0, 0.5);
        assert_eq!(pareto(&[p]), vec![p]);
        let worse = point(2, 12.0, 0.4);
        assert_eq!(pareto(&[worse, p]), vec![p]);
        let other = point(3, 8.0, 0.3);
        assert_eq!(pareto_flags(&[worse, p, other]), vec![false, true, true]);
        // Identical points do not dominate each other.
        assert_eq!(pareto_flags(&[p, p]), vec![true, true]);
    }

    #[test]
    fn simulated_sweep_close_to_analytic() {
        let cfg = patrolling(false);
        let sim = Simulation { trials: 2_000, seed: 7 };
        let a = sweep(&cfg, Strategy::MinDelay, 2..=4, None).unwrap();
        let s = sweep(&cfg, Strategy::MinDelay, 2..=4, Some(sim)).unwrap();
        for (x, y) in a.iter().zip(&s) {
            assert_eq!(x.k, y.k);
            assert!((x.delay.mean - y.delay.mean).abs() / x.delay.mean < 0.1);
            assert!((x.p_c.mean - y.p_c.mean).abs() < 4.0 * y.p_c.stderr + 1e-9);
        }
    }

    #[test]
    fn surveillance_sweep_runs() {
        let cfg = SweepConfig {
            graph: G,
            relays: 10,
            message_len: 10,
            delay: DelayModel::RandomTransmission { step: StepTimeModel::Deterministic(1.0), rate: 0.2 },
            warden: DetectionModel::Surveillance { window: 30.0, rate: 0.2 },
        };
        let pts = sweep(&cfg, Strategy::MaxProb, 1..=10, None).unwrap();
        assert_eq!(pts.len(), 10);
        assert!(pts.iter().all(|p| (0.0..=1.0).contains(&p.p_c.mean) && p.delay.mean > 0.0));
    }
}
