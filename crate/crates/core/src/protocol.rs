//! Monte Carlo simulation of the two-phase message passing protocol.
//!
//! Alice encodes an `m`-byte message into `n` coded chunks and walks,
//! depositing chunk `i` on the `i`-th empty relay she reaches. Once all `n`
//! are placed, Bob starts his own walk and picks up chunks from relays he has
//! not drained yet until he holds `k`, then decodes. Wardens, if any, get one
//! detection chance per transmission.
//!
//! Under the constant transmission time model a step takes one time unit and
//! transmissions are instantaneous. Under the random model every step takes
//! an `η` draw and every transmission an `SExp(m/k, λ)` draw during which the
//! walker stays put.

use rand::{Rng, RngCore};
use rayon::prelude::*;
use thiserror::Error;

use crate::coding::{CodeParams, Codec, CodedChunk, CodingError};
use crate::covert::{sample_detection_during, CovertError, DetectionModel};
use crate::graph::{place_relays, Graph, GraphError, GraphSpec, RelayPlacement, Slot};
use crate::mobility::{walk_until, WalkError, WalkerState};
use crate::stats::Summary;
use crate::stochastic::{
    sample_chunk_time, sample_step_time, stream, ChunkTimeModel, Purpose, StepTimeModel, TimeModelError,
};

#[derive(Debug, Error, PartialEq)]
pub enum ProtocolError {
    #[error("scenario needs n ≤ r ≤ v (got n={n}, r={r}, v={v})")]
    Ordering { n: usize, r: usize, v: usize },
    #[error("trial count must be at least 1")]
    NoTrials,
    #[error("{warden} wardens are only simulated with {delay} transmission time")]
    UnsupportedPairing { warden: &'static str, delay: &'static str },
    #[error("surveillance rate {warden} differs from the transmission rate {delay}")]
    RateMismatch { warden: f64, delay: f64 },
    #[error("trial {0}: collected chunks did not decode to the original message")]
    DecodeMismatch(u64),
    #[error("graph has {got} vertices, scenario says {expected}")]
    GraphMismatch { expected: usize, got: usize },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Walk(#[from] WalkError),
    #[error(transparent)]
    Coding(#[from] CodingError),
    #[error(transparent)]
    Covert(#[from] CovertError),
    #[error(transparent)]
    Time(#[from] TimeModelError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DelayModel {
    /// Unit step time, negligible transmissions; delay equals step count.
    ConstantTransmission,
    /// Random step times and shifted-exponential transmissions of rate `rate`.
    RandomTransmission { step: StepTimeModel, rate: f64 },
}

impl DelayModel {
    pub fn label(&self) -> &'static str {
        match self {
            DelayModel::ConstantTransmission => "constant",
            DelayModel::RandomTransmission { .. } => "random",
        }
    }

    pub fn validate(&self) -> Result<(), TimeModelError> {
        if let DelayModel::RandomTransmission { step, rate } = self {
            step.validate()?;
            ChunkTimeModel::new(0.0, *rate)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScenarioConfig {
    pub graph: GraphSpec,
    pub relays: usize,
    pub code: CodeParams,
    pub delay: DelayModel,
    /// `None` means no wardens (β = 0).
    pub warden: Option<DetectionModel>,
    pub trials: usize,
    pub seed: u64,
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<(), ProtocolError> {
        self.graph.validate()?;
        let (n, r, v) = (self.code.n, self.relays, self.graph.vertices);
        if !(n <= r && r <= v) {
            return Err(ProtocolError::Ordering { n, r, v });
        }
        if self.trials == 0 {
            return Err(ProtocolError::NoTrials);
        }
        self.delay.validate()?;
        if let Some(w) = &self.warden {
            w.validate()?;
            match (w, &self.delay) {
                (DetectionModel::Surveillance { rate, .. }, DelayModel::RandomTransmission { rate: dr, .. }) => {
                    if rate != dr {
                        return Err(ProtocolError::RateMismatch { warden: *rate, delay: *dr });
                    }
                }
                (DetectionModel::Surveillance { .. }, DelayModel::ConstantTransmission) => {
                    return Err(ProtocolError::UnsupportedPairing { warden: "surveillance", delay: "random" });
                }
                (_, DelayModel::RandomTransmission { .. }) => {
                    return Err(ProtocolError::UnsupportedPairing { warden: "patrolling", delay: "constant" });
                }
                _ => {}
            }
        }
        Ok(())
    }
}

/// One chunk handed between a walker and a relay.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transmission {
    pub vertex: usize,
    pub chunk: usize,
    pub duration: f64,
}

/// What happened during one phase.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseRecord {
    pub steps: u64,
    pub time: f64,
    pub transmissions: Vec<Transmission>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialResult {
    pub index: u64,
    pub s_a: u64,
    pub s_b: u64,
    pub t_a: f64,
    pub t_b: f64,
    pub t_ab: f64,
    pub detected: bool,
    pub detections: u32,
}

/// Clock for one walker: step times and transmission times.
struct Clock<'a, R: RngCore> {
    delay: &'a DelayModel,
    chunk: Option<ChunkTimeModel>,
    rng: R,
}

impl<'a, R: RngCore> Clock<'a, R> {
    fn new(delay: &'a DelayModel, chunk_len: f64, rng: R) -> Result<Self, TimeModelError> {
        let chunk = match delay {
            DelayModel::ConstantTransmission => None,
            DelayModel::RandomTransmission { rate, .. } => Some(ChunkTimeModel::new(chunk_len, *rate)?),
        };
        Ok(Self { delay, chunk, rng })
    }

    fn step(&mut self) -> f64 {
        match self.delay {
            DelayModel::ConstantTransmission => 1.0,
            DelayModel::RandomTransmission { step, .. } => sample_step_time(step, &mut self.rng),
        }
    }

    fn transmit(&mut self) -> f64 {
        match &self.chunk {
            None => 0.0,
            Some(c) => sample_chunk_time(c, &mut self.rng),
        }
    }
}

/// Alice's walk. Deposits chunks `0..n` on the first `n` empty relays met.
pub fn simulate_dissemination<W: Rng, C: RngCore>(
    graph: &Graph,
    placement: &mut RelayPlacement,
    n: usize,
    delay: &DelayModel,
    chunk_len: f64,
    walk_rng: &mut W,
    clock_rng: C,
) -> Result<PhaseRecord, ProtocolError> {
    let mut clock = Clock::new(delay, chunk_len, clock_rng)?;
    let mut alice = WalkerState::uniform(graph, walk_rng);
    let mut time = 0.0;
    let mut transmissions = Vec::with_capacity(n);
    for chunk in 0..n {
        let (_, vertex) =
            walk_until(&mut alice, graph, walk_rng, |v| placement.is_free_relay(v), || time += clock.step())?;
        placement.deposit(vertex, chunk);
        let duration = clock.transmit();
        time += duration;
        transmissions.push(Transmission { vertex, chunk, duration });
    }
    Ok(PhaseRecord { steps: alice.steps_taken, time, transmissions })
}

/// Bob's walk. Picks up `k` chunks from distinct occupied relays.
pub fn simulate_collection<W: Rng, C: RngCore>(
    graph: &Graph,
    placement: &RelayPlacement,
    k: usize,
    delay: &DelayModel,
    chunk_len: f64,
    walk_rng: &mut W,
    clock_rng: C,
) -> Result<PhaseRecord, ProtocolError> {
    let mut clock = Clock::new(delay, chunk_len, clock_rng)?;
    let mut bob = WalkerState::uniform(graph, walk_rng);
    let mut drained = vec![false; graph.vertex_count()];
    let mut time = 0.0;
    let mut transmissions = Vec::with_capacity(k);
    for _ in 0..k {
        let (_, vertex) = walk_until(
            &mut bob,
            graph,
            walk_rng,
            |v| !drained[v] && matches!(placement.slot(v), Slot::Holding(_)),
            || time += clock.step(),
        )?;
        drained[vertex] = true;
        let Slot::Holding(chunk) = placement.slot(vertex) else { unreachable!("target test") };
        let duration = clock.transmit();
        time += duration;
        transmissions.push(Transmission { vertex, chunk, duration });
    }
    Ok(PhaseRecord { steps: bob.steps_taken, time, transmissions })
}

/// A scenario with its graph and codec built once and shared by all trials.
#[derive(Debug, Clone)]
pub struct Simulator {
    cfg: ScenarioConfig,
    graph: Graph,
    codec: Codec,
}

/// Per-trial records plus their summary.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub trials: Vec<TrialResult>,
    pub stats: Stats,
}

impl Simulator {
    /// Validates `cfg` and samples the mobility graph from its seed.
    pub fn new(cfg: ScenarioConfig) -> Result<Self, ProtocolError> {
        cfg.validate()?;
        let graph = cfg.graph.build(cfg.seed)?;
        Self::with_graph(cfg, graph)
    }

    /// Uses a caller-supplied graph instead of sampling one.
    pub fn with_graph(cfg: ScenarioConfig, graph: Graph) -> Result<Self, ProtocolError> {
        cfg.validate()?;
        if graph.vertex_count() != cfg.graph.vertices {
            return Err(ProtocolError::GraphMismatch { expected: cfg.graph.vertices, got: graph.vertex_count() });
        }
        let codec = Codec::new(cfg.code);
        Ok(Self { cfg, graph, codec })
    }

    pub fn config(&self) -> &ScenarioConfig {
        &self.cfg
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    /// Runs both phases of trial `index`, including the decode check.
    pub fn trial(&self, index: u64) -> Result<TrialResult, ProtocolError> {
        let cfg = &self.cfg;
        let seed = cfg.seed;
        let CodeParams { m, k, n } = cfg.code;
        let chunk_len = cfg.code.ideal_chunk_len();

        let mut msg_rng = stream(seed, Purpose::Message, index);
        let mut message = vec![0u8; m];
        msg_rng.fill_bytes(&mut message);
        let chunks = self.codec.encode(&message)?;

        let mut placement = place_relays(&self.graph, cfg.relays, &mut stream(seed, Purpose::Placement, index))?;
        let dissemination = simulate_dissemination(
            &self.graph,
            &mut placement,
            n,
            &cfg.delay,
            chunk_len,
            &mut stream(seed, Purpose::AliceWalk, index),
            stream(seed, Purpose::AliceClock, index),
        )?;
        let collection = simulate_collection(
            &self.graph,
            &placement,
            k,
            &cfg.delay,
            chunk_len,
            &mut stream(seed, Purpose::BobWalk, index),
            stream(seed, Purpose::BobClock, index),
        )?;

        let picked: Vec<CodedChunk> = collection.transmissions.iter().map(|t| chunks[t.chunk].clone()).collect();
        if self.codec.decode(&picked)? != message {
            return Err(ProtocolError::DecodeMismatch(index));
        }

        let mut detections = 0u32;
        if let Some(model) = &cfg.warden {
            let mut rng = stream(seed, Purpose::Warden, index);
            for t in dissemination.transmissions.iter().chain(&collection.transmissions) {
                if sample_detection_during(model, chunk_len, t.duration, &mut rng)? {
                    detections += 1;
                }
            }
        }

        Ok(TrialResult {
            index,
            s_a: dissemination.steps,
            s_b: collection.steps,
            t_a: dissemination.time,
            t_b: collection.time,
            t_ab: dissemination.time + collection.time,
            detected: detections > 0,
            detections,
        })
    }

    /// Runs every trial (in parallel) and summarises them in index order.
    pub fn run(&self) -> Result<RunOutput, ProtocolError> {
        let trials =
            (0..self.cfg.trials as u64).into_par_iter().map(|i| self.trial(i)).collect::<Result<Vec<_>, _>>()?;
        let stats = Stats::from_trials(&trials);
        Ok(RunOutput { trials, stats })
    }
}

/// Aggregates over a batch of trials.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stats {
    pub trials: usize,
    pub s_a: Summary,
    pub s_b: Summary,
    pub t_a: Summary,
    pub t_b: Summary,
    pub t_ab: Summary,
    /// Fraction of trials with no detection.
    pub covert: Summary,
}

impl Stats {
    pub fn from_trials(trials: &[TrialResult]) -> Self {
        let col = |f: fn(&TrialResult) -> f64| Summary::of(trials.iter().map(f));
        Self {
            trials: trials.len(),
            s_a: col(|t| t.s_a as f64),
            s_b: col(|t| t.s_b as f64),
            t_a: col(|t| t.t_a),
            t_b: col(|t| t.t_b),
            t_ab: col(|t| t.t_ab),
            covert: Summary::proportion(trials.iter().filter(|t| !t.detected).count(), trials.len()),
        }
    }
}

/// One trial of `cfg`; builds the scenario first.
pub fn simulate_message_passing(cfg: &ScenarioConfig, index: u64) -> Result<TrialResult, ProtocolError> {
    Simulator::new(*cfg)?.trial(index)
}

pub fn run_trials(cfg: &ScenarioConfig) -> Result<Stats, ProtocolError> {
    Ok(Simulator::new(*cfg)?.run()?.stats)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::harmonic;
    use crate::graph::gen_complete;

    fn model1(graph: GraphSpec, r: usize, m: usize, k: usize, n: usize, trials: usize) -> ScenarioConfig {
        ScenarioConfig {
            graph,
            relays: r,
            code: CodeParams::new(m, k, n).unwrap(),
            delay: DelayModel::ConstantTransmission,
            warden: None,
            trials,
            seed: 42,
        }
    }

    #[test]
    fn dissemination_fig2_scenario_on_k7() {
        // Staged geometric means 7/4 + 7/3 + 7/2 = 91/12.
        let cfg = model1(GraphSpec::complete(7), 4, 4, 2, 3, 100_000);
        let stats = run_trials(&cfg).unwrap();
        let expected = 91.0 / 12.0;
        assert!((stats.s_a.mean - expected).abs() < 3.0 * stats.s_a.stderr, "{:?}", stats.s_a);
    }

    #[test]
    fn every_vertex_a_relay_single_chunk() {
        let cfg = model1(GraphSpec::regular(20, 3), 20, 8, 1, 1, 200);
        let out = Simulator::new(cfg).unwrap().run().unwrap();
        assert!(out.trials.iter().all(|t| t.s_a == 1));
    }

    #[test]
    fn single_chunk_collection_on_complete_graph() {
        let v = 30;
        let cfg = model1(GraphSpec::complete(v), 5, 4, 1, 1, 50_000);
        let stats = run_trials(&cfg).unwrap();
        assert!((stats.s_b.mean - v as f64).abs() < 3.0 * stats.s_b.stderr, "{:?}", stats.s_b);
    }

    #[test]
    fn accounting_and_monotone_occupancy() {
        let cfg = model1(GraphSpec::regular(60, 3), 9, 33, 3, 7, 1);
        let sim = Simulator::new(cfg).unwrap();
        for i in 0..50 {
            let mut placement = place_relays(sim.graph(), 9, &mut stream(i, Purpose::Placement, 0)).unwrap();
            let mut rng = stream(i, Purpose::AliceWalk, 0);
            let d = simulate_dissemination(
                sim.graph(),
                &mut placement,
                7,
                &DelayModel::ConstantTransmission,
                11.0,
                &mut rng,
                stream(i, Purpose::AliceClock, 0),
            )
            .unwrap();
            assert_eq!(d.transmissions.len(), 7);
            assert_eq!(placement.occupied(), 7);
            assert_eq!(d.time, d.steps as f64);
            let chunks: Vec<usize> = d.transmissions.iter().map(|t| t.chunk).collect();
            assert_eq!(chunks, (0..7).collect::<Vec<_>>());
            let mut vs: Vec<usize> = d.transmissions.iter().map(|t| t.vertex).collect();
            vs.sort_unstable();
            vs.dedup();
            assert_eq!(vs.len(), 7);

            let c = simulate_collection(
                sim.graph(),
                &placement,
                3,
                &DelayModel::ConstantTransmission,
                11.0,
                &mut stream(i, Purpose::BobWalk, 0),
                stream(i, Purpose::BobClock, 0),
            )
            .unwrap();
            assert_eq!(c.transmissions.len(), 3);
            let mut got: Vec<usize> = c.transmissions.iter().map(|t| t.vertex).collect();
            got.sort_unstable();
            got.dedup();
            assert_eq!(got.len(), 3);
            assert!(c.steps >= 3);
        }
    }

    #[test]
    fn model1_identity_and_result_invariants() {
        let cfg = model1(GraphSpec::regular(100, 5), 10, 100, 4, 6, 300);
        let out = Simulator::new(cfg).unwrap().run().unwrap();
        for t in &out.trials {
            assert_eq!(t.t_a, t.s_a as f64);
            assert_eq!(t.t_b, t.s_b as f64);
            assert_eq!(t.t_ab, t.t_a + t.t_b);
            assert!(t.s_a >= 6 && t.s_b >= 4);
            assert!(!t.detected);
        }
    }

    #[test]
    fn model2_times_include_transmissions() {
        let mut cfg = model1(GraphSpec::regular(100, 5), 10, 100, 4, 6, 200);
        cfg.delay = DelayModel::RandomTransmission { step: StepTimeModel::Deterministic(1.0), rate: 1.0 };
        let out = Simulator::new(cfg).unwrap().run().unwrap();
        for t in &out.trials {
            // Each of n deposits and k pickups lasts at least m/k = 25.
            assert!(t.t_a >= t.s_a as f64 + 6.0 * 25.0);
            assert!(t.t_b >= t.s_b as f64 + 4.0 * 25.0);
            assert!((t.t_ab - (t.t_a + t.t_b)).abs() < 1e-9);
        }
    }

    #[test]
    fn reproducible_per_seed() {
        let cfg = model1(GraphSpec::regular(50, 3), 8, 20, 2, 5, 500);
        let a = run_trials(&cfg).unwrap();
        let b = run_trials(&cfg).unwrap();
        assert_eq!(a, b);
        let c = run_trials(&ScenarioConfig { seed: 43, ..cfg }).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn stderr_shrinks_with_more_trials() {
        let cfg = model1(GraphSpec::complete(40), 8, 20, 2, 5, 4_000);
        let a = run_trials(&cfg).unwrap();
        let b = run_trials(&ScenarioConfig { trials: 8_000, ..cfg }).unwrap();
        let ratio = a.t_ab.stderr / b.t_ab.stderr;
        assert!((ratio - 2f64.sqrt()).abs() < 0.15, "ratio {ratio}");
    }

    #[test]
    fn monotone_in_k_at_matched_seeds() {
        let base = model1(GraphSpec::regular(100, 5), 10, 120, 1, 8, 2_000);
        let means: Vec<f64> = (1..=8)
            .map(|k| {
                let cfg = ScenarioConfig { code: CodeParams::new(120, k, 8).unwrap(), ..base };
                run_trials(&cfg).unwrap().t_ab.mean
            })
            .collect();
        assert!(means.windows(2).all(|w| w[0] <= w[1]), "{means:?}");
    }

    #[test]
    fn patrolling_detection_rate() {
        let graph = GraphSpec::complete(50);
        let mut cfg = model1(graph, 10, 40, 4, 6, 100_000);
        cfg.warden = Some(DetectionModel::PatrollingConstant { wardens: 2, graph });
        let stats = run_trials(&cfg).unwrap();
        let p = (1.0f64 - 2.0 / 50.0).powi(10);
        assert!((stats.covert.mean - p).abs() < 3.0 * stats.covert.stderr);
    }

    #[test]
    fn surveillance_detection_uses_transmission_time() {
        let graph = GraphSpec::complete(30);
        let mut cfg = model1(graph, 10, 40, 4, 6, 100_000);
        cfg.delay = DelayModel::RandomTransmission { step: StepTimeModel::Deterministic(1.0), rate: 1.0 };
        cfg.warden = Some(DetectionModel::Surveillance { window: 30.0, rate: 1.0 });
        let stats = run_trials(&cfg).unwrap();
        let p_d = crate::covert::detect_prob(&DetectionModel::Surveillance { window: 30.0, rate: 1.0 }, 10.0).unwrap();
        let p = (1.0 - p_d).powi(10);
        assert!((stats.covert.mean - p).abs() < 3.0 * stats.covert.stderr, "{} vs {p}", stats.covert.mean);
    }

    #[test]
    fn rejects_bad_scenarios() {
        let g = GraphSpec::regular(100, 5);
        let cfg = model1(g, 5, 10, 2, 6, 10);
        assert_eq!(cfg.validate(), Err(ProtocolError::Ordering { n: 6, r: 5, v: 100 }));
        let cfg = model1(g, 10, 10, 2, 6, 0);
        assert_eq!(cfg.validate(), Err(ProtocolError::NoTrials));
        let mut cfg = model1(g, 10, 10, 2, 6, 10);
        cfg.warden = Some(DetectionModel::Surveillance { window: 30.0, rate: 1.0 });
        assert!(matches!(cfg.validate(), Err(ProtocolError::UnsupportedPairing { .. })));
        cfg.delay = DelayModel::RandomTransmission { step: StepTimeModel::Constant, rate: 2.0 };
        assert!(matches!(cfg.validate(), Err(ProtocolError::RateMismatch { .. })));
        cfg.warden = Some(DetectionModel::PatrollingConstant { wardens: 3, graph: g });
        assert!(matches!(cfg.validate(), Err(ProtocolError::UnsupportedPairing { .. })));
        let k5 = gen_complete(5).unwrap();
        assert!(matches!(
            Simulator::with_graph(model1(GraphSpec::complete(6), 3, 4, 1, 2, 1), k5),
            Err(ProtocolError::GraphMismatch { .. })
        ));
    }

    #[test]
    fn complete_graph_dissemination_formula() {
        let v = 20;
        let cfg = model1(GraphSpec::complete(v), 6, 12, 3, 4, 50_000);
        let stats = run_trials(&cfg).unwrap();
        let expected = v as f64 * (harmonic(6) - harmonic(2));
        assert!((stats.s_a.mean - expected).abs() < 3.0 * stats.s_a.stderr);
        let expected_b = v as f64 * (harmonic(4) - harmonic(1));
        assert!((stats.s_b.mean - expected_b).abs() < 3.0 * stats.s_b.stderr);
    }
}
