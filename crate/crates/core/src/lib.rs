//! Covert coded message passing between random walkers on random regular graphs.
//!
//! A sender walker leaves `n` MDS-coded chunks of a message at relay vertices,
//! and a receiver walker collects any `k` of them and decodes. The crate has
//! closed-form delay and covertness models alongside a Monte Carlo simulator.

pub mod analytic;
pub mod coding;
pub mod covert;
pub mod experiment;
pub mod graph;
pub mod mobility;
pub mod protocol;
pub mod stats;
pub mod stochastic;
pub mod tradeoff;

pub use analytic::{
    expected_delay_const, expected_delay_random, harmonic, optimal_k_const, optimal_k_random, optimal_n_const,
    optimal_n_random, AnalyticError, DelayEstimate, OptimalN, OptimalNRandom, RandomTiming,
};
pub use coding::{decode, encode, CodeParams, Codec, CodedChunk, CodingError};
pub use covert::{
    argmax_k_covertness, covertness, covertness_report, detect_prob, CovertError, CovertOptimum, CovertnessReport,
    DetectionModel,
};
pub use experiment::{execute, run_experiment, ExperimentConfig, ExperimentError, ExperimentOutput, Mode, Overrides};
pub use graph::{
    gen_complete, gen_random_regular, place_relays, theta, Degree, Graph, GraphError, GraphSpec, RelayPlacement,
};
pub use protocol::{
    run_trials, simulate_message_passing, DelayModel, ProtocolError, RunOutput, ScenarioConfig, Simulator, Stats,
    TrialResult,
};
pub use stats::Summary;
pub use stochastic::{stream, Purpose, StepTimeModel};
pub use tradeoff::{pareto, pareto_flags, sweep, Simulation, Strategy, SweepConfig, SweepPoint, TradeoffError};
