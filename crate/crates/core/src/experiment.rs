//! Experiment configs and CSV output.
//!
//! A config is a TOML file with sections `[graph]`, `[code]`, `[timing]`,
//! and optionally `[warden]`, `[sweep]` and `[run]`:
//!
//! ```toml
//! mode = "simulate"
//!
//! [graph]
//! vertices = 100
//! degree = 5          # or "complete"
//! relays = 10
//!
//! [code]
//! message_len = 100
//! k = [2, 4, 6]
//! n_max = 10          # or an explicit list: n = [4, 6]
//!
//! [timing]
//! model = "constant"
//!
//! [run]
//! trials = 1000
//! seed = 42
//! ```
//!
//! Unknown keys are rejected. Only `trials` and `seed` have defaults.

use std::fmt::{self, Write as _};
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Deserialize;
use thiserror::Error;

use crate::analytic::{
    expected_delay_const, expected_delay_random, optimal_n_const, optimal_n_random, AnalyticError, RandomTiming,
};
use crate::coding::CodeParams;
use crate::covert::{argmax_k_covertness, covertness_report, CovertError, DetectionModel};
use crate::graph::{Degree, Graph, GraphSpec};
use crate::protocol::{DelayModel, ProtocolError, ScenarioConfig, Simulator, TrialResult};
use crate::stochastic::StepTimeModel;
use crate::tradeoff::{pareto_flags, sweep, Simulation, Strategy, SweepConfig, TradeoffError};

pub const DEFAULT_TRIALS: usize = 1000;
pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("config: {0}")]
    Parse(String),
    #[error("config: {0}")]
    Invalid(String),
    #[error(transparent)]
    Analytic(#[from] AnalyticError),
    #[error(transparent)]
    Covert(#[from] CovertError),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error(transparent)]
    Tradeoff(#[from] TradeoffError),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

fn invalid(msg: impl Into<String>) -> ExperimentError {
    ExperimentError::Invalid(msg.into())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Simulate,
    Analytic,
    Covert,
    Sweep,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Simulate => "simulate",
            Mode::Analytic => "analytic",
            Mode::Covert => "covert",
            Mode::Sweep => "sweep",
        })
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "simulate" => Ok(Mode::Simulate),
            "analytic" => Ok(Mode::Analytic),
            "covert" => Ok(Mode::Covert),
            "sweep" => Ok(Mode::Sweep),
            _ => Err(format!("unknown mode {s:?}")),
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    mode: Option<Mode>,
    graph: RawGraph,
    code: RawCode,
    timing: RawTiming,
    warden: Option<RawWarden>,
    sweep: Option<RawSweep>,
    #[serde(default)]
    run: RawRun,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGraph {
    vertices: usize,
    degree: RawDegree,
    relays: usize,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawDegree {
    Number(usize),
    Name(String),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCode {
    message_len: usize,
    k: Option<Vec<usize>>,
    n: Option<Vec<usize>>,
    n_max: Option<usize>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTiming {
    model: String,
    step: Option<String>,
    mean_step_time: Option<f64>,
    rate: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawWarden {
    model: String,
    wardens: Option<u32>,
    window: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    strategies: Vec<String>,
    n_min: usize,
    n_max: usize,
    #[serde(default)]
    simulate: bool,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawRun {
    trials: Option<usize>,
    seed: Option<u64>,
    out: Option<PathBuf>,
    records: Option<PathBuf>,
}

/// Which `n` values a grid covers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NValues {
    List(Vec<usize>),
    /// `n` from `k` (from 1 in covert mode) up to this bound.
    UpTo(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub strategies: Vec<Strategy>,
    pub n_min: usize,
    pub n_max: usize,
    pub simulate: bool,
}

/// A validated experiment description.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub mode: Option<Mode>,
    pub graph: GraphSpec,
    pub relays: usize,
    pub message_len: usize,
    pub k: Vec<usize>,
    pub n: Option<NValues>,
    pub delay: DelayModel,
    pub warden: Option<DetectionModel>,
    pub sweep: Option<SweepSpec>,
    pub trials: usize,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub records: Option<PathBuf>,
}

/// Command-line style overrides applied on top of a loaded config.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub mode: Option<Mode>,
    pub trials: Option<usize>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub simulate: bool,
}

impl FromStr for ExperimentConfig {
    type Err = ExperimentError;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| ExperimentError::Parse(e.to_string()))?;
        Self::from_raw(raw)
    }
}

impl ExperimentConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self, ExperimentError> {
        let path = path.as_ref();
        let text =
            fs::read_to_string(path).map_err(|source| ExperimentError::Io { path: path.to_path_buf(), source })?;
        text.parse()
    }

    fn from_raw(raw: RawConfig) -> Result<Self, ExperimentError> {
        let degree = match raw.graph.degree {
            RawDegree::Number(d) => Degree::Regular(d),
            RawDegree::Name(s) => s.parse().map_err(|e: String| invalid(format!("[graph] {e}")))?,
        };
        let graph = GraphSpec { vertices: raw.graph.vertices, degree };
        graph.validate().map_err(|e| invalid(format!("[graph] {e}")))?;
        let relays = raw.graph.relays;
        if relays == 0 || relays > graph.vertices {
            return Err(invalid(format!("[graph] requires 1 ≤ r ≤ v (got r={relays}, v={})", graph.vertices)));
        }
        if raw.code.message_len == 0 {
            return Err(invalid("[code] message_len must be at least 1"));
        }

        let delay = parse_timing(&raw.timing)?;
        let warden = raw.warden.as_ref().map(|w| parse_warden(w, graph, raw.code.message_len, &delay)).transpose()?;

        let n = match (raw.code.n, raw.code.n_max) {
            (Some(_), Some(_)) => return Err(invalid("[code] give either n or n_max, not both")),
            (Some(list), None) => Some(NValues::List(list)),
            (None, Some(max)) => Some(NValues::UpTo(max)),
            (None, None) => None,
        };
        let sweep = raw.sweep.map(parse_sweep).transpose()?;
        let run = raw.run;
        let cfg = Self {
            mode: raw.mode,
            graph,
            relays,
            message_len: raw.code.message_len,
            k: raw.code.k.unwrap_or_default(),
            n,
            delay,
            warden,
            sweep,
            trials: run.trials.unwrap_or(DEFAULT_TRIALS),
            seed: run.seed.unwrap_or(DEFAULT_SEED),
            out: run.out,
            records: run.records,
        };
        if cfg.trials == 0 {
            return Err(invalid("[run] trials must be at least 1"));
        }
        if let Some(mode) = cfg.mode {
            cfg.check_mode(mode)?;
        }
        Ok(cfg)
    }

    pub fn apply(&mut self, o: &Overrides) -> Result<(), ExperimentError> {
        if let Some(mode) = o.mode {
            self.mode = Some(mode);
        }
        if let Some(t) = o.trials {
            if t == 0 {
                return Err(invalid("trials must be at least 1"));
            }
            self.trials = t;
        }
        if let Some(s) = o.seed {
            self.seed = s;
        }
        if let Some(out) = &o.out {
            self.out = Some(out.clone());
        }
        if o.simulate {
            match &mut self.sweep {
                Some(s) => s.simulate = true,
                None => return Err(invalid("--simulate needs a [sweep] section")),
            }
        }
        if let Some(mode) = self.mode {
            self.check_mode(mode)?;
        }
        Ok(())
    }

    fn check_mode(&self, mode: Mode) -> Result<(), ExperimentError> {
        match mode {
            Mode::Simulate | Mode::Analytic => {
                self.grid()?;
            }
            Mode::Covert => {
                if self.warden.is_none() {
                    return Err(invalid("covert mode needs a [warden] section"));
                }
                self.covert_ns()?;
            }
            Mode::Sweep => {
                if self.warden.is_none() {
                    return Err(invalid("sweep mode needs a [warden] section"));
                }
                let Some(s) = &self.sweep else { return Err(invalid("sweep mode needs a [sweep] section")) };
                if s.n_min == 0 || s.n_min > s.n_max || s.n_max > self.relays {
                    return Err(invalid(format!(
                        "[sweep] requires 1 ≤ n_min ≤ n_max ≤ r (got {}..{}, r={})",
                        s.n_min, s.n_max, self.relays
                    )));
                }
            }
        }
        Ok(())
    }

    /// The `(k, n)` pairs of a simulate or analytic run, grouped by `k`.
    pub fn grid(&self) -> Result<Vec<(usize, Vec<usize>)>, ExperimentError> {
        if self.k.is_empty() {
            return Err(invalid("[code] k must list at least one value"));
        }
        let n = self.n.as_ref().ok_or_else(|| invalid("[code] needs n or n_max"))?;
        let mut out = Vec::new();
        for &k in &self.k {
            if k == 0 {
                return Err(invalid("[code] requires k ≥ 1"));
            }
            let ns: Vec<usize> = match n {
                NValues::List(list) => list.clone(),
                NValues::UpTo(max) => (k..=*max).collect(),
            };
            if ns.is_empty() {
                return Err(invalid(format!("[code] requires k ≤ n, but no n reaches k={k}")));
            }
            for &n in &ns {
                if k > n {
                    return Err(invalid(format!("[code] requires k ≤ n (got k={k}, n={n})")));
                }
                if n > self.relays {
                    return Err(invalid(format!("[code] requires n ≤ r (got n={n}, r={})", self.relays)));
                }
                if n > crate::coding::MAX_CHUNKS {
                    return Err(invalid(format!("[code] requires n ≤ {} (got n={n})", crate::coding::MAX_CHUNKS)));
                }
            }
            out.push((k, ns));
        }
        Ok(out)
    }

    fn covert_ns(&self) -> Result<Vec<usize>, ExperimentError> {
        // Without an explicit n, a [sweep] range serves.
        let ns: Vec<usize> = match (&self.n, &self.sweep) {
            (Some(NValues::List(list)), _) => list.clone(),
            (Some(NValues::UpTo(max)), _) => (1..=*max).collect(),
            (None, Some(s)) => (s.n_min..=s.n_max).collect(),
            (None, None) => return Err(invalid("[code] needs n or n_max")),
        };
        if ns.is_empty() || ns.contains(&0) {
            return Err(invalid("[code] requires n ≥ 1"));
        }
        Ok(ns)
    }

    fn scenario(&self, k: usize, n: usize) -> Result<ScenarioConfig, ExperimentError> {
        let code = CodeParams::new(self.message_len, k, n).map_err(|e| invalid(format!("[code] {e}")))?;
        Ok(ScenarioConfig {
            graph: self.graph,
            relays: self.relays,
            code,
            delay: self.delay,
            warden: self.warden,
            trials: self.trials,
            seed: self.seed,
        })
    }

    fn timing(&self) -> Option<RandomTiming> {
        match self.delay {
            DelayModel::ConstantTransmission => None,
            DelayModel::RandomTransmission { step, rate } => {
                Some(RandomTiming { message_len: self.message_len as f64, rate, mean_step: step.mean() })
            }
        }
    }

    fn expected_delay(&self, n: usize, k: usize) -> Result<crate::analytic::DelayEstimate, AnalyticError> {
        match self.timing() {
            None => expected_delay_const(&self.graph, self.relays, n, k),
            Some(t) => expected_delay_random(&self.graph, self.relays, n, k, &t),
        }
    }

    /// The `n` minimising expected delay for `k` per the closed-form optimum.
    fn optimal_n(&self, k: usize) -> Result<usize, AnalyticError> {
        match self.timing() {
            None => Ok(optimal_n_const(self.relays, k)?.n),
            Some(t) => Ok(optimal_n_random(&self.graph, self.relays, k, &t)?.n),
        }
    }

    /// Every parameter as `key = value`, in a fixed order.
    pub fn metadata(&self, mode: Mode) -> Vec<(String, String)> {
        let mut m = vec![
            ("version".to_string(), env!("CARGO_PKG_VERSION").to_string()),
            ("mode".to_string(), mode.to_string()),
            ("seed".to_string(), self.seed.to_string()),
            ("trials".to_string(), self.trials.to_string()),
            ("graph.vertices".to_string(), self.graph.vertices.to_string()),
            ("graph.degree".to_string(), self.graph.degree.to_string()),
            ("graph.relays".to_string(), self.relays.to_string()),
            ("code.message_len".to_string(), self.message_len.to_string()),
        ];
        if !self.k.is_empty() {
            m.push(("code.k".into(), join(&self.k)));
        }
        match &self.n {
            Some(NValues::List(l)) => m.push(("code.n".into(), join(l))),
            Some(NValues::UpTo(max)) => m.push(("code.n_max".into(), max.to_string())),
            None => {}
        }
        m.push(("timing.model".into(), self.delay.label().into()));
        if let DelayModel::RandomTransmission { step, rate } = self.delay {
            m.push(("timing.step".into(), step.label().into()));
            m.push(("timing.mean_step_time".into(), step.mean().to_string()));
            m.push(("timing.rate".into(), rate.to_string()));
        }
        match self.warden {
            None => m.push(("warden.model".into(), "none".into())),
            Some(w) => {
                m.push(("warden.model".into(), w.label().into()));
                match w {
                    DetectionModel::PatrollingConstant { wardens, .. }
                    | DetectionModel::PatrollingLinear { wardens, .. } => {
                        m.push(("warden.wardens".into(), wardens.to_string()))
                    }
                    DetectionModel::Surveillance { window, .. } => m.push(("warden.window".into(), window.to_string())),
                }
            }
        }
        if let Some(s) = &self.sweep {
            let names: Vec<String> = s.strategies.iter().map(|s| s.to_string()).collect();
            m.push(("sweep.strategies".into(), names.join(" ")));
            m.push(("sweep.n_min".into(), s.n_min.to_string()));
            m.push(("sweep.n_max".into(), s.n_max.to_string()));
            m.push(("sweep.simulate".into(), s.simulate.to_string()));
        }
        m
    }
}

fn join(values: &[usize]) -> String {
    values.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" ")
}

fn parse_timing(t: &RawTiming) -> Result<DelayModel, ExperimentError> {
    match t.model.as_str() {
        "constant" => {
            if t.step.is_some() || t.mean_step_time.is_some() || t.rate.is_some() {
                return Err(invalid("[timing] constant model takes no step, mean_step_time or rate"));
            }
            Ok(DelayModel::ConstantTransmission)
        }
        "random" => {
            let mean = t.mean_step_time.ok_or_else(|| invalid("[timing] random model needs mean_step_time"))?;
            let rate = t.rate.ok_or_else(|| invalid("[timing] random model needs rate"))?;
            let step = match t.step.as_deref() {
                Some("deterministic") => StepTimeModel::Deterministic(mean),
                Some("exponential") => StepTimeModel::Exponential(mean),
                Some(other) => {
                    return Err(invalid(format!(
                        "[timing] step must be \"deterministic\" or \"exponential\", got {other:?}"
                    )))
                }
                None => return Err(invalid("[timing] random model needs step")),
            };
            let d = DelayModel::RandomTransmission { step, rate };
            d.validate().map_err(|e| invalid(format!("[timing] {e}")))?;
            Ok(d)
        }
        other => Err(invalid(format!("[timing] model must be \"constant\" or \"random\", got {other:?}"))),
    }
}

fn parse_warden(
    w: &RawWarden,
    graph: GraphSpec,
    message_len: usize,
    delay: &DelayModel,
) -> Result<DetectionModel, ExperimentError> {
    let model = match w.model.as_str() {
        "patrolling-constant" | "patrolling-linear" => {
            if w.window.is_some() {
                return Err(invalid("[warden] patrolling models take no window"));
            }
            if !matches!(delay, DelayModel::ConstantTransmission) {
                return Err(invalid("[warden] patrolling wardens pair with constant timing"));
            }
            let wardens = w.wardens.ok_or_else(|| invalid("[warden] patrolling models need wardens"))?;
            if w.model == "patrolling-constant" {
                DetectionModel::PatrollingConstant { wardens, graph }
            } else {
                DetectionModel::PatrollingLinear { wardens, graph, message_len: message_len as f64 }
            }
        }
        "surveillance" => {
            if w.wardens.is_some() {
                return Err(invalid("[warden] surveillance takes no wardens"));
            }
            let window = w.window.ok_or_else(|| invalid("[warden] surveillance needs window"))?;
            let DelayModel::RandomTransmission { rate, .. } = *delay else {
                return Err(invalid("[warden] surveillance pairs with random timing"));
            };
            DetectionModel::Surveillance { window, rate }
        }
        other => {
            return Err(invalid(format!(
                "[warden] model must be patrolling-constant, patrolling-linear or surveillance, got {other:?}"
            )))
        }
    };
    model.validate().map_err(|e| invalid(format!("[warden] {e}")))?;
    Ok(model)
}

fn parse_sweep(s: RawSweep) -> Result<SweepSpec, ExperimentError> {
    if s.strategies.is_empty() {
        return Err(invalid("[sweep] strategies must list at least one strategy"));
    }
    let strategies = s
        .strategies
        .iter()
        .map(|name| name.parse::<Strategy>().map_err(|e| invalid(format!("[sweep] {e}"))))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(SweepSpec { strategies, n_min: s.n_min, n_max: s.n_max, simulate: s.simulate })
}

/// CSV text of one experiment, plus optional per-trial records.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExperimentOutput {
    pub mode: Mode,
    pub csv: String,
    pub records: Option<String>,
}

fn fmt_f(x: f64) -> String {
    format!("{x}")
}

fn write_csv(meta: &[(String, String)], header: &[&str], rows: &[Vec<String>]) -> Result<String, ExperimentError> {
    let mut text = String::new();
    for (k, v) in meta {
        let _ = writeln!(text, "# {k} = {v}");
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(row)?;
    }
    let bytes = w.into_inner().map_err(|e| ExperimentError::Csv(e.into_error().into()))?;
    text.push_str(&String::from_utf8(bytes).expect("csv output is UTF-8"));
    Ok(text)
}

/// Runs `cfg` in `mode` and returns the CSV text without touching disk.
pub fn execute(cfg: &ExperimentConfig, mode: Mode) -> Result<ExperimentOutput, ExperimentError> {
    cfg.check_mode(mode)?;
    let meta = cfg.metadata(mode);
    let (csv, records) = match mode {
        Mode::Simulate => simulate_csv(cfg, &meta)?,
        Mode::Analytic => (analytic_csv(cfg, &meta)?, None),
        Mode::Covert => (covert_csv(cfg, &meta)?, None),
        Mode::Sweep => (sweep_csv(cfg, &meta)?, None),
    };
    Ok(ExperimentOutput { mode, csv, records })
}

fn simulate_csv(
    cfg: &ExperimentConfig,
    meta: &[(String, String)],
) -> Result<(String, Option<String>), ExperimentError> {
    let grid = cfg.grid()?;
    let graph: Graph = cfg.graph.build(cfg.seed).map_err(ProtocolError::from)?;
    let mut header = vec![
        "k",
        "n",
        "trials",
        "s_a",
        "s_a_ci",
        "s_b",
        "s_b_ci",
        "t_a",
        "t_a_ci",
        "t_b",
        "t_b_ci",
        "t_ab",
        "t_ab_ci",
        "analytic_t_ab",
        "rel_err",
        "argmin_n",
        "analytic_argmin_n",
    ];
    if cfg.warden.is_some() {
        header.extend(["p_c", "p_c_ci", "analytic_p_c"]);
    }
    let mut rows = Vec::new();
    let mut recs = Vec::new();
    for (k, ns) in grid {
        let mut block = Vec::new();
        let mut sim_best = (f64::INFINITY, 0);
        let mut an_best = (f64::INFINITY, 0);
        for n in ns {
            let out = Simulator::with_graph(cfg.scenario(k, n)?, graph.clone())?.run()?;
            let s = out.stats;
            let analytic = cfg.expected_delay(n, k)?.value;
            if s.t_ab.mean < sim_best.0 {
                sim_best = (s.t_ab.mean, n);
            }
            if analytic < an_best.0 {
                an_best = (analytic, n);
            }
            let mut row = vec![k.to_string(), n.to_string(), s.trials.to_string()];
            for m in [s.s_a, s.s_b, s.t_a, s.t_b, s.t_ab] {
                row.push(fmt_f(m.mean));
                row.push(fmt_f(m.ci));
            }
            row.push(fmt_f(analytic));
            row.push(fmt_f((s.t_ab.mean - analytic) / analytic));
            row.push(String::new());
            row.push(String::new());
            if let Some(w) = &cfg.warden {
                row.push(fmt_f(s.covert.mean));
                row.push(fmt_f(s.covert.ci));
                row.push(fmt_f(covertness_report(w, cfg.message_len as f64, n, k)?.p_c));
            }
            block.push(row);
            if cfg.records.is_some() {
                recs.extend(out.trials.iter().map(|t| record_row(k, n, t)));
            }
        }
        for row in &mut block {
            row[15] = sim_best.1.to_string();
            row[16] = an_best.1.to_string();
        }
        rows.extend(block);
    }
    let csv = write_csv(meta, &header, &rows)?;
    let records = match cfg.records {
        Some(_) => Some(write_csv(
            meta,
            &["k", "n", "trial", "s_a", "s_b", "t_a", "t_b", "t_ab", "detected", "detections"],
            &recs,
        )?),
        None => None,
    };
    Ok((csv, records))
}

fn record_row(k: usize, n: usize, t: &TrialResult) -> Vec<String> {
    vec![
        k.to_string(),
        n.to_string(),
        t.index.to_string(),
        t.s_a.to_string(),
        t.s_b.to_string(),
        fmt_f(t.t_a),
        fmt_f(t.t_b),
        fmt_f(t.t_ab),
        t.detected.to_string(),
        t.detections.to_string(),
    ]
}

fn analytic_csv(cfg: &ExperimentConfig, meta: &[(String, String)]) -> Result<String, ExperimentError> {
    let mut header = vec!["k", "n", "dissemination", "collection", "delay", "argmin_n", "optimal_n"];
    if cfg.warden.is_some() {
        header.extend(["p_d", "p_c"]);
    }
    let mut rows = Vec::new();
    for (k, ns) in cfg.grid()? {
        let optimal = cfg.optimal_n(k).map(|n| n.to_string()).unwrap_or_default();
        let mut block = Vec::new();
        let mut best = (f64::INFINITY, 0);
        for n in ns {
            let d = cfg.expected_delay(n, k)?;
            if d.value < best.0 {
                best = (d.value, n);
            }
            let (dis, col) = match cfg.timing() {
                None => (
                    crate::analytic::expected_dissemination_steps(&cfg.graph, cfg.relays, n)?,
                    crate::analytic::expected_collection_steps(&cfg.graph, n, k)?,
                ),
                Some(t) => (
                    crate::analytic::expected_dissemination_random(&cfg.graph, cfg.relays, n, k, &t)?.value,
                    crate::analytic::expected_collection_random(&cfg.graph, cfg.relays, n, k, &t)?.value,
                ),
            };
            let mut row = vec![
                k.to_string(),
                n.to_string(),
                fmt_f(dis),
                fmt_f(col),
                fmt_f(d.value),
                String::new(),
                optimal.clone(),
            ];
            if let Some(w) = &cfg.warden {
                let rep = covertness_report(w, cfg.message_len as f64, n, k)?;
                row.push(fmt_f(rep.p_d));
                row.push(fmt_f(rep.p_c));
            }
            block.push(row);
        }
        for row in &mut block {
            row[5] = best.1.to_string();
        }
        rows.extend(block);
    }
    write_csv(meta, &header, &rows)
}

fn covert_csv(cfg: &ExperimentConfig, meta: &[(String, String)]) -> Result<String, ExperimentError> {
    let w = cfg.warden.as_ref().expect("checked by check_mode");
    let m = cfg.message_len as f64;
    let mut rows = Vec::new();
    for n in cfg.covert_ns()? {
        let best = argmax_k_covertness(w, n, m)?;
        for k in 1..=n {
            let rep = covertness_report(w, m, n, k)?;
            rows.push(vec![
                n.to_string(),
                k.to_string(),
                fmt_f(m / k as f64),
                fmt_f(rep.p_d),
                fmt_f(rep.p_c),
                best.k.to_string(),
                (k == best.k).to_string(),
            ]);
        }
    }
    write_csv(meta, &["n", "k", "chunk_len", "p_d", "p_c", "k_star", "is_k_star"], &rows)
}

fn sweep_csv(cfg: &ExperimentConfig, meta: &[(String, String)]) -> Result<String, ExperimentError> {
    let spec = cfg.sweep.as_ref().expect("checked by check_mode");
    let sc = SweepConfig {
        graph: cfg.graph,
        relays: cfg.relays,
        message_len: cfg.message_len,
        delay: cfg.delay,
        warden: cfg.warden.expect("checked by check_mode"),
    };
    let sim = spec.simulate.then_some(Simulation { trials: cfg.trials, seed: cfg.seed });
    let mut points = Vec::new();
    for &s in &spec.strategies {
        points.extend(sweep(&sc, s, spec.n_min..=spec.n_max, sim)?);
    }
    let flags = pareto_flags(&points);
    let rows: Vec<Vec<String>> = points
        .iter()
        .zip(flags)
        .map(|(p, f)| {
            vec![
                p.strategy.to_string(),
                p.n.to_string(),
                p.k.to_string(),
                fmt_f(p.delay.mean),
                fmt_f(p.delay.ci),
                fmt_f(p.p_c.mean),
                fmt_f(p.p_c.ci),
                f.to_string(),
            ]
        })
        .collect();
    write_csv(meta, &["strategy", "n", "k", "delay", "delay_ci", "p_c", "p_c_ci", "pareto_flag"], &rows)
}

fn write_file(path: &Path, text: &str) -> Result<(), ExperimentError> {
    fs::write(path, text).map_err(|source| ExperimentError::Io { path: path.to_path_buf(), source })
}

/// Runs the config at `path` with `overrides`, writing the CSV (and trial
/// records) to the configured paths when set.
///
/// The mode comes from the overrides, else the config's `mode` key.
pub fn run_experiment(path: impl AsRef<Path>, overrides: &Overrides) -> Result<ExperimentOutput, ExperimentError> {
    let mut cfg = ExperimentConfig::load(path)?;
    cfg.apply(overrides)?;
    let mode = cfg.mode.ok_or_else(|| invalid("no mode given (set `mode` or pick a subcommand)"))?;
    let out = execute(&cfg, mode)?;
    if let Some(p) = &cfg.out {
        write_file(p, &out.csv)?;
    }
    if let (Some(p), Some(text)) = (&cfg.records, &out.records) {
        write_file(p, text)?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"
mode = "analytic"

[graph]
vertices = 100
degree = 5
relays = 10

[code]
message_len = 100
k = [2, 4]
n_max = 10

[timing]
model = "constant"
"#;

    fn parse(text: &str) -> Result<ExperimentConfig, ExperimentError> {
        text.parse()
    }

    #[test]
    fn defaults_and_grid() {
        let cfg = parse(BASE).unwrap();
        assert_eq!((cfg.trials, cfg.seed), (1000, 42));
        let grid = cfg.grid().unwrap();
        assert_eq!(grid[0], (2, (2..=10).collect()));
        assert_eq!(grid[1].1.first(), Some(&4));
    }

    #[test]
    fn unknown_keys_report_a_line() {
        let text = BASE.replace("relays = 10", "relays = 10\ncolour = 3");
        let err = parse(&text).unwrap_err().to_string();
        assert!(err.contains("colour"), "{err}");
        assert!(err.contains("line 8"), "{err}");
    }

    #[test]
    fn missing_physical_parameter() {
        let err = parse(&BASE.replace("message_len = 100\n", "")).unwrap_err().to_string();
        assert!(err.contains("message_len"), "{err}");
    }

    #[test]
    fn k_above_n_names_the_constraint() {
        let err = parse(&BASE.replace("n_max = 10", "n = [3]")).unwrap_err().to_string();
        assert!(err.contains("k ≤ n"), "{err}");
        let err = parse(&BASE.replace("n_max = 10", "n_max = 11")).unwrap_err().to_string();
        assert!(err.contains("n ≤ r"), "{err}");
    }

    #[test]
    fn pairing_rules() {
        let text = format!("{BASE}\n[warden]\nmodel = \"surveillance\"\nwindow = 30.0\n");
        assert!(parse(&text).unwrap_err().to_string().contains("random timing"));
        let text = BASE.replace(
            "model = \"constant\"",
            "model = \"random\"\nstep = \"deterministic\"\nmean_step_time = 1.0\nrate = 0.2",
        );
        let text = format!("{text}\n[warden]\nmodel = \"surveillance\"\nwindow = 30.0\n");
        let cfg = parse(&text).unwrap();
        assert_eq!(cfg.warden, Some(DetectionModel::Surveillance { window: 30.0, rate: 0.2 }));
    }

    #[test]
    fn analytic_csv_is_stable() {
        let cfg = parse(BASE).unwrap();
        let a = execute(&cfg, Mode::Analytic).unwrap();
        let b = execute(&cfg, Mode::Analytic).unwrap();
        assert_eq!(a, b);
        assert!(a.csv.starts_with("# version = "));
        let header = a.csv.lines().find(|l| !l.starts_with('#')).unwrap();
        assert_eq!(header, "k,n,dissemination,collection,delay,argmin_n,optimal_n");
        let k4: Vec<&str> = a.csv.lines().filter(|l| l.starts_with("4,")).collect();
        assert!(k4.iter().all(|l| l.split(',').nth(5) == Some("6")));
    }

    #[test]
    fn overrides() {
        let mut cfg = parse(BASE).unwrap();
        cfg.apply(&Overrides { trials: Some(7), seed: Some(1), ..Default::default() }).unwrap();
        assert_eq!((cfg.trials, cfg.seed), (7, 1));
        assert!(cfg.apply(&Overrides { simulate: true, ..Default::default() }).is_err());
        assert!(cfg.apply(&Overrides { mode: Some(Mode::Covert), ..Default::default() }).is_err());
    }

    #[test]
    fn simulate_with_records() {
        let mut cfg = parse(&BASE.replace("k = [2, 4]", "k = [4]").replace("n_max = 10", "n = [5, 6]")).unwrap();
        cfg.trials = 50;
        cfg.records = Some(PathBuf::from("unused"));
        let out = execute(&cfg, Mode::Simulate).unwrap();
        let rows: Vec<&str> = out.csv.lines().filter(|l| !l.starts_with('#')).collect();
        assert_eq!(rows.len(), 3);
        let recs = out.records.unwrap();
        assert_eq!(recs.lines().filter(|l| !l.starts_with('#')).count(), 101);
        assert_eq!(execute(&cfg, Mode::Simulate).unwrap().csv, out.csv);
    }
}
