//! Python bindings for `relaywalk`.

use std::path::PathBuf;

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::{PyBytes, PyDict};

use relaywalk::coding::{CodeParams, Codec, CodedChunk};
use relaywalk::experiment::{execute, ExperimentConfig, Mode, Overrides};
use relaywalk::protocol::{DelayModel, ScenarioConfig, Simulator};
use relaywalk::stats::Summary;
use relaywalk::stochastic::StepTimeModel;
use relaywalk::tradeoff::{pareto_flags, Simulation, Strategy, SweepConfig};
use relaywalk::{analytic, covert, graph};

fn err<E: std::fmt::Display>(e: E) -> PyErr {
    PyValueError::new_err(e.to_string())
}

#[derive(FromPyObject)]
enum DegreeArg {
    Number(usize),
    Name(String),
}

impl DegreeArg {
    fn resolve(self) -> PyResult<graph::Degree> {
        match self {
            DegreeArg::Number(d) => Ok(graph::Degree::Regular(d)),
            DegreeArg::Name(s) => s.parse().map_err(PyValueError::new_err),
        }
    }
}

fn spec(vertices: usize, degree: DegreeArg) -> PyResult<graph::GraphSpec> {
    Ok(graph::GraphSpec { vertices, degree: degree.resolve()? })
}

fn delay_model(timing: &str, step: &str, mean_step: f64, rate: f64) -> PyResult<DelayModel> {
    match timing {
        "constant" => Ok(DelayModel::ConstantTransmission),
        "random" => {
            let step = match step {
                "deterministic" => StepTimeModel::Deterministic(mean_step),
                "exponential" => StepTimeModel::Exponential(mean_step),
                other => return Err(PyValueError::new_err(format!("unknown step model {other:?}"))),
            };
            Ok(DelayModel::RandomTransmission { step, rate })
        }
        other => Err(PyValueError::new_err(format!("unknown timing model {other:?}"))),
    }
}

fn summary<'py>(py: Python<'py>, s: &Summary) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("mean", s.mean)?;
    d.set_item("stderr", s.stderr)?;
    d.set_item("ci", s.ci)?;
    Ok(d)
}

/// A sampled mobility graph.
#[pyclass(name = "Graph", module = "relaywalk_py")]
struct PyGraph {
    inner: graph::Graph,
}

#[pymethods]
impl PyGraph {
    /// Random `degree`-regular graph on `vertices` vertices.
    #[staticmethod]
    fn random_regular(vertices: usize, degree: usize, seed: u64) -> PyResult<Self> {
        Ok(Self { inner: graph::gen_random_regular(vertices, degree, seed).map_err(err)? })
    }

    #[staticmethod]
    fn complete(vertices: usize) -> PyResult<Self> {
        Ok(Self { inner: graph::gen_complete(vertices).map_err(err)? })
    }

    fn vertex_count(&self) -> usize {
        self.inner.vertex_count()
    }

    fn degree(&self) -> usize {
        self.inner.degree()
    }

    fn neighbors(&self, v: usize) -> PyResult<Vec<u32>> {
        if v >= self.inner.vertex_count() {
            return Err(PyValueError::new_err(format!("vertex {v} out of range")));
        }
        Ok(self.inner.neighbors(v).to_vec())
    }

    fn edges(&self) -> Vec<(usize, usize)> {
        self.inner.edges().collect()
    }

    fn is_connected(&self) -> bool {
        self.inner.is_connected()
    }

    fn __repr__(&self) -> String {
        format!("Graph(vertices={}, degree={})", self.inner.vertex_count(), self.inner.kind())
    }
}

/// A warden model: per-transmission detection probability.
#[pyclass(name = "DetectionModel", module = "relaywalk_py", from_py_object)]
#[derive(Clone)]
struct PyDetectionModel {
    inner: covert::DetectionModel,
}

#[pymethods]
impl PyDetectionModel {
    #[staticmethod]
    #[pyo3(signature = (wardens, vertices, degree=DegreeArg::Number(5)))]
    fn patrolling_constant(wardens: u32, vertices: usize, degree: DegreeArg) -> PyResult<Self> {
        let m = covert::DetectionModel::PatrollingConstant { wardens, graph: spec(vertices, degree)? };
        m.validate().map_err(err)?;
        Ok(Self { inner: m })
    }

    #[staticmethod]
    #[pyo3(signature = (wardens, vertices, message_len, degree=DegreeArg::Number(5)))]
    fn patrolling_linear(wardens: u32, vertices: usize, message_len: f64, degree: DegreeArg) -> PyResult<Self> {
        let m = covert::DetectionModel::PatrollingLinear { wardens, graph: spec(vertices, degree)?, message_len };
        m.validate().map_err(err)?;
        Ok(Self { inner: m })
    }

    #[staticmethod]
    fn surveillance(window: f64, rate: f64) -> PyResult<Self> {
        let m = covert::DetectionModel::Surveillance { window, rate };
        m.validate().map_err(err)?;
        Ok(Self { inner: m })
    }

    /// Detection probability of one transmission of length `chunk_len`.
    fn detect_prob(&self, chunk_len: f64) -> PyResult<f64> {
        covert::detect_prob(&self.inner, chunk_len).map_err(err)
    }

    /// Probability that none of the `n + k` transmissions is detected.
    fn covertness(&self, message_len: f64, n: usize, k: usize) -> PyResult<f64> {
        Ok(covert::covertness_report(&self.inner, message_len, n, k).map_err(err)?.p_c)
    }

    /// `(k, p_c)` maximising covertness for `n` coded chunks.
    fn argmax_k(&self, n: usize, message_len: f64) -> PyResult<(usize, f64)> {
        let o = covert::argmax_k_covertness(&self.inner, n, message_len).map_err(err)?;
        Ok((o.k, o.p_c))
    }

    fn __repr__(&self) -> String {
        format!("DetectionModel({:?})", self.inner)
    }
}

#[pyfunction]
fn harmonic(n: usize) -> f64 {
    analytic::harmonic(n)
}

/// `(d − 1)/(d − 2)`, or 1 for `"complete"`.
#[pyfunction]
fn theta(degree: DegreeArg) -> PyResult<f64> {
    graph::theta(degree.resolve()?).map_err(err)
}

/// Expected delay with unit steps and negligible transmissions.
#[pyfunction]
#[pyo3(signature = (vertices, degree, relays, n, k))]
fn expected_delay_const(vertices: usize, degree: DegreeArg, relays: usize, n: usize, k: usize) -> PyResult<f64> {
    Ok(analytic::expected_delay_const(&spec(vertices, degree)?, relays, n, k).map_err(err)?.value)
}

/// Expected delay with random step times and shifted-exponential transmissions.
#[pyfunction]
#[pyo3(signature = (vertices, degree, relays, n, k, message_len, rate, mean_step=1.0))]
#[allow(clippy::too_many_arguments)]
fn expected_delay_random(
    vertices: usize,
    degree: DegreeArg,
    relays: usize,
    n: usize,
    k: usize,
    message_len: f64,
    rate: f64,
    mean_step: f64,
) -> PyResult<f64> {
    let t = analytic::RandomTiming { message_len, rate, mean_step };
    Ok(analytic::expected_delay_random(&spec(vertices, degree)?, relays, n, k, &t).map_err(err)?.value)
}

/// `(n, tie)`: the delay-minimising `n` with constant transmission time.
#[pyfunction]
fn optimal_n_const(relays: usize, k: usize) -> PyResult<(usize, bool)> {
    let o = analytic::optimal_n_const(relays, k).map_err(err)?;
    Ok((o.n, o.tie))
}

#[pyfunction]
#[pyo3(signature = (vertices, degree, relays, k, message_len, rate, mean_step=1.0))]
fn optimal_n_random(
    vertices: usize,
    degree: DegreeArg,
    relays: usize,
    k: usize,
    message_len: f64,
    rate: f64,
    mean_step: f64,
) -> PyResult<usize> {
    let t = analytic::RandomTiming { message_len, rate, mean_step };
    Ok(analytic::optimal_n_random(&spec(vertices, degree)?, relays, k, &t).map_err(err)?.n)
}

/// Encodes `message` into `n` chunks, any `k` of which recover it.
#[pyfunction]
fn encode<'py>(py: Python<'py>, message: &[u8], k: usize, n: usize) -> PyResult<Vec<Bound<'py, PyBytes>>> {
    let codec = Codec::new(CodeParams::new(message.len(), k, n).map_err(err)?);
    let chunks = codec.encode(message).map_err(err)?;
    Ok(chunks.iter().map(|c| PyBytes::new(py, &c.payload)).collect())
}

/// Decodes from `(index, payload)` pairs.
#[pyfunction]
fn decode<'py>(
    py: Python<'py>,
    chunks: Vec<(usize, Vec<u8>)>,
    message_len: usize,
    k: usize,
    n: usize,
) -> PyResult<Bound<'py, PyBytes>> {
    let codec = Codec::new(CodeParams::new(message_len, k, n).map_err(err)?);
    let chunks: Vec<CodedChunk> = chunks.into_iter().map(|(index, payload)| CodedChunk { index, payload }).collect();
    Ok(PyBytes::new(py, &codec.decode(&chunks).map_err(err)?))
}

/// Runs `trials` simulated message passings and returns summary statistics.
#[pyfunction]
#[pyo3(signature = (
    vertices, degree, relays, message_len, k, n, trials=1000, seed=42,
    timing="constant", step="deterministic", mean_step=1.0, rate=1.0, warden=None,
))]
#[allow(clippy::too_many_arguments)]
fn run_trials<'py>(
    py: Python<'py>,
    vertices: usize,
    degree: DegreeArg,
    relays: usize,
    message_len: usize,
    k: usize,
    n: usize,
    trials: usize,
    seed: u64,
    timing: &str,
    step: &str,
    mean_step: f64,
    rate: f64,
    warden: Option<PyDetectionModel>,
) -> PyResult<Bound<'py, PyDict>> {
    let cfg = ScenarioConfig {
        graph: spec(vertices, degree)?,
        relays,
        code: CodeParams::new(message_len, k, n).map_err(err)?,
        delay: delay_model(timing, step, mean_step, rate)?,
        warden: warden.map(|w| w.inner),
        trials,
        seed,
    };
    let stats = py.detach(|| Simulator::new(cfg).and_then(|s| s.run())).map_err(err)?.stats;
    let d = PyDict::new(py);
    d.set_item("trials", stats.trials)?;
    for (name, s) in [
        ("s_a", stats.s_a),
        ("s_b", stats.s_b),
        ("t_a", stats.t_a),
        ("t_b", stats.t_b),
        ("t_ab", stats.t_ab),
        ("covert", stats.covert),
    ] {
        d.set_item(name, summary(py, &s)?)?;
    }
    Ok(d)
}

/// One strategy sweep over `n`; returns a list of dicts with a `pareto` flag
/// computed within the returned points.
#[pyfunction]
#[pyo3(signature = (
    vertices, degree, relays, message_len, warden, strategy, n_min, n_max,
    timing="constant", step="deterministic", mean_step=1.0, rate=1.0, trials=None, seed=42,
))]
#[allow(clippy::too_many_arguments)]
fn sweep<'py>(
    py: Python<'py>,
    vertices: usize,
    degree: DegreeArg,
    relays: usize,
    message_len: usize,
    warden: PyDetectionModel,
    strategy: &str,
    n_min: usize,
    n_max: usize,
    timing: &str,
    step: &str,
    mean_step: f64,
    rate: f64,
    trials: Option<usize>,
    seed: u64,
) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let cfg = SweepConfig {
        graph: spec(vertices, degree)?,
        relays,
        message_len,
        delay: delay_model(timing, step, mean_step, rate)?,
        warden: warden.inner,
    };
    let strategy: Strategy = strategy.parse().map_err(err)?;
    let sim = trials.map(|trials| Simulation { trials, seed });
    let points = py.detach(|| relaywalk::tradeoff::sweep(&cfg, strategy, n_min..=n_max, sim)).map_err(err)?;
    points
        .iter()
        .zip(pareto_flags(&points))
        .map(|(p, flag)| {
            let d = PyDict::new(py);
            d.set_item("strategy", p.strategy.to_string())?;
            d.set_item("n", p.n)?;
            d.set_item("k", p.k)?;
            d.set_item("delay", summary(py, &p.delay)?)?;
            d.set_item("p_c", summary(py, &p.p_c)?)?;
            d.set_item("pareto", flag)?;
            Ok(d)
        })
        .collect()
}

/// Runs an experiment config and returns its CSV text. Output paths named
/// in the config are ignored.
#[pyfunction]
#[pyo3(signature = (path, mode=None, trials=None, seed=None, simulate=false))]
fn run_experiment(
    py: Python<'_>,
    path: PathBuf,
    mode: Option<&str>,
    trials: Option<usize>,
    seed: Option<u64>,
    simulate: bool,
) -> PyResult<String> {
    let mode = mode.map(|m| m.parse::<Mode>()).transpose().map_err(PyValueError::new_err)?;
    let mut cfg = ExperimentConfig::load(&path).map_err(err)?;
    cfg.apply(&Overrides { mode, trials, seed, out: None, simulate }).map_err(err)?;
    let mode = cfg.mode.ok_or_else(|| PyValueError::new_err("no mode given"))?;
    Ok(py.detach(|| execute(&cfg, mode)).map_err(err)?.csv)
}

#[pymodule]
fn relaywalk_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGraph>()?;
    m.add_class::<PyDetectionModel>()?;
    m.add_function(wrap_pyfunction!(harmonic, m)?)?;
    m.add_function(wrap_pyfunction!(theta, m)?)?;
    m.add_function(wrap_pyfunction!(expected_delay_const, m)?)?;
    m.add_function(wrap_pyfunction!(expected_delay_random, m)?)?;
    m.add_function(wrap_pyfunction!(optimal_n_const, m)?)?;
    m.add_function(wrap_pyfunction!(optimal_n_random, m)?)?;
    m.add_function(wrap_pyfunction!(encode, m)?)?;
    m.add_function(wrap_pyfunction!(decode, m)?)?;
    m.add_function(wrap_pyfunction!(run_trials, m)?)?;
    m.add_function(wrap_pyfunction!(sweep, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    Ok(())
}
