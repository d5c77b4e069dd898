//! Python bindings for `mastermind_core`.

use mastermind_core::codec::{LayoutOptions, LayoutParams};
use mastermind_core::consistent::{self, BlockEvidence, DEFAULT_ENUMERATION_BUDGET};
use mastermind_core::experiment::{self, ExperimentConfig};
use mastermind_core::game::{self, Code, GameParams};
use mastermind_core::harness::{self, RunOptions};
use mastermind_core::strategy;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

fn err(e: mastermind_core::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn colors(c: &Code) -> Vec<u16> {
    c.as_slice().iter().map(|&x| u16::from(x)).collect()
}

fn code(entries: Vec<u8>, k: u8) -> PyResult<Code> {
    Code::with_colors(entries, k).map_err(err)
}

fn options(
    block_size: Option<usize>,
    samples: Option<usize>,
    blocks: Option<usize>,
    epsilon: f64,
    big_k: f64,
) -> LayoutOptions {
    LayoutOptions {
        block_size,
        samples,
        blocks,
        epsilon,
        big_k,
    }
}

/// Number of positions where `z` and `x` agree.
#[pyfunction]
fn eq(z: Vec<u8>, x: Vec<u8>) -> PyResult<usize> {
    game::eq(&Code::new(z), &Code::new(x)).map_err(err)
}

#[pyfunction]
fn white_pegs(z: Vec<u8>, x: Vec<u8>) -> PyResult<usize> {
    game::white_pegs(&Code::new(z), &Code::new(x)).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (size, k, epsilon = 1.0))]
fn theorem_three_t(size: usize, k: u8, epsilon: f64) -> PyResult<usize> {
    consistent::theorem_three_t(size, k, epsilon).map_err(err)
}

#[pyfunction]
fn predicted_consistent_size(len: usize, k: u8, t: usize) -> f64 {
    consistent::predicted_consistent_size(len, k, t)
}

/// Fragments consistent with `(fragment, contribution)` samples, in
/// lexicographic order.
#[pyfunction]
fn consistent_fragments(
    samples: Vec<(Vec<u8>, usize)>,
    len: usize,
    k: u8,
) -> PyResult<Vec<Vec<u16>>> {
    let mut evidence = BlockEvidence::new();
    for (frag, d) in samples {
        evidence.push(code(frag, k)?, d).map_err(err)?;
    }
    let found = consistent::consistent_fragments(&evidence, len, k, DEFAULT_ENUMERATION_BUDGET)
        .map_err(err)?;
    Ok(found.iter().map(colors).collect())
}

#[pyclass(name = "Layout", frozen)]
struct PyLayout {
    inner: LayoutParams,
}

#[pymethods]
impl PyLayout {
    #[getter]
    fn n(&self) -> usize {
        self.inner.n
    }
    #[getter]
    fn k(&self) -> u8 {
        self.inner.k
    }
    #[getter]
    fn s(&self) -> usize {
        self.inner.s
    }
    #[getter]
    fn t(&self) -> usize {
        self.inner.t
    }
    #[getter]
    fn b(&self) -> usize {
        self.inner.b
    }
    #[getter]
    fn ell_n(&self) -> usize {
        self.inner.ell_n
    }
    #[getter]
    fn ell_s(&self) -> usize {
        self.inner.ell_s
    }
    fn block_count(&self) -> usize {
        self.inner.block_count()
    }
    fn storage_requirement(&self) -> usize {
        self.inner.storage_requirement()
    }
    fn __repr__(&self) -> String {
        self.inner.to_string()
    }
}

#[pyfunction]
#[pyo3(signature = (kind, n, k, block_size = None, samples = None, blocks = None, epsilon = 1.0, big_k = 10.0))]
#[allow(clippy::too_many_arguments)]
fn layout(
    kind: &str,
    n: usize,
    k: u8,
    block_size: Option<usize>,
    samples: Option<usize>,
    blocks: Option<usize>,
    epsilon: f64,
    big_k: f64,
) -> PyResult<PyLayout> {
    let params = GameParams::new(n, k).map_err(err)?;
    let opts = options(block_size, samples, blocks, epsilon, big_k);
    let inner = match kind {
        "size-one" => LayoutParams::size_one(params, &opts),
        "size-two" => LayoutParams::size_two(params, &opts),
        other => return Err(PyValueError::new_err(format!("unknown layout {other:?}"))),
    }
    .map_err(err)?;
    Ok(PyLayout { inner })
}

#[pyclass(name = "Transcript", frozen)]
struct PyTranscript {
    inner: harness::Transcript,
}

#[pymethods]
impl PyTranscript {
    #[getter]
    fn won(&self) -> bool {
        self.inner.won()
    }
    #[getter]
    fn query_count(&self) -> usize {
        self.inner.query_count()
    }
    #[getter]
    fn max_memory(&self) -> usize {
        self.inner.max_memory
    }
    #[getter]
    fn mu(&self) -> usize {
        self.inner.mu
    }
    fn phase_counts(&self) -> [usize; 4] {
        self.inner.phase_counts()
    }
    /// `(guess, black, phase)` for every query.
    fn queries(&self) -> Vec<(Vec<u16>, usize, usize)> {
        self.inner
            .queries
            .iter()
            .map(|q| (colors(&q.guess), q.black, q.phase))
            .collect()
    }
    fn to_text(&self) -> String {
        self.inner.to_text()
    }
    /// Replays the game with fresh strategy instances; needs memory
    /// snapshots, so the game must have been run with `record_memory=True`.
    #[pyo3(signature = (block_size = None, samples = None, blocks = None, epsilon = 1.0, big_k = 10.0))]
    fn statelessness_check(
        &self,
        block_size: Option<usize>,
        samples: Option<usize>,
        blocks: Option<usize>,
        epsilon: f64,
        big_k: f64,
    ) -> PyResult<bool> {
        let opts = options(block_size, samples, blocks, epsilon, big_k);
        let t = &self.inner;
        strategy::build(&t.strategy, t.params, &opts).map_err(err)?;
        harness::statelessness_check(
            || strategy::build(&t.strategy, t.params, &opts).expect("strategy built above"),
            t,
        )
        .map_err(err)
    }
    fn __repr__(&self) -> String {
        format!(
            "Transcript(strategy={:?}, n={}, k={}, queries={}, won={})",
            self.inner.strategy,
            self.inner.params.n,
            self.inner.params.k,
            self.inner.query_count(),
            self.inner.won()
        )
    }
}

/// Plays one game and returns its transcript.
#[pyfunction]
#[pyo3(signature = (strategy, n, k, codemaker = "random".to_string(), seed = 0, secret = None, mu = None,
                    query_cap = None, record_memory = false, block_size = None, samples = None,
                    blocks = None, epsilon = 1.0, big_k = 10.0))]
#[allow(clippy::too_many_arguments)]
fn run_game(
    py: Python<'_>,
    strategy: String,
    n: usize,
    k: u8,
    codemaker: String,
    seed: u64,
    secret: Option<Vec<u8>>,
    mu: Option<usize>,
    query_cap: Option<usize>,
    record_memory: bool,
    block_size: Option<usize>,
    samples: Option<usize>,
    blocks: Option<usize>,
    epsilon: f64,
    big_k: f64,
) -> PyResult<PyTranscript> {
    let secret = secret.map(|s| code(s, k)).transpose()?;
    let config = ExperimentConfig {
        strategy,
        codemaker,
        ns: vec![n],
        k,
        mu,
        trials: 1,
        seed,
        layout: options(block_size, samples, blocks, epsilon, big_k),
        query_cap,
        secret,
        workers: 1,
    };
    let params = GameParams::new(n, k).map_err(err)?;
    let inner = py
        .detach(|| {
            let strat = strategy::build(&config.strategy, params, &config.layout)?;
            let mu = experiment::admissible_mu(&config.strategy, config.mu, strat.memory_size())?;
            let mut maker = experiment::build_codemaker(
                &config.codemaker,
                params,
                seed,
                config.secret.as_ref(),
            )?;
            let opts = RunOptions {
                query_cap: config.query_cap.unwrap_or(50 * n),
                record_memory,
            };
            harness::run_game(strat.as_ref(), maker.as_mut(), params, mu, seed, opts)
        })
        .map_err(err)?;
    Ok(PyTranscript { inner })
}

/// Runs a grid of games and returns the per-trial CSV.
#[pyfunction]
#[pyo3(signature = (strategy, ns, k, trials, codemaker = "random".to_string(), seed = 0, workers = 1,
                    block_size = None, samples = None, blocks = None, epsilon = 1.0, big_k = 10.0))]
#[allow(clippy::too_many_arguments)]
fn run_grid(
    py: Python<'_>,
    strategy: String,
    ns: Vec<usize>,
    k: u8,
    trials: usize,
    codemaker: String,
    seed: u64,
    workers: usize,
    block_size: Option<usize>,
    samples: Option<usize>,
    blocks: Option<usize>,
    epsilon: f64,
    big_k: f64,
) -> PyResult<String> {
    let config = ExperimentConfig {
        strategy,
        codemaker,
        ns,
        k,
        trials,
        seed,
        workers: workers.max(1),
        layout: options(block_size, samples, blocks, epsilon, big_k),
        ..ExperimentConfig::default()
    };
    let result = py.detach(|| experiment::run_grid(&config)).map_err(err)?;
    let mut out = Vec::new();
    experiment::write_csv(&result.records, &mut out).map_err(err)?;
    String::from_utf8(out).map_err(|e| PyValueError::new_err(e.to_string()))
}

#[pymodule]
fn mastermind_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("STRATEGIES", strategy::STRATEGY_NAMES.to_vec())?;
    m.add("CODEMAKERS", experiment::CODEMAKER_NAMES.to_vec())?;
    m.add_class::<PyLayout>()?;
    m.add_class::<PyTranscript>()?;
    m.add_function(wrap_pyfunction!(eq, m)?)?;
    m.add_function(wrap_pyfunction!(white_pegs, m)?)?;
    m.add_function(wrap_pyfunction!(theorem_three_t, m)?)?;
    m.add_function(wrap_pyfunction!(predicted_consistent_size, m)?)?;
    m.add_function(wrap_pyfunction!(consistent_fragments, m)?)?;
    m.add_function(wrap_pyfunction!(layout, m)?)?;
    m.add_function(wrap_pyfunction!(run_game, m)?)?;
    m.add_function(wrap_pyfunction!(run_grid, m)?)?;
    Ok(())
}
