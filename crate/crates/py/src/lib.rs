//! Python bindings. Trajectories cross the boundary as sequences of `(x, y)` pairs.

use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;

use simsub::eval::DEFAULT_RANK_CAP;
use simsub::index::run_algo;
use simsub::rl::{FeatureConfig, TrainConfig};
use simsub::{Algo, DataFormat, Dataset, Error, Measure, Point, SearchParams, Trajectory};

type XY = Vec<(f64, f64)>;

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Io { .. } => PyIOError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn points(xy: Vec<(f64, f64)>) -> PyResult<Vec<Point>> {
    let pts: Vec<Point> = xy.into_iter().map(|(x, y)| Point::new(x, y)).collect();
    if pts.is_empty() {
        return Err(PyValueError::new_err("trajectory must have at least one point"));
    }
    if pts.iter().any(|p| !p.is_finite()) {
        return Err(PyValueError::new_err("coordinates must be finite"));
    }
    Ok(pts)
}

fn measure(name: &str, cell: f64) -> PyResult<Measure> {
    Measure::parse(name, cell).map_err(py_err)
}

#[pyclass(name = "Outcome", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyOutcome {
    /// 1-based inclusive interval start.
    #[pyo3(get)]
    start: usize,
    #[pyo3(get)]
    end: usize,
    #[pyo3(get)]
    dissimilarity: f64,
    #[pyo3(get)]
    explored: u64,
    #[pyo3(get)]
    skipped: u64,
}

#[pymethods]
impl PyOutcome {
    fn __repr__(&self) -> String {
        format!("Outcome(start={}, end={}, dissimilarity={:?})", self.start, self.end, self.dissimilarity)
    }
}

impl From<simsub::SearchOutcome> for PyOutcome {
    fn from(o: simsub::SearchOutcome) -> Self {
        PyOutcome {
            start: o.interval.start,
            end: o.interval.end,
            dissimilarity: o.dissimilarity,
            explored: o.explored,
            skipped: o.skipped,
        }
    }
}

#[pyclass(name = "Policy", frozen, skip_from_py_object)]
struct PyPolicy {
    inner: simsub::Policy,
}

#[pymethods]
impl PyPolicy {
    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        Ok(PyPolicy { inner: simsub::Policy::load(path).map_err(py_err)? })
    }

    fn save(&self, path: &str) -> PyResult<()> {
        self.inner.save(path).map_err(py_err)
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    #[getter]
    fn k(&self) -> usize {
        self.inner.k
    }

    #[getter]
    fn measure(&self) -> &'static str {
        match self.inner.measure {
            simsub::MeasureKind::Dtw => "dtw",
            simsub::MeasureKind::Frechet => "frechet",
            simsub::MeasureKind::GridEmbed => "gridembed",
        }
    }
}

#[pyclass(name = "Dataset", frozen, skip_from_py_object)]
struct PyDataset {
    inner: Dataset,
}

#[pymethods]
impl PyDataset {
    /// Reads CSV (`traj_id,seq,x,y[,t]`), JSONL, or a binary store (detected by magic bytes).
    #[staticmethod]
    #[pyo3(signature = (path, format = "csv"))]
    fn load(path: &str, format: &str) -> PyResult<Self> {
        let bytes = std::fs::read(path).map_err(|e| PyIOError::new_err(format!("cannot read {path}: {e}")))?;
        let inner = if bytes.starts_with(simsub::store::MAGIC) {
            simsub::store::decode(&bytes)
        } else {
            let fmt: DataFormat = format.parse().map_err(py_err)?;
            simsub::trajectory::parse_dataset_bytes(&bytes, fmt)
        };
        Ok(PyDataset { inner: inner.map_err(py_err)? })
    }

    #[staticmethod]
    fn from_trajectories(trajectories: Vec<(String, Vec<(f64, f64)>)>) -> PyResult<Self> {
        let trajs = trajectories
            .into_iter()
            .map(|(id, xy)| Trajectory::new(id, points(xy)?).map_err(py_err))
            .collect::<PyResult<Vec<_>>>()?;
        Ok(PyDataset { inner: Dataset::from_trajectories(trajs).map_err(py_err)? })
    }

    fn save_store(&self, path: &str) -> PyResult<()> {
        simsub::store::write_store(path, &self.inner).map_err(py_err)
    }

    fn ids(&self) -> Vec<String> {
        self.inner.iter().map(|t| t.id.clone()).collect()
    }

    fn points(&self, id: &str) -> PyResult<Vec<(f64, f64)>> {
        let t = self.inner.get(id).ok_or_else(|| PyValueError::new_err(format!("no trajectory {id:?}")))?;
        Ok(t.points().iter().map(|p| (p.x, p.y)).collect())
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }
}

#[pyfunction]
#[pyo3(signature = (t, q, measure = "dtw", cell = 1.0))]
fn distance(t: Vec<(f64, f64)>, q: Vec<(f64, f64)>, measure: &str, cell: f64) -> PyResult<f64> {
    Ok(simsub::distance(self::measure(measure, cell)?, &points(t)?, &points(q)?))
}

/// Runs one searcher on a single `(T, Q)` pair.
#[pyfunction]
#[pyo3(signature = (t, q, algo = "exacts", measure = "dtw", cell = 1.0, xi = 5, delay = 5, samples = 100, seed = 0, band = None, policy = None))]
#[allow(clippy::too_many_arguments)]
fn search(
    t: Vec<(f64, f64)>,
    q: Vec<(f64, f64)>,
    algo: &str,
    measure: &str,
    cell: f64,
    xi: usize,
    delay: usize,
    samples: usize,
    seed: u64,
    band: Option<f64>,
    policy: Option<&PyPolicy>,
) -> PyResult<PyOutcome> {
    let algo: Algo = algo.parse().map_err(py_err)?;
    let policy = policy.map(|p| &p.inner);
    let params = SearchParams { xi, delay, samples, seed, band, policy, k_skip: policy.map_or(0, |p| p.k) };
    let out = run_algo(algo, &points(t)?, &points(q)?, self::measure(measure, cell)?, &params, 0).map_err(py_err)?;
    Ok(out.into())
}

/// AR, MR and RR of `outcome` against the exhaustive ranking of `(t, q)`.
#[pyfunction]
#[pyo3(signature = (t, q, outcome, measure = "dtw", cell = 1.0))]
fn score(t: Vec<(f64, f64)>, q: Vec<(f64, f64)>, outcome: &PyOutcome, measure: &str, cell: f64) -> PyResult<(f64, usize, f64)> {
    let (t, q) = (points(t)?, points(q)?);
    let table = simsub::rank_all(&t, &q, self::measure(measure, cell)?, DEFAULT_RANK_CAP).map_err(py_err)?;
    let o = simsub::SearchOutcome {
        interval: simsub::Interval::new(outcome.start, outcome.end),
        dissimilarity: outcome.dissimilarity,
        explored: outcome.explored,
        skipped: outcome.skipped,
        elapsed: Default::default(),
    };
    let m = simsub::score(&o, &table).map_err(py_err)?;
    Ok((m.ar, m.mr, m.rr))
}

/// Database top-k; returns `(traj_id, start, end, distance)` rows.
#[pyfunction]
#[pyo3(signature = (db, q, k = 3, algo = "exacts", measure = "dtw", cell = 1.0, use_index = false, threads = 1, policy = None))]
#[allow(clippy::too_many_arguments)]
fn topk(
    db: &PyDataset,
    q: Vec<(f64, f64)>,
    k: usize,
    algo: &str,
    measure: &str,
    cell: f64,
    use_index: bool,
    threads: usize,
    policy: Option<&PyPolicy>,
) -> PyResult<Vec<(String, usize, usize, f64)>> {
    let algo: Algo = algo.parse().map_err(py_err)?;
    let idx = if use_index { Some(simsub::build_index(&db.inner).map_err(py_err)?) } else { None };
    let policy = policy.map(|p| &p.inner);
    let params = SearchParams { policy, k_skip: policy.map_or(0, |p| p.k), ..SearchParams::default() };
    let res = simsub::query_topk(&db.inner, idx.as_ref(), &points(q)?, self::measure(measure, cell)?, k, algo, &params, threads)
        .map_err(py_err)?;
    Ok(res.entries.into_iter().map(|e| (e.traj_id, e.interval.start, e.interval.end, e.distance)).collect())
}

/// Trains a policy on explicit `(T, Q)` pairs.
#[pyfunction]
#[pyo3(signature = (pairs, measure = "dtw", cell = 1.0, episodes = 1000, seed = 0, k = 0))]
fn train(pairs: Vec<(XY, XY)>, measure: &str, cell: f64, episodes: usize, seed: u64, k: usize) -> PyResult<PyPolicy> {
    let measure = self::measure(measure, cell)?;
    let pairs = pairs
        .into_iter()
        .enumerate()
        .map(|(i, (t, q))| {
            Ok((
                Trajectory::new(format!("t{i}"), points(t)?).map_err(py_err)?,
                Trajectory::new(format!("q{i}"), points(q)?).map_err(py_err)?,
            ))
        })
        .collect::<PyResult<Vec<_>>>()?;
    let cfg = TrainConfig { episodes, seed, ..TrainConfig::default() };
    let out = simsub::rl::train_on_pairs(&pairs, measure, &cfg, FeatureConfig::default_for(measure), k).map_err(py_err)?;
    Ok(PyPolicy { inner: out.policy })
}

#[pymodule]
fn simsub_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyOutcome>()?;
    m.add_class::<PyPolicy>()?;
    m.add_class::<PyDataset>()?;
    m.add_function(wrap_pyfunction!(distance, m)?)?;
    m.add_function(wrap_pyfunction!(search, m)?)?;
    m.add_function(wrap_pyfunction!(score, m)?)?;
    m.add_function(wrap_pyfunction!(topk, m)?)?;
    m.add_function(wrap_pyfunction!(train, m)?)?;
    Ok(())
}
