//! Python bindings: the tuning pipeline callable in-process.
//!
//! Structured results (plans, reports) cross the boundary as JSON-shaped
//! Python objects, the same schemas the CLI writes.

// The pyo3 macros expand to code that trips useless_conversion.
#![allow(clippy::useless_conversion)]

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use xfertune::chunk::Chunk;
use xfertune::dataset::{Dataset, FileEntry};
use xfertune::error::Error;
use xfertune::harness::DatasetSpec;
use xfertune::profile::{fixtures, NetworkProfile};
use xfertune::sched::{Algorithm, SchedulerConfig};
use xfertune::sim::ReferenceModel;

fn to_py_err(e: Error) -> PyErr {
    match e {
        Error::Simulation(_) => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

/// A transfer path: bandwidth and io_cap in bytes/second, rtt in seconds,
/// buffer in bytes.
#[pyclass(name = "NetworkProfile")]
#[derive(Clone)]
struct PyNetworkProfile {
    inner: NetworkProfile,
}

#[pymethods]
impl PyNetworkProfile {
    #[new]
    #[pyo3(signature = (name, bandwidth, rtt, buffer_size, max_cc, io_cap=None))]
    fn new(
        name: &str,
        bandwidth: f64,
        rtt: f64,
        buffer_size: u64,
        max_cc: u32,
        io_cap: Option<f64>,
    ) -> PyResult<Self> {
        let inner = match io_cap {
            Some(cap) => NetworkProfile::with_io_cap(name, bandwidth, rtt, buffer_size, max_cc, cap),
            None => NetworkProfile::new(name, bandwidth, rtt, buffer_size, max_cc),
        }
        .map_err(to_py_err)?;
        Ok(Self { inner })
    }

    /// Load one of the published test-environment profiles by name.
    #[staticmethod]
    fn fixture(name: &str) -> PyResult<Self> {
        fixtures::all()
            .into_iter()
            .find(|p| p.name() == name)
            .map(|inner| Self { inner })
            .ok_or_else(|| PyValueError::new_err(format!("unknown fixture {name:?}")))
    }

    #[getter]
    fn name(&self) -> String {
        self.inner.name().to_string()
    }

    #[getter]
    fn bandwidth(&self) -> f64 {
        self.inner.bandwidth()
    }

    #[getter]
    fn rtt(&self) -> f64 {
        self.inner.rtt()
    }

    #[getter]
    fn buffer_size(&self) -> u64 {
        self.inner.buffer_size()
    }

    #[getter]
    fn max_cc(&self) -> u32 {
        self.inner.max_cc()
    }

    #[getter]
    fn io_cap(&self) -> f64 {
        self.inner.io_cap()
    }

    /// Bandwidth-delay product in bytes.
    fn bdp(&self) -> u64 {
        self.inner.bdp()
    }

    fn __repr__(&self) -> String {
        format!(
            "NetworkProfile(name={:?}, bandwidth={}, rtt={}, buffer_size={}, max_cc={})",
            self.inner.name(),
            self.inner.bandwidth(),
            self.inner.rtt(),
            self.inner.buffer_size(),
            self.inner.max_cc()
        )
    }
}

/// The tuned (pipelining, parallelism, concurrency) triple.
#[pyclass(name = "TransferParams")]
#[derive(Clone)]
struct PyTransferParams {
    #[pyo3(get)]
    pipelining: u32,
    #[pyo3(get)]
    parallelism: u32,
    #[pyo3(get)]
    concurrency: u32,
}

#[pymethods]
impl PyTransferParams {
    fn __repr__(&self) -> String {
        format!(
            "TransferParams(pipelining={}, parallelism={}, concurrency={})",
            self.pipelining, self.parallelism, self.concurrency
        )
    }

    fn as_tuple(&self) -> (u32, u32, u32) {
        (self.pipelining, self.parallelism, self.concurrency)
    }
}

fn dataset_from_files(name: &str, file_sizes: Vec<(String, u64)>) -> PyResult<Dataset> {
    let files = file_sizes
        .into_iter()
        .map(|(id, size)| FileEntry::new(id, size))
        .collect();
    Dataset::new(name, files).map_err(to_py_err)
}

/// Parse a JSON string into Python objects via the stdlib json module.
fn json_to_py(py: Python<'_>, json: &str) -> PyResult<PyObject> {
    let module = py.import_bound("json")?;
    Ok(module.call_method1("loads", (json,))?.unbind())
}

fn chunk_type_from_str(s: &str) -> PyResult<xfertune::ChunkType> {
    match s.to_ascii_lowercase().as_str() {
        "small" => Ok(xfertune::ChunkType::Small),
        "medium" => Ok(xfertune::ChunkType::Medium),
        "large" => Ok(xfertune::ChunkType::Large),
        "huge" => Ok(xfertune::ChunkType::Huge),
        other => Err(PyValueError::new_err(format!("unknown chunk type {other:?}"))),
    }
}

fn alloc_to_py(
    py: Python<'_>,
    chunks: &[Chunk],
    alloc: xfertune::ChannelAllocation,
) -> PyResult<PyObject> {
    let dict = pyo3::types::PyDict::new_bound(py);
    for c in chunks {
        dict.set_item(c.chunk_type.name(), alloc.get(c.chunk_type))?;
    }
    Ok(dict.unbind().into())
}

/// Closed-form parameter estimation for one chunk.
#[pyfunction]
fn find_optimal_parameters(
    avg_file_size: f64,
    bdp: u64,
    buffer_size: u64,
    max_cc: u32,
) -> PyResult<PyTransferParams> {
    let p = xfertune::find_optimal_parameters(avg_file_size, bdp, buffer_size, max_cc)
        .map_err(to_py_err)?;
    Ok(PyTransferParams {
        pipelining: p.pipelining,
        parallelism: p.parallelism,
        concurrency: p.concurrency,
    })
}

/// Partition files into up to k chunks and tune each one. `files` is a
/// list of (id, size_bytes) pairs; returns a list of chunk dicts.
#[pyfunction]
#[pyo3(signature = (files, profile, k=2))]
fn plan(
    py: Python<'_>,
    files: Vec<(String, u64)>,
    profile: &PyNetworkProfile,
    k: u32,
) -> PyResult<PyObject> {
    let ds = dataset_from_files("python", files)?;
    let chunks = xfertune::partition_files(&ds, &profile.inner, k).map_err(to_py_err)?;
    let planned = xfertune::plan_sc(chunks, &profile.inner).map_err(to_py_err)?;
    let json = serde_json::to_string(&planned)
        .map_err(|e| PyRuntimeError::new_err(format!("serialize: {e}")))?;
    json_to_py(py, &json)
}

/// Channel counts per chunk type under MC round-robin dealing.
#[pyfunction]
fn allocate_mc(py: Python<'_>, chunk_types: Vec<String>, max_cc: u32) -> PyResult<PyObject> {
    let chunks: Vec<Chunk> = chunk_types
        .iter()
        .map(|name| {
            let t = chunk_type_from_str(name)?;
            Chunk::new(t, vec![FileEntry::new(format!("{name}-0"), 1)]).map_err(to_py_err)
        })
        .collect::<PyResult<_>>()?;
    let alloc = xfertune::allocate_mc(&chunks, max_cc);
    alloc_to_py(py, &chunks, alloc)
}

/// Channel counts per chunk type under ProMC weighted dealing.
/// `chunks` is a list of (type_name, total_bytes) pairs.
#[pyfunction]
#[pyo3(signature = (chunks, max_cc, delta=None))]
fn allocate_promc(
    py: Python<'_>,
    chunks: Vec<(String, u64)>,
    max_cc: u32,
    delta: Option<(f64, f64, f64, f64)>,
) -> PyResult<PyObject> {
    let sized: Vec<Chunk> = chunks
        .iter()
        .map(|(name, size)| {
            let t = chunk_type_from_str(name)?;
            Chunk::new(t, vec![FileEntry::new(format!("{name}-0"), (*size).max(1))])
                .map_err(to_py_err)
        })
        .collect::<PyResult<_>>()?;
    let weights = match delta {
        Some((small, medium, large, huge)) => {
            xfertune::DeltaWeights { small, medium, large, huge }
        }
        None => xfertune::DeltaWeights::default(),
    };
    let alloc = xfertune::allocate_promc(&sized, max_cc, &weights);
    alloc_to_py(py, &sized, alloc)
}

/// Run one simulated transfer; returns the full report (same schema as the
/// CLI's report.json).
#[pyfunction]
#[pyo3(signature = (files, profile, algorithm="mc", k=2, max_cc=None))]
fn simulate(
    py: Python<'_>,
    files: Vec<(String, u64)>,
    profile: &PyNetworkProfile,
    algorithm: &str,
    k: u32,
    max_cc: Option<u32>,
) -> PyResult<PyObject> {
    let ds = dataset_from_files("python", files)?;
    let algo: Algorithm = algorithm.parse().map_err(to_py_err)?;
    let config = SchedulerConfig::new(algo, k, max_cc.unwrap_or(profile.inner.max_cc()))
        .map_err(to_py_err)?;
    let model = ReferenceModel::default();
    let report =
        xfertune::run_simulation(&ds, &profile.inner, &config, &model).map_err(to_py_err)?;
    json_to_py(py, &report.to_json())
}

/// Generate a synthetic dataset; returns [(id, size_bytes), ...].
#[pyfunction]
#[pyo3(signature = (generator, total_size, seed=0, file_size=None))]
fn generate_dataset(
    generator: &str,
    total_size: u64,
    seed: u64,
    file_size: Option<u64>,
) -> PyResult<Vec<(String, u64)>> {
    let spec = match generator {
        "mixed" => DatasetSpec::Mixed { seed, total_size },
        "small_dominated" => DatasetSpec::SmallDominated { seed, total_size },
        "uniform" => DatasetSpec::Uniform {
            seed,
            total_size,
            size: file_size.ok_or_else(|| PyValueError::new_err("uniform needs file_size"))?,
        },
        other => return Err(PyValueError::new_err(format!("unknown generator {other:?}"))),
    };
    let ds = xfertune::generate_dataset(&spec).map_err(to_py_err)?;
    Ok(ds.files.into_iter().map(|f| (f.id, f.size_bytes)).collect())
}

/// Parse a size string ("32MB") to bytes.
#[pyfunction]
fn parse_bytes(s: &str) -> PyResult<u64> {
    xfertune::units::parse_bytes(s).map_err(to_py_err)
}

/// Parse a rate string ("10Gbps") to bytes/second.
#[pyfunction]
fn parse_rate(s: &str) -> PyResult<f64> {
    xfertune::units::parse_rate(s).map_err(to_py_err)
}

/// Parse a duration string ("40ms") to seconds.
#[pyfunction]
fn parse_duration(s: &str) -> PyResult<f64> {
    xfertune::units::parse_duration(s).map_err(to_py_err)
}

#[pymodule]
fn xfertune_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<PyNetworkProfile>()?;
    m.add_class::<PyTransferParams>()?;
    m.add_function(wrap_pyfunction!(find_optimal_parameters, m)?)?;
    m.add_function(wrap_pyfunction!(plan, m)?)?;
    m.add_function(wrap_pyfunction!(allocate_mc, m)?)?;
    m.add_function(wrap_pyfunction!(allocate_promc, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(generate_dataset, m)?)?;
    m.add_function(wrap_pyfunction!(parse_bytes, m)?)?;
    m.add_function(wrap_pyfunction!(parse_rate, m)?)?;
    m.add_function(wrap_pyfunction!(parse_duration, m)?)?;
    Ok(())
}
