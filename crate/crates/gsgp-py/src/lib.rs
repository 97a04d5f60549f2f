//! Python bindings for the gsgp engine: datasets, run configuration, seeded
//! runs, and the comparison statistics, exposed as one extension module.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use gsgp::engine;
use gsgp::stats;

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// A regression dataset: fixed fitness cases, target in the last CSV column.
#[pyclass(name = "Dataset", frozen)]
struct PyDataset {
    inner: gsgp::Dataset,
}

#[pymethods]
impl PyDataset {
    /// Load a CSV file (one header row, numeric fields, target last).
    #[staticmethod]
    fn load(path: std::path::PathBuf) -> PyResult<Self> {
        Ok(Self {
            inner: gsgp::load_dataset(&path).map_err(value_err)?,
        })
    }

    /// Build a dataset from rows of inputs and a target per row.
    #[staticmethod]
    fn from_cases(name: &str, inputs: Vec<Vec<f64>>, targets: Vec<f64>) -> PyResult<Self> {
        let num_vars = inputs.first().map(Vec::len).unwrap_or(0);
        let flat: Vec<f64> = inputs.into_iter().flatten().collect();
        Ok(Self {
            inner: gsgp::Dataset::new(name, num_vars, flat, targets).map_err(value_err)?,
        })
    }

    /// Smooth eight-input synthetic benchmark with mild noise.
    #[staticmethod]
    #[pyo3(signature = (cases, seed = 0))]
    fn smooth_surrogate(cases: usize, seed: u64) -> Self {
        Self {
            inner: gsgp::synthetic::smooth_surrogate(cases, seed),
        }
    }

    /// Short, wide synthetic benchmark: `informative` predictive inputs, the
    /// rest pure noise.
    #[staticmethod]
    #[pyo3(signature = (cases, num_vars, informative = 5, seed = 0))]
    fn wide_noise(cases: usize, num_vars: usize, informative: usize, seed: u64) -> Self {
        Self {
            inner: gsgp::synthetic::wide_noise(cases, num_vars, informative, seed),
        }
    }

    #[getter]
    fn name(&self) -> &str {
        self.inner.name()
    }

    #[getter]
    fn num_vars(&self) -> usize {
        self.inner.num_vars()
    }

    fn write_csv(&self, path: std::path::PathBuf) -> PyResult<()> {
        self.inner.write_csv(&path).map_err(value_err)
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!(
            "Dataset(name={:?}, num_vars={}, cases={})",
            self.inner.name(),
            self.inner.num_vars(),
            self.inner.len()
        )
    }
}

/// All knobs of a run except the dataset and the seed.
#[pyclass(name = "EvolutionConfig")]
struct PyEvolutionConfig {
    inner: engine::EvolutionConfig,
}

#[pymethods]
impl PyEvolutionConfig {
    #[new]
    #[pyo3(signature = (
        variant = "GSGP",
        population_size = 100,
        generations = 100,
        tournament_size = 4,
        p_crossover = 0.4,
        p_mutation = 0.6,
        ms = 0.1,
        max_depth = 6,
        ridge_lambda = 0.001,
        hybrid_cutoff = 10,
    ))]
    #[allow(clippy::too_many_arguments)]
    fn new(
        variant: &str,
        population_size: usize,
        generations: u32,
        tournament_size: usize,
        p_crossover: f64,
        p_mutation: f64,
        ms: f64,
        max_depth: usize,
        ridge_lambda: f64,
        hybrid_cutoff: u32,
    ) -> PyResult<Self> {
        let variant: engine::Variant = variant.parse().map_err(value_err)?;
        let inner = engine::EvolutionConfig {
            population_size,
            generations,
            tournament_size,
            p_crossover,
            p_mutation,
            ms,
            max_depth,
            ridge_lambda,
            hybrid_cutoff,
            variant,
        };
        inner.validate().map_err(value_err)?;
        Ok(Self { inner })
    }

    #[getter]
    fn variant(&self) -> &'static str {
        self.inner.variant.tag()
    }

    #[getter]
    fn population_size(&self) -> usize {
        self.inner.population_size
    }

    #[getter]
    fn generations(&self) -> u32 {
        self.inner.generations
    }

    fn __repr__(&self) -> String {
        format!(
            "EvolutionConfig(variant={:?}, population_size={}, generations={})",
            self.inner.variant.tag(),
            self.inner.population_size,
            self.inner.generations
        )
    }
}

/// Per-generation log of one run: tuples of (generation, train_rmse,
/// test_rmse, ls_probability or None).
#[pyclass(name = "RunLog", frozen)]
struct PyRunLog {
    records: Vec<(u32, f64, f64, Option<f64>)>,
}

#[pymethods]
impl PyRunLog {
    fn records(&self) -> Vec<(u32, f64, f64, Option<f64>)> {
        self.records.clone()
    }

    #[getter]
    fn final_train_rmse(&self) -> f64 {
        self.records.last().expect("never empty").1
    }

    #[getter]
    fn final_test_rmse(&self) -> f64 {
        self.records.last().expect("never empty").2
    }

    fn __len__(&self) -> usize {
        self.records.len()
    }

    fn __repr__(&self) -> String {
        format!(
            "RunLog(generations={}, final_train_rmse={}, final_test_rmse={})",
            self.records.len().saturating_sub(1),
            self.final_train_rmse(),
            self.final_test_rmse()
        )
    }
}

/// Execute one seeded run; deterministic given (config, dataset, seed).
#[pyfunction]
#[pyo3(signature = (config, dataset, seed = 0))]
fn run(config: &PyEvolutionConfig, dataset: &PyDataset, seed: u64) -> PyResult<PyRunLog> {
    let log = engine::run(&config.inner, &dataset.inner, seed).map_err(value_err)?;
    Ok(PyRunLog {
        records: log
            .records
            .into_iter()
            .map(|r| (r.generation, r.train_rmse, r.test_rmse, r.ls_probability))
            .collect(),
    })
}

/// The thirteen algorithm variant tags.
#[pyfunction]
fn variants() -> Vec<&'static str> {
    engine::Variant::ALL.iter().map(|v| v.tag()).collect()
}

/// One-tailed Mann-Whitney U test for "a stochastically smaller than b".
#[pyfunction]
fn mann_whitney_one_tailed(a: Vec<f64>, b: Vec<f64>) -> PyResult<f64> {
    stats::mann_whitney_one_tailed(&a, &b).map_err(value_err)
}

/// Bonferroni adjustment min(1, m * p).
#[pyfunction]
fn bonferroni(p: f64, m: usize) -> f64 {
    stats::bonferroni(p, m)
}

/// Five-number summary plus outliers as a dict.
#[pyfunction]
fn summarize<'py>(py: Python<'py>, sample: Vec<f64>) -> PyResult<Bound<'py, PyDict>> {
    let s = stats::summarize(&sample).map_err(value_err)?;
    let dict = PyDict::new(py);
    dict.set_item("count", s.count)?;
    dict.set_item("min", s.min)?;
    dict.set_item("q1", s.q1)?;
    dict.set_item("median", s.median)?;
    dict.set_item("q3", s.q3)?;
    dict.set_item("max", s.max)?;
    dict.set_item("outliers", s.outliers)?;
    Ok(dict)
}

#[pymodule]
fn gsgp_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<PyDataset>()?;
    m.add_class::<PyEvolutionConfig>()?;
    m.add_class::<PyRunLog>()?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    m.add_function(wrap_pyfunction!(variants, m)?)?;
    m.add_function(wrap_pyfunction!(mann_whitney_one_tailed, m)?)?;
    m.add_function(wrap_pyfunction!(bonferroni, m)?)?;
    m.add_function(wrap_pyfunction!(summarize, m)?)?;
    Ok(())
}
