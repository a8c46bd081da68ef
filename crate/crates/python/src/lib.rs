use std::path::PathBuf;

use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyTypeError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};
use serde::Serialize;

use tabeval_core::attack_privacy::{self, AuxSplit, RiskEstimate, SinglingOutMode};
use tabeval_core::generators::{generate_with_components, GeneratorKind};
use tabeval_core::ml_utility::{tstr_compare, Learner, LearnerKind};
use tabeval_core::report::{render_json, run_on_datasets, EvalConfig};
use tabeval_core::similarity::{SimilarityConfig, SinkhornParams};
use tabeval_core::tabular::{load_csv, write_csv, CsvOptions, Schema};
use tabeval_core::{distance_privacy, Column};

create_exception!(tabeval, TabevalError, PyException);

fn err(e: tabeval_core::Error) -> PyErr {
    TabevalError::new_err(e.to_string())
}

fn to_py<'py, T: Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| TabevalError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

fn csv_options(delimiter: char) -> PyResult<CsvOptions> {
    if !delimiter.is_ascii() {
        return Err(TabevalError::new_err("delimiter must be a single ASCII character"));
    }
    Ok(CsvOptions { delimiter: delimiter as u8 })
}

/// A typed table: every column is either numeric or categorical.
#[pyclass(name = "Dataset", module = "tabeval", frozen)]
struct PyDataset {
    inner: tabeval_core::Dataset,
}

#[pymethods]
impl PyDataset {
    /// Builds a dataset from a `{name: values}` mapping; lists of numbers
    /// become numeric columns and lists of strings categorical ones.
    #[new]
    fn new(columns: &Bound<'_, PyDict>) -> PyResult<Self> {
        let mut cols = Vec::with_capacity(columns.len());
        for (name, values) in columns.iter() {
            let name: String = name.extract()?;
            let column = if let Ok(v) = values.extract::<Vec<f64>>() {
                Column::Numeric(v)
            } else if let Ok(v) = values.extract::<Vec<String>>() {
                Column::Categorical(v)
            } else {
                return Err(PyTypeError::new_err(format!(
                    "column `{name}` must be a list of numbers or a list of strings"
                )));
            };
            cols.push((name, column));
        }
        let inner = tabeval_core::Dataset::from_columns(cols).map_err(err)?;
        Ok(PyDataset { inner })
    }

    #[staticmethod]
    #[pyo3(signature = (path, schema=None, delimiter=','))]
    fn read_csv(path: PathBuf, schema: Option<PathBuf>, delimiter: char) -> PyResult<Self> {
        let schema = schema.map(|p| Schema::from_json_file(&p)).transpose().map_err(err)?;
        let inner = load_csv(&path, schema.as_ref(), &csv_options(delimiter)?).map_err(err)?;
        Ok(PyDataset { inner })
    }

    #[pyo3(signature = (path, delimiter=','))]
    fn write_csv(&self, path: PathBuf, delimiter: char) -> PyResult<()> {
        let file = std::fs::File::create(&path).map_err(|e| TabevalError::new_err(format!("{}: {e}", path.display())))?;
        write_csv(&self.inner, file, &csv_options(delimiter)?).map_err(err)
    }

    #[getter]
    fn n_rows(&self) -> usize {
        self.inner.n_rows()
    }

    #[getter]
    fn n_cols(&self) -> usize {
        self.inner.n_cols()
    }

    #[getter]
    fn columns(&self) -> Vec<String> {
        self.inner.schema().names().map(str::to_string).collect()
    }

    /// Values of one column as a list of floats or strings.
    fn column<'py>(&self, py: Python<'py>, name: &str) -> PyResult<Bound<'py, PyList>> {
        match self.inner.column(name).map_err(err)? {
            Column::Numeric(v) => PyList::new(py, v),
            Column::Categorical(v) => PyList::new(py, v),
        }
    }

    fn to_dict<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let out = PyDict::new(py);
        for name in self.inner.schema().names() {
            out.set_item(name, self.column(py, name)?)?;
        }
        Ok(out)
    }

    fn __len__(&self) -> usize {
        self.inner.n_rows()
    }

    fn __eq__(&self, other: &Self) -> bool {
        self.inner == other.inner
    }

    fn __repr__(&self) -> String {
        format!("Dataset({} rows x {} columns)", self.inner.n_rows(), self.inner.n_cols())
    }
}

#[pyfunction]
#[pyo3(signature = (original, synthetic, keys, target, bins=20))]
fn disco(original: &PyDataset, synthetic: &PyDataset, keys: Vec<String>, target: &str, bins: usize) -> PyResult<f64> {
    distance_privacy::disco(&original.inner, &synthetic.inner, &keys, target, bins).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (original, synthetic, keys, bins=20))]
fn rep_u(original: &PyDataset, synthetic: &PyDataset, keys: Vec<String>, bins: usize) -> PyResult<f64> {
    distance_privacy::rep_u(&original.inner, &synthetic.inner, &keys, bins).map_err(err)
}

#[pyfunction]
fn nndr(py: Python<'_>, synthetic: &PyDataset, original: &PyDataset) -> PyResult<f64> {
    py.detach(|| distance_privacy::nndr(&synthetic.inner, &original.inner)).map_err(err)
}

#[pyfunction]
fn dcr(py: Python<'_>, synthetic: &PyDataset, original: &PyDataset) -> PyResult<f64> {
    py.detach(|| distance_privacy::dcr(&synthetic.inner, &original.inner)).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (original, synthetic, seed=0))]
fn nnaa(py: Python<'_>, original: &PyDataset, synthetic: &PyDataset, seed: u64) -> PyResult<f64> {
    py.detach(|| distance_privacy::nnaa(&original.inner, &synthetic.inner, seed)).map_err(err)
}

fn risk_dict<'py>(py: Python<'py>, r: tabeval_core::Result<RiskEstimate>) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &r.map_err(err)?)
}

#[pyfunction]
#[pyo3(signature = (original, synthetic, n_attacks=500, mode="multivariate", seed=0))]
fn singling_out_risk<'py>(
    py: Python<'py>,
    original: &PyDataset,
    synthetic: &PyDataset,
    n_attacks: usize,
    mode: &str,
    seed: u64,
) -> PyResult<Bound<'py, PyAny>> {
    let mode = match mode {
        "univariate" => SinglingOutMode::Univariate,
        "multivariate" => SinglingOutMode::Multivariate,
        other => return Err(TabevalError::new_err(format!("unknown singling-out mode `{other}`"))),
    };
    let r = py.detach(|| attack_privacy::singling_out_risk(&original.inner, &synthetic.inner, n_attacks, mode, seed));
    risk_dict(py, r)
}

#[pyfunction]
#[pyo3(signature = (original, synthetic, side_a, side_b, n_attacks=500, n_neighbors=1, seed=0))]
#[allow(clippy::too_many_arguments)]
fn linkability_risk<'py>(
    py: Python<'py>,
    original: &PyDataset,
    synthetic: &PyDataset,
    side_a: Vec<String>,
    side_b: Vec<String>,
    n_attacks: usize,
    n_neighbors: usize,
    seed: u64,
) -> PyResult<Bound<'py, PyAny>> {
    let aux = AuxSplit { side_a, side_b };
    let r = py.detach(|| {
        attack_privacy::linkability_risk(&original.inner, &synthetic.inner, &aux, n_attacks, n_neighbors, seed)
    });
    risk_dict(py, r)
}

#[pyfunction]
#[pyo3(signature = (original, synthetic, aux_columns, secret, n_attacks=500, tolerance=0.05, seed=0))]
#[allow(clippy::too_many_arguments)]
fn inference_risk<'py>(
    py: Python<'py>,
    original: &PyDataset,
    synthetic: &PyDataset,
    aux_columns: Vec<String>,
    secret: &str,
    n_attacks: usize,
    tolerance: f64,
    seed: u64,
) -> PyResult<Bound<'py, PyAny>> {
    let r = py.detach(|| {
        attack_privacy::inference_risk(&original.inner, &synthetic.inner, &aux_columns, secret, n_attacks, tolerance, seed)
    });
    risk_dict(py, r)
}

/// Every similarity metric at once. `config` is an optional JSON object with
/// the fields of the `similarity` block (bins, wasserstein_mode, sinkhorn, ...).
#[pyfunction]
#[pyo3(signature = (original, synthetic, config=None))]
fn similarity<'py>(
    py: Python<'py>,
    original: &PyDataset,
    synthetic: &PyDataset,
    config: Option<&str>,
) -> PyResult<Bound<'py, PyAny>> {
    let config: SimilarityConfig = match config {
        Some(text) => serde_json::from_str(text).map_err(|e| TabevalError::new_err(e.to_string()))?,
        None => SimilarityConfig::default(),
    };
    let report = py.detach(|| tabeval_core::similarity::evaluate(&original.inner, &synthetic.inner, &config)).map_err(err)?;
    to_py(py, &report)
}

#[pyfunction]
#[pyo3(signature = (original, synthetic, epsilon=0.05, max_iter=500, tol=1e-6, cap=2000, seed=0))]
#[allow(clippy::too_many_arguments)]
fn sinkhorn_distance(
    py: Python<'_>,
    original: &PyDataset,
    synthetic: &PyDataset,
    epsilon: f64,
    max_iter: usize,
    tol: f64,
    cap: usize,
    seed: u64,
) -> PyResult<f64> {
    let params = SinkhornParams { epsilon, max_iter, tol, cap };
    py.detach(|| tabeval_core::similarity::sinkhorn_distance(&original.inner, &synthetic.inner, &params, seed)).map_err(err)
}

/// Train-on-synthetic / train-on-real comparison on a held-out split of the
/// original.
#[pyfunction]
#[pyo3(signature = (original, synthetic, target, learner="logistic_regression", k=5, seed=0))]
fn tstr<'py>(
    py: Python<'py>,
    original: &PyDataset,
    synthetic: &PyDataset,
    target: &str,
    learner: &str,
    k: usize,
    seed: u64,
) -> PyResult<Bound<'py, PyAny>> {
    let kind = match learner {
        "logistic_regression" => LearnerKind::LogisticRegression,
        "k_nearest_neighbors" | "knn" => LearnerKind::KNearestNeighbors,
        other => return Err(TabevalError::new_err(format!("unknown learner `{other}`"))),
    };
    let learner = Learner { kind, k, seed, ..Default::default() };
    let report = py.detach(|| tstr_compare(&original.inner, &synthetic.inner, target, &learner, seed)).map_err(err)?;
    to_py(py, &report)
}

#[pyfunction]
#[pyo3(signature = (model, data, n, seed=0, k=5))]
fn generate(py: Python<'_>, model: &str, data: &PyDataset, n: usize, seed: u64, k: usize) -> PyResult<PyDataset> {
    let kind: GeneratorKind = model.parse().map_err(err)?;
    let inner = py.detach(|| generate_with_components(kind, &data.inner, n, seed, k)).map_err(err)?;
    Ok(PyDataset { inner })
}

/// Full evaluation of in-memory datasets. `config` is the JSON run
/// configuration; its file paths are ignored. Returns the report as a dict.
#[pyfunction]
fn evaluate<'py>(
    py: Python<'py>,
    config: &str,
    original: &PyDataset,
    synthetic: &Bound<'py, PyDict>,
) -> PyResult<Bound<'py, PyAny>> {
    let config = EvalConfig::from_json_str(config).map_err(err)?;
    let mut models = std::collections::BTreeMap::new();
    for (name, data) in synthetic.iter() {
        let data = data.cast::<PyDataset>()?;
        models.insert(name.extract::<String>()?, data.get().inner.clone());
    }
    let report = py.detach(|| run_on_datasets(&config, &original.inner, &models)).map_err(err)?;
    let text = render_json(&report).map_err(err)?;
    py.import("json")?.call_method1("loads", (text,))
}

#[pymodule]
pub fn tabeval(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("TabevalError", m.py().get_type::<TabevalError>())?;
    m.add_class::<PyDataset>()?;
    m.add_function(wrap_pyfunction!(disco, m)?)?;
    m.add_function(wrap_pyfunction!(rep_u, m)?)?;
    m.add_function(wrap_pyfunction!(nndr, m)?)?;
    m.add_function(wrap_pyfunction!(dcr, m)?)?;
    m.add_function(wrap_pyfunction!(nnaa, m)?)?;
    m.add_function(wrap_pyfunction!(singling_out_risk, m)?)?;
    m.add_function(wrap_pyfunction!(linkability_risk, m)?)?;
    m.add_function(wrap_pyfunction!(inference_risk, m)?)?;
    m.add_function(wrap_pyfunction!(similarity, m)?)?;
    m.add_function(wrap_pyfunction!(sinkhorn_distance, m)?)?;
    m.add_function(wrap_pyfunction!(tstr, m)?)?;
    m.add_function(wrap_pyfunction!(generate, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate, m)?)?;
    Ok(())
}
