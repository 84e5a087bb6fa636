//! Python bindings for the greedy-opt library.

use greedy_opt::atoms::Oracle;
use greedy_opt::cli::{self, RunConfig};
use greedy_opt::recurrence;
use greedy_opt::verify::{Criterion, Report};
use greedy_opt::{bregman, duality_gap, Error, Objective, OracleMode, Point, ProblemId, ProblemInstance};
use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Io { .. } => PyIOError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn point(coords: Vec<f64>) -> PyResult<Point> {
    Point::new(coords).map_err(to_py)
}

/// A shipped problem instance, built from its command-line id.
#[pyclass(name = "Problem", frozen)]
struct PyProblem {
    inner: ProblemInstance,
}

impl PyProblem {
    fn checked(&self, w: Vec<f64>) -> PyResult<Point> {
        let p = point(w)?;
        if p.dim() != self.inner.atoms.dim() {
            return Err(to_py(Error::DimensionMismatch {
                expected: self.inner.atoms.dim(),
                actual: p.dim(),
            }));
        }
        Ok(p)
    }
}

#[pymethods]
impl PyProblem {
    #[new]
    fn new(id: &str) -> PyResult<Self> {
        let pid: ProblemId = id.parse().map_err(to_py)?;
        Ok(Self {
            inner: pid.build().map_err(to_py)?,
        })
    }

    #[getter]
    fn name(&self) -> String {
        self.inner.name.clone()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.atoms.dim()
    }

    #[getter]
    fn n_components(&self) -> usize {
        self.inner.fsum.components().len()
    }

    #[getter]
    fn is_ball(&self) -> bool {
        self.inner.atoms.is_ball()
    }

    #[getter]
    fn f_star(&self) -> Option<f64> {
        self.inner.f_star
    }

    #[getter]
    fn w_star(&self) -> Option<Vec<f64>> {
        self.inner.w_star.clone().map(Point::into_vec)
    }

    fn start(&self) -> Vec<f64> {
        self.inner.start().into_vec()
    }

    fn value(&self, w: Vec<f64>) -> PyResult<f64> {
        Ok(self.inner.fsum.value(&self.checked(w)?))
    }

    fn gradient(&self, w: Vec<f64>) -> PyResult<Vec<f64>> {
        Ok(self.inner.fsum.gradient(&self.checked(w)?).into_vec())
    }

    fn duality_gap(&self, w: Vec<f64>) -> PyResult<f64> {
        duality_gap(&self.inner.fsum, &self.checked(w)?, &self.inner.atoms).map_err(to_py)
    }

    fn bregman(&self, w: Vec<f64>, y: Vec<f64>) -> PyResult<f64> {
        bregman(&self.inner.fsum, &self.checked(w)?, &self.checked(y)?).map_err(to_py)
    }

    /// Exact linear minimization: returns the atom and its inner product with `g`.
    fn lmo(&self, g: Vec<f64>) -> PyResult<(Vec<f64>, f64)> {
        let (d, v) = self.inner.atoms.lmo(&self.checked(g)?).map_err(to_py)?;
        Ok((d.into_vec(), v))
    }

    /// Linear minimization with additive slack `eps`.
    #[pyo3(signature = (g, eps, mode = "exact", seed = 0))]
    fn approx_lmo(&self, g: Vec<f64>, eps: f64, mode: &str, seed: u64) -> PyResult<Vec<f64>> {
        let mode: OracleMode = mode.parse().map_err(to_py)?;
        let mut oracle = Oracle::for_mode(mode, seed);
        let d = self
            .inner
            .atoms
            .approx_lmo(&self.checked(g)?, eps, &mut oracle)
            .map_err(to_py)?;
        Ok(d.into_vec())
    }

    /// Smoothness, Lipschitz, diameter and curvature constants.
    fn constants(&self) -> Vec<(&'static str, f64)> {
        let c = self.inner.constants();
        vec![
            ("smoothness", c.smoothness),
            ("lipschitz", c.lipschitz),
            ("diameter", c.diameter),
            ("curvature", c.curvature),
            ("component_curvature", c.component_curvature),
        ]
    }

    fn __repr__(&self) -> String {
        format!("Problem({:?}, dim={})", self.inner.name, self.inner.atoms.dim())
    }
}

/// One replica's per-iteration records, stored by column.
#[pyclass(name = "Trace", frozen)]
struct PyTrace {
    inner: greedy_opt::Trace,
    #[pyo3(get)]
    seed: u64,
}

#[pymethods]
impl PyTrace {
    #[getter]
    fn algorithm(&self) -> String {
        self.inner.meta.algorithm.clone()
    }

    #[getter]
    fn problem(&self) -> String {
        self.inner.meta.problem.clone()
    }

    #[getter]
    fn k(&self) -> Vec<u64> {
        self.inner.records.iter().map(|r| r.k).collect()
    }

    #[getter]
    fn eta(&self) -> Vec<f64> {
        self.inner.records.iter().map(|r| r.eta).collect()
    }

    #[getter]
    fn eps(&self) -> Vec<f64> {
        self.inner.records.iter().map(|r| r.eps).collect()
    }

    #[getter]
    fn f_w(&self) -> Vec<f64> {
        self.inner.records.iter().map(|r| r.f_w).collect()
    }

    #[getter]
    fn f_avg(&self) -> Vec<Option<f64>> {
        self.inner.records.iter().map(|r| r.f_avg).collect()
    }

    #[getter]
    fn gap(&self) -> Vec<f64> {
        self.inner.records.iter().map(|r| r.gap).collect()
    }

    #[getter]
    fn err(&self) -> Vec<Option<f64>> {
        self.inner.records.iter().map(|r| r.err).collect()
    }

    #[getter]
    fn iterates(&self) -> Vec<Vec<f64>> {
        self.inner.iterates.iter().map(|p| p.coords().to_vec()).collect()
    }

    /// The rows this replica contributes to the CSV output.
    fn csv_rows(&self, replica: u64) -> String {
        cli::trace_rows(&self.inner, replica, self.seed)
    }

    fn __len__(&self) -> usize {
        self.inner.records.len()
    }

    fn __repr__(&self) -> String {
        format!(
            "Trace({}, {}, records={})",
            self.inner.meta.algorithm,
            self.inner.meta.problem,
            self.inner.records.len()
        )
    }
}

/// Outcome of one verification suite.
#[pyclass(name = "Report", frozen)]
struct PyReport {
    inner: Report,
}

#[pymethods]
impl PyReport {
    #[getter]
    fn criterion(&self) -> String {
        self.inner.criterion.name().to_string()
    }

    #[getter]
    fn passed(&self) -> bool {
        self.inner.passed()
    }

    /// `(label, measured, pass)` per check.
    #[getter]
    fn checks(&self) -> Vec<(String, f64, bool)> {
        self.inner
            .checks
            .iter()
            .map(|c| (c.label.clone(), c.measured, c.pass))
            .collect()
    }

    fn __str__(&self) -> String {
        self.inner.to_string()
    }
}

fn parse(text: &str) -> PyResult<RunConfig> {
    cli::parse_config(text).map_err(to_py)
}

/// Runs every replica of a config and returns the traces without writing CSV.
#[pyfunction]
fn run_config(py: Python<'_>, text: &str) -> PyResult<Vec<PyTrace>> {
    let config = parse(text)?;
    py.detach(|| {
        let inst = config.problem.build()?;
        (0..config.replicas)
            .map(|i| {
                let seed = config.seed.wrapping_add(i);
                cli::run_replica(&config, &inst, seed).map(|inner| PyTrace { inner, seed })
            })
            .collect::<greedy_opt::Result<Vec<_>>>()
    })
    .map_err(to_py)
}

/// Runs a config, writes its CSV and returns `(replica, seed, f_w, gap, err)` rows.
#[pyfunction]
fn execute_config(
    py: Python<'_>,
    text: &str,
) -> PyResult<Vec<(u64, u64, f64, f64, Option<f64>)>> {
    let config = parse(text)?;
    let summary = py.detach(|| cli::execute(&config)).map_err(to_py)?;
    Ok(summary
        .replicas
        .iter()
        .map(|r| (r.replica, r.seed, r.f_w, r.gap, r.err))
        .collect())
}

/// Runs one verification suite with optional parameter overrides.
#[pyfunction]
#[pyo3(signature = (criterion, params = None))]
fn verify(py: Python<'_>, criterion: &str, params: Option<Vec<(String, f64)>>) -> PyResult<PyReport> {
    let c: Criterion = criterion.parse().map_err(to_py)?;
    let overrides = params.unwrap_or_default();
    let inner = py.detach(|| c.run(&overrides)).map_err(to_py)?;
    Ok(PyReport { inner })
}

#[pyfunction]
fn criteria() -> Vec<&'static str> {
    Criterion::ALL.iter().map(|c| c.name()).collect()
}

#[pyfunction]
fn list_problems() -> Vec<(&'static str, &'static str)> {
    greedy_opt::problems::describe_problems()
}

#[pyfunction]
fn greedy_eta(e: f64, c: f64) -> f64 {
    recurrence::greedy_eta(e, c)
}

/// Error sequence of the greedy recurrence, `steps + 1` values.
#[pyfunction]
fn simulate_greedy(e0: f64, c: f64, steps: u64) -> PyResult<Vec<f64>> {
    recurrence::simulate_greedy(e0, c, steps).map_err(to_py)
}

/// Error sequence of the recurrence under `eta_k = 2/(k+2)`.
#[pyfunction]
fn simulate_standard(e0: f64, c: f64, steps: u64) -> PyResult<Vec<f64>> {
    recurrence::simulate(e0, c, |k| 2.0 / (k as f64 + 2.0), steps).map_err(to_py)
}

#[pyfunction]
fn compute_k(rho: f64, p: f64, lam: f64, r2: f64, c: f64, lipschitz: f64) -> PyResult<f64> {
    recurrence::compute_k(rho, p, lam, r2, c, lipschitz).map_err(to_py)
}

#[pymodule]
fn greedy_opt_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyProblem>()?;
    m.add_class::<PyTrace>()?;
    m.add_class::<PyReport>()?;
    m.add_function(wrap_pyfunction!(run_config, m)?)?;
    m.add_function(wrap_pyfunction!(execute_config, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add_function(wrap_pyfunction!(criteria, m)?)?;
    m.add_function(wrap_pyfunction!(list_problems, m)?)?;
    m.add_function(wrap_pyfunction!(greedy_eta, m)?)?;
    m.add_function(wrap_pyfunction!(simulate_greedy, m)?)?;
    m.add_function(wrap_pyfunction!(simulate_standard, m)?)?;
    m.add_function(wrap_pyfunction!(compute_k, m)?)?;
    Ok(())
}
