//! Python module `gridlambda`.
//!
//! Cell values come back as `None`, `float`, `str`, `bool` or [`CellError`];
//! arrays come back as lists of rows.

use std::cell::RefCell;
use std::path::Path;

use num_complex::Complex64;
use pyo3::exceptions::{PyKeyError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};

use gridlambda_core::cases::{load_corpus, run_case, target_values};
use gridlambda_core::engine::parse_workbook;
use gridlambda_core::numerics::{self, ControlProfile, Direction, Rk4Config};
use gridlambda_core::{eval_standalone, Array, ErrorKind, Scalar, Value, XlError};

/// A spreadsheet error value such as `#DIV/0!`.
#[pyclass(frozen, eq, skip_from_py_object, module = "gridlambda")]
#[derive(Clone, PartialEq)]
struct CellError {
    #[pyo3(get)]
    kind: String,
    #[pyo3(get)]
    detail: Option<String>,
}

#[pymethods]
impl CellError {
    fn __repr__(&self) -> String {
        match &self.detail {
            Some(d) => format!("CellError({}, {d:?})", self.kind),
            None => format!("CellError({})", self.kind),
        }
    }

    fn __str__(&self) -> String {
        self.kind.clone()
    }
}

impl From<&XlError> for CellError {
    fn from(e: &XlError) -> Self {
        CellError {
            kind: e.kind.as_str().to_string(),
            detail: e.detail.as_deref().map(str::to_string),
        }
    }
}

fn scalar_to_py(py: Python<'_>, s: &Scalar) -> PyResult<Py<PyAny>> {
    Ok(match s {
        Scalar::Empty => py.None(),
        Scalar::Number(n) | Scalar::Date(n) => n.into_pyobject(py)?.into_any().unbind(),
        Scalar::Text(t) => t.as_ref().into_pyobject(py)?.into_any().unbind(),
        Scalar::Bool(b) => b.into_pyobject(py)?.to_owned().into_any().unbind(),
        Scalar::Error(e) => Py::new(py, CellError::from(e))?.into_any(),
    })
}

fn array_to_py(py: Python<'_>, a: &Array) -> PyResult<Py<PyAny>> {
    let rows = PyList::empty(py);
    for r in 0..a.rows() {
        let row = PyList::empty(py);
        for c in 0..a.cols() {
            row.append(scalar_to_py(py, a.get(r, c))?)?;
        }
        rows.append(row)?;
    }
    Ok(rows.into_any().unbind())
}

fn value_to_py(py: Python<'_>, v: &Value) -> PyResult<Py<PyAny>> {
    match v {
        Value::Scalar(s) => scalar_to_py(py, s),
        Value::Array(a) => array_to_py(py, a),
        Value::Lambda(_) => scalar_to_py(py, &Scalar::error(ErrorKind::Calc)),
        Value::Ref(_) | Value::Omitted => scalar_to_py(py, &Scalar::error(ErrorKind::Value)),
    }
}

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// A workbook of sheets, cells and defined names.
#[pyclass(unsendable, module = "gridlambda")]
struct Workbook {
    inner: gridlambda_core::Workbook,
}

#[pymethods]
impl Workbook {
    #[new]
    fn new() -> Self {
        Workbook {
            inner: gridlambda_core::Workbook::new(),
        }
    }

    /// Parses workbook text (`A1 := input`, `name X := =formula`, `sheet S`).
    #[staticmethod]
    fn from_text(text: &str) -> PyResult<Self> {
        let inner = parse_workbook(text)
            .map_err(|e| PyValueError::new_err(format!("line {}: {}", e.line, e.message)))?;
        Ok(Workbook { inner })
    }

    #[staticmethod]
    fn open(path: &str) -> PyResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| PyRuntimeError::new_err(format!("{path}: {e}")))?;
        Self::from_text(&text)
    }

    fn add_sheet(&mut self, name: &str) {
        self.inner.add_sheet(name);
    }

    fn sheet_names(&self) -> Vec<String> {
        self.inner.sheet_names().iter().map(|s| s.to_string()).collect()
    }

    /// Sets a cell from typed input and returns the addresses now stale.
    fn set(&mut self, address: &str, input: &str) -> PyResult<Vec<String>> {
        let addr = self.inner.address(address).map_err(value_err)?;
        let dirty = self.inner.set_input(addr, input).map_err(value_err)?;
        Ok(dirty.iter().map(|a| self.inner.qualified(*a)).collect())
    }

    fn define_name(&mut self, name: &str, formula: &str) -> PyResult<()> {
        self.inner.define_name(name, formula).map_err(value_err)
    }

    /// Recalculates and returns a summary dict.
    fn recalculate<'py>(&mut self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let report = self.inner.recalculate();
        let d = PyDict::new(py);
        d.set_item("evaluated", report.evaluated)?;
        d.set_item("passes", report.passes)?;
        let spills: Vec<String> = report.spills.iter().map(|s| self.inner.qualified(s.anchor)).collect();
        d.set_item("spills", spills)?;
        let errors: Vec<(String, String)> = report
            .errors
            .iter()
            .map(|(a, e)| (self.inner.qualified(*a), e.kind.as_str().to_string()))
            .collect();
        d.set_item("errors", errors)?;
        Ok(d)
    }

    /// Displayed value of one cell.
    fn value(&self, py: Python<'_>, address: &str) -> PyResult<Py<PyAny>> {
        let addr = self.inner.address(address).map_err(value_err)?;
        scalar_to_py(py, &self.inner.value(addr))
    }

    /// Rows of values for a range, spill reference or name.
    fn values(&mut self, py: Python<'_>, target: &str) -> PyResult<Py<PyAny>> {
        array_to_py(py, &target_values(&mut self.inner, target))
    }

    /// Evaluates a formula against the workbook without storing it.
    fn evaluate(&mut self, py: Python<'_>, formula: &str) -> PyResult<Py<PyAny>> {
        self.inner.recalculate();
        let v = self.inner.evaluate_formula(formula).map_err(value_err)?;
        value_to_py(py, &v)
    }

    /// The spilled range anchored at `address`, if placed.
    fn spill_region(&self, address: &str) -> PyResult<Option<String>> {
        let addr = self.inner.address(address).map_err(value_err)?;
        Ok(self.inner.spill_region(addr).map(|r| r.reference().a1()))
    }

    fn to_text(&self) -> String {
        self.inner.to_text()
    }

    #[getter]
    fn get_trace(&self) -> bool {
        self.inner.config.trace
    }

    #[setter]
    fn set_trace(&mut self, on: bool) {
        self.inner.config.trace = on;
    }

    #[getter]
    fn get_max_recursion(&self) -> usize {
        self.inner.config.max_recursion
    }

    #[setter]
    fn set_max_recursion(&mut self, depth: usize) {
        self.inner.config.max_recursion = depth;
    }

    /// Evaluations recorded for `name` in `scope` (`Sheet1!A1`, `name`, `repl`).
    fn trace_count(&self, scope: &str, name: &str) -> u64 {
        self.inner.trace().count(scope, name)
    }

    /// Drains pending `EVAL scope:name #n` lines.
    fn take_trace_lines(&mut self) -> Vec<String> {
        self.inner.trace_mut().take_lines()
    }
}

/// Evaluates a formula that touches no cells.
#[pyfunction]
fn evaluate(py: Python<'_>, formula: &str) -> PyResult<Py<PyAny>> {
    let v = eval_standalone(formula).map_err(value_err)?;
    value_to_py(py, &v)
}

#[pyfunction]
#[pyo3(signature = (x, inverse=false))]
fn fft(x: Vec<Complex64>, inverse: bool) -> PyResult<Vec<Complex64>> {
    let dir = if inverse { Direction::Inverse } else { Direction::Forward };
    numerics::fft(&x, dir).map_err(value_err)
}

#[pyfunction]
#[pyo3(signature = (a, b, method="fft"))]
fn convolve(a: Vec<f64>, b: Vec<f64>, method: &str) -> PyResult<Vec<f64>> {
    if a.is_empty() || b.is_empty() {
        return Err(PyValueError::new_err("convolve needs two non-empty sequences"));
    }
    match method {
        "fft" => Ok(numerics::convolve_fft(&a, &b)),
        "direct" => Ok(numerics::convolve_direct(&a, &b)),
        other => Err(PyValueError::new_err(format!("unknown method {other:?}"))),
    }
}

/// RK4 trajectory of `deriv(x, t) -> list[float]`, `steps + 1` rows.
#[pyfunction]
fn rk4(deriv: Bound<'_, PyAny>, x0: Vec<f64>, t0: f64, dt: f64, steps: usize) -> PyResult<Vec<Vec<f64>>> {
    let failure: RefCell<Option<PyErr>> = RefCell::new(None);
    let n = x0.len();
    let result = numerics::rk4_integrate(&x0, t0, &Rk4Config { dt, steps }, |x, t| {
        if failure.borrow().is_some() {
            return vec![f64::NAN; n];
        }
        match deriv.call1((x.to_vec(), t)).and_then(|r| r.extract::<Vec<f64>>()) {
            Ok(d) if d.len() == n => d,
            Ok(d) => {
                *failure.borrow_mut() = Some(PyValueError::new_err(format!("derivative has {} entries, expected {n}", d.len())));
                vec![f64::NAN; n]
            }
            Err(e) => {
                *failure.borrow_mut() = Some(e);
                vec![f64::NAN; n]
            }
        }
    });
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    result.map_err(value_err)
}

/// Golden-section minimum of `f` on `[lo, hi]` as `(x, f(x))`.
#[pyfunction]
#[pyo3(signature = (f, lo, hi, tol=1e-8))]
fn minimize(f: Bound<'_, PyAny>, lo: f64, hi: f64, tol: f64) -> PyResult<(f64, f64)> {
    let mut failure = None;
    let result = numerics::minimize_scalar(
        |x| match f.call1((x,)).and_then(|r| r.extract::<f64>()) {
            Ok(y) => y,
            Err(e) => {
                failure.get_or_insert(e);
                f64::NAN
            }
        },
        lo,
        hi,
        tol,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    result.map_err(value_err)
}

/// Residual swing energy after the four-segment crane move.
#[pyfunction]
#[pyo3(signature = (fraction, dt=0.005, epsilon=0.1))]
fn crane_residual_energy(fraction: f64, dt: f64, epsilon: f64) -> PyResult<f64> {
    let p = ControlProfile {
        epsilon,
        ..ControlProfile::with_fraction(fraction)
    };
    numerics::residual_energy(&p, dt).map_err(value_err)
}

/// Mid-segment fraction that cancels residual swing exactly.
#[pyfunction]
fn crane_optimal_fraction() -> f64 {
    numerics::optimal_fraction_closed_form()
}

/// Runs a golden corpus directory: `(case, cells_checked, mismatches)` rows.
#[pyfunction]
fn run_corpus(dir: &str) -> PyResult<Vec<(String, usize, usize)>> {
    let cases = load_corpus(Path::new(dir)).map_err(|e| PyKeyError::new_err(e.to_string()))?;
    Ok(cases
        .iter()
        .map(|c| {
            let r = run_case(c);
            (r.name, r.cells_checked, r.mismatches.len())
        })
        .collect())
}

#[pymodule]
fn gridlambda(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Workbook>()?;
    m.add_class::<CellError>()?;
    m.add_function(wrap_pyfunction!(evaluate, m)?)?;
    m.add_function(wrap_pyfunction!(fft, m)?)?;
    m.add_function(wrap_pyfunction!(convolve, m)?)?;
    m.add_function(wrap_pyfunction!(rk4, m)?)?;
    m.add_function(wrap_pyfunction!(minimize, m)?)?;
    m.add_function(wrap_pyfunction!(crane_residual_energy, m)?)?;
    m.add_function(wrap_pyfunction!(crane_optimal_fraction, m)?)?;
    m.add_function(wrap_pyfunction!(run_corpus, m)?)?;
    Ok(())
}
