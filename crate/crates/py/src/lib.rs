//! Python bindings. Rationals cross the boundary as `"p/q"` strings and reports
//! as plain dicts parsed from their JSON form.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use bicarleson::bigrid::{DyadicRect, Geometry};
use bicarleson::cli::{build_instance, Example, InstanceArgs};
use bicarleson::constructions::Instance as CoreInstance;
use bicarleson::error::Error;
use bicarleson::functionals::{self as f, ConstantReport};
use bicarleson::io;
use bicarleson::maximal;
use bicarleson::measure::{Atom, BoundarySet, Measure as CoreMeasure};
use bicarleson::rational::{format_rational, parse_rational};
use bicarleson::verify::{self, Fits};
use bicarleson::weight::Weight as CoreWeight;

fn py_err(e: Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn json_to_py(py: Python<'_>, text: &str) -> PyResult<Py<PyAny>> {
    Ok(py.import("json")?.call_method1("loads", (text,))?.unbind())
}

fn report_to_py(py: Python<'_>, r: &ConstantReport) -> PyResult<Py<PyAny>> {
    let text = serde_json::to_string(r).map_err(|e| PyValueError::new_err(e.to_string()))?;
    json_to_py(py, &text)
}

fn parse_rect(s: &str) -> PyResult<DyadicRect> {
    s.parse().map_err(py_err)
}

/// A dyadic rectangle `x:level/index,y:level/index`.
#[pyclass(name = "Rect", module = "bicarleson_py", frozen, eq, ord, hash, skip_from_py_object)]
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
struct Rect(DyadicRect);

#[pymethods]
impl Rect {
    #[new]
    fn new(text: &str) -> PyResult<Self> {
        parse_rect(text).map(Rect)
    }

    #[staticmethod]
    fn hooked(x_level: u32, y_level: u32) -> Self {
        Rect(DyadicRect::hooked(x_level, y_level))
    }

    #[staticmethod]
    fn root() -> Self {
        Rect(DyadicRect::root())
    }

    fn levels(&self) -> (u32, u32) {
        self.0.levels()
    }

    fn area(&self) -> String {
        format_rational(&self.0.area())
    }

    fn contains(&self, other: &Rect) -> bool {
        self.0.contains(&other.0)
    }

    fn __str__(&self) -> String {
        self.0.to_string()
    }

    fn __repr__(&self) -> String {
        format!("Rect('{}')", self.0)
    }
}

/// A finite sum of uniform atoms on a geometry of fixed depth.
#[pyclass(name = "Measure", module = "bicarleson_py", frozen, skip_from_py_object)]
#[derive(Clone)]
struct Measure(CoreMeasure);

#[pymethods]
impl Measure {
    /// `atoms`: list of `(rect, "p/q")`.
    #[new]
    fn new(depth: u32, atoms: Vec<(String, String)>) -> PyResult<Self> {
        let atoms = atoms
            .into_iter()
            .map(|(r, m)| Ok(Atom::new(parse_rect(&r)?, parse_rational(&m).map_err(py_err)?)))
            .collect::<PyResult<Vec<_>>>()?;
        CoreMeasure::new(Geometry::new(depth), atoms).map(Measure).map_err(py_err)
    }

    #[staticmethod]
    #[pyo3(signature = (text, depth=None))]
    fn from_json(text: &str, depth: Option<u32>) -> PyResult<Self> {
        io::measure_from_json(text, depth.map(Geometry::new)).map(Measure).map_err(py_err)
    }

    fn to_json(&self) -> PyResult<String> {
        io::measure_to_json(&self.0).map_err(py_err)
    }

    #[getter]
    fn depth(&self) -> u32 {
        self.0.geometry().depth
    }

    fn mass(&self, rect: &str) -> PyResult<String> {
        Ok(format_rational(&self.0.mass(&parse_rect(rect)?)))
    }

    fn total(&self) -> String {
        format_rational(&self.0.total())
    }

    fn __len__(&self) -> usize {
        self.0.atoms().len()
    }
}

/// A finitely supported nonnegative weight on rectangles.
#[pyclass(name = "Weight", module = "bicarleson_py", frozen, skip_from_py_object)]
#[derive(Clone)]
struct Weight(CoreWeight);

#[pymethods]
impl Weight {
    /// `entries`: list of `(rect, "p/q")`.
    #[new]
    fn new(entries: Vec<(String, String)>) -> PyResult<Self> {
        let entries = entries
            .into_iter()
            .map(|(r, v)| Ok((parse_rect(&r)?, parse_rational(&v).map_err(py_err)?)))
            .collect::<PyResult<Vec<_>>>()?;
        CoreWeight::from_entries(entries).map(Weight).map_err(py_err)
    }

    /// Indicator of the up-set generated by `generators`.
    #[staticmethod]
    fn upset(generators: Vec<String>, depth: u32) -> PyResult<Self> {
        let gens = generators.iter().map(|s| parse_rect(s)).collect::<PyResult<Vec<_>>>()?;
        CoreWeight::from_upset_generators(&gens, &Geometry::new(depth)).map(Weight).map_err(py_err)
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        io::weight_from_json(text).map(Weight).map_err(py_err)
    }

    fn to_json(&self) -> PyResult<String> {
        io::weight_to_json(&self.0).map_err(py_err)
    }

    fn value(&self, rect: &str) -> PyResult<String> {
        Ok(format_rational(&self.0.value(&parse_rect(rect)?)))
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }
}

/// A constructed example.
#[pyclass(name = "Instance", module = "bicarleson_py", frozen, skip_from_py_object)]
struct Instance(CoreInstance);

#[pymethods]
impl Instance {
    #[getter]
    fn mu(&self) -> Measure {
        Measure(self.0.mu.clone())
    }

    /// The measure the constants are evaluated against.
    #[getter]
    fn test_measure(&self) -> Measure {
        Measure(self.0.test_measure().clone())
    }

    #[getter]
    fn alpha(&self) -> Weight {
        Weight(self.0.alpha.clone())
    }

    #[getter]
    fn depth(&self) -> u32 {
        self.0.geometry.depth
    }

    fn set(&self, name: &str) -> Option<Vec<String>> {
        self.0.set(name).map(|s| s.members().iter().map(|r| r.to_string()).collect())
    }

    fn set_names(&self) -> Vec<String> {
        self.0.sets.keys().cloned().collect()
    }
}

fn example_of(name: &str) -> PyResult<Example> {
    Ok(match name {
        "simple" => Example::Simple,
        "potential" => Example::Potential,
        "rec" => Example::Rec,
        "embedding" => Example::Embedding,
        "family" => Example::Family,
        "dor" => Example::Dor,
        other => return Err(PyValueError::new_err(format!("unknown example {other:?}"))),
    })
}

/// Builds `simple`, `potential`, `rec`, or `embedding`.
#[pyfunction]
#[pyo3(signature = (example, n, delta=None, k=None))]
fn construct(example: &str, n: u64, delta: Option<String>, k: Option<u32>) -> PyResult<Instance> {
    let args = InstanceArgs { n: Some(n), delta, k, ..InstanceArgs::default() };
    build_instance(example_of(example)?, &args).map(Instance).map_err(py_err)
}

/// Runs an example's battery and returns the report dict.
#[pyfunction]
#[pyo3(signature = (example, n, delta=None, k=None, seed=0))]
fn verify_example(py: Python<'_>, example: &str, n: u64, delta: Option<String>, k: Option<u32>, seed: u64) -> PyResult<Py<PyAny>> {
    let delta = delta.as_deref().map(parse_rational).transpose().map_err(py_err)?;
    let fits = Fits::default();
    let report = py
        .detach(|| match example_of(example)? {
            Example::Simple => verify::verify_simple(n).map_err(py_err),
            Example::Potential => verify::verify_potential(n, delta, seed, &fits).map_err(py_err),
            Example::Rec => verify::verify_rec(n, delta, &fits).map_err(py_err),
            Example::Embedding => verify::verify_embedding(n, delta, k.unwrap_or(1), seed, &fits).map_err(py_err),
            Example::Dor => verify::verify_dor(n as u32, seed, verify::DOR_INSTANCES).map_err(py_err),
            Example::Family => Err(PyValueError::new_err("family needs a rectangle list; use the CLI")),
        })?;
    json_to_py(py, &report.to_json())
}

#[pyfunction]
#[pyo3(signature = (alpha, mu, nu=None))]
fn energy(alpha: &Weight, mu: &Measure, nu: Option<&Measure>) -> String {
    format_rational(&f::energy(&alpha.0, &mu.0, nu.map_or(&mu.0, |n| &n.0)))
}

#[pyfunction]
fn potential(alpha: &Weight, mu: &Measure, rect: &str) -> PyResult<String> {
    Ok(format_rational(&f::potential(&alpha.0, &mu.0, &parse_rect(rect)?)))
}

#[pyfunction]
fn box_constant(py: Python<'_>, alpha: &Weight, mu: &Measure) -> PyResult<Py<PyAny>> {
    report_to_py(py, &f::box_constant(&alpha.0, &mu.0))
}

#[pyfunction]
fn carleson_constant(py: Python<'_>, alpha: &Weight, mu: &Measure) -> PyResult<Py<PyAny>> {
    let r = py.detach(|| f::carleson_constant(&alpha.0, &mu.0)).map_err(py_err)?;
    report_to_py(py, &r)
}

#[pyfunction]
fn rec_constant(py: Python<'_>, alpha: &Weight, mu: &Measure) -> PyResult<Py<PyAny>> {
    let r = py.detach(|| f::rec_constant(&alpha.0, &mu.0)).map_err(py_err)?;
    report_to_py(py, &r)
}

#[pyfunction]
#[pyo3(signature = (alpha, mu, tol=1e-9))]
fn embedding_constant(py: Python<'_>, alpha: &Weight, mu: &Measure, tol: f64) -> PyResult<Py<PyAny>> {
    let r = py.detach(|| f::embedding_constant(&alpha.0, &mu.0, tol)).map_err(py_err)?;
    report_to_py(py, &r)
}

/// `rec_energy(α, μ, E)` for `E` a list of rectangles.
#[pyfunction]
fn rec_energy(alpha: &Weight, mu: &Measure, set: Vec<String>) -> PyResult<String> {
    let e = BoundarySet::from_rects(set.iter().map(|s| parse_rect(s)).collect::<PyResult<Vec<_>>>()?);
    Ok(format_rational(&f::rec_energy(&alpha.0, &mu.0, &e)))
}

/// `ℳ_μ ψ` on cells, for `ψ` given as `[{rect, value}]` JSON.
#[pyfunction]
fn maximal_function(py: Python<'_>, mu: &Measure, function: &str) -> PyResult<Py<PyAny>> {
    let psi = io::step_function_from_json(function).map_err(py_err)?;
    let m = maximal::maximal_function(&mu.0, &psi, &mu.0.geometry()).map_err(py_err)?;
    json_to_py(py, &serde_json::to_string(&m).map_err(|e| PyValueError::new_err(e.to_string()))?)
}

/// `α_Q = μ(A'_Q)/μ(Q)²` from the argmax decomposition of `ψ`.
#[pyfunction]
fn weight_from_function(mu: &Measure, function: &str) -> PyResult<Weight> {
    let psi = io::step_function_from_json(function).map_err(py_err)?;
    maximal::weight_from_function(&mu.0, &psi, &mu.0.geometry()).map(Weight).map_err(py_err)
}

/// Selection certificate dict: `feasible` plus flows or the violating rectangles.
#[pyfunction]
fn sparse_selection(py: Python<'_>, alpha: &Weight, mu: &Measure) -> PyResult<Py<PyAny>> {
    let s = py.detach(|| maximal::sparse_selection(&alpha.0, &mu.0)).map_err(py_err)?;
    json_to_py(py, &serde_json::to_string(&s).map_err(|e| PyValueError::new_err(e.to_string()))?)
}

#[pymodule]
fn bicarleson_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Rect>()?;
    m.add_class::<Measure>()?;
    m.add_class::<Weight>()?;
    m.add_class::<Instance>()?;
    m.add_function(wrap_pyfunction!(construct, m)?)?;
    m.add_function(wrap_pyfunction!(verify_example, m)?)?;
    m.add_function(wrap_pyfunction!(energy, m)?)?;
    m.add_function(wrap_pyfunction!(potential, m)?)?;
    m.add_function(wrap_pyfunction!(box_constant, m)?)?;
    m.add_function(wrap_pyfunction!(carleson_constant, m)?)?;
    m.add_function(wrap_pyfunction!(rec_constant, m)?)?;
    m.add_function(wrap_pyfunction!(embedding_constant, m)?)?;
    m.add_function(wrap_pyfunction!(rec_energy, m)?)?;
    m.add_function(wrap_pyfunction!(maximal_function, m)?)?;
    m.add_function(wrap_pyfunction!(weight_from_function, m)?)?;
    m.add_function(wrap_pyfunction!(sparse_selection, m)?)?;
    Ok(())
}
