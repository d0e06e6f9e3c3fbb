//! Python bindings. Structured reports come back as plain dicts and lists.

use agl_core::certifier::{certify as certify_impl, CertifyOptions};
use agl_core::engine::{agl_report, required_epsilon as required_epsilon_impl};
use agl_core::lab::{search_psi as search_impl, SearchOptions};
use agl_core::svg::{render_svg as render_impl, Scene};
use agl_core::{bounds, AglError, Complex, Tolerances};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use serde::Serialize;

fn err(e: AglError) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_python<'py, T: Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyValueError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

#[pyclass(name = "RationalFunction", module = "agl", frozen)]
struct PyRational {
    inner: agl_core::RationalFunction,
}

#[pymethods]
impl PyRational {
    #[new]
    #[pyo3(signature = (zeros, poles = Vec::new(), scale = Complex::new(1.0, 0.0)))]
    fn new(zeros: Vec<Complex>, poles: Vec<Complex>, scale: Complex) -> Self {
        let cluster = Tolerances::default().cluster_tol;
        Self {
            inner: agl_core::RationalFunction::new(zeros, poles, scale, cluster),
        }
    }

    #[getter]
    fn zeros(&self) -> Vec<Complex> {
        self.inner.zeros.clone()
    }

    #[getter]
    fn poles(&self) -> Vec<Complex> {
        self.inner.poles.clone()
    }

    #[getter]
    fn scale(&self) -> Complex {
        self.inner.scale
    }

    fn __call__(&self, z: Complex) -> Complex {
        self.inner.eval(z)
    }

    fn log_derivative_at(&self, z: Complex) -> Complex {
        self.inner.log_derivative_at(z)
    }

    fn critical_points(&self) -> PyResult<Vec<Complex>> {
        Ok(self.inner.critical_points().map_err(err)?.points)
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string(&self.inner).map_err(|e| PyValueError::new_err(e.to_string()))
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let inner = serde_json::from_str(text).map_err(|e| PyValueError::new_err(e.to_string()))?;
        Ok(Self { inner })
    }

    fn __repr__(&self) -> String {
        format!("RationalFunction(zeros={}, poles={})", self.inner.zeros.len(), self.inner.poles.len())
    }
}

#[pyclass(name = "ConvexRegion", module = "agl", frozen)]
struct PyRegion {
    inner: agl_core::ConvexRegion,
}

#[pymethods]
impl PyRegion {
    #[staticmethod]
    fn disk(center: Complex, radius: f64) -> PyResult<Self> {
        Ok(Self {
            inner: agl_core::ConvexRegion::disk(center, radius).map_err(err)?,
        })
    }

    #[staticmethod]
    fn unit_disk() -> Self {
        Self {
            inner: agl_core::ConvexRegion::unit_disk(),
        }
    }

    #[staticmethod]
    fn segment(a: Complex, b: Complex) -> Self {
        Self {
            inner: agl_core::ConvexRegion::segment(a, b),
        }
    }

    #[staticmethod]
    fn polygon(vertices: Vec<Complex>) -> PyResult<Self> {
        Ok(Self {
            inner: agl_core::ConvexRegion::polygon(vertices).map_err(err)?,
        })
    }

    fn dist(&self, z: Complex) -> f64 {
        self.inner.dist(z)
    }

    fn diameter(&self) -> f64 {
        self.inner.diameter()
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string(&self.inner).map_err(|e| PyValueError::new_err(e.to_string()))
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let inner = serde_json::from_str(text).map_err(|e| PyValueError::new_err(e.to_string()))?;
        Ok(Self { inner })
    }

    fn __repr__(&self) -> String {
        format!("ConvexRegion({})", self.to_json().unwrap_or_default())
    }
}

/// Counts, verdict and required ε for `f` against `K_eps`.
#[pyfunction]
fn check<'py>(py: Python<'py>, f: &PyRational, region: &PyRegion, eps: f64, k: usize) -> PyResult<Bound<'py, PyAny>> {
    let report = agl_report(&f.inner, &region.inner, eps, k, &Tolerances::default()).map_err(err)?;
    to_python(py, &report)
}

#[pyfunction]
fn required_epsilon(f: &PyRational, region: &PyRegion, k: usize) -> PyResult<f64> {
    required_epsilon_impl(&f.inner, &region.inner, k, &Tolerances::default()).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (f, region, eps, k, seed = 0))]
fn certify<'py>(py: Python<'py>, f: &PyRational, region: &PyRegion, eps: f64, k: usize, seed: u64) -> PyResult<Bound<'py, PyAny>> {
    let opts = CertifyOptions { seed, ..CertifyOptions::default() };
    let cert = certify_impl(&f.inner, &region.inner, eps, k, &opts, &Tolerances::default()).map_err(err)?;
    to_python(py, &cert)
}

/// Extremal search; the GIL is released while it runs.
#[pyfunction]
#[pyo3(signature = (n, k, region = None, restarts = 50, iters = 500, seed = 0))]
fn search_psi<'py>(
    py: Python<'py>,
    n: usize,
    k: usize,
    region: Option<&PyRegion>,
    restarts: usize,
    iters: usize,
    seed: u64,
) -> PyResult<Bound<'py, PyAny>> {
    let region = region.map_or_else(agl_core::ConvexRegion::unit_disk, |r| r.inner.clone());
    let opts = SearchOptions { restarts, iters, seed };
    let result = py.detach(|| search_impl(n, k, &region, &opts)).map_err(err)?;
    to_python(py, &result)
}

#[pyfunction]
fn bound_report<'py>(py: Python<'py>, n: u64, k: u64, s: f64) -> PyResult<Bound<'py, PyAny>> {
    to_python(py, &bounds::BoundReport::new(n, k, s).map_err(err)?)
}

#[pyfunction]
#[pyo3(signature = (region, eps = 0.0, f = None))]
fn render_svg(region: &PyRegion, eps: f64, f: Option<&PyRational>) -> PyResult<String> {
    let mut scene = Scene::new(region.inner.clone(), eps);
    if let Some(f) = f {
        scene.zeros = f.inner.zeros.clone();
        scene.poles = f.inner.poles.clone();
        scene.critical = f.inner.critical_points().map_err(err)?.points;
    }
    Ok(render_impl(&scene))
}

#[pymodule]
fn agl(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyRational>()?;
    m.add_class::<PyRegion>()?;
    m.add_function(wrap_pyfunction!(check, m)?)?;
    m.add_function(wrap_pyfunction!(required_epsilon, m)?)?;
    m.add_function(wrap_pyfunction!(certify, m)?)?;
    m.add_function(wrap_pyfunction!(search_psi, m)?)?;
    m.add_function(wrap_pyfunction!(bound_report, m)?)?;
    m.add_function(wrap_pyfunction!(render_svg, m)?)?;
    Ok(())
}
