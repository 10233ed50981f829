//! Python bindings. Structured results cross the boundary as plain dicts
//! built from the same JSON the CLI writes.

use std::sync::Arc;

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyModule;
use serde::Serialize;

use qfisher::fisher::{self, LimitPolicy, ProjectorSetFile};
use qfisher::fock::{self, FockBasis};
use qfisher::interferometer::{InterferometerModel, ModelDescription, PhaseEncoding};
use qfisher::linalg::{self as la, ComplexMatrix, C64};
use qfisher::optimal::{self, Construction};
use qfisher::saturation;
use qfisher::scan::{self, ScanConfig};
use qfisher::{Error, Tolerances};

fn err(e: Error) -> PyErr {
    match e {
        Error::InvalidConfig(_) | Error::BasisMismatch | Error::MixInfeasible { .. } => {
            PyValueError::new_err(e.to_string())
        }
        other => PyRuntimeError::new_err(other.to_string()),
    }
}

fn to_py<'py, T: Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

fn occupations(basis: &FockBasis) -> Vec<Vec<u32>> {
    basis.states().iter().map(|s| s.counts().to_vec()).collect()
}

/// A linear-optical phase-estimation model.
#[pyclass(name = "Model", module = "qfisher_py", frozen)]
struct PyModel {
    inner: InterferometerModel,
}

#[pymethods]
impl PyModel {
    /// Built-in model by name (`mzi3`, `mzi4`).
    #[staticmethod]
    fn builtin(name: &str) -> PyResult<Self> {
        InterferometerModel::builtin(name)
            .map(|inner| Self { inner })
            .ok_or_else(|| PyValueError::new_err(format!("unknown model `{name}`")))
    }

    /// Model from the JSON description format used by the CLI.
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let inner = ModelDescription::from_json(text).and_then(|d| d.build()).map_err(err)?;
        Ok(Self { inner })
    }

    #[getter]
    fn modes(&self) -> usize {
        self.inner.modes()
    }

    #[getter]
    fn num_params(&self) -> usize {
        self.inner.num_params()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.basis().dim()
    }

    fn basis(&self) -> Vec<Vec<u32>> {
        occupations(self.inner.basis())
    }

    fn output_state(&self, theta: Vec<f64>) -> PyResult<Vec<C64>> {
        Ok(self.inner.output_state(&theta).map_err(err)?.amplitudes().to_vec())
    }

    fn qfim(&self, theta: Vec<f64>) -> PyResult<Vec<Vec<f64>>> {
        let bundle = self.inner.derivative_states(&theta).map_err(err)?;
        Ok(fisher::qfim(&bundle).to_rows())
    }

    /// FIM, QFIM and gap. Photon counting unless `projectors` is given.
    #[pyo3(signature = (theta, projectors=None))]
    fn fisher_pair<'py>(
        &self,
        py: Python<'py>,
        theta: Vec<f64>,
        projectors: Option<PyRef<'py, PyProjectorSet>>,
    ) -> PyResult<Bound<'py, PyAny>> {
        let set = self.projectors_or_fock(projectors.as_deref());
        let pair = fisher::fisher_pair(&self.inner, &theta, &set, &LimitPolicy::default()).map_err(err)?;
        to_py(py, &pair)
    }

    #[pyo3(signature = (theta, projectors=None))]
    fn check_saturation<'py>(
        &self,
        py: Python<'py>,
        theta: Vec<f64>,
        projectors: Option<PyRef<'py, PyProjectorSet>>,
    ) -> PyResult<Bound<'py, PyAny>> {
        let set = self.projectors_or_fock(projectors.as_deref());
        let report = saturation::check_saturation(&self.inner, &theta, &set, &Tolerances::default()).map_err(err)?;
        to_py(py, &report)
    }

    /// Saturating measurement at `theta`; `mix=None` gives the orthogonal variant.
    #[pyo3(signature = (theta, mix=None))]
    fn construct_optimal(&self, theta: Vec<f64>, mix: Option<f64>) -> PyResult<PyProjectorSet> {
        let bundle = self.inner.derivative_states(&theta).map_err(err)?;
        let frame = optimal::omega_frame(&bundle);
        let tol = Tolerances::default();
        let out = match mix {
            None => optimal::construct_orthogonal_optimal(&frame, &tol),
            Some(m) => optimal::construct_nonorthogonal_optimal(&frame, m, &tol),
        }
        .map_err(err)?;
        Ok(PyProjectorSet {
            inner: out.set,
            construction: Some(out.construction),
        })
    }

    /// Gap summary over a grid of the first two parameters.
    #[pyo3(signature = (resolution=41, projectors=None))]
    fn scan<'py>(
        &self,
        py: Python<'py>,
        resolution: usize,
        projectors: Option<PyRef<'py, PyProjectorSet>>,
    ) -> PyResult<Bound<'py, PyAny>> {
        let set = self.projectors_or_fock(projectors.as_deref());
        let config = ScanConfig::new(self.inner.num_params()).with_resolution(resolution, resolution);
        let grid = scan::run_scan(&self.inner, &set, &config).map_err(err)?;
        to_py(py, &grid.summary())
    }

    fn __repr__(&self) -> String {
        format!(
            "Model(modes={}, params={}, dim={})",
            self.inner.modes(),
            self.inner.num_params(),
            self.inner.basis().dim()
        )
    }
}

impl PyModel {
    fn projectors_or_fock(&self, given: Option<&PyProjectorSet>) -> fisher::ProjectorSet {
        match given {
            Some(p) => p.inner.clone(),
            None => fisher::ProjectorSet::fock(self.inner.basis()),
        }
    }
}

/// A rank-one projective measurement on a model's Fock space.
#[pyclass(name = "ProjectorSet", module = "qfisher_py", frozen)]
struct PyProjectorSet {
    inner: fisher::ProjectorSet,
    construction: Option<Construction>,
}

#[pymethods]
impl PyProjectorSet {
    /// Photon counting in the Fock basis of `model`.
    #[staticmethod]
    fn fock(model: &PyModel) -> Self {
        Self {
            inner: fisher::ProjectorSet::fock(model.inner.basis()),
            construction: None,
        }
    }

    /// Loads a projector file, or the `construct-optimal` output holding one.
    #[staticmethod]
    fn from_json(model: &PyModel, text: &str) -> PyResult<Self> {
        let bad = |e: serde_json::Error| PyValueError::new_err(e.to_string());
        let mut value: serde_json::Value = serde_json::from_str(text).map_err(bad)?;
        if let Some(inner) = value.get_mut("projector_set") {
            value = inner.take();
        }
        let file: ProjectorSetFile = serde_json::from_value(value).map_err(bad)?;
        let inner = fisher::ProjectorSet::from_file(&file, model.inner.basis(), &Tolerances::default()).map_err(err)?;
        Ok(Self {
            inner,
            construction: None,
        })
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string(&self.inner.to_file()).map_err(|e| PyRuntimeError::new_err(e.to_string()))
    }

    fn labels(&self) -> Vec<String> {
        self.inner.labels().to_vec()
    }

    fn vectors(&self) -> Vec<Vec<C64>> {
        self.inner.projectors().iter().map(|p| p.amplitudes().to_vec()).collect()
    }

    fn is_complete(&self) -> bool {
        self.inner.is_complete()
    }

    /// `"orthogonal"`, `"non_orthogonal"`, or `None` for sets not built here.
    #[getter]
    fn construction(&self) -> Option<&'static str> {
        self.construction.map(|c| match c {
            Construction::Orthogonal => "orthogonal",
            Construction::NonOrthogonal { .. } => "non_orthogonal",
        })
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }
}

/// Permanent of a square complex matrix given as nested lists.
#[pyfunction]
fn permanent(rows: Vec<Vec<C64>>) -> PyResult<C64> {
    let m = ComplexMatrix::from_rows(rows).map_err(err)?;
    la::permanent(&m).map_err(err)
}

/// Occupation vectors of `photons` in `modes`, in canonical order.
#[pyfunction]
fn enumerate_basis(photons: u32, modes: usize) -> PyResult<Vec<Vec<u32>>> {
    let basis: Arc<FockBasis> = fock::enumerate_basis(photons, modes).map_err(err)?;
    Ok(occupations(&basis))
}

#[pymodule]
fn qfisher_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyModel>()?;
    m.add_class::<PyProjectorSet>()?;
    m.add_function(wrap_pyfunction!(permanent, m)?)?;
    m.add_function(wrap_pyfunction!(enumerate_basis, m)?)?;
    Ok(())
}
