//! Python bindings: the ring configuration type plus the headline
//! operations (reflection amplitude, delay time, closed forms, sweeps).
//!
//! Build the cdylib and import it as `abring_py`; `python/smoke.py` at the
//! repository root shows the expected usage end to end.

use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use abring::analytic::{self, SingleBarrierSpec};
use abring::phase_time as delay;
use abring::phase_time::default_step;
use abring::ring;
use abring::solver;
use abring::sweep;
use abring::RingError;

fn to_py_err(err: RingError) -> PyErr {
    if err.is_numerical() {
        PyRuntimeError::new_err(err.to_string())
    } else {
        PyValueError::new_err(err.to_string())
    }
}

/// Full ring configuration: energy, barriers, well and per-segment flux
/// phases (radians). All quantities are dimensionless (hbar = 1, 2m = 1).
#[pyclass(name = "RingSpec", from_py_object)]
#[derive(Clone, Copy)]
struct PyRingSpec {
    inner: ring::RingSpec,
}

#[pymethods]
impl PyRingSpec {
    #[new]
    #[pyo3(signature = (energy, v1=0.0, v3=0.0, lb1=0.0, lb3=0.0, well=0.0, alpha1=0.0, alpha2=0.0, alpha3=0.0))]
    #[allow(clippy::too_many_arguments)]
    fn new(
        energy: f64,
        v1: f64,
        v3: f64,
        lb1: f64,
        lb3: f64,
        well: f64,
        alpha1: f64,
        alpha2: f64,
        alpha3: f64,
    ) -> PyResult<Self> {
        let inner = ring::RingSpec {
            energy,
            v1,
            v3,
            lb1,
            lb3,
            well,
            alpha1,
            alpha2,
            alpha3,
        };
        inner.validate().map_err(to_py_err)?;
        Ok(PyRingSpec { inner })
    }

    /// Ring fully covered by one barrier of strength `v1`, circumference
    /// `length`, total flux phase `alpha`.
    #[staticmethod]
    #[pyo3(signature = (energy, v1, length, alpha=0.0))]
    fn single_barrier(energy: f64, v1: f64, length: f64, alpha: f64) -> PyResult<Self> {
        let inner = ring::RingSpec::single_barrier(energy, v1, length, alpha);
        inner.validate().map_err(to_py_err)?;
        Ok(PyRingSpec { inner })
    }

    #[getter]
    fn energy(&self) -> f64 {
        self.inner.energy
    }

    #[getter]
    fn circumference(&self) -> f64 {
        self.inner.circumference()
    }

    #[getter]
    fn total_flux_phase(&self) -> f64 {
        self.inner.total_flux_phase()
    }

    fn __repr__(&self) -> String {
        let s = &self.inner;
        format!(
            "RingSpec(energy={}, v1={}, v3={}, lb1={}, lb3={}, well={}, alpha1={}, alpha2={}, alpha3={})",
            s.energy, s.v1, s.v3, s.lb1, s.lb3, s.well, s.alpha1, s.alpha2, s.alpha3
        )
    }
}

/// Reflection amplitude of the ring (a complex number on the unit circle).
#[pyfunction]
fn reflection(spec: &PyRingSpec) -> PyResult<Complex64> {
    solver::reflection(&spec.inner).map_err(to_py_err)
}

/// Maximum violation of the junction matching conditions for the solved
/// amplitudes; a healthy solve sits far below 1e-10.
#[pyfunction]
fn residual(spec: &PyRingSpec) -> PyResult<f64> {
    let solution =
        solver::solve(&solver::assemble(&spec.inner).map_err(to_py_err)?).map_err(to_py_err)?;
    Ok(solver::residual(&solution, &spec.inner))
}

/// Wigner delay time from the numerical solver, as a
/// `(tau, step, error_estimate)` tuple. `step` defaults to 1e-5 * energy.
#[pyfunction]
#[pyo3(signature = (spec, step=None))]
fn phase_time(spec: &PyRingSpec, step: Option<f64>) -> PyResult<(f64, f64, f64)> {
    let h = step.unwrap_or_else(|| default_step(spec.inner.energy));
    let result = delay::phase_time(&spec.inner, h, solver::reflection).map_err(to_py_err)?;
    Ok((result.tau, result.step, result.error_estimate))
}

/// Saturated delay time of an opaque single-barrier ring.
#[pyfunction]
fn tau_saturated(energy: f64, v1: f64) -> PyResult<f64> {
    analytic::tau_saturated(energy, v1).map_err(to_py_err)
}

/// Exact delay time of the single-barrier ring from the closed form.
#[pyfunction]
#[pyo3(signature = (energy, v1, length, alpha=0.0))]
fn tau_closed_form(energy: f64, v1: f64, length: f64, alpha: f64) -> PyResult<f64> {
    let spec = SingleBarrierSpec::new(energy, v1, length, alpha).map_err(to_py_err)?;
    analytic::tau_closed_form(&spec).map_err(to_py_err)
}

/// Closed-form reflection amplitude of the single-barrier ring.
#[pyfunction]
#[pyo3(signature = (energy, v1, length, alpha=0.0))]
fn reflection_closed_form(energy: f64, v1: f64, length: f64, alpha: f64) -> PyResult<Complex64> {
    let spec = SingleBarrierSpec::new(energy, v1, length, alpha).map_err(to_py_err)?;
    Ok(analytic::reflection_closed_form(&spec))
}

type Rows = Vec<(f64, f64, f64, f64)>;
type Peaks = Vec<(f64, f64, f64)>;

fn rows_of(series: &sweep::SweepSeries) -> Rows {
    series
        .rows
        .iter()
        .map(|row| (row.parameter, row.tau, row.reflectance, row.phase))
        .collect()
}

/// Delay time vs circumference of a single-barrier ring.
/// Rows are `(L, tau, reflectance, phase)`.
#[pyfunction]
fn scan_length(spec: &PyRingSpec, start: f64, stop: f64, steps: usize) -> PyResult<Rows> {
    let series = sweep::scan_length(&spec.inner, start, stop, steps).map_err(to_py_err)?;
    Ok(rows_of(&series))
}

/// Delay time vs flux in units of the flux quantum; returns
/// `(rows, visibility)`.
#[pyfunction]
fn scan_flux(spec: &PyRingSpec, start: f64, stop: f64, steps: usize) -> PyResult<(Rows, f64)> {
    let (series, visibility) =
        sweep::scan_flux(&spec.inner, start, stop, steps).map_err(to_py_err)?;
    Ok((rows_of(&series), visibility))
}

/// Delay time vs barrier-1 length in a two-barrier ring.
#[pyfunction]
fn scan_well(spec: &PyRingSpec, start: f64, stop: f64, steps: usize) -> PyResult<Rows> {
    let series = sweep::scan_well(&spec.inner, start, stop, steps).map_err(to_py_err)?;
    Ok(rows_of(&series))
}

/// Delay time vs well width plus detected resonance peaks; returns
/// `(rows, peaks)` with peaks as `(location, height, fwhm)` tuples.
#[pyfunction]
fn scan_resonance(
    spec: &PyRingSpec,
    start: f64,
    stop: f64,
    steps: usize,
) -> PyResult<(Rows, Peaks)> {
    let (series, peaks) =
        sweep::scan_resonance(&spec.inner, start, stop, steps).map_err(to_py_err)?;
    let peaks = peaks
        .into_iter()
        .map(|p| (p.location, p.height, p.fwhm))
        .collect();
    Ok((rows_of(&series), peaks))
}

#[pymodule]
fn abring_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyRingSpec>()?;
    m.add_function(wrap_pyfunction!(reflection, m)?)?;
    m.add_function(wrap_pyfunction!(residual, m)?)?;
    m.add_function(wrap_pyfunction!(phase_time, m)?)?;
    m.add_function(wrap_pyfunction!(tau_saturated, m)?)?;
    m.add_function(wrap_pyfunction!(tau_closed_form, m)?)?;
    m.add_function(wrap_pyfunction!(reflection_closed_form, m)?)?;
    m.add_function(wrap_pyfunction!(scan_length, m)?)?;
    m.add_function(wrap_pyfunction!(scan_flux, m)?)?;
    m.add_function(wrap_pyfunction!(scan_well, m)?)?;
    m.add_function(wrap_pyfunction!(scan_resonance, m)?)?;
    Ok(())
}
