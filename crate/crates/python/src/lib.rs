//! Python bindings: the main types and operations of the toolkit, exposed as
//! the `_subplanck` extension module.

use num_complex::Complex64;
use numpy::{IntoPyArray, PyArray1, PyArray2, PyReadonlyArray1};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use subplanck::analysis::{
    asymmetry_experiment, beta_for_peak_level, classical_action, coefficient_moments, measure_tile,
    overlap_wigner, scaling_sweep,
};
use subplanck::revival::{
    cat_identity_residual, classical_packet, clone_decomposition, compass_identity_residual,
    even_odd_split_residual, FractionalTime,
};
use subplanck::sensitivity::{displace_oracle, overlap_sweep, DisplacementParam};
use subplanck::{
    coherent_coefficients, overlap_coeff, wigner_direct, wigner_fast, CoefficientState,
    PhaseSpaceGrid, PtError, PtParams, WignerField,
};

fn err(e: PtError) -> PyErr {
    match e {
        PtError::Validation(_) | PtError::Domain(_) => PyValueError::new_err(e.to_string()),
        other => PyRuntimeError::new_err(other.to_string()),
    }
}

/// Well parameters and spectral data.
#[pyclass(name = "PtWell", frozen)]
struct PyWell {
    params: PtParams,
}

#[pymethods]
impl PyWell {
    #[new]
    #[pyo3(signature = (rho, kappa, alpha=2.0))]
    fn new(rho: f64, kappa: f64, alpha: f64) -> PyResult<Self> {
        Ok(Self {
            params: PtParams::new(rho, kappa, alpha).map_err(err)?,
        })
    }

    #[getter]
    fn rho(&self) -> f64 {
        self.params.rho()
    }

    #[getter]
    fn kappa(&self) -> f64 {
        self.params.kappa()
    }

    #[getter]
    fn alpha(&self) -> f64 {
        self.params.alpha()
    }

    #[getter]
    fn well_width(&self) -> f64 {
        self.params.well_width()
    }

    #[getter]
    fn t_rev(&self) -> f64 {
        self.params.t_rev()
    }

    #[getter]
    fn t_cl(&self) -> f64 {
        self.params.t_cl()
    }

    #[getter]
    fn is_symmetric(&self) -> bool {
        self.params.is_symmetric()
    }

    fn energy(&self, n: usize) -> f64 {
        self.params.energy(n)
    }

    fn potential(&self, x: f64) -> PyResult<f64> {
        self.params.potential_value(x).map_err(err)
    }

    fn eigenfunction<'py>(
        &self,
        py: Python<'py>,
        n: usize,
        xs: PyReadonlyArray1<'py, f64>,
    ) -> PyResult<Bound<'py, PyArray1<f64>>> {
        let xs = xs.as_slice()?;
        let vals: Vec<f64> = xs
            .iter()
            .map(|&x| self.params.eigenfunction(n, x))
            .collect::<subplanck::Result<_>>()
            .map_err(err)?;
        Ok(vals.into_pyarray(py))
    }

    /// Coherent state with amplitude parameter beta (|beta| < 1).
    #[pyo3(signature = (beta, tail_tol=1e-12))]
    fn coherent_state(&self, beta: f64, tail_tol: f64) -> PyResult<PyState> {
        let state =
            coherent_coefficients(self.params, Complex64::new(beta, 0.0), tail_tol).map_err(err)?;
        Ok(PyState { state })
    }

    /// Beta placing the energy-distribution peak at level nbar.
    fn beta_for_peak(&self, nbar: usize) -> f64 {
        beta_for_peak_level(self.params, nbar)
    }

    fn __repr__(&self) -> String {
        format!(
            "PtWell(rho={}, kappa={}, alpha={})",
            self.params.rho(),
            self.params.kappa(),
            self.params.alpha()
        )
    }
}

/// Truncated coefficient vector over the eigenbasis.
#[pyclass(name = "State", frozen)]
struct PyState {
    state: CoefficientState,
}

#[pymethods]
impl PyState {
    #[getter]
    fn n_max(&self) -> usize {
        self.state.n_max()
    }

    fn coefficients<'py>(&self, py: Python<'py>) -> Bound<'py, PyArray1<Complex64>> {
        self.state.coeffs().to_vec().into_pyarray(py)
    }

    fn evolve(&self, t: f64) -> PyState {
        PyState {
            state: self.state.evolve(t),
        }
    }

    /// Evolution with only the linear-in-n phase (classical packet).
    fn classical_packet(&self, t: f64) -> PyState {
        PyState {
            state: classical_packet(&self.state, t),
        }
    }

    fn wavefunction<'py>(
        &self,
        py: Python<'py>,
        xs: PyReadonlyArray1<'py, f64>,
    ) -> PyResult<Bound<'py, PyArray1<Complex64>>> {
        let vals = self.state.wavefunction(xs.as_slice()?).map_err(err)?;
        Ok(vals.into_pyarray(py))
    }

    fn overlap(&self, other: &PyState) -> PyResult<Complex64> {
        overlap_coeff(&self.state, &other.state).map_err(err)
    }

    fn mean_energy(&self) -> f64 {
        self.state.mean_energy()
    }

    /// Delta-x Delta-p from coefficient-basis operator tables.
    fn classical_action(&self) -> PyResult<f64> {
        classical_action(&self.state).map_err(err)
    }

    /// Coefficient-basis moments as a dict.
    fn moments<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let m = coefficient_moments(&self.state).map_err(err)?;
        let d = PyDict::new(py);
        d.set_item("mean_x", m.mean_x)?;
        d.set_item("mean_p", m.mean_p)?;
        d.set_item("var_x", m.var_x)?;
        d.set_item("var_p", m.var_p)?;
        Ok(d)
    }

    fn cat_residual(&self) -> PyResult<f64> {
        cat_identity_residual(&self.state).map_err(err)
    }

    fn even_odd_residual(&self) -> PyResult<f64> {
        even_odd_split_residual(&self.state).map_err(err)
    }

    fn compass_residual(&self) -> PyResult<f64> {
        compass_identity_residual(&self.state).map_err(err)
    }

    /// Least-squares clone decomposition at r/s of the revival time.
    fn clone_decomposition<'py>(
        &self,
        py: Python<'py>,
        r: u32,
        s: u32,
    ) -> PyResult<Bound<'py, PyDict>> {
        let frac = FractionalTime::new(r, s).map_err(err)?;
        let d = clone_decomposition(&self.state, frac).map_err(err)?;
        let out = PyDict::new(py);
        out.set_item("amplitudes", d.amplitudes.into_pyarray(py))?;
        out.set_item("phase_offsets", d.phase_offsets.into_pyarray(py))?;
        out.set_item("residual", d.residual)?;
        Ok(out)
    }

    /// Apply the su(1,1) displacement operator; returns (state, leakage).
    #[pyo3(signature = (magnitude, phase=0.0))]
    fn displace(&self, magnitude: f64, phase: f64) -> PyResult<(PyState, f64)> {
        let d = DisplacementParam::new(magnitude, phase).map_err(err)?;
        let out = displace_oracle(&self.state, d).map_err(err)?;
        Ok((PyState { state: out.state }, out.leakage))
    }

    fn __repr__(&self) -> String {
        format!("State(n_max={})", self.state.n_max())
    }
}

/// Wigner samples on a rectangular phase-space grid.
#[pyclass(name = "WignerField", frozen)]
struct PyField {
    field: WignerField,
}

#[pymethods]
impl PyField {
    fn values<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyArray2<f64>>> {
        Ok(self.field.values.clone().into_pyarray(py))
    }

    fn xs<'py>(&self, py: Python<'py>) -> Bound<'py, PyArray1<f64>> {
        let g = &self.field.grid;
        (0..g.nx)
            .map(|i| g.x_at(i))
            .collect::<Vec<_>>()
            .into_pyarray(py)
    }

    fn ps<'py>(&self, py: Python<'py>) -> Bound<'py, PyArray1<f64>> {
        let g = &self.field.grid;
        (0..g.np)
            .map(|j| g.p_at(j))
            .collect::<Vec<_>>()
            .into_pyarray(py)
    }

    fn marginals<'py>(
        &self,
        py: Python<'py>,
    ) -> (Bound<'py, PyArray1<f64>>, Bound<'py, PyArray1<f64>>) {
        let (xd, pd) = self.field.marginals();
        (xd.into_pyarray(py), pd.into_pyarray(py))
    }

    fn total(&self) -> f64 {
        self.field.total()
    }

    fn moments<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let m = self.field.moments();
        let d = PyDict::new(py);
        d.set_item("mean_x", m.mean_x)?;
        d.set_item("mean_p", m.mean_p)?;
        d.set_item("var_x", m.var_x)?;
        d.set_item("var_p", m.var_p)?;
        Ok(d)
    }

    /// Measure the central interference tile around a seed (defaults to the
    /// field centroid).
    #[pyo3(signature = (seed=None))]
    fn measure_tile<'py>(
        &self,
        py: Python<'py>,
        seed: Option<(f64, f64)>,
    ) -> PyResult<Bound<'py, PyDict>> {
        let seed = seed.unwrap_or_else(|| {
            let m = self.field.moments();
            (m.mean_x, m.mean_p)
        });
        let t = measure_tile(&self.field, seed).map_err(err)?;
        let d = PyDict::new(py);
        d.set_item("center", t.center)?;
        d.set_item("dx_span", t.dx_span)?;
        d.set_item("dp_span", t.dp_span)?;
        d.set_item("area", t.area)?;
        Ok(d)
    }

    fn overlap(&self, other: &PyField) -> PyResult<f64> {
        overlap_wigner(&self.field, &other.field).map_err(err)
    }

    fn __repr__(&self) -> String {
        let g = &self.field.grid;
        format!("WignerField({}x{})", g.nx, g.np)
    }
}

/// Wigner distribution of a state on the default (or explicit) grid.
#[pyfunction]
#[pyo3(signature = (state, nx=256, np=256, p_max=None, direct=false))]
fn wigner(
    state: &PyState,
    nx: usize,
    np: usize,
    p_max: Option<f64>,
    direct: bool,
) -> PyResult<PyField> {
    let grid = match p_max {
        Some(pm) => PhaseSpaceGrid::new(0.0, state.state.params().well_width(), nx, -pm, pm, np)
            .map_err(err)?,
        None => PhaseSpaceGrid::default_for(&state.state, nx, np).map_err(err)?,
    };
    let field = if direct {
        wigner_direct(&state.state, &grid).map_err(err)?
    } else {
        wigner_fast(&state.state, &grid).map_err(err)?
    };
    Ok(PyField { field })
}

/// Beta sweep of the inverse-action scaling law; returns the fit and points.
#[pyfunction]
#[pyo3(signature = (well, betas, r=1, s=8, nx=256, np=256))]
fn scaling<'py>(
    py: Python<'py>,
    well: &PyWell,
    betas: Vec<f64>,
    r: u32,
    s: u32,
    nx: usize,
    np: usize,
) -> PyResult<Bound<'py, PyDict>> {
    let frac = FractionalTime::new(r, s).map_err(err)?;
    let sweep = scaling_sweep(well.params, &betas, frac, nx, np).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("slope", sweep.fit.slope)?;
    d.set_item("intercept", sweep.fit.intercept)?;
    d.set_item("r_squared", sweep.fit.r_squared)?;
    d.set_item(
        "beta",
        sweep
            .points
            .iter()
            .map(|p| p.beta)
            .collect::<Vec<_>>()
            .into_pyarray(py),
    )?;
    d.set_item(
        "action",
        sweep
            .points
            .iter()
            .map(|p| p.action)
            .collect::<Vec<_>>()
            .into_pyarray(py),
    )?;
    d.set_item(
        "tile_area",
        sweep
            .points
            .iter()
            .map(|p| p.tile_area)
            .collect::<Vec<_>>()
            .into_pyarray(py),
    )?;
    Ok(d)
}

/// Overlap-vs-displacement sweep of the evolved state.
#[pyfunction]
#[pyo3(signature = (well, beta, theta, lambda_max, samples, t))]
fn displacement_sweep<'py>(
    py: Python<'py>,
    well: &PyWell,
    beta: f64,
    theta: f64,
    lambda_max: f64,
    samples: usize,
    t: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let curve = overlap_sweep(well.params, beta, theta, lambda_max, samples, t).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("lambda", curve.lambda_samples.into_pyarray(py))?;
    d.set_item("overlap", curve.overlaps.into_pyarray(py))?;
    d.set_item("minima", curve.minima.into_pyarray(py))?;
    d.set_item("period", curve.extracted_period)?;
    d.set_item("tile_dx_span", curve.tile_dx_span)?;
    Ok(d)
}

/// Symmetric vs slightly-asymmetric compass comparison.
#[pyfunction]
#[pyo3(signature = (sym, asym, beta_sym, beta_asym, nx=256, np=256))]
fn asymmetry<'py>(
    py: Python<'py>,
    sym: &PyWell,
    asym: &PyWell,
    beta_sym: f64,
    beta_asym: f64,
    nx: usize,
    np: usize,
) -> PyResult<Bound<'py, PyDict>> {
    let report =
        asymmetry_experiment(sym.params, asym.params, beta_sym, beta_asym, nx, np).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("overlap", report.overlap)?;
    d.set_item("shift", report.shift)?;
    d.set_item("section_x", report.section_x.into_pyarray(py))?;
    d.set_item("section_sym", report.section_sym.into_pyarray(py))?;
    d.set_item("section_asym", report.section_asym.into_pyarray(py))?;
    Ok(d)
}

#[pymodule]
fn _subplanck(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyWell>()?;
    m.add_class::<PyState>()?;
    m.add_class::<PyField>()?;
    m.add_function(wrap_pyfunction!(wigner, m)?)?;
    m.add_function(wrap_pyfunction!(scaling, m)?)?;
    m.add_function(wrap_pyfunction!(displacement_sweep, m)?)?;
    m.add_function(wrap_pyfunction!(asymmetry, m)?)?;
    Ok(())
}
