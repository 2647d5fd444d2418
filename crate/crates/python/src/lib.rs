use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use sumrate_hsd::hsd::{self, StepSchedule};
use sumrate_hsd::scenario::{self, ScenarioParams};
use sumrate_hsd::wmmse::{WmmseInit, WmmseOptions};
use sumrate_hsd::{diagnostics, perron, Error, Matrix, PositiveMatrix, RecoverOptions};

fn to_py(e: Error) -> PyErr {
    match e {
        Error::NonConvergence { .. } => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn positive(rows: Vec<Vec<f64>>) -> PyResult<PositiveMatrix> {
    PositiveMatrix::from_rows(&rows).map_err(to_py)
}

/// Spectral radius of a strictly positive square matrix.
#[pyfunction]
#[pyo3(signature = (rows, tol = perron::DEFAULT_TOL, max_iter = perron::DEFAULT_MAX_ITER))]
fn spectral_radius(rows: Vec<Vec<f64>>, tol: f64, max_iter: usize) -> PyResult<f64> {
    perron::spectral_radius(&positive(rows)?, tol, max_iter).map_err(to_py)
}

/// `(radius, right, left)` with `max(right) == 1` and `left . right == 1`.
#[pyfunction]
#[pyo3(signature = (rows, tol = perron::DEFAULT_TOL, max_iter = perron::DEFAULT_MAX_ITER))]
fn perron_pair(rows: Vec<Vec<f64>>, tol: f64, max_iter: usize) -> PyResult<(f64, Vec<f64>, Vec<f64>)> {
    let p = perron::perron_pair(&positive(rows)?, tol, max_iter).map_err(to_py)?;
    Ok((p.radius, p.right, p.left))
}

#[pyfunction]
fn is_inverse_z(rows: Vec<Vec<f64>>) -> PyResult<bool> {
    perron::is_inverse_z(&positive(rows)?, perron::INVERSE_Z_TOL).map_err(to_py)
}

/// Per-iteration record of a solver run.
#[pyclass(frozen, module = "sumrate")]
struct Trace {
    inner: hsd::IterTrace,
}

#[pymethods]
impl Trace {
    #[getter]
    fn domain(&self) -> &'static str {
        match self.inner.domain {
            hsd::Domain::Rate => "rate",
            hsd::Domain::Sinr => "sinr",
            hsd::Domain::Power => "power",
        }
    }

    #[getter]
    fn objectives(&self) -> Vec<f64> {
        self.inner.records.iter().map(|r| r.objective).collect()
    }

    #[getter]
    fn gammas(&self) -> Vec<f64> {
        self.inner.records.iter().map(|r| r.gamma).collect()
    }

    #[getter]
    fn iterates(&self) -> Vec<Vec<f64>> {
        self.inner.records.iter().map(|r| r.iterate.clone()).collect()
    }

    #[getter]
    fn solution(&self) -> Vec<f64> {
        self.inner.solution.clone()
    }

    #[getter]
    fn solution_objective(&self) -> f64 {
        self.inner.solution_objective
    }

    fn to_csv(&self) -> PyResult<String> {
        let mut buf = Vec::new();
        self.inner
            .write_csv(&mut buf)
            .map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
        Ok(String::from_utf8(buf).expect("CSV is ASCII"))
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!(
            "Trace(domain={:?}, iterations={}, solution_objective={})",
            self.domain(),
            self.inner.len(),
            self.inner.solution_objective
        )
    }
}

/// Weighted sum-rate instance `(M, u, w, p_max)`.
#[pyclass(frozen, module = "sumrate")]
struct Problem {
    inner: scenario::UatFProblem,
}

impl Problem {
    fn config(&self, sinr: bool, iters: usize, a: f64, q: f64, b: f64, init: f64) -> PyResult<hsd::SolverConfig> {
        let n = self.inner.n();
        let mut cfg = if sinr {
            hsd::SolverConfig::sinr_defaults(n)
        } else {
            hsd::SolverConfig::rate_defaults(n)
        };
        cfg.max_iter = iters;
        cfg.schedule = StepSchedule::new(a, q).map_err(to_py)?;
        cfg.box_bound = b;
        cfg.initial_point = vec![init; n];
        cfg.weights = self.inner.w().to_vec();
        Ok(cfg)
    }
}

#[pymethods]
impl Problem {
    #[new]
    #[pyo3(signature = (m, u, w, p_max))]
    fn new(m: Vec<Vec<f64>>, u: Vec<f64>, w: Vec<f64>, p_max: f64) -> PyResult<Self> {
        let m = Matrix::from_rows(&m).map_err(to_py)?;
        let inner = scenario::UatFProblem::new(m, u, w, p_max).map_err(to_py)?;
        Ok(Self { inner })
    }

    /// Random cell-less uplink instance.
    #[staticmethod]
    #[pyo3(signature = (seed, users = 3, aps = 4, antennas = 2, side = 100.0, serve = 2, samples = 100, p_max = 1e8))]
    #[allow(clippy::too_many_arguments)]
    fn generate(
        seed: u64,
        users: usize,
        aps: usize,
        antennas: usize,
        side: f64,
        serve: usize,
        samples: usize,
        p_max: f64,
    ) -> PyResult<Self> {
        let params = ScenarioParams {
            users,
            aps,
            antennas,
            side_m: side,
            serve,
            samples,
            p_max,
        };
        let inner = scenario::generate_problem(&params, seed).map_err(to_py)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let inner = scenario::UatFProblem::from_json(text).map_err(to_py)?;
        Ok(Self { inner })
    }

    fn to_json(&self) -> PyResult<String> {
        self.inner.to_json().map_err(to_py)
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter(M)]
    fn m(&self) -> Vec<Vec<f64>> {
        self.inner.m().to_rows()
    }

    #[getter]
    fn u(&self) -> Vec<f64> {
        self.inner.u().to_vec()
    }

    #[getter]
    fn w(&self) -> Vec<f64> {
        self.inner.w().to_vec()
    }

    #[getter]
    fn p_max(&self) -> f64 {
        self.inner.p_max()
    }

    /// True when every family member is an inverse Z-matrix.
    fn inverse_z(&self) -> PyResult<bool> {
        Ok(diagnostics::all_members_inverse_z(&self.inner.family().map_err(to_py)?))
    }

    /// `rho_G(e^r - 1)`; feasible rates satisfy `h_rate(r) <= 1`.
    fn h_rate(&self, r: Vec<f64>) -> PyResult<f64> {
        self.inner.family().and_then(|f| f.h_rate(&r)).map_err(to_py)
    }

    fn rho_g(&self, s: Vec<f64>) -> PyResult<f64> {
        self.inner.family().and_then(|f| f.rho_g(&s)).map_err(to_py)
    }

    #[pyo3(signature = (iters = 2000, a = 0.4, q = 0.999, b = hsd::DEFAULT_RATE_BOX, init = 0.5))]
    fn solve_rate(&self, py: Python<'_>, iters: usize, a: f64, q: f64, b: f64, init: f64) -> PyResult<Trace> {
        let cfg = self.config(false, iters, a, q, b, init)?;
        let family = self.inner.family().map_err(to_py)?;
        let inner = py.detach(|| hsd::solve_rate(&family, &cfg)).map_err(to_py)?;
        Ok(Trace { inner })
    }

    #[pyo3(signature = (iters = 2000, a = 1.6, q = 0.999, b = hsd::DEFAULT_SINR_BOX, init = 0.5))]
    fn solve_sinr(&self, py: Python<'_>, iters: usize, a: f64, q: f64, b: f64, init: f64) -> PyResult<Trace> {
        let cfg = self.config(true, iters, a, q, b, init)?;
        let family = self.inner.family().map_err(to_py)?;
        let inner = py.detach(|| hsd::solve_sinr(&family, &cfg)).map_err(to_py)?;
        Ok(Trace { inner })
    }

    /// Powers realizing `rates`; returns a dict with `p_star`, `support`,
    /// `residual`, `achieved_rates`, `sum_rate`.
    fn recover<'py>(&self, py: Python<'py>, rates: Vec<f64>) -> PyResult<Bound<'py, PyDict>> {
        let sol = sumrate_hsd::recover_power(&self.inner.interference_model(), &rates, &RecoverOptions::default())
            .map_err(to_py)?;
        let d = PyDict::new(py);
        d.set_item("weighted_sum_rate", sol.weighted_sum_rate(self.inner.w()))?;
        d.set_item("p_star", sol.p_star)?;
        d.set_item("support", sol.support)?;
        d.set_item("residual", sol.residual)?;
        d.set_item("achieved_rates", sol.achieved_rates)?;
        d.set_item("sum_rate", sol.sum_rate)?;
        Ok(d)
    }

    /// WMMSE baseline from `"full"` (`p_max * 1`) or `"alt"` (`p_max * [1, 0, 1, ...]`).
    #[pyo3(signature = (init = "full", iters = 10_000))]
    fn wmmse(&self, init: &str, iters: usize) -> PyResult<Trace> {
        let start = match init {
            "full" => WmmseInit::Full,
            "alt" => WmmseInit::Alternating,
            other => return Err(PyValueError::new_err(format!("unknown init {other:?}"))),
        }
        .point(self.inner.n(), self.inner.p_max());
        let opts = WmmseOptions {
            max_iter: iters,
            ..WmmseOptions::default()
        };
        let inner = sumrate_hsd::wmmse_solve(&self.inner.interference_model(), self.inner.w(), &start, &opts)
            .map_err(to_py)?;
        Ok(Trace { inner })
    }

    fn __repr__(&self) -> String {
        format!("Problem(n={}, p_max={})", self.inner.n(), self.inner.p_max())
    }
}

#[pymodule]
fn sumrate(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(spectral_radius, m)?)?;
    m.add_function(wrap_pyfunction!(perron_pair, m)?)?;
    m.add_function(wrap_pyfunction!(is_inverse_z, m)?)?;
    m.add_class::<Problem>()?;
    m.add_class::<Trace>()?;
    Ok(())
}
