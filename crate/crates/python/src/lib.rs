//! Python bindings: Misiurewicz points, backward orbits, surgery sequences,
//! the skinning table and the self-similarity report.
//!
//! Complex values cross the boundary as Python `complex` (rounded to double);
//! `decimal()` methods give the full-precision digits as strings.

use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyComplex, PyDict};

use pcf_surgery::backward::{self, BranchPolicy};
use pcf_surgery::dynamics::BranchSelector;
use pcf_surgery::misiurewicz::{self, MisiurewiczData, MisiurewiczRecord};
use pcf_surgery::similarity::hausdorff::{hausdorff_f64, Metric};
use pcf_surgery::similarity::{self, ReportConfig};
use pcf_surgery::{skinning, surgery, BigComplex, Error, Precision};

create_exception!(pcf_surgery_py, NumericError, PyException, "A numeric error raised by the core library.");

fn numeric(e: Error) -> PyErr {
    NumericError::new_err(format!("{}: {e}", e.name()))
}

fn precision(bits: u32) -> PyResult<Precision> {
    Precision::new(bits).map_err(numeric)
}

fn py_complex<'py>(py: Python<'py>, z: &BigComplex) -> Bound<'py, PyComplex> {
    let (re, im) = z.to_f64_pair();
    PyComplex::from_doubles(py, re, im)
}

fn py_complexes<'py>(py: Python<'py>, zs: &[BigComplex]) -> Vec<Bound<'py, PyComplex>> {
    zs.iter().map(|z| py_complex(py, z)).collect()
}

/// A certified Misiurewicz parameter `c` with its cycle, `mu` and `nu`.
#[pyclass(name = "Misiurewicz", frozen, module = "pcf_surgery_py")]
pub struct PyMisiurewicz {
    inner: MisiurewiczData,
}

#[pymethods]
impl PyMisiurewicz {
    /// Newton from `seed` (e.g. `"-1.9"`, `"0.1+1.1i"`) for preperiod `k` and period `p`.
    #[new]
    #[pyo3(signature = (k, p, seed, precision_bits = 128))]
    fn new(k: usize, p: usize, seed: &str, precision_bits: u32) -> PyResult<Self> {
        let prec = precision(precision_bits)?;
        let seed = BigComplex::parse(prec, seed).map_err(numeric)?;
        let inner = misiurewicz::solve_misiurewicz(k, p, &seed, prec).map_err(numeric)?;
        Ok(PyMisiurewicz { inner })
    }

    /// Reload a record produced by `to_json`.
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let record: MisiurewiczRecord =
            serde_json::from_str(text).map_err(|e| PyValueError::new_err(e.to_string()))?;
        let inner = MisiurewiczData::from_record(&record).map_err(numeric)?;
        Ok(PyMisiurewicz { inner })
    }

    fn to_json(&self) -> String {
        serde_json::to_string(&self.inner.to_record()).expect("records always serialize")
    }

    #[getter]
    fn c<'py>(&self, py: Python<'py>) -> Bound<'py, PyComplex> {
        py_complex(py, &self.inner.c)
    }

    #[getter]
    fn mu<'py>(&self, py: Python<'py>) -> Bound<'py, PyComplex> {
        py_complex(py, &self.inner.mu)
    }

    #[getter]
    fn nu<'py>(&self, py: Python<'py>) -> Bound<'py, PyComplex> {
        py_complex(py, &self.inner.nu)
    }

    /// The cycle, starting at the landing point.
    #[getter]
    fn orbit<'py>(&self, py: Python<'py>) -> Vec<Bound<'py, PyComplex>> {
        py_complexes(py, &self.inner.orbit)
    }

    #[getter]
    fn k(&self) -> usize {
        self.inner.k
    }

    #[getter]
    fn p(&self) -> usize {
        self.inner.p
    }

    #[getter]
    fn m(&self) -> usize {
        self.inner.m
    }

    #[getter]
    fn precision_bits(&self) -> u32 {
        self.inner.prec.bits()
    }

    /// Exact decimal digits of `"c"`, `"mu"` or `"nu"` as `(re, im)`.
    fn decimal(&self, name: &str) -> PyResult<(String, String)> {
        let z = match name {
            "c" => &self.inner.c,
            "mu" => &self.inner.mu,
            "nu" => &self.inner.nu,
            other => return Err(PyValueError::new_err(format!("unknown quantity {other:?}"))),
        };
        Ok(z.to_exact_parts())
    }

    /// Distance from the landing point to the rest of the postcritical set.
    fn separation(&self) -> PyResult<f64> {
        self.inner.separation().map_err(numeric)
    }

    fn __repr__(&self) -> String {
        let d = &self.inner;
        format!("Misiurewicz(k={}, p={}, c={}, nu={})", d.k, d.p, d.c.to_decimal(17), d.nu.to_decimal(17))
    }
}

/// Inverse orbit `q_0, q_1, ...` converging to the cycle.
#[pyclass(name = "BackwardOrbit", frozen, module = "pcf_surgery_py")]
pub struct PyBackwardOrbit {
    inner: backward::BackwardOrbit,
}

#[pymethods]
impl PyBackwardOrbit {
    #[getter]
    fn points<'py>(&self, py: Python<'py>) -> Vec<Bound<'py, PyComplex>> {
        py_complexes(py, &self.inner.points)
    }

    /// `mu^k (q_(j0 + p k) - landing point)`.
    #[getter]
    fn scaled<'py>(&self, py: Python<'py>) -> Vec<Bound<'py, PyComplex>> {
        py_complexes(py, &self.inner.scaled)
    }

    #[getter]
    fn residue(&self) -> usize {
        self.inner.residue
    }

    /// `(x, error)` with `x` the tail limit of the scaled sequence over `nu`.
    fn limit_x<'py>(&self, py: Python<'py>) -> PyResult<(Bound<'py, PyComplex>, f64)> {
        let est = backward::limit_x(&self.inner).map_err(numeric)?;
        Ok((py_complex(py, &est.value), est.error))
    }
}

/// `steps` inverse steps from `q0`; `policy` is `track-cycle`, `principal` or `landing`.
#[pyfunction]
#[pyo3(signature = (base, steps, q0 = "0", policy = "track-cycle"))]
fn backward_orbit(base: &PyMisiurewicz, steps: usize, q0: &str, policy: &str) -> PyResult<PyBackwardOrbit> {
    let data = &base.inner;
    let q0 = BigComplex::parse(data.prec, q0).map_err(numeric)?;
    let policy = match policy {
        "track-cycle" => BranchPolicy::TrackCycle,
        "principal" => BranchPolicy::Uniform(BranchSelector::Principal),
        "landing" => BranchPolicy::Uniform(BranchSelector::NearestTo(data.landing_point().clone())),
        other => return Err(PyValueError::new_err(format!("unknown policy {other:?}"))),
    };
    let inner = backward::backward_orbit(data, &q0, policy, steps).map_err(numeric)?;
    Ok(PyBackwardOrbit { inner })
}

/// `z mu^k` in the annulus `1 <= |w| < |mu|`.
#[pyfunction]
#[pyo3(signature = (z, mu, precision_bits = 128))]
fn reduce_to_annulus<'py>(
    py: Python<'py>,
    z: (f64, f64),
    mu: (f64, f64),
    precision_bits: u32,
) -> PyResult<Bound<'py, PyComplex>> {
    let prec = precision(precision_bits)?;
    let w = backward::reduce_to_annulus(&BigComplex::new(prec, z.0, z.1), &BigComplex::new(prec, mu.0, mu.1))
        .map_err(numeric)?;
    Ok(py_complex(py, &w))
}

/// Rows `(n, v_n, c_n, s_n)` of the skinning fixed points.
#[pyfunction]
#[pyo3(signature = (n_from, n_to, precision_bits = 128, tolerance = 1e-30))]
fn skinning_table(n_from: usize, n_to: usize, precision_bits: u32, tolerance: f64) -> PyResult<Vec<(usize, f64, f64, f64)>> {
    let rows = skinning::v_table(n_from, n_to, precision(precision_bits)?, tolerance).map_err(numeric)?;
    Ok(rows.iter().map(|r| (r.n, r.v.to_f64(), r.c.to_f64(), r.s.to_f64())).collect())
}

/// `(limit, error, [(n, s_n)])` of the scaled skinning gaps.
#[pyfunction]
#[pyo3(signature = (n_max = 14, precision_bits = 192))]
#[allow(clippy::type_complexity)]
fn skinning_limit(n_max: usize, precision_bits: u32) -> PyResult<(f64, f64, Vec<(usize, f64)>)> {
    let series = skinning::limit_series(n_max, precision(precision_bits)?).map_err(numeric)?;
    let terms = series.terms.iter().map(|(n, s)| (*n, s.to_f64())).collect();
    Ok((series.limit.to_f64(), series.error, terms))
}

/// Parameters `c_n -> c` with `t_n = (c_n - c) mu^n`.
#[pyclass(name = "SurgerySequence", frozen, module = "pcf_surgery_py")]
pub struct PySurgerySequence {
    inner: surgery::SurgerySequence,
}

#[pymethods]
impl PySurgerySequence {
    /// `(n, c_n, t_n, residual)` per entry.
    #[getter]
    #[allow(clippy::type_complexity)]
    fn entries<'py>(&self, py: Python<'py>) -> Vec<(usize, Bound<'py, PyComplex>, Bound<'py, PyComplex>, f64)> {
        self.inner
            .entries
            .iter()
            .map(|e| (e.n, py_complex(py, &e.c), py_complex(py, &e.t), e.residual))
            .collect()
    }

    #[getter]
    fn x_estimate<'py>(&self, py: Python<'py>) -> Bound<'py, PyComplex> {
        py_complex(py, &self.inner.x_estimate)
    }

    #[getter]
    fn x_error(&self) -> f64 {
        self.inner.x_error
    }

    /// Critical periods of the entries, when they are found within `cap`.
    fn postcritical_counts(&self, cap: usize) -> Vec<Option<usize>> {
        self.inner.entries.iter().map(|e| surgery::postcritical_count(&e.c, cap)).collect()
    }

    #[pyo3(signature = (digits = 20))]
    fn to_csv(&self, digits: usize) -> String {
        self.inner.to_csv(digits)
    }

    fn to_json(&self) -> String {
        serde_json::to_string(&self.inner.to_record()).expect("records always serialize")
    }
}

/// Surgery entries `n_from..=n_to` at `base`, from a track-cycle backward orbit of `steps`.
#[pyfunction]
#[pyo3(signature = (base, n_from, n_to, steps = 40))]
fn surgery_sequence(base: &PyMisiurewicz, n_from: usize, n_to: usize, steps: usize) -> PyResult<PySurgerySequence> {
    let data = &base.inner;
    let orbit = backward::backward_orbit(data, &BigComplex::zero(data.prec), BranchPolicy::TrackCycle, steps)
        .map_err(numeric)?;
    let inner = surgery::build_sequence(data, &orbit, n_from, n_to).map_err(numeric)?;
    Ok(PySurgerySequence { inner })
}

/// Hausdorff distance of two clouds of `(x, y)` pairs, on the annulus of `mu` if given.
#[pyfunction]
#[pyo3(signature = (a, b, mu = None))]
fn hausdorff(a: Vec<(f64, f64)>, b: Vec<(f64, f64)>, mu: Option<(f64, f64)>) -> PyResult<f64> {
    let metric = match mu {
        Some(mu) => Metric::Annulus { mu },
        None => Metric::Euclidean,
    };
    hausdorff_f64(&a, &b, metric).map_err(numeric)
}

/// Self- and cross-similarity distances as a dict.
#[pyfunction]
#[pyo3(signature = (base, n_from = 1, n_to = 6, h = 0.01, samples = 20_000, seed_state = 1, escape_extra = None))]
#[allow(clippy::too_many_arguments)]
fn tan_lei_report<'py>(
    py: Python<'py>,
    base: &PyMisiurewicz,
    n_from: usize,
    n_to: usize,
    h: f64,
    samples: usize,
    seed_state: u64,
    escape_extra: Option<usize>,
) -> PyResult<Bound<'py, PyDict>> {
    let config = ReportConfig { n_from, n_to, h, depth: samples, seed_state, escape_extra };
    let report = similarity::tan_lei_report(&base.inner, &config).map_err(numeric)?;
    let out = PyDict::new(py);
    out.set_item("separation", report.separation)?;
    out.set_item("counts", report.counts)?;
    out.set_item("julia_self", report.julia_self)?;
    out.set_item("mandelbrot_self", report.mandelbrot_self)?;
    out.set_item("cross", report.cross)?;
    out.set_item("julia_resolution", report.julia_resolution)?;
    out.set_item("mandelbrot_resolution", report.mandelbrot_resolution)?;
    Ok(out)
}

#[pymodule]
fn pcf_surgery_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("NumericError", m.py().get_type::<NumericError>())?;
    m.add_class::<PyMisiurewicz>()?;
    m.add_class::<PyBackwardOrbit>()?;
    m.add_class::<PySurgerySequence>()?;
    m.add_function(wrap_pyfunction!(backward_orbit, m)?)?;
    m.add_function(wrap_pyfunction!(reduce_to_annulus, m)?)?;
    m.add_function(wrap_pyfunction!(skinning_table, m)?)?;
    m.add_function(wrap_pyfunction!(skinning_limit, m)?)?;
    m.add_function(wrap_pyfunction!(surgery_sequence, m)?)?;
    m.add_function(wrap_pyfunction!(hausdorff, m)?)?;
    m.add_function(wrap_pyfunction!(tan_lei_report, m)?)?;
    Ok(())
}
