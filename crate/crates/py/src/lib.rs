//! Python bindings for the biquadrates laboratory: the exact interval
//! exponents, parameter schedules, Weyl sums, counting functions, arc
//! partitions, torus integrals and the enumeration/gap tooling, exposed as
//! the extension module `biquadrates_py`.
//!
//! Conventions mirror the CLI: exact rationals cross the boundary as "a/b"
//! strings (Python can lift them into `fractions.Fraction` losslessly);
//! α arguments accept either a float (a torus point) or a string "a/q"
//! (an exact rational with exact phase arithmetic). Errors surface as
//! `ValueError` for bad input and `RuntimeError` for precondition or
//! budget failures.

use num::rational::BigRational;
use num::complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use biquadrates::arcs::{build_arcs, classify_ratio, major_measure_phi, a_set, ArcClass, ArcSet};
use biquadrates::enumeration::{
    count_empty_intervals, count_empty_intervals_gamma, enumerate_representable_with,
    gap_statistics_with, greedy_approx, EnumerationConfig,
};
use biquadrates::error::Error;
use biquadrates::integrate::{integral, u_closed_form, QuadratureBudget, WhichIntegral};
use biquadrates::params::{self, gamma0_general, Parameters};
use biquadrates::phase::Alpha;
use biquadrates::rational::{parse_ratio, ratio_string, ratio_to_f64};
use biquadrates::weyl::{
    count_r, count_r_prime, count_rho, diff_sum_h, mollified_nu, nu_parseval, weyl_f, weyl_g,
};

fn to_py(e: Error) -> PyErr {
    match e {
        Error::InvalidInput(_) => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

/// α from a Python float (torus point) or string "a/q" (exact rational).
fn alpha_from_any(v: &Bound<'_, PyAny>) -> PyResult<Alpha> {
    if let Ok(s) = v.extract::<String>() {
        let s = s.trim();
        let (a, q) = match s.split_once('/') {
            Some((a, q)) => (
                a.trim()
                    .parse::<i64>()
                    .map_err(|_| PyValueError::new_err(format!("bad numerator in {s:?}")))?,
                q.trim()
                    .parse::<i64>()
                    .map_err(|_| PyValueError::new_err(format!("bad denominator in {s:?}")))?,
            ),
            None => (
                s.parse::<i64>()
                    .map_err(|_| PyValueError::new_err(format!("bad rational {s:?}")))?,
                1,
            ),
        };
        Alpha::from_ratio(a, q).map_err(to_py)
    } else {
        let x: f64 = v.extract()?;
        Alpha::from_f64(x).map_err(to_py)
    }
}

fn big_ratio(s: &str) -> PyResult<BigRational> {
    Ok(parse_ratio(s).map_err(to_py)?.0)
}

/// A parameter tuple (P1, P2, P3, P4; Y) with its context size N.
#[pyclass(name = "Params", skip_from_py_object)]
#[derive(Clone)]
struct PyParams {
    inner: Parameters,
}

#[pymethods]
impl PyParams {
    #[new]
    fn new(p1: f64, p2: f64, p3: f64, p4: f64, y: f64) -> PyResult<Self> {
        Ok(PyParams {
            inner: Parameters::new(p1, p2, p3, p4, y).map_err(to_py)?,
        })
    }

    /// The canonical schedule for context size N and exponent gamma
    /// ("a/b"): P_j = N^((13/16)^(j-1)/4), Y = N^gamma.
    #[staticmethod]
    fn schedule(n: f64, gamma: &str) -> PyResult<Self> {
        let g = big_ratio(gamma)?;
        Ok(PyParams {
            inner: Parameters::choose(n, &g).map_err(to_py)?,
        })
    }

    #[getter]
    fn p(&self) -> (f64, f64, f64, f64) {
        let p = &self.inner.p;
        (p[0], p[1], p[2], p[3])
    }

    #[getter]
    fn y(&self) -> f64 {
        self.inner.y
    }

    #[getter]
    fn n(&self) -> u128 {
        self.inner.n
    }

    /// The exponent that produced Y, as an exact "a/b" string (None for
    /// directly constructed tuples).
    #[getter]
    fn gamma(&self) -> Option<String> {
        self.inner.gamma.as_ref().map(ratio_string)
    }

    fn schedule_ok(&self) -> bool {
        self.inner.schedule_ok()
    }

    /// Number of lattice points in the j-th x-range (P_j/2, P_j].
    fn x_count(&self, j: usize) -> PyResult<u64> {
        self.check_level(j)?;
        Ok(self.inner.x_range(j).count())
    }

    /// The j-th x-range as an (open, closed] endpoint pair.
    fn x_range(&self, j: usize) -> PyResult<(f64, f64)> {
        self.check_level(j)?;
        let r = self.inner.x_range(j);
        Ok((r.lower, r.upper))
    }

    /// The j-th smoothed z-range (P_j^4/16, P_j^4].
    fn z_range(&self, j: usize) -> PyResult<(f64, f64)> {
        self.check_level(j)?;
        let r = self.inner.z_range(j);
        Ok((r.lower, r.upper))
    }

    /// Shift bound Z_j for the differencing sum at level j.
    fn h_bound(&self, j: usize) -> PyResult<f64> {
        if !(1..=3).contains(&j) {
            return Err(PyValueError::new_err(format!("shift level must be 1..3, got {j}")));
        }
        Ok(self.inner.h_bound(j))
    }

    fn y_count(&self) -> u64 {
        self.inner.y_count()
    }

    /// All fields as strings (exactly the CLI's config echo).
    fn describe<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let d = PyDict::new(py);
        for (k, v) in self.inner.flat_map() {
            d.set_item(k, v)?;
        }
        Ok(d)
    }

    fn __repr__(&self) -> String {
        let p = &self.inner.p;
        format!(
            "Params(p1={}, p2={}, p3={}, p4={}, y={})",
            p[0], p[1], p[2], p[3], self.inner.y
        )
    }
}

impl PyParams {
    fn check_level(&self, j: usize) -> PyResult<()> {
        if !(1..=4).contains(&j) {
            return Err(PyValueError::new_err(format!("level must be 1..4, got {j}")));
        }
        Ok(())
    }
}

/// Exact threshold exponent gamma_0(h, k) as an "a/b" string; the default
/// (4, 4) is the four-biquadrates case 4059/16384.
#[pyfunction]
#[pyo3(signature = (h = 4, k = 4))]
fn gamma0(h: u32, k: u32) -> PyResult<String> {
    Ok(ratio_string(&gamma0_general(h, k).map_err(to_py)?))
}

/// Upper end of the admissible exponent window, 4992/16384 = 39/128.
#[pyfunction]
fn gamma1() -> String {
    ratio_string(&params::gamma1())
}

/// Is gamma ("a/b") inside the admissible window (gamma_0, gamma_1]?
#[pyfunction]
fn gamma_in_window(gamma: &str) -> PyResult<bool> {
    Ok(params::gamma_in_window(&big_ratio(gamma)?))
}

/// f(alpha, X) = sum of e(alpha x^4) over x in (X/2, X].
#[pyfunction]
#[pyo3(signature = (alpha, x))]
fn f(alpha: &Bound<'_, PyAny>, x: f64) -> PyResult<Complex64> {
    Ok(weyl_f(&alpha_from_any(alpha)?, x))
}

/// g(alpha, Y) = sum of e(alpha y) over 0 <= y < Y.
#[pyfunction]
#[pyo3(signature = (alpha, y))]
fn g(alpha: &Bound<'_, PyAny>, y: f64) -> PyResult<Complex64> {
    Ok(weyl_g(&alpha_from_any(alpha)?, y))
}

/// nu(alpha, X) = sum of (1/4) z^(-3/4) e(alpha z) over z in (X^4/16, X^4].
#[pyfunction]
#[pyo3(signature = (alpha, x, term_budget = 100_000_000))]
fn nu(alpha: &Bound<'_, PyAny>, x: f64, term_budget: u64) -> PyResult<Complex64> {
    mollified_nu(&alpha_from_any(alpha)?, x, term_budget).map_err(to_py)
}

/// H(alpha, X, Z): the differenced sum over 1 <= h <= Z, X/2 < x, x+h <= X.
#[pyfunction]
#[pyo3(signature = (alpha, x, z))]
fn h(alpha: &Bound<'_, PyAny>, x: f64, z: f64) -> PyResult<Complex64> {
    Ok(diff_sum_h(&alpha_from_any(alpha)?, x, z))
}

/// Exact value of the torus integral of |nu(., X)|^2 (orthogonality).
#[pyfunction]
fn nu_mean_square(x: f64) -> PyResult<f64> {
    nu_parseval(x).map_err(to_py)
}

/// r(n, X): ordered pairs x, x' in (X/2, X] with x'^4 - x^4 = n.
#[pyfunction]
fn r(n: i128, x: f64) -> u64 {
    count_r(n, x)
}

/// r'(n): pairs (h, x) with 1 <= h <= Z_1, X_1/2 < x, x + h <= P_1 and
/// (x+h)^4 - x^4 = n. Zero at n = 0 by convention.
#[pyfunction]
fn r_prime(n: u128, p: &PyParams) -> u64 {
    count_r_prime(n, &p.inner)
}

/// rho(n): the weighted triple-profile autocorrelation at lag |n|.
#[pyfunction]
#[pyo3(signature = (n, p, term_budget = 1 << 24))]
fn rho(n: i128, p: &PyParams, term_budget: u64) -> PyResult<f64> {
    count_rho(n, &p.inner, term_budget).map_err(to_py)
}

/// Closed form of U(n) as the weighted diophantine sum.
#[pyfunction]
#[pyo3(signature = (n, p, term_budget = 1 << 24))]
fn u_weighted_sum(n: i128, p: &PyParams, term_budget: u64) -> PyResult<f64> {
    u_closed_form(n, &p.inner, term_budget).map_err(to_py)
}

/// Ascending list of integers <= limit expressible as a sum of four positive
/// fourth powers. `cap` bounds the returned list length (a budget error when
/// exceeded, never a silent truncation).
#[pyfunction]
#[pyo3(signature = (limit, window_bits = None, cap = 1 << 20))]
fn enumerate(limit: u128, window_bits: Option<u64>, cap: usize) -> PyResult<Vec<u128>> {
    let mut config = EnumerationConfig::default();
    if let Some(w) = window_bits {
        config.window_bits = w;
    }
    let mut out = Vec::new();
    for v in enumerate_representable_with(limit, config).map_err(to_py)? {
        if out.len() >= cap {
            return Err(to_py(Error::BudgetExceeded {
                what: "enumerated value list".into(),
                needed: cap as u128 + 1,
                budget: cap as u128,
            }));
        }
        out.push(v);
    }
    Ok(out)
}

/// Gap statistics of the representable set up to `limit`.
#[pyfunction]
#[pyo3(signature = (limit, window_bits = None))]
fn gaps<'py>(py: Python<'py>, limit: u128, window_bits: Option<u64>) -> PyResult<Bound<'py, PyDict>> {
    let mut config = EnumerationConfig::default();
    if let Some(w) = window_bits {
        config.window_bits = w;
    }
    let rep = gap_statistics_with(limit, config).map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("limit", rep.limit)?;
    d.set_item("count", rep.count)?;
    d.set_item("max_gap", rep.max_gap)?;
    d.set_item("max_gap_location", rep.max_gap_location)?;
    d.set_item("first", rep.first)?;
    d.set_item("last", rep.last)?;
    let hist = PyDict::new(py);
    for (gap, freq) in &rep.histogram {
        hist.set_item(gap, freq)?;
    }
    d.set_item("histogram", hist)?;
    Ok(d)
}

/// K'(N, Y): intervals (m - Y, m] with N/2 < m <= N containing no
/// representable integer.
#[pyfunction]
fn kprime(n: u128, y: f64) -> PyResult<u64> {
    count_empty_intervals(n, y).map_err(to_py)
}

/// K_gamma(N): empty intervals at width Y = m^gamma.
#[pyfunction]
fn kgamma(n: u128, gamma: f64) -> PyResult<u64> {
    count_empty_intervals_gamma(n, gamma).map_err(to_py)
}

/// Greedy four-step approximation of n by fourth powers; returns
/// (x1, x2, x3, x4, remainder).
#[pyfunction]
fn greedy(n: u128) -> PyResult<(u64, u64, u64, u64, u128)> {
    let g = greedy_approx(n).map_err(to_py)?;
    Ok((g.x[0], g.x[1], g.x[2], g.x[3], g.remainder))
}

/// Which level-j arc contains alpha: {"class": "central" | "major" | "minor"}
/// with "q" and "a" set on major arcs.
#[pyfunction]
fn classify<'py>(
    py: Python<'py>,
    alpha: &Bound<'_, PyAny>,
    j: usize,
    p: &PyParams,
) -> PyResult<Bound<'py, PyDict>> {
    let ratio = if let Ok(s) = alpha.extract::<String>() {
        big_ratio(&s)?
    } else {
        let x: f64 = alpha.extract()?;
        BigRational::from_float(x)
            .ok_or_else(|| PyValueError::new_err(format!("alpha must be finite, got {x}")))?
    };
    let class = classify_ratio(&ratio, j, &p.inner).map_err(to_py)?;
    let d = PyDict::new(py);
    match class {
        ArcClass::Central => d.set_item("class", "central")?,
        ArcClass::Major { q, a } => {
            d.set_item("class", "major")?;
            d.set_item("q", q)?;
            d.set_item("a", a)?;
        }
        ArcClass::Minor => d.set_item("class", "minor")?,
    }
    Ok(d)
}

/// Exact measures of the level-j arc partition, as "a/b" strings, plus the
/// phi-sum identity value for the major arcs.
#[pyfunction]
fn arc_measures<'py>(py: Python<'py>, j: usize, p: &PyParams) -> PyResult<Bound<'py, PyDict>> {
    let parts = build_arcs(j, &p.inner).map_err(to_py)?;
    let total = parts.central.measure() + parts.major.measure() + parts.minor.measure();
    let d = PyDict::new(py);
    d.set_item("central", ratio_string(&parts.central.measure()))?;
    d.set_item("major", ratio_string(&parts.major.measure()))?;
    d.set_item("minor", ratio_string(&parts.minor.measure()))?;
    d.set_item("total", ratio_string(&total))?;
    d.set_item(
        "major_phi",
        ratio_string(&major_measure_phi(j, &p.inner).map_err(to_py)?),
    )?;
    Ok(d)
}

fn resolve_set(name: &str, j: usize, p: &Parameters) -> Result<ArcSet, Error> {
    match name {
        "full" => Ok(ArcSet::full_torus()),
        "central" => Ok(build_arcs(j, p)?.central),
        "major" => Ok(build_arcs(j, p)?.major),
        "minor" => Ok(build_arcs(j, p)?.minor),
        "a0" => a_set(j, p, 0),
        "a1" => a_set(j, p, 1),
        other => Err(Error::InvalidInput(format!(
            "unknown arc set {other:?}; expected full, central, major, minor, a0 or a1"
        ))),
    }
}

/// One of the torus integrals R, U, S, T, V, W over an arc set
/// ("full", "central", "major", "minor", "a0", "a1"); R and U need n.
#[pyfunction]
#[pyo3(signature = (
    which, p, set = "full", j = 1, n = None,
    rel_tol = 1e-8, max_grid = 1 << 26, max_evals = 500_000, nu_terms = 100_000_000,
))]
#[allow(clippy::too_many_arguments)]
fn integrate<'py>(
    py: Python<'py>,
    which: &str,
    p: &PyParams,
    set: &str,
    j: usize,
    n: Option<i128>,
    rel_tol: f64,
    max_grid: usize,
    max_evals: usize,
    nu_terms: u64,
) -> PyResult<Bound<'py, PyDict>> {
    let kind = WhichIntegral::parse(which).map_err(to_py)?;
    let arc_set = resolve_set(set, j, &p.inner).map_err(to_py)?;
    let budget = QuadratureBudget {
        max_grid_points: max_grid,
        max_panel_evals: max_evals,
        rel_tol,
        nu_terms,
    };
    let r = integral(kind, &p.inner, &arc_set, n, &budget).map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("value", Complex64::new(r.value.re, r.value.im))?;
    d.set_item("abs", r.value.norm())?;
    d.set_item("method", r.method)?;
    d.set_item("grid_m", r.grid_m)?;
    d.set_item("error_estimate", r.error_estimate)?;
    d.set_item("evals", r.evals)?;
    Ok(d)
}

/// Convert an exact "a/b" string to the nearest double.
#[pyfunction]
fn ratio_to_float(s: &str) -> PyResult<f64> {
    Ok(ratio_to_f64(&big_ratio(s)?))
}

#[pymodule]
fn biquadrates_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyParams>()?;
    m.add_function(wrap_pyfunction!(gamma0, m)?)?;
    m.add_function(wrap_pyfunction!(gamma1, m)?)?;
    m.add_function(wrap_pyfunction!(gamma_in_window, m)?)?;
    m.add_function(wrap_pyfunction!(f, m)?)?;
    m.add_function(wrap_pyfunction!(g, m)?)?;
    m.add_function(wrap_pyfunction!(nu, m)?)?;
    m.add_function(wrap_pyfunction!(h, m)?)?;
    m.add_function(wrap_pyfunction!(nu_mean_square, m)?)?;
    m.add_function(wrap_pyfunction!(r, m)?)?;
    m.add_function(wrap_pyfunction!(r_prime, m)?)?;
    m.add_function(wrap_pyfunction!(rho, m)?)?;
    m.add_function(wrap_pyfunction!(u_weighted_sum, m)?)?;
    m.add_function(wrap_pyfunction!(enumerate, m)?)?;
    m.add_function(wrap_pyfunction!(gaps, m)?)?;
    m.add_function(wrap_pyfunction!(kprime, m)?)?;
    m.add_function(wrap_pyfunction!(kgamma, m)?)?;
    m.add_function(wrap_pyfunction!(greedy, m)?)?;
    m.add_function(wrap_pyfunction!(classify, m)?)?;
    m.add_function(wrap_pyfunction!(arc_measures, m)?)?;
    m.add_function(wrap_pyfunction!(integrate, m)?)?;
    m.add_function(wrap_pyfunction!(ratio_to_float, m)?)?;
    Ok(())
}
