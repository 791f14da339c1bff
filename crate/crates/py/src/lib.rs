//! Python bindings: `import pymersenne`.

use std::path::PathBuf;
use std::time::Duration;

use mersenne_divisors::experiments::{self, ImportSpec, OutputFormat, RunConfig};
use mersenne_divisors::stats::{MersenneStats, Sign};
use mersenne_divisors::{cyclotomic, hcn, Error, FactorPolicy, Factorization, Natural};
use num_bigint::BigUint;
use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;

create_exception!(pymersenne, MersenneError, PyException);
create_exception!(pymersenne, ParseError, MersenneError);
create_exception!(pymersenne, IncompleteError, MersenneError);
create_exception!(pymersenne, BudgetError, IncompleteError);

fn to_py(e: Error) -> PyErr {
    let msg = e.to_string();
    match e {
        Error::Parse { .. } => ParseError::new_err(msg),
        Error::Incomplete { .. } => IncompleteError::new_err(msg),
        Error::Budget { .. } => BudgetError::new_err(msg),
        Error::Domain(_) => PyValueError::new_err(msg),
        _ => MersenneError::new_err(msg),
    }
}

fn policy(budget_secs: Option<f64>, seed: u64) -> PyResult<FactorPolicy> {
    let time_budget = match budget_secs {
        Some(s) if !(s > 0.0 && s.is_finite()) => return Err(PyValueError::new_err("budget_secs must be positive")),
        Some(s) => Some(Duration::from_secs_f64(s)),
        None => None,
    };
    Ok(FactorPolicy { rng_seed: seed, time_budget, ..FactorPolicy::default() })
}

fn sign(s: &str) -> PyResult<Sign> {
    match s {
        "-" | "minus" => Ok(Sign::Minus),
        "+" | "plus" => Ok(Sign::Plus),
        _ => Err(PyValueError::new_err(format!("sign must be '-' or '+', got {s:?}"))),
    }
}

fn format(s: &str) -> PyResult<OutputFormat> {
    s.parse().map_err(PyValueError::new_err)
}

/// Prime factorization, possibly with an unsplit composite cofactor.
#[pyclass(name = "Factorization", frozen)]
struct PyFactorization(Factorization);

#[pymethods]
impl PyFactorization {
    /// `[(prime, exponent), ...]` in increasing order of prime.
    #[getter]
    fn factors(&self) -> Vec<(Natural, u64)> {
        self.0.factors().iter().map(|(p, pp)| (p.clone(), pp.exponent)).collect()
    }

    #[getter]
    fn cofactor(&self) -> Option<Natural> {
        self.0.cofactor().cloned()
    }

    #[getter]
    fn complete(&self) -> bool {
        self.0.is_complete()
    }

    #[getter]
    fn value(&self) -> Natural {
        self.0.value()
    }

    /// Number of divisors, or None while a cofactor remains.
    #[getter]
    fn tau(&self) -> Option<Natural> {
        self.0.tau()
    }

    /// Distinct primes found; a lower bound when incomplete.
    #[getter]
    fn omega(&self) -> u64 {
        self.0.omega_lower_bound()
    }

    fn __str__(&self) -> String {
        self.0.to_string()
    }

    fn __repr__(&self) -> String {
        format!("Factorization({:?})", self.0.to_string())
    }
}

#[pyfunction]
#[pyo3(signature = (n, budget_secs=None, seed=1))]
fn factor(n: BigUint, budget_secs: Option<f64>, seed: u64) -> PyResult<PyFactorization> {
    let p = policy(budget_secs, seed)?;
    mersenne_divisors::factor(&n, &p).map(PyFactorization).map_err(to_py)
}

/// `Phi_d(2)`.
#[pyfunction]
fn phi2(d: u64) -> PyResult<Natural> {
    cyclotomic::phi2(d).map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (d, budget_secs=None, seed=1))]
fn factor_phi2(d: u64, budget_secs: Option<f64>, seed: u64) -> PyResult<PyFactorization> {
    let p = policy(budget_secs, seed)?;
    cyclotomic::factor_phi2(d, &p).map(PyFactorization).map_err(to_py)
}

/// Highly composite numbers up to `limit` as `(n, tau, exponents)`.
#[pyfunction]
fn enumerate_hcn(limit: BigUint) -> Vec<(Natural, Natural, Vec<u32>)> {
    hcn::enumerate_hcn(&limit)
        .into_iter()
        .map(|r| (r.n, r.tau, r.exponents))
        .collect()
}

/// `sum ln(2^k - 1)` for `k <= n` against `n(n+1) ln 2 / 2`, as decimal strings.
#[pyfunction]
#[pyo3(signature = (n, digits=30))]
fn log_sum(n: u64, digits: usize) -> PyResult<Vec<(&'static str, String)>> {
    let s = experiments::log_sum(n).map_err(to_py)?;
    Ok(vec![
        ("log_sum", s.sum.to_decimal(digits)),
        ("main_term", s.main_term.to_decimal(digits)),
        ("half_n_squared_log2", s.leading_term.to_decimal(digits)),
        ("residual", s.residual.to_decimal(digits)),
        ("residual_bound", s.bound.to_decimal(digits)),
    ])
}

/// `counts[k]` is the number of `m <= x` with exactly `k` prime factors counted with multiplicity.
#[pyfunction]
fn omega_distribution(x: u64) -> PyResult<Vec<u64>> {
    experiments::omega_distribution(x).map_err(to_py)
}

/// Statistics context holding the factor store and imported tables.
#[pyclass(name = "Stats", frozen)]
struct PyStats {
    config: RunConfig,
    inner: MersenneStats,
}

#[pymethods]
impl PyStats {
    #[new]
    #[pyo3(signature = (store=None, imports=Vec::new(), budget_secs=None, seed=1, workers=0, offline=false))]
    fn new(
        store: Option<PathBuf>,
        imports: Vec<String>,
        budget_secs: Option<f64>,
        seed: u64,
        workers: usize,
        offline: bool,
    ) -> PyResult<Self> {
        let imports = imports
            .iter()
            .map(|s| ImportSpec::parse(s))
            .collect::<Result<Vec<_>, _>>()
            .map_err(to_py)?;
        let config = RunConfig {
            store_path: store,
            imports,
            policy: policy(budget_secs, seed)?,
            workers,
            offline,
            output_format: OutputFormat::Csv,
            out_path: None,
        };
        let inner = config.open().map_err(to_py)?;
        Ok(PyStats { config, inner })
    }

    #[pyo3(signature = (n, sign="-"))]
    fn factor_mersenne(&self, py: Python<'_>, n: u64, sign: &str) -> PyResult<PyFactorization> {
        let s = self::sign(sign)?;
        py.detach(|| self.inner.factor_mersenne(n, s)).map(PyFactorization).map_err(to_py)
    }

    #[pyo3(signature = (n, sign="-"))]
    fn tau_mersenne(&self, py: Python<'_>, n: u64, sign: &str) -> PyResult<Natural> {
        let s = self::sign(sign)?;
        py.detach(|| self.inner.tau_mersenne(n, s)).map_err(to_py)
    }

    /// `(omega, exact)` for `Phi_d(2)`.
    fn omega_phi2(&self, py: Python<'_>, d: u64) -> PyResult<(u64, bool)> {
        let w = py.detach(|| self.inner.omega_phi2(d)).map_err(to_py)?;
        Ok((w.omega, w.exact))
    }

    /// Record indices of `tau(2^n - 1)` up to `limit` as `(n, tau_minus, tau_plus, ratio)`
    /// with `ratio = tau_plus / n` as a `"p/q"` string.
    fn hcm_indices(&self, py: Python<'_>, limit: u64) -> PyResult<Vec<(u64, Natural, Natural, String)>> {
        let rows = py.detach(|| self.inner.hcm_indices(limit)).map_err(to_py)?;
        Ok(rows
            .into_iter()
            .map(|r| (r.n, r.tau_minus, r.tau_plus, mersenne_divisors::render::exact(&r.ratio_plus)))
            .collect())
    }

    /// `(exceptions, sup_ratio, argmax_d)` for `omega(Phi_d(2)) <= c ln d`.
    fn conjecture2(&self, py: Python<'_>, max_d: u64, c: f64) -> PyResult<(Vec<u64>, f64, u64)> {
        let s = py.detach(|| self.inner.conjecture2_scan(max_d, c)).map_err(to_py)?;
        Ok((s.exceptions, s.sup_ratio, s.argmax_d))
    }

    #[pyo3(signature = (limit=120, fmt="csv"))]
    fn table1(&self, py: Python<'_>, limit: u64, fmt: &str) -> PyResult<String> {
        let f = format(fmt)?;
        py.detach(|| experiments::table1(&self.inner, limit)).map(|t| t.render(f)).map_err(to_py)
    }

    #[pyo3(signature = (max_d=40, fmt="csv"))]
    fn table2(&self, py: Python<'_>, max_d: u64, fmt: &str) -> PyResult<String> {
        let f = format(fmt)?;
        py.detach(|| experiments::table2(&self.inner, max_d)).map(|t| t.render(f)).map_err(to_py)
    }

    #[pyo3(signature = (max_n=100, fmt="csv"))]
    fn figure1(&self, py: Python<'_>, max_n: u64, fmt: &str) -> PyResult<String> {
        let f = format(fmt)?;
        py.detach(|| experiments::figure1(&self.inner, max_n)).map(|t| t.render(f)).map_err(to_py)
    }

    #[pyo3(signature = (max_n=50, fmt="csv"))]
    fn figure2(&self, py: Python<'_>, max_n: u64, fmt: &str) -> PyResult<String> {
        let f = format(fmt)?;
        py.detach(|| experiments::figure2(&self.inner, max_n)).map(|t| t.render(f)).map_err(to_py)
    }

    #[pyo3(signature = (max_d=40, fmt="csv"))]
    fn figure3(&self, py: Python<'_>, max_d: u64, fmt: &str) -> PyResult<String> {
        let f = format(fmt)?;
        py.detach(|| experiments::figure3(&self.inner, max_d)).map(|t| t.render(f)).map_err(to_py)
    }

    /// Writes new factorizations back to the store file given at construction.
    fn save(&self) -> PyResult<()> {
        self.config.save(&self.inner).map_err(to_py)
    }

    fn export(&self, path: PathBuf) -> PyResult<usize> {
        experiments::export_store(&self.inner, &path).map_err(to_py)
    }

    #[getter]
    fn store_len(&self) -> usize {
        self.inner.store().len()
    }
}

#[pymodule]
fn pymersenne(m: &Bound<'_, PyModule>) -> PyResult<()> {
    let py = m.py();
    m.add("MersenneError", py.get_type::<MersenneError>())?;
    m.add("ParseError", py.get_type::<ParseError>())?;
    m.add("IncompleteError", py.get_type::<IncompleteError>())?;
    m.add("BudgetError", py.get_type::<BudgetError>())?;
    m.add_class::<PyFactorization>()?;
    m.add_class::<PyStats>()?;
    m.add_function(wrap_pyfunction!(factor, m)?)?;
    m.add_function(wrap_pyfunction!(phi2, m)?)?;
    m.add_function(wrap_pyfunction!(factor_phi2, m)?)?;
    m.add_function(wrap_pyfunction!(enumerate_hcn, m)?)?;
    m.add_function(wrap_pyfunction!(log_sum, m)?)?;
    m.add_function(wrap_pyfunction!(omega_distribution, m)?)?;
    Ok(())
}
