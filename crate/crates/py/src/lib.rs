//! Python bindings. Rationals cross the boundary as `fractions.Fraction`,
//! integers as Python `int`, Maass values as `complex`.

use lvanish::arith::{Discriminant, Rational};
use lvanish::cli::parse_rational;
use lvanish::gamma0::{build_context, index_formula};
use lvanish::localpoly::{self as lp, HeckeSpec, LocalPolyParams};
use lvanish::maassnum::{ComplexPoint, MaassEvalConfig, MaassForm};
use lvanish::qforms;
use lvanish::vanish::{self, D0Choice, VanishJob};
use num_bigint::BigInt;
use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn bad<E: std::fmt::Display>(e: E) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn failed<E: std::fmt::Display>(e: E) -> PyErr {
    PyRuntimeError::new_err(e.to_string())
}

/// Accepts `Fraction`, `int` or a string such as `"-3/7"`.
fn to_rational(x: &Bound<'_, PyAny>) -> PyResult<Rational> {
    if let Ok(r) = x.extract::<Rational>() {
        return Ok(r);
    }
    if let Ok(n) = x.extract::<BigInt>() {
        return Ok(Rational::from_integer(n));
    }
    let s: String = x.extract().map_err(|_| bad("expected Fraction, int or str"))?;
    parse_rational(&s).map_err(bad)
}

fn hecke_spec(hecke: Option<Vec<(u64, i64)>>) -> HeckeSpec {
    HeckeSpec::new(hecke.unwrap_or_default())
}

fn point(z: Complex64) -> PyResult<ComplexPoint> {
    ComplexPoint::new(z.re, z.im).map_err(bad)
}

/// Binary quadratic form `[a, b, c]`.
#[pyclass(name = "QuadForm", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyQuadForm(qforms::QuadForm);

#[pymethods]
impl PyQuadForm {
    #[new]
    fn new(a: BigInt, b: BigInt, c: BigInt) -> Self {
        PyQuadForm(qforms::QuadForm::new(a, b, c))
    }

    #[getter]
    fn a(&self) -> BigInt {
        self.0.a.clone()
    }

    #[getter]
    fn b(&self) -> BigInt {
        self.0.b.clone()
    }

    #[getter]
    fn c(&self) -> BigInt {
        self.0.c.clone()
    }

    #[getter]
    fn discriminant(&self) -> BigInt {
        self.0.discriminant().clone()
    }

    fn __call__(&self, x: BigInt, y: BigInt) -> BigInt {
        self.0.eval(&x, &y)
    }

    /// Image under the Fricke involution of level `n`.
    fn fricke(&self, n: BigInt) -> PyResult<Self> {
        qforms::fricke(&self.0, &n).map(PyQuadForm).map_err(bad)
    }

    /// Genus character `chi_{d0}` by definition.
    fn chi(&self, d0: BigInt) -> PyResult<i32> {
        let d0 = Discriminant::new(d0).map_err(bad)?;
        let q = lvanish::genus::GenusCharQuery::new(d0, self.0.clone()).map_err(bad)?;
        lvanish::genus::chi_by_definition(&q).map_err(failed)
    }

    fn __repr__(&self) -> String {
        format!("QuadForm{}", self.0)
    }

    fn __eq__(&self, other: &Self) -> bool {
        self.0 == other.0
    }
}

/// Parameters `(k, N, D, D0)` of the weighted local polynomial.
#[pyclass(name = "LocalPoly", frozen)]
struct PyLocalPoly {
    params: LocalPolyParams,
}

#[pymethods]
impl PyLocalPoly {
    #[new]
    fn new(k: u32, n: u64, d: BigInt, d0: BigInt) -> PyResult<Self> {
        Ok(PyLocalPoly {
            params: LocalPolyParams::new(k, n, d, d0).map_err(bad)?,
        })
    }

    #[getter]
    fn delta(&self) -> BigInt {
        self.params.delta.clone()
    }

    /// Coefficients, constant term first, of the polynomial valid near `x0`.
    fn poly_at(&self, x0: &Bound<'_, PyAny>) -> PyResult<Vec<Rational>> {
        let p = lp::weighted_poly(&self.params, &to_rational(x0)?).map_err(failed)?;
        Ok(p.coeffs().to_vec())
    }

    /// Value of the weighted sum at `x`.
    fn value(&self, x: &Bound<'_, PyAny>) -> PyResult<Rational> {
        lp::nonconst_sum(&self.params, &to_rational(x)?).map_err(failed)
    }

    /// Hecke-projected value `S(x)`; `hecke` is a list of `(p, shift)`.
    #[pyo3(signature = (x, hecke=None))]
    fn projected(&self, x: &Bound<'_, PyAny>, hecke: Option<Vec<(u64, i64)>>) -> PyResult<Rational> {
        let spec = hecke_spec(hecke);
        spec.validate(self.params.n).map_err(bad)?;
        vanish::s_value(&self.params, &spec, &to_rational(x)?).map_err(failed)
    }

    fn __repr__(&self) -> String {
        let p = &self.params;
        format!("LocalPoly(k={}, N={}, D={}, D0={})", p.k, p.n, p.d, p.d0)
    }
}

/// Unweighted sum `p_{N,Delta}(x)`.
#[pyfunction]
fn zagier_sum(n: u64, delta: BigInt, x: &Bound<'_, PyAny>) -> PyResult<Rational> {
    lp::zagier_sum(n, &delta, &to_rational(x)?).map_err(failed)
}

/// Coefficients of `p_{N,Delta,0}`, constant term first.
#[pyfunction]
fn zagier_zero_poly(n: u64, delta: BigInt) -> PyResult<Vec<Rational>> {
    let (p, _, _) = lp::zagier_zero_poly(n, &delta).map_err(failed)?;
    Ok(p.coeffs().to_vec())
}

#[pyfunction]
fn gamma0_index(n: u64) -> u64 {
    index_formula(n)
}

/// Generators of `Gamma0(N)` as `(a, b, c, d)` tuples.
#[pyfunction]
fn gamma0_generators(n: u64) -> PyResult<Vec<(BigInt, BigInt, BigInt, BigInt)>> {
    let ctx = build_context(n).map_err(bad)?;
    Ok(ctx
        .generators
        .iter()
        .map(|g| (g.m11.clone(), g.m12.clone(), g.m21.clone(), g.m22.clone()))
        .collect())
}

/// Points `gamma_i^j . base` used by the vanishing test.
#[pyfunction]
fn evaluation_points(n: u64, k: u32) -> PyResult<Vec<Rational>> {
    let ctx = build_context(n).map_err(bad)?;
    Ok(ctx.evaluation_points(k).into_iter().map(|e| e.point).collect())
}

/// Runs the vanishing test. `d0` is a single value or a list to choose from
/// by Kronecker symbols. Returns one dict per accepted discriminant.
#[pyfunction]
#[pyo3(signature = (k, n, d0, candidates, hecke=None))]
fn decide<'py>(
    py: Python<'py>,
    k: u32,
    n: u64,
    d0: &Bound<'py, PyAny>,
    candidates: Vec<BigInt>,
    hecke: Option<Vec<(u64, i64)>>,
) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let choice = match d0.extract::<BigInt>() {
        Ok(v) => D0Choice::Fixed(v),
        Err(_) => D0Choice::Auto(d0.extract()?),
    };
    let job = VanishJob::new(k, n, choice, candidates, hecke_spec(hecke));
    let report = py.detach(|| vanish::decide(&job)).map_err(failed)?;
    let mut out = Vec::new();
    for r in &report.reports {
        let d = PyDict::new(py);
        d.set_item("D", r.d.clone())?;
        d.set_item("D0", r.d0.clone())?;
        d.set_item("verdict", r.verdict.to_string())?;
        d.set_item("constant", r.constant.clone())?;
        let table: Vec<(Rational, Rational)> = r.table.iter().map(|p| (p.point.clone(), p.value.clone())).collect();
        d.set_item("table", table)?;
        d.set_item("rounds", r.rounds_used)?;
        out.push(d);
    }
    for r in &report.rejected {
        let d = PyDict::new(py);
        d.set_item("D", r.d.clone())?;
        d.set_item("rejected", r.reason.clone())?;
        out.push(d);
    }
    Ok(out)
}

/// Truncated numerical evaluation of the Maass form `F_{k,N,D,D0}`.
#[pyclass(name = "MaassForm", frozen)]
struct PyMaassForm(MaassForm);

#[pymethods]
impl PyMaassForm {
    #[new]
    #[pyo3(signature = (k, n, d, d0, a_bound=4050, b_window=30))]
    fn new(k: u32, n: u64, d: BigInt, d0: BigInt, a_bound: u64, b_window: u32) -> PyResult<Self> {
        let params = LocalPolyParams::new(k, n, d, d0).map_err(bad)?;
        let cfg = MaassEvalConfig::new(params, a_bound, b_window).map_err(bad)?;
        Ok(PyMaassForm(MaassForm::new(cfg).map_err(bad)?))
    }

    fn __call__(&self, py: Python<'_>, z: Complex64) -> PyResult<Complex64> {
        let z = point(z)?;
        py.detach(|| self.0.eval(z)).map(|v| v.value).map_err(failed)
    }

    /// `|(cz + d)^{2k-2} F(gz) - F(z)| / max(1, |F(z)|)` for `g` in `Gamma0(N)`.
    fn modularity_residual(&self, py: Python<'_>, g: (i64, i64, i64, i64), z: Complex64) -> PyResult<f64> {
        let z = point(z)?;
        let g = qforms::GL2Matrix::new(g.0, g.1, g.2, g.3);
        py.detach(|| self.0.check_modularity(&g, z)).map_err(bad)
    }

    fn fricke_residual(&self, py: Python<'_>, z: Complex64) -> PyResult<f64> {
        let z = point(z)?;
        py.detach(|| self.0.check_fricke(z)).map_err(failed)
    }
}

/// Runs the command-line interface; returns its exit code.
#[pyfunction]
fn run_cli(py: Python<'_>, argv: Vec<String>) -> i32 {
    py.detach(|| lvanish::cli::run(std::iter::once("lvanish".to_string()).chain(argv)))
}

#[pymodule(name = "lvanish")]
fn lvanish_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyQuadForm>()?;
    m.add_class::<PyLocalPoly>()?;
    m.add_class::<PyMaassForm>()?;
    m.add_function(wrap_pyfunction!(zagier_sum, m)?)?;
    m.add_function(wrap_pyfunction!(zagier_zero_poly, m)?)?;
    m.add_function(wrap_pyfunction!(gamma0_index, m)?)?;
    m.add_function(wrap_pyfunction!(gamma0_generators, m)?)?;
    m.add_function(wrap_pyfunction!(evaluation_points, m)?)?;
    m.add_function(wrap_pyfunction!(decide, m)?)?;
    m.add_function(wrap_pyfunction!(run_cli, m)?)?;
    Ok(())
}
