//! Python bindings for the lslcop library: diagonal construction and
//! validation, copula surface/kernel evaluation, star products and their
//! iteration, concordance measures, sampling, and the (τ, ρ)-region scan.
//!
//! Build with `cargo build -p lslcop-py --release`; the produced
//! `liblslcop_py.so` imports as the `lslcop_py` module once renamed to
//! `lslcop_py.so` (see `python/smoke_test.py`, which does this on the fly).

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use lslcop::concordance as conc;
use lslcop::diagonal;
use lslcop::jsonio;
use lslcop::lsl;
use lslcop::project;
use lslcop::star as star_mod;
use lslcop::validate;

fn err(e: lslcop::error::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// A copula diagonal: piecewise-linear knots or one of the parametric
/// families. Immutable; all operations return new objects.
#[pyclass(name = "Diagonal", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyDiagonal {
    inner: diagonal::Diagonal,
}

impl PyDiagonal {
    fn wrap(inner: diagonal::Diagonal) -> Self {
        PyDiagonal { inner }
    }
}

#[pymethods]
impl PyDiagonal {
    /// Piecewise-linear diagonal through the given (x, y) knots.
    #[staticmethod]
    fn pwl(knots: Vec<(f64, f64)>) -> PyResult<Self> {
        Ok(Self::wrap(diagonal::make_pwl(&knots).map_err(err)?))
    }

    /// Lower-boundary family: ax for x ≤ a, then x².
    #[staticmethod]
    fn lower_l(a: f64) -> PyResult<Self> {
        Ok(Self::wrap(diagonal::Diagonal::lower_l(a).map_err(err)?))
    }

    /// Upper (idempotent) family: x²/a for x ≤ a, then x.
    #[staticmethod]
    fn upper_u(a: f64) -> PyResult<Self> {
        Ok(Self::wrap(diagonal::Diagonal::upper_u(a).map_err(err)?))
    }

    /// Power diagonal x^p, p ∈ [1, 2].
    #[staticmethod]
    fn power(p: f64) -> PyResult<Self> {
        Ok(Self::wrap(diagonal::Diagonal::power(p).map_err(err)?))
    }

    /// Diagonal of the Markov product of two Marshall–Olkin copulas.
    #[staticmethod]
    fn mo_star(alpha: f64, beta: f64) -> PyResult<Self> {
        Ok(Self::wrap(
            diagonal::Diagonal::mo_star(alpha, beta).map_err(err)?,
        ))
    }

    /// Convex combination w·left + (1−w)·right.
    #[staticmethod]
    fn mix(left: &PyDiagonal, right: &PyDiagonal, w: f64) -> PyResult<Self> {
        Ok(Self::wrap(
            diagonal::mix(&left.inner, &right.inner, w).map_err(err)?,
        ))
    }

    /// Independence diagonal x².
    #[staticmethod]
    fn independence() -> Self {
        Self::wrap(diagonal::Diagonal::independence())
    }

    /// Comonotone diagonal x.
    #[staticmethod]
    fn comonotone() -> Self {
        Self::wrap(diagonal::Diagonal::comonotone())
    }

    /// Seeded random class member with roughly `knots` knots.
    #[staticmethod]
    #[pyo3(signature = (seed, knots = 8))]
    fn random(seed: u64, knots: usize) -> PyResult<Self> {
        Ok(Self::wrap(project::random_dlsl(seed, knots).map_err(err)?))
    }

    /// Parse the JSON interchange format.
    #[staticmethod]
    fn from_json(s: &str) -> PyResult<Self> {
        Ok(Self::wrap(jsonio::from_json(s).map_err(err)?))
    }

    /// Serialize to the JSON interchange format (17 significant digits).
    fn to_json(&self) -> String {
        jsonio::diagonal_json(&self.inner)
    }

    /// δ(x).
    fn __call__(&self, x: f64) -> f64 {
        self.inner.eval(x)
    }

    fn eval(&self, x: f64) -> f64 {
        self.inner.eval(x)
    }

    /// Class-membership report: `{"is_member": bool, "tol": float,
    /// "violations": [{"condition", "witness_x", "magnitude"}, …]}`.
    #[pyo3(signature = (tol = None))]
    fn validate<'py>(&self, py: Python<'py>, tol: Option<f64>) -> PyResult<Bound<'py, PyDict>> {
        let tol = tol.unwrap_or_else(|| validate::default_tol(&self.inner));
        let rep = validate::validate_dlsl(&self.inner, tol);
        let d = PyDict::new(py);
        d.set_item("is_member", rep.is_member)?;
        d.set_item("tol", rep.tol)?;
        let vs: Vec<Bound<'py, PyDict>> = rep
            .violations
            .iter()
            .map(|v| {
                let vd = PyDict::new(py);
                vd.set_item("condition", v.condition.as_str())?;
                vd.set_item("witness_x", v.witness_x)?;
                vd.set_item("magnitude", v.magnitude)?;
                Ok(vd)
            })
            .collect::<PyResult<_>>()?;
        d.set_item("violations", vs)?;
        Ok(d)
    }

    /// Abscissae where the diagonal changes analytic form.
    fn cut_points(&self) -> Vec<f64> {
        self.inner.cut_points()
    }

    fn __repr__(&self) -> String {
        format!("Diagonal({})", jsonio::diagonal_json(&self.inner))
    }
}

/// Copula surface S_δ(x, y) = min(x,y)·δ(max(x,y))/max(x,y).
#[pyfunction]
fn surface(d: &PyDiagonal, x: f64, y: f64) -> f64 {
    lsl::surface(&d.inner, x, y)
}

/// Markov kernel cdf K(x, [0, y]); conditioning needs x ∈ (0, 1).
#[pyfunction]
fn kernel_cdf(d: &PyDiagonal, x: f64, y: f64) -> PyResult<f64> {
    lsl::kernel_cdf(&d.inner, x, y).map_err(err)
}

/// Mass of the singular component concentrated on the diagonal.
#[pyfunction]
fn singular_mass(d: &PyDiagonal) -> f64 {
    lsl::singular_mass(&d.inner)
}

/// Kendall's τ, closed form.
#[pyfunction]
fn tau(d: &PyDiagonal) -> f64 {
    conc::tau(&d.inner)
}

/// Spearman's ρ, closed form.
#[pyfunction]
fn rho(d: &PyDiagonal) -> f64 {
    conc::rho(&d.inner)
}

/// All concordance measures, the singular mass, and the region flags.
#[pyfunction]
fn measures<'py>(py: Python<'py>, d: &PyDiagonal) -> PyResult<Bound<'py, PyDict>> {
    let r = conc::report(&d.inner);
    let out = PyDict::new(py);
    out.set_item("tau", r.tau)?;
    out.set_item("rho", r.rho)?;
    out.set_item("gamma", r.gamma)?;
    out.set_item("footrule", r.footrule)?;
    out.set_item("blomqvist", r.blomqvist)?;
    out.set_item("sing", r.sing)?;
    out.set_item("lower_bound_ok", r.lower_bound_ok)?;
    out.set_item("upper_conjecture_ok", r.upper_conjecture_ok)?;
    Ok(out)
}

/// Draw `n` points from the copula; identical seeds replay identical batches.
#[pyfunction]
#[pyo3(signature = (d, n, seed = 0))]
fn sample(d: &PyDiagonal, n: usize, seed: u64) -> PyResult<Vec<(f64, f64)>> {
    Ok(lsl::sample(&d.inner, n, seed).map_err(err)?.points)
}

/// Star (Markov) product projected into the class; returns
/// `(product, error_bound)`.
#[pyfunction]
#[pyo3(signature = (d1, d2, grid = 1025))]
fn star(d1: &PyDiagonal, d2: &PyDiagonal, grid: usize) -> PyResult<(PyDiagonal, f64)> {
    let r = star_mod::star(&d1.inner, &d2.inner, grid).map_err(err)?;
    Ok((PyDiagonal::wrap(r.product), r.error_bound))
}

/// Exact product surface value (S_{δ1} ∗ S_{δ2})(x, y).
#[pyfunction]
fn star_surface(d1: &PyDiagonal, d2: &PyDiagonal, x: f64, y: f64) -> PyResult<f64> {
    star_mod::star_surface(&d1.inner, &d2.inner, x, y).map_err(err)
}

/// Iterate δ, δ∗δ, δ^∗3, … to the idempotent limit. Returns a dict with
/// `limit`, `converged`, `iterations`, `sup_deltas`, `fitted_a`,
/// `fit_residual`.
#[pyfunction]
#[pyo3(signature = (d, tol = 1e-8, max_iter = 200, grid = 1025))]
fn iterate_star<'py>(
    py: Python<'py>,
    d: &PyDiagonal,
    tol: f64,
    max_iter: usize,
    grid: usize,
) -> PyResult<Bound<'py, PyDict>> {
    let t = star_mod::iterate_star(&d.inner, tol, max_iter, grid).map_err(err)?;
    let out = PyDict::new(py);
    out.set_item("limit", PyDiagonal::wrap(t.limit))?;
    out.set_item("converged", t.converged)?;
    out.set_item("iterations", t.iterations)?;
    out.set_item("sup_deltas", t.sup_deltas)?;
    out.set_item("fitted_a", t.fitted_a)?;
    out.set_item("fit_residual", t.fit_residual)?;
    Ok(out)
}

/// Class member hitting the (τ, ρ)-midpoint of two members.
#[pyfunction]
fn midpoint_construct(d1: &PyDiagonal, d2: &PyDiagonal) -> PyResult<PyDiagonal> {
    Ok(PyDiagonal::wrap(
        conc::midpoint_construct(&d1.inner, &d2.inner).map_err(err)?,
    ))
}

/// (τ, ρ, source) triples from family sweeps and random members;
/// `families` is a comma-separated subset of
/// `lower,upper,power,mix,random` or `"all"`.
#[pyfunction]
#[pyo3(signature = (n, seed = 0, families = "all"))]
fn region_scan(n: usize, seed: u64, families: &str) -> PyResult<Vec<(f64, f64, String)>> {
    let sel = conc::FamilySelector::parse(families).map_err(err)?;
    Ok(conc::region_scan(n, seed, sel)
        .into_iter()
        .map(|p| (p.tau, p.rho, p.source))
        .collect())
}

#[pymodule]
fn lslcop_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyDiagonal>()?;
    m.add_function(wrap_pyfunction!(surface, m)?)?;
    m.add_function(wrap_pyfunction!(kernel_cdf, m)?)?;
    m.add_function(wrap_pyfunction!(singular_mass, m)?)?;
    m.add_function(wrap_pyfunction!(tau, m)?)?;
    m.add_function(wrap_pyfunction!(rho, m)?)?;
    m.add_function(wrap_pyfunction!(measures, m)?)?;
    m.add_function(wrap_pyfunction!(sample, m)?)?;
    m.add_function(wrap_pyfunction!(star, m)?)?;
    m.add_function(wrap_pyfunction!(star_surface, m)?)?;
    m.add_function(wrap_pyfunction!(iterate_star, m)?)?;
    m.add_function(wrap_pyfunction!(midpoint_construct, m)?)?;
    m.add_function(wrap_pyfunction!(region_scan, m)?)?;
    Ok(())
}
