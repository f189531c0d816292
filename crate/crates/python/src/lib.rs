//! Python bindings. Complex numbers cross the boundary as Python `complex`.

use hardy_shift::cli::scenario::{run_scenario as run_scenario_rs, ScenarioParams};
use hardy_shift::nearly::{self, DecompResult, NearlyOptions};
use hardy_shift::subspace::{beurling_space as beurling_rs, model_space as model_rs};
use hardy_shift::{
    blaschke_scalar, diag_inner, monomial_inner, BlaschkeSpec, CoeffFn, DefectCertificate, Error, MatSymbol,
    ShiftOp, Subspace, C64, DEFAULT_TOL,
};
use pyo3::create_exception;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

create_exception!(hardy_shift, NotNearlyInvariant, PyValueError);

fn err(e: Error) -> PyErr {
    match e {
        Error::NotNearlyInvariant { .. } => NotNearlyInvariant::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

#[pyclass(name = "CoeffFn", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyCoeffFn(CoeffFn);

#[pymethods]
impl PyCoeffFn {
    /// `coeffs[n][i]` is the degree-`n` coefficient of component `i`.
    #[new]
    fn new(m: usize, coeffs: Vec<Vec<C64>>) -> PyResult<Self> {
        CoeffFn::new(m, coeffs).map(Self).map_err(err)
    }

    #[staticmethod]
    fn monomial(m: usize, k: usize, i: usize) -> Self {
        Self(CoeffFn::monomial(m, k, i))
    }

    #[getter]
    fn m(&self) -> usize {
        self.0.dim_m()
    }

    #[getter]
    fn deg(&self) -> usize {
        self.0.deg()
    }

    fn coeffs(&self) -> Vec<Vec<C64>> {
        self.0.coeffs()
    }

    fn norm(&self) -> f64 {
        self.0.norm()
    }

    fn inner(&self, other: &PyCoeffFn) -> PyResult<C64> {
        self.0.inner_product(&other.0).map_err(err)
    }

    fn shift(&self) -> Self {
        Self(self.0.shift())
    }

    fn backshift(&self) -> Self {
        Self(self.0.backshift())
    }

    fn eval(&self, z: C64) -> PyResult<Vec<C64>> {
        self.0.eval_at(z).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!("CoeffFn(m={}, deg={})", self.0.dim_m(), self.0.deg())
    }
}

#[pyclass(name = "Symbol", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PySymbol(MatSymbol);

#[pymethods]
impl PySymbol {
    #[staticmethod]
    #[pyo3(signature = (zeros, deg, rotation = C64::new(1.0, 0.0)))]
    fn blaschke(zeros: Vec<C64>, deg: usize, rotation: C64) -> PyResult<Self> {
        let spec = BlaschkeSpec::new(zeros, rotation).map_err(err)?;
        blaschke_scalar(&spec, deg).map(Self).map_err(err)
    }

    #[staticmethod]
    fn monomial(k: usize, deg: usize) -> PyResult<Self> {
        monomial_inner(k, deg).map(Self).map_err(err)
    }

    #[staticmethod]
    fn diag(entries: Vec<PyRef<'_, PySymbol>>, deg: usize) -> PyResult<Self> {
        let e: Vec<MatSymbol> = entries.iter().map(|s| s.0.clone()).collect();
        diag_inner(&e, deg).map(Self).map_err(err)
    }

    #[getter]
    fn deg(&self) -> usize {
        self.0.deg()
    }

    #[getter]
    fn shape(&self) -> (usize, usize) {
        (self.0.m_out(), self.0.m_in())
    }

    #[getter]
    fn tail_bound(&self) -> f64 {
        self.0.tail_bound()
    }

    /// Row-major value at `z`.
    fn eval(&self, z: C64) -> Vec<Vec<C64>> {
        let v = self.0.eval(z);
        (0..v.nrows()).map(|i| v.row(i).iter().copied().collect()).collect()
    }

    fn column(&self, j: usize) -> PyCoeffFn {
        PyCoeffFn(self.0.column(j))
    }

    #[pyo3(signature = (f, deg = None))]
    fn apply(&self, f: &PyCoeffFn, deg: Option<usize>) -> PyResult<PyCoeffFn> {
        let out = match deg {
            Some(d) => self.0.apply_multiplier(&f.0, d),
            None => self.0.apply(&f.0),
        };
        out.map(PyCoeffFn).map_err(err)
    }

    fn adjoint_apply(&self, g: &PyCoeffFn) -> PyResult<PyCoeffFn> {
        self.0.adjoint_apply(&g.0).map(PyCoeffFn).map_err(err)
    }
}

#[pyclass(name = "Certificate", frozen, skip_from_py_object)]
struct PyCertificate(DefectCertificate);

#[pymethods]
impl PyCertificate {
    #[getter]
    fn op(&self) -> String {
        self.0.op.to_string()
    }

    #[getter]
    fn defect_dim(&self) -> usize {
        self.0.defect_dim
    }

    #[getter]
    fn singular_values(&self) -> Vec<f64> {
        self.0.singular_values.clone()
    }

    #[getter]
    fn max_residual(&self) -> f64 {
        self.0.max_residual
    }

    #[getter]
    fn passed(&self) -> bool {
        self.0.passed()
    }

    fn defect_basis(&self) -> Vec<PyCoeffFn> {
        self.0.defect_basis.iter().cloned().map(PyCoeffFn).collect()
    }
}

#[pyclass(name = "Subspace", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PySubspace(Subspace);

fn unwrap_fns(fns: &[PyRef<'_, PyCoeffFn>]) -> Vec<CoeffFn> {
    fns.iter().map(|f| f.0.clone()).collect()
}

#[pymethods]
impl PySubspace {
    /// Span of `functions` inside polynomials of degree at most `ambient_deg`.
    #[new]
    #[pyo3(signature = (m, ambient_deg, functions, tol = DEFAULT_TOL))]
    fn new(m: usize, ambient_deg: usize, functions: Vec<PyRef<'_, PyCoeffFn>>, tol: f64) -> PyResult<Self> {
        Subspace::from_spanning(m, &unwrap_fns(&functions), ambient_deg, tol)
            .map(Self)
            .map_err(err)
    }

    #[getter]
    fn dim(&self) -> usize {
        self.0.dim()
    }

    #[getter]
    fn m(&self) -> usize {
        self.0.dim_m()
    }

    #[getter]
    fn ambient_deg(&self) -> usize {
        self.0.ambient_deg()
    }

    fn basis(&self) -> Vec<PyCoeffFn> {
        self.0.basis().into_iter().map(PyCoeffFn).collect()
    }

    fn complement(&self) -> Self {
        Self(self.0.complement())
    }

    fn wandering(&self) -> PyResult<Self> {
        self.0.wandering().map(Self).map_err(err)
    }

    fn project(&self, f: &PyCoeffFn) -> PyResult<PyCoeffFn> {
        self.0.project(&f.0).map(PyCoeffFn).map_err(err)
    }

    fn distance(&self, other: &PySubspace) -> PyResult<f64> {
        self.0.distance(&other.0).map_err(err)
    }

    fn distance_to(&self, f: &PyCoeffFn) -> PyResult<f64> {
        self.0.distance_to(&f.0).map_err(err)
    }

    /// `op` is `"S"` or `"S*"`; `S` skips the top degree, which it would push out.
    #[pyo3(signature = (op = "S*"))]
    fn defect_of(&self, op: &str) -> PyResult<PyCertificate> {
        let op: ShiftOp = op.parse().map_err(err)?;
        self.0.defect_of_band(op).map(PyCertificate).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!(
            "Subspace(m={}, ambient_deg={}, dim={})",
            self.0.dim_m(),
            self.0.ambient_deg(),
            self.0.dim()
        )
    }
}

#[pyclass(name = "Decomposition", frozen, skip_from_py_object)]
struct PyDecomposition(DecompResult);

#[pymethods]
impl PyDecomposition {
    #[getter]
    fn k0(&self) -> Option<PyCoeffFn> {
        self.0.k0.clone().map(PyCoeffFn)
    }

    #[getter]
    fn kj(&self) -> Vec<PyCoeffFn> {
        self.0.kj.iter().cloned().map(PyCoeffFn).collect()
    }

    #[getter]
    fn gk_norms(&self) -> Vec<f64> {
        self.0.gk_norms.clone()
    }

    #[getter]
    fn norm_gap(&self) -> f64 {
        self.0.norm_gap
    }

    #[getter]
    fn iterations(&self) -> usize {
        self.0.iterations
    }

    #[getter]
    fn converged(&self) -> bool {
        self.0.converged
    }

    /// `(K₀, k₁, …, k_p)` stacked into one function.
    fn tuple(&self) -> PyResult<PyCoeffFn> {
        self.0.tuple().map(PyCoeffFn).map_err(err)
    }
}

#[pyfunction]
fn model_space(theta: &PySymbol, order: usize) -> PyResult<PySubspace> {
    model_rs(&theta.0, order).map(PySubspace).map_err(err)
}

#[pyfunction]
fn beurling_space(theta: &PySymbol, order: usize) -> PyResult<PySubspace> {
    beurling_rs(&theta.0, order).map(PySubspace).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (space, p = 0))]
fn certify_nearly(space: &PySubspace, p: usize) -> PyResult<PyCertificate> {
    nearly::certify_nearly(&space.0, p).map(PyCertificate).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (space, defect, f, eps = None, kmax = None))]
fn decompose(
    space: &PySubspace,
    defect: Vec<PyRef<'_, PyCoeffFn>>,
    f: &PyCoeffFn,
    eps: Option<f64>,
    kmax: Option<usize>,
) -> PyResult<PyDecomposition> {
    let mut opts = NearlyOptions::default();
    if let Some(e) = eps {
        opts.eps = e;
    }
    opts.k_max = kmax;
    nearly::decompose(&space.0, &unwrap_fns(&defect), &f.0, opts)
        .map(PyDecomposition)
        .map_err(err)
}

#[pyfunction]
fn extract_k(space: &PySubspace, defect: Vec<PyRef<'_, PyCoeffFn>>) -> PyResult<PySubspace> {
    nearly::extract_k(&space.0, &unwrap_fns(&defect), NearlyOptions::default())
        .map(PySubspace)
        .map_err(err)
}

#[pyfunction]
fn synthesize_m(
    k: &PySubspace,
    f0_columns: Vec<PyRef<'_, PyCoeffFn>>,
    e: Vec<PyRef<'_, PyCoeffFn>>,
    ambient_deg: usize,
) -> PyResult<PySubspace> {
    nearly::synthesize_m(&k.0, &unwrap_fns(&f0_columns), &unwrap_fns(&e), ambient_deg)
        .map(PySubspace)
        .map_err(err)
}

/// `(holds, residual)` for `S*W ⊆ M ⊕ span(defect)`.
#[pyfunction]
fn almost_invariant_sstar_check(space: &PySubspace, defect: Vec<PyRef<'_, PyCoeffFn>>) -> PyResult<(bool, f64)> {
    let out = nearly::almost_invariant_sstar_check(&space.0, &unwrap_fns(&defect)).map_err(err)?;
    Ok((out.holds, out.residual))
}

/// `(forward, dual)` verdicts of the two equivalent inclusions.
#[pyfunction]
fn duality_check(space: &PySubspace, defect: Vec<PyRef<'_, PyCoeffFn>>) -> PyResult<(bool, bool)> {
    let out = nearly::duality_check(&space.0, &unwrap_fns(&defect)).map_err(err)?;
    Ok((out.forward.holds, out.dual.holds))
}

/// Runs a named scenario and returns its report as JSON text.
#[pyfunction]
#[pyo3(signature = (id, params = None, seed = 0))]
fn run_scenario(id: &str, params: Option<Vec<(String, String)>>, seed: u64) -> PyResult<String> {
    let pairs: Vec<String> = params
        .unwrap_or_default()
        .into_iter()
        .map(|(k, v)| format!("{k}={v}"))
        .collect();
    let mut p = ScenarioParams::parse(&pairs).map_err(err)?;
    p.seed = seed;
    p.timing = false;
    let rep = run_scenario_rs(id, &p).map_err(err)?;
    serde_json::to_string(&rep).map_err(|e| PyValueError::new_err(e.to_string()))
}

#[pymodule]
#[pyo3(name = "hardy_shift")]
fn hardy_shift_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyCoeffFn>()?;
    m.add_class::<PySymbol>()?;
    m.add_class::<PySubspace>()?;
    m.add_class::<PyCertificate>()?;
    m.add_class::<PyDecomposition>()?;
    m.add("NotNearlyInvariant", m.py().get_type::<NotNearlyInvariant>())?;
    m.add_function(wrap_pyfunction!(model_space, m)?)?;
    m.add_function(wrap_pyfunction!(beurling_space, m)?)?;
    m.add_function(wrap_pyfunction!(certify_nearly, m)?)?;
    m.add_function(wrap_pyfunction!(decompose, m)?)?;
    m.add_function(wrap_pyfunction!(extract_k, m)?)?;
    m.add_function(wrap_pyfunction!(synthesize_m, m)?)?;
    m.add_function(wrap_pyfunction!(almost_invariant_sstar_check, m)?)?;
    m.add_function(wrap_pyfunction!(duality_check, m)?)?;
    m.add_function(wrap_pyfunction!(run_scenario, m)?)?;
    Ok(())
}
