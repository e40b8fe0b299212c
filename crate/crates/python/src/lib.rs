//! Python bindings: `import ulam`.
//!
//! Group elements cross the boundary as plain Python values:
//!
//! | group                 | Python value              |
//! |-----------------------|---------------------------|
//! | `additive-reals`      | `float`                   |
//! | `mult-positive-reals` | positive `float`          |
//! | `free-group-2`        | `str`, e.g. `"ab⁻¹"`      |
//! | `heisenberg`          | `(x, y, z)` float tuple   |
//!
//! Approximate solutions and budgets are Python callables of one float.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::sync::{Arc, Mutex};

use pyo3::exceptions::{PyTypeError, PyValueError};
use pyo3::prelude::*;
use pyo3::IntoPyObjectExt;

use ulam_core::cli::config::Mode;
use ulam_core::cli::{execute, parse_config, RunConfig};
use ulam_core::group::{
    AdditiveReals, AnyElement, AnyGroup, GroupKind, HeisenbergElement, LogPositive, MultPositiveReals, Word,
};
use ulam_core::instances::{self, EquationKind, PhiSpec};
use ulam_core::{
    special, ApproximateSolution, EquationInstance, MetricGroup, PerturbationBudget, StabilizationResult as CoreResult,
    Stabilizer, StabilizerConfig, TailCertificate as CoreCertificate, TelescopingStatus,
};

fn value_error(e: impl ToString) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_element(kind: GroupKind, obj: &Bound<'_, PyAny>) -> PyResult<AnyElement> {
    match kind {
        GroupKind::AdditiveReals => Ok(AnyElement::Real(obj.extract()?)),
        GroupKind::MultPositiveReals => {
            let v: f64 = obj.extract()?;
            LogPositive::from_value(v)
                .map(AnyElement::Positive)
                .ok_or_else(|| value_error(format!("mult-positive-reals needs a positive float, got {v}")))
        }
        GroupKind::FreeGroup2 => {
            let s: String = obj.extract().map_err(|_| PyTypeError::new_err("free-group-2 elements are strings"))?;
            s.parse::<Word>().map(AnyElement::Word).map_err(value_error)
        }
        GroupKind::Heisenberg => {
            let (x, y, z): (f64, f64, f64) = obj.extract()?;
            Ok(AnyElement::Heisenberg(HeisenbergElement::new(x, y, z)))
        }
    }
}

fn from_element(py: Python<'_>, e: &AnyElement) -> PyResult<Py<PyAny>> {
    match e {
        AnyElement::Real(v) => v.into_py_any(py),
        AnyElement::Positive(p) => p.value().into_py_any(py),
        AnyElement::Word(w) => w.to_string().into_py_any(py),
        AnyElement::Heisenberg(h) => (h.x, h.y, h.z).into_py_any(py),
    }
}

/// A metric group chosen by name.
#[pyclass(name = "Group", module = "ulam", frozen)]
struct PyGroup {
    inner: AnyGroup,
}

#[pymethods]
impl PyGroup {
    #[new]
    fn new(name: &str) -> PyResult<Self> {
        let kind: GroupKind = name.parse().map_err(value_error)?;
        Ok(Self { inner: AnyGroup::new(kind) })
    }

    #[getter]
    fn name(&self) -> &'static str {
        self.inner.name()
    }

    #[getter]
    fn tolerance(&self) -> f64 {
        self.inner.tolerance()
    }

    #[getter]
    fn is_commutative(&self) -> bool {
        self.inner.is_commutative()
    }

    fn identity(&self, py: Python<'_>) -> PyResult<Py<PyAny>> {
        from_element(py, &self.inner.identity())
    }

    fn op(&self, py: Python<'_>, a: &Bound<'_, PyAny>, b: &Bound<'_, PyAny>) -> PyResult<Py<PyAny>> {
        let k = self.inner.kind();
        let r = self.inner.op(&to_element(k, a)?, &to_element(k, b)?).map_err(value_error)?;
        from_element(py, &r)
    }

    fn inv(&self, py: Python<'_>, a: &Bound<'_, PyAny>) -> PyResult<Py<PyAny>> {
        let r = self.inner.inv(&to_element(self.inner.kind(), a)?).map_err(value_error)?;
        from_element(py, &r)
    }

    fn dist(&self, a: &Bound<'_, PyAny>, b: &Bound<'_, PyAny>) -> PyResult<f64> {
        let k = self.inner.kind();
        self.inner.dist(&to_element(k, a)?, &to_element(k, b)?).map_err(value_error)
    }

    fn norm(&self, a: &Bound<'_, PyAny>) -> PyResult<f64> {
        let k = self.inner.kind();
        self.inner.dist(&self.inner.identity(), &to_element(k, a)?).map_err(value_error)
    }

    /// `a_n · … · a_p` for `elements = [a_p, …, a_n]`.
    fn ordered_product(&self, py: Python<'_>, elements: Vec<Bound<'_, PyAny>>) -> PyResult<Py<PyAny>> {
        let k = self.inner.kind();
        let elems = elements.iter().map(|e| to_element(k, e)).collect::<PyResult<Vec<_>>>()?;
        from_element(py, &self.inner.ordered_product(&elems).map_err(value_error)?)
    }

    fn __repr__(&self) -> String {
        format!("Group({:?})", self.inner.name())
    }
}

/// First error raised by a Python callback during a core call.
type ErrorSlot = Arc<Mutex<Option<PyErr>>>;

fn call_real(func: &Py<PyAny>, x: f64, slot: &ErrorSlot) -> f64 {
    Python::attach(|py| match func.call1(py, (x,)).and_then(|v| v.extract::<f64>(py)) {
        Ok(v) => v,
        Err(e) => {
            slot.lock().unwrap().get_or_insert(e);
            f64::NAN
        }
    })
}

fn raise_pending(slot: &ErrorSlot) -> PyResult<()> {
    match slot.lock().unwrap().take() {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

/// Conversion between a group's elements and Python floats.
trait FloatCarrier: MetricGroup {
    fn from_float(v: f64) -> Self::Element;
    fn to_float(e: &Self::Element) -> f64;
}

impl FloatCarrier for AdditiveReals {
    fn from_float(v: f64) -> f64 {
        v
    }
    fn to_float(e: &f64) -> f64 {
        *e
    }
}

impl FloatCarrier for MultPositiveReals {
    fn from_float(v: f64) -> LogPositive {
        LogPositive::from_value(v).unwrap_or(LogPositive::from_ln(f64::NAN))
    }
    fn to_float(e: &LogPositive) -> f64 {
        e.value()
    }
}

fn callables<G: FloatCarrier>(f: &Py<PyAny>, slot: &ErrorSlot) -> ApproximateSolution<G::Element> {
    let (f, slot) = (f.clone_ref_unbound(), Arc::clone(slot));
    ApproximateSolution::new(move |x: &f64| G::from_float(call_real(&f, *x, &slot)))
}

fn budget(eps: &Py<PyAny>, slot: &ErrorSlot) -> PerturbationBudget {
    let (eps, slot) = (eps.clone_ref_unbound(), Arc::clone(slot));
    PerturbationBudget::new(move |x: &f64| call_real(&eps, *x, &slot))
}

trait CloneUnbound {
    fn clone_ref_unbound(&self) -> Py<PyAny>;
}

impl CloneUnbound for Py<PyAny> {
    fn clone_ref_unbound(&self) -> Py<PyAny> {
        Python::attach(|py| self.clone_ref(py))
    }
}

/// Outcome of `Equation.stabilize`.
#[pyclass(name = "StabilizationResult", module = "ulam", frozen, get_all)]
struct PyStabilization {
    value: f64,
    iterations: usize,
    certified_bound: f64,
    last_step: f64,
    status: &'static str,
    strategy: Option<&'static str>,
}

#[pymethods]
impl PyStabilization {
    #[getter]
    fn converged(&self) -> bool {
        self.status == "converged"
    }

    fn __repr__(&self) -> String {
        format!(
            "StabilizationResult(value={}, status={:?}, iterations={}, certified_bound={})",
            self.value, self.status, self.iterations, self.certified_bound
        )
    }
}

fn wrap_result<G: FloatCarrier>(r: &CoreResult<G::Element>) -> PyStabilization {
    PyStabilization {
        value: G::to_float(&r.value),
        iterations: r.iterations,
        certified_bound: r.certified_bound,
        last_step: r.last_step,
        status: r.status.name(),
        strategy: r.certificate.as_ref().map(|c| c.strategy.name()),
    }
}

/// A certified bound on `Σ_{n≥0} ε(φⁿ(x))`.
#[pyclass(name = "TailCertificate", module = "ulam", frozen, get_all)]
struct PyCertificate {
    partial_sum: f64,
    tail_bound: f64,
    depth: usize,
    strategy: &'static str,
    phi_hat: f64,
}

#[pymethods]
impl PyCertificate {
    fn __repr__(&self) -> String {
        format!("TailCertificate(phi_hat={}, depth={}, strategy={:?})", self.phi_hat, self.depth, self.strategy)
    }
}

impl From<&CoreCertificate> for PyCertificate {
    fn from(c: &CoreCertificate) -> Self {
        Self {
            partial_sum: c.partial_sum,
            tail_bound: c.tail_bound,
            depth: c.depth,
            strategy: c.strategy.name(),
            phi_hat: c.phi_hat(),
        }
    }
}

/// One built-in instance with its reference solution.
struct Typed<G: MetricGroup> {
    instance: EquationInstance<G>,
    solution: ApproximateSolution<G::Element>,
}

enum Instance {
    Additive(Typed<AdditiveReals>),
    Mult(Typed<MultPositiveReals>),
}

macro_rules! dispatch {
    ($self:expr, $t:ident, $G:ident => $body:expr) => {
        match &$self.inner {
            Instance::Additive($t) => {
                #[allow(dead_code)]
                type $G = AdditiveReals;
                $body
            }
            Instance::Mult($t) => {
                #[allow(dead_code)]
                type $G = MultPositiveReals;
                $body
            }
        }
    };
}

/// A built-in equation `f(φ(x)) = g(x)·f(x)`: `abel`, `schroeder`, `gamma`
/// or `digamma`.
#[pyclass(name = "Equation", module = "ulam", frozen)]
struct PyEquation {
    inner: Instance,
    kind: EquationKind,
}

impl PyEquation {
    fn stabilizer(max_iterations: Option<usize>) -> Stabilizer {
        let mut cfg = StabilizerConfig::default();
        if let Some(n) = max_iterations {
            cfg.max_iterations = n;
        }
        Stabilizer::new(cfg)
    }
}

#[pymethods]
impl PyEquation {
    #[new]
    #[pyo3(signature = (name, c = None, phi = None))]
    fn new(name: &str, c: Option<f64>, phi: Option<&str>) -> PyResult<Self> {
        let kind: EquationKind = name.parse().map_err(value_error)?;
        let phi = phi.map(|p| p.parse::<PhiSpec>().map_err(value_error)).transpose()?;
        let needs = |what: &str| value_error(format!("{name} requires `{what}`"));
        let inner = match kind {
            EquationKind::Abel | EquationKind::Schroeder => {
                let c = c.ok_or_else(|| needs("c"))?;
                let phi = phi.ok_or_else(|| needs("phi"))?;
                if kind == EquationKind::Abel {
                    Instance::Additive(Typed {
                        instance: instances::abel(c, phi).map_err(value_error)?,
                        solution: instances::abel_solution(c, phi),
                    })
                } else {
                    Instance::Mult(Typed {
                        instance: instances::schroeder(c, phi).map_err(value_error)?,
                        solution: instances::schroeder_solution(c, phi),
                    })
                }
            }
            EquationKind::Gamma | EquationKind::Digamma => {
                if c.is_some() || phi.is_some() {
                    return Err(value_error(format!("{name} takes no parameters")));
                }
                if kind == EquationKind::Gamma {
                    Instance::Mult(Typed { instance: instances::gamma(), solution: instances::gamma_solution() })
                } else {
                    Instance::Additive(Typed { instance: instances::digamma(), solution: instances::digamma_solution() })
                }
            }
        };
        Ok(Self { inner, kind })
    }

    #[getter]
    fn name(&self) -> String {
        dispatch!(self, t, G => t.instance.name().to_string())
    }

    #[getter]
    fn group(&self) -> &'static str {
        self.kind.group().name()
    }

    fn contains(&self, x: f64) -> bool {
        dispatch!(self, t, G => t.instance.contains(&x))
    }

    fn phi(&self, x: f64) -> f64 {
        dispatch!(self, t, G => t.instance.phi(&x))
    }

    fn g(&self, x: f64) -> f64 {
        dispatch!(self, t, G => G::to_float(&t.instance.g(&x)))
    }

    /// The reference solution at `x`.
    fn solution(&self, x: f64) -> f64 {
        dispatch!(self, t, G => G::to_float(&t.solution.eval(&x)))
    }

    /// `d(f(φ(x)), g(x)·f(x))`.
    fn defect(&self, f: Py<PyAny>, x: f64) -> PyResult<f64> {
        let slot = ErrorSlot::default();
        let r = dispatch!(self, t, G => t.instance.defect(&callables::<G>(&f, &slot), &x));
        raise_pending(&slot)?;
        r.map_err(value_error)
    }

    /// Recovers the exact solution near `f` at `x` within `tol`.
    #[pyo3(signature = (f, eps, x, tol = 1e-9, max_iterations = None))]
    fn stabilize(&self, f: Py<PyAny>, eps: Py<PyAny>, x: f64, tol: f64, max_iterations: Option<usize>) -> PyResult<PyStabilization> {
        let slot = ErrorSlot::default();
        let stab = Self::stabilizer(max_iterations);
        let r = dispatch!(self, t, G => stab
            .stabilize(&t.instance, &callables::<G>(&f, &slot), &budget(&eps, &slot), &x, tol)
            .map(|r| wrap_result::<G>(&r)));
        raise_pending(&slot)?;
        r.map_err(value_error)
    }

    /// [`Equation.stabilize`] at each point, in order.
    #[pyo3(signature = (f, eps, points, tol = 1e-9, max_iterations = None))]
    fn stabilize_many(
        &self,
        f: Py<PyAny>,
        eps: Py<PyAny>,
        points: Vec<f64>,
        tol: f64,
        max_iterations: Option<usize>,
    ) -> PyResult<Vec<PyStabilization>> {
        points.into_iter().map(|x| self.stabilize(f.clone_ref_unbound(), eps.clone_ref_unbound(), x, tol, max_iterations)).collect()
    }

    /// Certified `Φ̂(x)` for the budget `eps`.
    #[pyo3(signature = (eps, x, tol = 1e-9, max_iterations = None))]
    fn tail_sum(&self, eps: Py<PyAny>, x: f64, tol: f64, max_iterations: Option<usize>) -> PyResult<PyCertificate> {
        let slot = ErrorSlot::default();
        let stab = Self::stabilizer(max_iterations);
        let r = dispatch!(self, t, G => stab.tail_sum(&t.instance, &budget(&eps, &slot), &x, tol));
        raise_pending(&slot)?;
        r.map(|c| PyCertificate::from(&c)).map_err(value_error)
    }

    /// `(passed, residuals)` of `f` as a solution at `points`.
    #[pyo3(signature = (f, points, tol = 1e-9))]
    fn verify(&self, f: Py<PyAny>, points: Vec<f64>, tol: f64) -> PyResult<(bool, Vec<f64>)> {
        let slot = ErrorSlot::default();
        let report = dispatch!(self, t, G => Stabilizer::default().verify_solution(&t.instance, &callables::<G>(&f, &slot), &points, tol));
        raise_pending(&slot)?;
        let residuals = report.points.iter().map(|p| p.residual.as_ref().copied().unwrap_or(f64::NAN)).collect();
        Ok((report.passed(), residuals))
    }

    /// `(holds, lhs, rhs)` for `d(f(φⁿx), P_n(x)·f(x)) ≤ Σ_{k<n} ε(φᵏx) + slack`.
    #[pyo3(signature = (f, eps, n, x, slack = 0.0))]
    fn telescoping(&self, f: Py<PyAny>, eps: Py<PyAny>, n: usize, x: f64, slack: f64) -> PyResult<(bool, f64, f64)> {
        let slot = ErrorSlot::default();
        let r = dispatch!(self, t, G => t.instance.telescoping_check(&callables::<G>(&f, &slot), &budget(&eps, &slot), n, &x, slack));
        raise_pending(&slot)?;
        let r = r.map_err(value_error)?;
        Ok((r.status == TelescopingStatus::Holds, r.lhs, r.rhs))
    }

    fn __repr__(&self) -> String {
        format!("Equation({:?})", self.name())
    }
}

#[pyfunction]
fn digamma(x: f64) -> PyResult<f64> {
    special::digamma(x).map_err(value_error)
}

#[pyfunction]
fn log_gamma(x: f64) -> PyResult<f64> {
    special::log_gamma(x).map_err(value_error)
}

#[pyfunction]
fn groups() -> Vec<&'static str> {
    GroupKind::ALL.iter().map(|k| k.name()).collect()
}

/// CSV for the digamma demo, identical to `ulam demo digamma`.
#[pyfunction]
#[pyo3(signature = (points = None, tol = 1e-9, threads = 0))]
fn demo_digamma(points: Option<Vec<f64>>, tol: f64, threads: usize) -> PyResult<String> {
    if !(tol > 0.0) {
        return Err(value_error("tol must be positive"));
    }
    let mut cfg = RunConfig::digamma_demo(points.unwrap_or_else(|| vec![0.5, 1.0, 3.7, 10.0]), tol);
    cfg.threads = threads;
    Ok(execute(&cfg).map_err(value_error)?.csv)
}

/// `(csv, exit_code)` for a config document, as `ulam run` would produce.
#[pyfunction]
#[pyo3(signature = (text, mode = None))]
fn run_config(text: &str, mode: Option<&str>) -> PyResult<(String, i32)> {
    let mut cfg = parse_config(text).map_err(value_error)?;
    if let Some(m) = mode {
        cfg.mode = m.parse::<Mode>().map_err(value_error)?;
    }
    let report = execute(&cfg).map_err(value_error)?;
    Ok((report.csv, report.exit_code))
}

#[pymodule]
pub fn ulam(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGroup>()?;
    m.add_class::<PyEquation>()?;
    m.add_class::<PyStabilization>()?;
    m.add_class::<PyCertificate>()?;
    m.add_function(wrap_pyfunction!(digamma, m)?)?;
    m.add_function(wrap_pyfunction!(log_gamma, m)?)?;
    m.add_function(wrap_pyfunction!(groups, m)?)?;
    m.add_function(wrap_pyfunction!(demo_digamma, m)?)?;
    m.add_function(wrap_pyfunction!(run_config, m)?)?;
    m.add("EULER_GAMMA", special::EULER_GAMMA)?;
    Ok(())
}
