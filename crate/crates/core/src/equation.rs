//! Equation instances `f(φ(x)) = g(x)·f(x)` and the orbit machinery built on
//! them: iterates, ordered cocycle products and pointwise defects.

use std::fmt::{self, Debug};
use std::sync::Arc;

use thiserror::Error;

use crate::group::MetricGroup;
use crate::sum::NeumaierSum;

type Map<D, T> = Arc<dyn Fn(&D) -> T + Send + Sync>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EquationError {
    #[error("orbit left the domain at step {step} (point {point})")]
    DomainViolation { step: usize, point: String },
    #[error("g produced an invalid group element at orbit step {step}")]
    InvalidCoefficient { step: usize },
    #[error("order must be at least 1")]
    ZeroOrder,
}

/// An instance `(S, φ, g)` over the group `G`. The domain `S` is given by a
/// guard predicate and is never enumerated.
pub struct EquationInstance<G: MetricGroup, D = f64> {
    name: String,
    group: G,
    phi: Map<D, D>,
    g: Map<D, G::Element>,
    guard: Map<D, bool>,
}

impl<G: MetricGroup + Clone, D> Clone for EquationInstance<G, D> {
    fn clone(&self) -> Self {
        Self {
            name: self.name.clone(),
            group: self.group.clone(),
            phi: Arc::clone(&self.phi),
            g: Arc::clone(&self.g),
            guard: Arc::clone(&self.guard),
        }
    }
}

impl<G: MetricGroup + Debug, D> Debug for EquationInstance<G, D> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("EquationInstance")
            .field("name", &self.name)
            .field("group", &self.group)
            .finish_non_exhaustive()
    }
}

impl<G: MetricGroup, D> EquationInstance<G, D> {
    /// An instance on the whole of `D`; restrict it with [`Self::with_domain`].
    pub fn new(
        name: impl Into<String>,
        group: G,
        phi: impl Fn(&D) -> D + Send + Sync + 'static,
        g: impl Fn(&D) -> G::Element + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            group,
            phi: Arc::new(phi),
            g: Arc::new(g),
            guard: Arc::new(|_| true),
        }
    }

    pub fn with_domain(mut self, guard: impl Fn(&D) -> bool + Send + Sync + 'static) -> Self {
        self.guard = Arc::new(guard);
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn group(&self) -> &G {
        &self.group
    }

    pub fn contains(&self, x: &D) -> bool {
        (self.guard)(x)
    }

    pub fn phi(&self, x: &D) -> D {
        (self.phi)(x)
    }

    pub fn g(&self, x: &D) -> G::Element {
        (self.g)(x)
    }

    /// Defect at `x` with `φ(x) = y` already computed and checked.
    pub(crate) fn defect_between(&self, f: &ApproximateSolution<G::Element, D>, x: &D, y: &D) -> f64 {
        let grp = &self.group;
        grp.dist(&f.eval(y), &grp.op(&self.g(x), &f.eval(x)))
    }
}

impl<G: MetricGroup, D: Debug> EquationInstance<G, D> {
    fn require(&self, x: &D, step: usize) -> Result<(), EquationError> {
        if self.contains(x) {
            Ok(())
        } else {
            Err(EquationError::DomainViolation { step, point: format!("{x:?}") })
        }
    }

    /// `φᵏ(x)`, with `φ⁰ = id`.
    pub fn iterate(&self, k: usize, x: &D) -> Result<D, EquationError>
    where
        D: Clone,
    {
        self.require(x, 0)?;
        let mut y = x.clone();
        for step in 1..=k {
            y = self.phi(&y);
            self.require(&y, step)?;
        }
        Ok(y)
    }

    /// `P_n(x) = g(φⁿ⁻¹(x)) · … · g(φ(x)) · g(x)` for `n ≥ 1`.
    pub fn cocycle(&self, n: usize, x: &D) -> Result<G::Element, EquationError>
    where
        D: Clone,
    {
        if n == 0 {
            return Err(EquationError::ZeroOrder);
        }
        self.orbit(x, true)?.cocycle(n)
    }

    /// `d(f(φ(x)), g(x)·f(x))`.
    pub fn defect(&self, f: &ApproximateSolution<G::Element, D>, x: &D) -> Result<f64, EquationError> {
        self.require(x, 0)?;
        let y = self.phi(x);
        self.require(&y, 1)?;
        Ok(self.defect_between(f, x, &y))
    }

    /// Checks `d(f(φⁿ(x)), P_n(x)·f(x)) ≤ Σ_{k<n} ε(φᵏ(x))`, first confirming
    /// that the defect stays within budget along the orbit.
    pub fn telescoping_check(
        &self,
        f: &ApproximateSolution<G::Element, D>,
        eps: &PerturbationBudget<D>,
        n: usize,
        x: &D,
        slack: f64,
    ) -> Result<TelescopingReport, EquationError>
    where
        D: Clone,
    {
        if n == 0 {
            return Err(EquationError::ZeroOrder);
        }
        let mut orbit = self.orbit(x, true)?;
        let mut rhs = NeumaierSum::new();
        for k in 0..n {
            let here = orbit.point(k)?;
            let next = orbit.point(k + 1)?;
            let defect = self.defect_between(f, &here, &next);
            let budget = eps.eval(&here);
            if defect > budget + slack {
                return Ok(TelescopingReport {
                    status: TelescopingStatus::BudgetExceeded { step: k, defect, budget },
                    lhs: f64::NAN,
                    rhs: f64::NAN,
                });
            }
            rhs.add(budget);
        }
        let grp = &self.group;
        let end = orbit.point(n)?;
        let lhs = grp.dist(&f.eval(&end), &grp.op(&orbit.cocycle(n)?, &f.eval(x)));
        let rhs = rhs.total();
        let status = if lhs <= rhs + slack { TelescopingStatus::Holds } else { TelescopingStatus::Fails };
        Ok(TelescopingReport { status, lhs, rhs })
    }

    /// A per-query orbit cache rooted at `x`.
    pub fn orbit(&self, x: &D, memoize: bool) -> Result<Orbit<'_, G, D>, EquationError>
    where
        D: Clone,
    {
        Orbit::new(self, x.clone(), memoize)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TelescopingStatus {
    Holds,
    Fails,
    /// The defect exceeded the budget at orbit step `step`; the inequality
    /// was not evaluated.
    BudgetExceeded { step: usize, defect: f64, budget: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TelescopingReport {
    pub status: TelescopingStatus,
    /// `d(f(φⁿ(x)), P_n(x)·f(x))`
    pub lhs: f64,
    /// `Σ_{k=1}^{n} ε(φᵏ⁻¹(x))`
    pub rhs: f64,
}

impl TelescopingReport {
    pub fn holds(&self) -> bool {
        self.status == TelescopingStatus::Holds
    }
}

/// Approximate solution `f: S → G`.
pub struct ApproximateSolution<E, D = f64>(Map<D, E>);

impl<E, D> Clone for ApproximateSolution<E, D> {
    fn clone(&self) -> Self {
        Self(Arc::clone(&self.0))
    }
}

impl<E, D> ApproximateSolution<E, D> {
    pub fn new(f: impl Fn(&D) -> E + Send + Sync + 'static) -> Self {
        Self(Arc::new(f))
    }

    pub fn eval(&self, x: &D) -> E {
        (self.0)(x)
    }
}

impl<E, D> Debug for ApproximateSolution<E, D> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("ApproximateSolution(..)")
    }
}

/// Budget `ε: S → ℝ₊` with an optional caller-supplied majorant of
/// `Σ_{k≥0} ε(φᵏ(x))`.
pub struct PerturbationBudget<D = f64> {
    eps: Map<D, f64>,
    tail_majorant: Option<Map<D, f64>>,
}

impl<D> Clone for PerturbationBudget<D> {
    fn clone(&self) -> Self {
        Self { eps: Arc::clone(&self.eps), tail_majorant: self.tail_majorant.clone() }
    }
}

impl<D> Debug for PerturbationBudget<D> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PerturbationBudget")
            .field("closed_form_tail", &self.tail_majorant.is_some())
            .finish()
    }
}

impl<D: 'static> PerturbationBudget<D> {
    pub fn new(eps: impl Fn(&D) -> f64 + Send + Sync + 'static) -> Self {
        Self { eps: Arc::new(eps), tail_majorant: None }
    }

    pub fn zero() -> Self {
        Self::new(|_| 0.0)
    }

    /// Attaches `x ↦ M(x) ≥ Σ_{k≥0} ε(φᵏ(x))`. The caller vouches for it.
    pub fn with_tail_majorant(mut self, majorant: impl Fn(&D) -> f64 + Send + Sync + 'static) -> Self {
        self.tail_majorant = Some(Arc::new(majorant));
        self
    }

    /// Pointwise `c·ε`, dropping any closed-form tail.
    pub fn scaled(&self, c: f64) -> Self {
        let eps = Arc::clone(&self.eps);
        Self::new(move |x| c * eps(x))
    }
}

impl<D> PerturbationBudget<D> {
    pub fn eval(&self, x: &D) -> f64 {
        (self.eps)(x)
    }

    pub fn tail_majorant(&self, x: &D) -> Option<f64> {
        self.tail_majorant.as_ref().map(|m| m(x))
    }

    pub fn has_tail_majorant(&self) -> bool {
        self.tail_majorant.is_some()
    }
}

/// Forward orbit of one query point with lazily extended caches of
/// `φᵏ(x)`, `g(φᵏ(x))` and `P_k(x)`.
///
/// With `memoize = false` every lookup is recomputed from `x` through the
/// same recurrences, so results are bit-identical either way.
pub struct Orbit<'a, G: MetricGroup, D> {
    instance: &'a EquationInstance<G, D>,
    root: D,
    memoize: bool,
    points: Vec<D>,
    factors: Vec<G::Element>,
    /// `cocycles[k] = P_k(x)`, `P_0 = e`.
    cocycles: Vec<G::Element>,
}

impl<'a, G: MetricGroup, D: Clone + Debug> Orbit<'a, G, D> {
    fn new(instance: &'a EquationInstance<G, D>, root: D, memoize: bool) -> Result<Self, EquationError> {
        instance.require(&root, 0)?;
        let identity = instance.group.identity();
        Ok(Self {
            instance,
            points: vec![root.clone()],
            root,
            memoize,
            factors: Vec::new(),
            cocycles: vec![identity],
        })
    }

    pub fn root(&self) -> &D {
        &self.root
    }

    pub fn instance(&self) -> &'a EquationInstance<G, D> {
        self.instance
    }

    fn extend_to(&mut self, k: usize) -> Result<(), EquationError> {
        while self.points.len() <= k {
            let step = self.points.len();
            let next = self.instance.phi(&self.points[step - 1]);
            self.instance.require(&next, step)?;
            self.points.push(next);
        }
        Ok(())
    }

    fn extend_factors_to(&mut self, n: usize) -> Result<(), EquationError> {
        if n > 0 {
            self.extend_to(n - 1)?;
        }
        let grp = &self.instance.group;
        while self.factors.len() < n {
            let k = self.factors.len();
            let gk = self.instance.g(&self.points[k]);
            if !grp.is_valid(&gk) {
                return Err(EquationError::InvalidCoefficient { step: k });
            }
            let next = grp.op(&gk, &self.cocycles[k]);
            self.factors.push(gk);
            self.cocycles.push(next);
        }
        Ok(())
    }

    fn reset(&mut self) {
        self.points.truncate(1);
        self.factors.clear();
        self.cocycles.truncate(1);
    }

    /// `φᵏ(x)`.
    pub fn point(&mut self, k: usize) -> Result<D, EquationError> {
        if !self.memoize {
            self.reset();
        }
        self.extend_to(k)?;
        Ok(self.points[k].clone())
    }

    /// `g(φᵏ(x))`.
    pub fn factor(&mut self, k: usize) -> Result<G::Element, EquationError> {
        if !self.memoize {
            self.reset();
        }
        self.extend_factors_to(k + 1)?;
        Ok(self.factors[k].clone())
    }

    /// `P_n(x)`; `P_0` is the identity.
    pub fn cocycle(&mut self, n: usize) -> Result<G::Element, EquationError> {
        if !self.memoize {
            self.reset();
        }
        self.extend_factors_to(n)?;
        Ok(self.cocycles[n].clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{AdditiveReals, FreeGroup2, Word};
    use crate::instances::{self, PhiSpec};
    use crate::special::digamma;
    use approx::assert_abs_diff_eq;

    #[test]
    fn iterates() {
        let dg = instances::digamma();
        assert_eq!(dg.iterate(3, &0.5).unwrap(), 3.5);
        assert_eq!(dg.iterate(0, &0.5).unwrap(), 0.5);
        let abel = instances::abel(1.0, PhiSpec::Scale(0.5)).unwrap();
        assert_eq!(abel.iterate(4, &8.0).unwrap(), 0.5);
    }

    #[test]
    fn domain_violations_name_the_step() {
        let inst = EquationInstance::new("drift", AdditiveReals::new(), |x: &f64| x - 1.0, |_| 0.0)
            .with_domain(|x| *x > 0.0);
        assert_eq!(inst.iterate(1, &1.5).unwrap(), 0.5);
        match inst.iterate(3, &1.5) {
            Err(EquationError::DomainViolation { step, .. }) => assert_eq!(step, 2),
            other => panic!("unexpected {other:?}"),
        }
        assert!(inst.iterate(0, &-1.0).is_err());
    }

    #[test]
    fn digamma_cocycle_is_partial_harmonic_sum() {
        let dg = instances::digamma();
        assert_abs_diff_eq!(dg.cocycle(3, &1.0).unwrap(), 11.0 / 6.0, epsilon = 1e-15);
        assert_eq!(dg.cocycle(1, &2.5).unwrap(), dg.g(&2.5));
        assert_eq!(dg.cocycle(0, &1.0), Err(EquationError::ZeroOrder));
    }

    #[test]
    fn free_group_cocycle_concatenates() {
        let ab: Word = "ab".parse().unwrap();
        let inst = EquationInstance::new("const", FreeGroup2, |x: &f64| x + 1.0, move |_| ab.clone());
        assert_eq!(inst.cocycle(2, &0.0).unwrap(), "abab".parse().unwrap());
    }

    #[test]
    fn defects() {
        let dg = instances::digamma();
        let exact = ApproximateSolution::new(|x: &f64| digamma(*x).unwrap());
        assert!(dg.defect(&exact, &1.3).unwrap() < 1e-12);

        let perturbed = ApproximateSolution::new(|x: &f64| digamma(*x).unwrap() + 2f64.powf(-x));
        assert_abs_diff_eq!(dg.defect(&perturbed, &1.0).unwrap(), 0.25, epsilon = 1e-14);

        let c = 3.0;
        let abel = instances::abel(c, PhiSpec::Scale(0.5)).unwrap();
        let f = ApproximateSolution::new(move |x: &f64| -c * x.log2() + x);
        assert_abs_diff_eq!(abel.defect(&f, &2.0).unwrap(), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn telescoping_n1_is_the_defect_bound() {
        let dg = instances::digamma();
        let f = ApproximateSolution::new(|x: &f64| digamma(*x).unwrap() + 2f64.powf(-x));
        let eps = PerturbationBudget::new(|x: &f64| 2f64.powf(-x - 1.0));
        let r = dg.telescoping_check(&f, &eps, 1, &1.0, 1e-12).unwrap();
        assert!(r.holds());
        assert_abs_diff_eq!(r.lhs, dg.defect(&f, &1.0).unwrap(), epsilon = 1e-15);
        assert_abs_diff_eq!(r.rhs, 0.25, epsilon = 1e-15);
    }

    #[test]
    fn telescoping_digamma_n5() {
        let dg = instances::digamma();
        let f = ApproximateSolution::new(|x: &f64| digamma(*x).unwrap() + 2f64.powf(-x));
        let eps = PerturbationBudget::new(|x: &f64| 2f64.powf(-x - 1.0));
        let r = dg.telescoping_check(&f, &eps, 5, &1.0, 1e-12).unwrap();
        // lhs = |2⁻⁶ − 2⁻¹|, rhs = Σ_{k=1}^{5} 2^{−k−1}
        assert_abs_diff_eq!(r.lhs, 0.5 - 1.0 / 64.0, epsilon = 1e-14);
        assert_abs_diff_eq!(r.rhs, (1..=5).map(|k| 2f64.powi(-k - 1)).sum::<f64>(), epsilon = 1e-15);
        assert!(r.holds());
    }

    #[test]
    fn telescoping_zero_budget_exact() {
        let dg = instances::digamma();
        let f = ApproximateSolution::new(|x: &f64| digamma(*x).unwrap());
        let r = dg.telescoping_check(&f, &PerturbationBudget::zero(), 3, &2.0, 1e-12).unwrap();
        assert!(r.holds());
        assert!(r.lhs <= 1e-12);
        assert_eq!(r.rhs, 0.0);
    }

    #[test]
    fn telescoping_reports_budget_exceeded_separately() {
        let dg = instances::digamma();
        let f = ApproximateSolution::new(|x: &f64| digamma(*x).unwrap() + 2f64.powf(-x));
        let eps = PerturbationBudget::new(|x: &f64| if *x < 2.5 { 1.0 } else { 0.0 });
        let r = dg.telescoping_check(&f, &eps, 4, &1.0, 1e-12).unwrap();
        assert!(matches!(r.status, TelescopingStatus::BudgetExceeded { step: 2, .. }));
    }

    #[test]
    fn memoization_is_invisible() {
        let dg = instances::digamma();
        let mut a = dg.orbit(&0.3, true).unwrap();
        let mut b = dg.orbit(&0.3, false).unwrap();
        for n in [7, 2, 11, 0, 5] {
            assert_eq!(a.cocycle(n).unwrap().to_bits(), b.cocycle(n).unwrap().to_bits());
            assert_eq!(a.point(n).unwrap().to_bits(), b.point(n).unwrap().to_bits());
            assert_eq!(a.factor(n).unwrap().to_bits(), b.factor(n).unwrap().to_bits());
        }
    }
}
