//! Reconstruction of the exact solution `f₀` near an approximate solution.
//!
//! For `ε_n(x) = P_n(x)⁻¹ · f(φⁿ(x))`, left-invariance gives
//! `d(ε_{n+p}(x), ε_n(x)) ≤ r_n(x)` uniformly in `p`, where `r_n` is the
//! remainder of the budget series along the orbit. Iteration stops at the
//! first `n` whose certified remainder is within tolerance, so the returned
//! value is within `tol` of `f₀(x)` and within `Φ̂(x)` of `f(x)`.

mod tail;

pub use tail::{TailCertificate, TailFailure, TailStrategy};

use std::fmt::{self, Debug};

use rayon::prelude::*;
use thiserror::Error;

use crate::equation::{ApproximateSolution, EquationError, EquationInstance, Orbit, PerturbationBudget};
use crate::group::MetricGroup;
use tail::TailWalker;

/// Tuning for tail certification and iteration. Every field is recorded
/// alongside results so a certificate can be audited.
#[derive(Clone, Debug, PartialEq)]
pub struct StabilizerConfig {
    /// Hard cap on orbit depth.
    pub max_iterations: usize,
    /// Number of consecutive ratios a geometric bound needs.
    pub ratio_window: usize,
    /// Ratio ceiling `ρ̄ < 1` assumed for the geometric tail.
    pub ratio_ceiling: f64,
    /// Consecutive zero budget terms that certify a zero tail.
    pub zero_run: usize,
    /// Consecutive non-decreasing positive terms that count as divergence.
    pub divergence_window: usize,
    /// Float allowance before an observed defect counts as over budget.
    pub budget_slack: f64,
    /// Cache orbit points and cocycle prefixes per query.
    pub memoize: bool,
    /// Tolerance for the `Φ̂(φⁿ(x))` certificates used by
    /// [`Stabilizer::uniqueness_gap`].
    pub diagnostic_tol: f64,
}

impl Default for StabilizerConfig {
    fn default() -> Self {
        Self {
            max_iterations: 1_000_000,
            ratio_window: 16,
            ratio_ceiling: 0.999,
            zero_run: 16,
            divergence_window: 64,
            budget_slack: 1e-12,
            memoize: true,
            diagnostic_tol: 1e-13,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StabilizeError {
    #[error("tolerance must be positive, got {0}")]
    InvalidTolerance(f64),
    #[error("budget value {value} at orbit step {step} is not a nonnegative number")]
    InvalidBudget { step: usize, value: f64 },
    #[error(transparent)]
    Equation(#[from] EquationError),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StabilizationStatus {
    Converged,
    Diverged,
    /// The observed defect at orbit step `step` exceeded the budget.
    BudgetViolated { step: usize, defect: f64, budget: f64 },
    MaxIterations,
}

impl StabilizationStatus {
    pub fn name(&self) -> &'static str {
        match self {
            StabilizationStatus::Converged => "converged",
            StabilizationStatus::Diverged => "diverged",
            StabilizationStatus::BudgetViolated { .. } => "budget_violated",
            StabilizationStatus::MaxIterations => "max_iterations",
        }
    }

    pub fn is_converged(&self) -> bool {
        matches!(self, StabilizationStatus::Converged)
    }
}

impl fmt::Display for StabilizationStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StabilizationResult<E> {
    /// `f₀(x)` when converged; otherwise `ε_n(x)` at the depth reached.
    pub value: E,
    pub iterations: usize,
    /// `Φ̂(x)`, or `+∞` without a certificate.
    pub certified_bound: f64,
    /// `d(ε_{n+1}(x), ε_n(x))` at the stopping depth.
    pub last_step: f64,
    pub status: StabilizationStatus,
    pub certificate: Option<TailCertificate>,
}

#[derive(Debug)]
pub struct PointResidual<D> {
    pub x: D,
    pub residual: Result<f64, EquationError>,
}

impl<D> PointResidual<D> {
    pub fn passes(&self, tol: f64) -> bool {
        matches!(self.residual, Ok(r) if r <= tol)
    }
}

#[derive(Debug)]
pub struct VerificationReport<D> {
    pub tol: f64,
    pub points: Vec<PointResidual<D>>,
}

impl<D> VerificationReport<D> {
    pub fn passed(&self) -> bool {
        self.points.iter().all(|p| p.passes(self.tol))
    }

    pub fn failures(&self) -> impl Iterator<Item = &PointResidual<D>> {
        self.points.iter().filter(|p| !p.passes(self.tol))
    }

    pub fn max_residual(&self) -> f64 {
        self.points
            .iter()
            .map(|p| p.residual.as_ref().copied().unwrap_or(f64::INFINITY))
            .fold(0.0, f64::max)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct UniquenessGap {
    /// `d(f₁(x), f₂(x))`.
    pub gap: f64,
    /// `2·Φ̂(φⁿ(x))`.
    pub bound: f64,
    pub n: usize,
    pub certificate: TailCertificate,
}

impl UniquenessGap {
    pub fn within_bound(&self) -> bool {
        self.gap <= self.bound
    }
}

struct Violation {
    step: usize,
    defect: f64,
    budget: f64,
}

enum WalkStop {
    Tail(TailFailure),
    Budget(Violation),
}

impl From<EquationError> for WalkStop {
    fn from(e: EquationError) -> Self {
        WalkStop::Tail(TailFailure::Equation(e))
    }
}

#[derive(Clone, Debug, Default)]
pub struct Stabilizer {
    pub config: StabilizerConfig,
}

impl Stabilizer {
    pub fn new(config: StabilizerConfig) -> Self {
        Self { config }
    }

    /// Walks the orbit until some strategy certifies `r_N ≤ tol`.
    ///
    /// `spot_check` runs at every visited step `k` before the term `ε(φᵏ(x))`
    /// is considered, and may abort the walk with a budget violation.
    fn walk<G, D>(
        &self,
        orbit: &mut Orbit<'_, G, D>,
        eps: &PerturbationBudget<D>,
        tol: f64,
        mut spot_check: impl FnMut(&mut Orbit<'_, G, D>, usize, f64) -> Result<Option<Violation>, EquationError>,
    ) -> Result<TailCertificate, WalkStop>
    where
        G: MetricGroup,
        D: Clone + Debug,
    {
        let cfg = &self.config;
        let mut walker = TailWalker::<D>::new(cfg);
        for n in 0..=cfg.max_iterations {
            let point = orbit.point(n)?;
            let term = TailWalker::<D>::check_term(n, eps.eval(&point)).map_err(WalkStop::Tail)?;
            if let Some(v) = spot_check(orbit, n, term)? {
                return Err(WalkStop::Budget(v));
            }
            if let Some(cert) = walker.certify(eps, &point) {
                // The next term is part of the certified tail; a certificate
                // it contradicts is discarded.
                if cert.tail_bound <= tol && term <= cert.tail_bound + cfg.budget_slack {
                    return Ok(cert);
                }
            }
            if walker.diverged() {
                return Err(WalkStop::Tail(TailFailure::Diverged { depth: n, partial_sum: walker.partial_sum() }));
            }
            walker.push(term);
        }
        Err(WalkStop::Tail(TailFailure::MaxIterations { depth: cfg.max_iterations }))
    }

    /// Certified `Φ̂(x) ≥ Σ_{n≥0} ε(φⁿ(x))` with tail bound at most `tol`.
    pub fn tail_sum<G, D>(
        &self,
        instance: &EquationInstance<G, D>,
        eps: &PerturbationBudget<D>,
        x: &D,
        tol: f64,
    ) -> Result<TailCertificate, TailFailure>
    where
        G: MetricGroup,
        D: Clone + Debug,
    {
        if !(tol > 0.0) {
            return Err(TailFailure::InvalidTolerance(tol));
        }
        let mut orbit = instance.orbit(x, self.config.memoize)?;
        self.walk(&mut orbit, eps, tol, |_, _, _| Ok(None)).map_err(|stop| match stop {
            WalkStop::Tail(t) => t,
            WalkStop::Budget(_) => unreachable!("tail_sum performs no budget checks"),
        })
    }

    /// `ε_n(x) = P_n(x)⁻¹ · f(φⁿ(x))`. `ε_0(x) = f(x)`.
    pub fn epsilon_n<G, D>(
        &self,
        instance: &EquationInstance<G, D>,
        f: &ApproximateSolution<G::Element, D>,
        n: usize,
        x: &D,
    ) -> Result<G::Element, EquationError>
    where
        G: MetricGroup,
        D: Clone + Debug,
    {
        let mut orbit = instance.orbit(x, self.config.memoize)?;
        epsilon_on(&mut orbit, f, n)
    }

    /// Approximates `f₀(x) = lim ε_n(x)` with a certified error of at most
    /// `tol`, checking the defect against the budget along the way.
    pub fn stabilize<G, D>(
        &self,
        instance: &EquationInstance<G, D>,
        f: &ApproximateSolution<G::Element, D>,
        eps: &PerturbationBudget<D>,
        x: &D,
        tol: f64,
    ) -> Result<StabilizationResult<G::Element>, StabilizeError>
    where
        G: MetricGroup,
        D: Clone + Debug,
    {
        if !(tol > 0.0) {
            return Err(StabilizeError::InvalidTolerance(tol));
        }
        let grp = instance.group();
        let slack = self.config.budget_slack;
        let mut orbit = instance.orbit(x, self.config.memoize)?;
        // f(φᵏ(x)) carried from one step to the next.
        let mut f_here: Option<G::Element> = None;

        let walked = self.walk(&mut orbit, eps, tol, |orbit, k, budget| {
            let here = match f_here.take() {
                Some(v) => v,
                None => f.eval(&orbit.point(k)?),
            };
            let next = f.eval(&orbit.point(k + 1)?);
            let defect = grp.dist(&next, &grp.op(&orbit.factor(k)?, &here));
            f_here = Some(next);
            Ok((defect > budget + slack).then_some(Violation { step: k, defect, budget }))
        });

        let unconverged = |orbit: &mut Orbit<'_, G, D>, depth: usize, status| -> Result<_, StabilizeError> {
            Ok(StabilizationResult {
                value: epsilon_on(orbit, f, depth)?,
                iterations: depth,
                certified_bound: f64::INFINITY,
                last_step: f64::NAN,
                status,
                certificate: None,
            })
        };

        let cert = match walked {
            Ok(cert) => cert,
            Err(WalkStop::Budget(v)) => {
                let status = StabilizationStatus::BudgetViolated { step: v.step, defect: v.defect, budget: v.budget };
                return unconverged(&mut orbit, v.step, status);
            }
            Err(WalkStop::Tail(TailFailure::Diverged { depth, .. })) => {
                return unconverged(&mut orbit, depth, StabilizationStatus::Diverged);
            }
            Err(WalkStop::Tail(TailFailure::MaxIterations { depth })) => {
                return unconverged(&mut orbit, depth, StabilizationStatus::MaxIterations);
            }
            Err(WalkStop::Tail(TailFailure::InvalidBudget { step, value })) => {
                return Err(StabilizeError::InvalidBudget { step, value });
            }
            Err(WalkStop::Tail(TailFailure::Equation(e))) => return Err(e.into()),
            Err(WalkStop::Tail(TailFailure::InvalidTolerance(t))) => return Err(StabilizeError::InvalidTolerance(t)),
        };

        let depth = cert.depth;
        let eps_n = epsilon_on(&mut orbit, f, depth)?;
        let eps_next = epsilon_on(&mut orbit, f, depth + 1)?;
        let last_step = grp.dist(&eps_next, &eps_n);
        let certified_bound = cert.phi_hat();
        // Φ̂ = 0 forces f₀ = f at x exactly.
        let value = if certified_bound == 0.0 { f.eval(x) } else { eps_n };
        let status = if last_step <= tol + slack {
            StabilizationStatus::Converged
        } else {
            StabilizationStatus::BudgetViolated { step: depth, defect: last_step, budget: cert.tail_bound }
        };
        Ok(StabilizationResult {
            value,
            iterations: depth,
            certified_bound,
            last_step,
            status,
            certificate: Some(cert),
        })
    }

    /// [`Self::stabilize`] over many points; output order follows `points`
    /// and results do not depend on scheduling.
    pub fn stabilize_batch<G, D>(
        &self,
        instance: &EquationInstance<G, D>,
        f: &ApproximateSolution<G::Element, D>,
        eps: &PerturbationBudget<D>,
        points: &[D],
        tol: f64,
    ) -> Vec<Result<StabilizationResult<G::Element>, StabilizeError>>
    where
        G: MetricGroup,
        D: Clone + Debug + Send + Sync,
    {
        points.par_iter().map(|x| self.stabilize(instance, f, eps, x, tol)).collect()
    }

    /// Residual `d(f₀(φ(x)), g(x)·f₀(x))` at each point; passes iff every
    /// residual is at most `tol`.
    pub fn verify_solution<G, D>(
        &self,
        instance: &EquationInstance<G, D>,
        f0: &ApproximateSolution<G::Element, D>,
        points: &[D],
        tol: f64,
    ) -> VerificationReport<D>
    where
        G: MetricGroup,
        D: Clone + Debug,
    {
        let points = points
            .iter()
            .map(|x| PointResidual { x: x.clone(), residual: instance.defect(f0, x) })
            .collect();
        VerificationReport { tol, points }
    }

    /// `d(f₁(x), f₂(x))` next to the bound `2·Φ̂(φⁿ(x))` that squeezes it
    /// when both lie within `Φ` of a common approximate solution.
    pub fn uniqueness_gap<G, D>(
        &self,
        instance: &EquationInstance<G, D>,
        f1: &ApproximateSolution<G::Element, D>,
        f2: &ApproximateSolution<G::Element, D>,
        eps: &PerturbationBudget<D>,
        x: &D,
        n: usize,
    ) -> Result<UniquenessGap, TailFailure>
    where
        G: MetricGroup,
        D: Clone + Debug,
    {
        let far = instance.iterate(n, x)?;
        let certificate = self.tail_sum(instance, eps, &far, self.config.diagnostic_tol)?;
        let gap = instance.group().dist(&f1.eval(x), &f2.eval(x));
        Ok(UniquenessGap { gap, bound: 2.0 * certificate.phi_hat(), n, certificate })
    }
}

fn epsilon_on<G, D>(
    orbit: &mut Orbit<'_, G, D>,
    f: &ApproximateSolution<G::Element, D>,
    n: usize,
) -> Result<G::Element, EquationError>
where
    G: MetricGroup,
    D: Clone + Debug,
{
    let grp = orbit.instance().group();
    let p = orbit.cocycle(n)?;
    let end = orbit.point(n)?;
    Ok(grp.op(&grp.inv(&p), &f.eval(&end)))
}
