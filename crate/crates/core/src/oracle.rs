//! Brute-force reference limits for testing the stabilizer.
//!
//! Nothing here touches [`crate::stabilizer`] or the orbit cache: factors are
//! collected by plain iteration, products are taken with
//! [`MetricGroup::ordered_product`] (compensated on the real carriers), and
//! stopping is by value deltas over a doubling schedule.

use std::fmt::Debug;

use thiserror::Error;

use crate::equation::{ApproximateSolution, EquationError, EquationInstance};
use crate::group::MetricGroup;

#[derive(Clone, Debug, PartialEq)]
pub struct OracleResult<E> {
    /// `ε_depth(x)`.
    pub value: E,
    /// Smallest `k ≥ 1` with `d(ε_k(x), ε_N(x)) ≤ tol/10`, `N` the final
    /// doubling depth.
    pub depth: usize,
    /// `residual_history[k-1] = d(ε_{k+1}(x), ε_k(x))` for `k = 1, …`.
    pub residual_history: Vec<f64>,
    /// `false` when `max_depth` was reached before three consecutive
    /// doublings agreed.
    pub converged: bool,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("tolerance must be positive, got {0}")]
    InvalidTolerance(f64),
    #[error("nonzero defect {defect} at orbit step {step} beyond the declared support")]
    SupportViolated { step: usize, defect: f64 },
    #[error(transparent)]
    Equation(#[from] EquationError),
}

/// Default depth cap for [`brute_force_limit`]; the history is quadratic in it.
pub const DEFAULT_MAX_DEPTH: usize = 1 << 12;

/// Points `x, φ(x), …, φⁿ(x)`, domain-checked.
fn orbit_points<G: MetricGroup, D: Clone + Debug>(
    instance: &EquationInstance<G, D>,
    x: &D,
    n: usize,
) -> Result<Vec<D>, EquationError> {
    let mut pts = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let p = if k == 0 { x.clone() } else { instance.phi(&pts[k - 1]) };
        if !instance.contains(&p) {
            return Err(EquationError::DomainViolation { step: k, point: format!("{p:?}") });
        }
        pts.push(p);
    }
    Ok(pts)
}

/// `ε_n(x)` from scratch: `(g(φⁿ⁻¹x)·…·g(x))⁻¹ · f(φⁿx)`.
fn epsilon_direct<G: MetricGroup, D>(
    instance: &EquationInstance<G, D>,
    f: &ApproximateSolution<G::Element, D>,
    pts: &[D],
    factors: &[G::Element],
    n: usize,
) -> G::Element {
    let grp = instance.group();
    let p = grp.ordered_product(&factors[..n]);
    grp.op(&grp.inv(&p), &f.eval(&pts[n]))
}

/// Limit of `ε_n(x)` over `n = 1, 2, 4, 8, …`, stopping once three
/// consecutive doublings each move the value by at most `tol/10`.
pub fn brute_force_limit<G: MetricGroup, D: Clone + Debug>(
    instance: &EquationInstance<G, D>,
    f: &ApproximateSolution<G::Element, D>,
    x: &D,
    tol: f64,
    max_depth: usize,
) -> Result<OracleResult<G::Element>, OracleError> {
    if !(tol > 0.0) {
        return Err(OracleError::InvalidTolerance(tol));
    }
    let grp = instance.group();
    let threshold = tol / 10.0;

    let mut pts = orbit_points(instance, x, 1)?;
    let mut factors = vec![instance.g(x)];
    // eps[k] = ε_k(x); eps[0] is unused.
    let mut eps = vec![f.eval(x), epsilon_direct(instance, f, &pts, &factors, 1)];

    let mut n = 1;
    let mut quiet = 0;
    let mut converged = false;
    while n < max_depth {
        let next = (2 * n).min(max_depth);
        pts = orbit_points(instance, x, next)?;
        while factors.len() < next {
            factors.push(instance.g(&pts[factors.len()]));
        }
        for k in eps.len()..=next {
            eps.push(epsilon_direct(instance, f, &pts, &factors, k));
        }
        if grp.dist(&eps[next], &eps[n]) <= threshold {
            quiet += 1;
        } else {
            quiet = 0;
        }
        n = next;
        if quiet == 3 {
            converged = true;
            break;
        }
    }

    let residual_history = (1..n).map(|k| grp.dist(&eps[k + 1], &eps[k])).collect();
    let depth = (1..=n).find(|&k| grp.dist(&eps[k], &eps[n]) <= threshold).unwrap_or(n);
    Ok(OracleResult { value: eps[depth].clone(), depth, residual_history, converged })
}

/// `ε_s(x)` for a budget supported on the first `s` orbit points, after
/// confirming the defect vanishes on the next `check_steps` points.
pub fn finite_orbit_exact<G: MetricGroup, D: Clone + Debug>(
    instance: &EquationInstance<G, D>,
    f: &ApproximateSolution<G::Element, D>,
    x: &D,
    support_depth: usize,
    check_steps: usize,
) -> Result<G::Element, OracleError> {
    let grp = instance.group();
    let pts = orbit_points(instance, x, support_depth + check_steps + 1)?;
    for step in support_depth..support_depth + check_steps {
        let defect = grp.dist(&f.eval(&pts[step + 1]), &grp.op(&instance.g(&pts[step]), &f.eval(&pts[step])));
        if defect > grp.tolerance() {
            return Err(OracleError::SupportViolated { step, defect });
        }
    }
    let factors: Vec<_> = pts[..support_depth].iter().map(|p| instance.g(p)).collect();
    Ok(epsilon_direct(instance, f, &pts, &factors, support_depth))
}
