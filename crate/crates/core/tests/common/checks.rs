//! Generic property checks over a [`Fixture`]. Each returns the number of
//! comparisons made, or a description of the first failure.

use std::fmt::Debug;

use ulam_core::oracle::{brute_force_limit, DEFAULT_MAX_DEPTH};
use ulam_core::{MetricGroup, StabilizationResult, Stabilizer, TelescopingStatus};

use super::Fixture;

pub type Check = Result<usize, String>;

/// Equal elements, or within `tol` when `tol > 0`.
fn close<G: MetricGroup>(grp: &G, a: &G::Element, b: &G::Element, tol: f64) -> bool {
    a == b || (tol > 0.0 && grp.dist(a, b) <= tol)
}

/// `d(f(φⁿx), P_n(x)·f(x)) ≤ Σ_{k<n} ε(φᵏx) + slack` for `n = 1..=n_max`.
pub fn telescoping<G, D>(fx: &Fixture<G, D>, n_max: usize, slack: f64) -> Check
where
    G: MetricGroup,
    D: Clone + Debug,
{
    let mut count = 0;
    for x in &fx.points {
        for n in 1..=n_max {
            let r = fx.instance.telescoping_check(&fx.f, &fx.eps, n, x, slack).map_err(|e| e.to_string())?;
            if r.status != TelescopingStatus::Holds {
                return Err(format!("{}: x={x:?} n={n}: {:?} lhs={} rhs={}", fx.label, r.status, r.lhs, r.rhs));
            }
            count += 1;
        }
    }
    Ok(count)
}

/// `P_{n+1}(x) = g(φⁿx)·P_n(x)` and `P_{m+n}(x) = P_m(φⁿx)·P_n(x)`.
pub fn cocycle<G, D>(fx: &Fixture<G, D>, n_max: usize, tol: f64) -> Check
where
    G: MetricGroup,
    D: Clone + Debug,
{
    let inst = &fx.instance;
    let grp = inst.group();
    let mut count = 0;
    for x in &fx.points {
        let err = |e: ulam_core::EquationError| e.to_string();
        for n in 1..n_max {
            let step = grp.op(&inst.g(&inst.iterate(n, x).map_err(err)?), &inst.cocycle(n, x).map_err(err)?);
            if !close(grp, &inst.cocycle(n + 1, x).map_err(err)?, &step, tol) {
                return Err(format!("{}: recurrence fails at x={x:?} n={n}", fx.label));
            }
            let m = 1 + n % 5;
            let split = grp.op(&inst.cocycle(m, &inst.iterate(n, x).map_err(err)?).map_err(err)?, &inst.cocycle(n, x).map_err(err)?);
            if !close(grp, &inst.cocycle(m + n, x).map_err(err)?, &split, tol) {
                return Err(format!("{}: cocycle identity fails at x={x:?} m={m} n={n}", fx.label));
            }
            count += 2;
        }
    }
    Ok(count)
}

/// `d(ε_{n+p}(x), ε_n(x)) ≤ r̂_n(x) + slack` and `d(ε_n(x), f(x)) ≤
/// Σ_{k<n} ε(φᵏx) + slack`.
pub fn cauchy<G, D>(fx: &Fixture<G, D>, stab: &Stabilizer, n_max: usize, p_max: usize, slack: f64) -> Check
where
    G: MetricGroup,
    D: Clone + Debug,
{
    let inst = &fx.instance;
    let grp = inst.group();
    let mut count = 0;
    for x in &fx.points {
        let eps: Vec<G::Element> = (0..=n_max + p_max)
            .map(|n| stab.epsilon_n(inst, &fx.f, n, x))
            .collect::<Result<_, _>>()
            .map_err(|e| e.to_string())?;
        let fx_x = fx.f.eval(x);
        let mut partial = 0.0;
        for n in 0..=n_max {
            let far = inst.iterate(n, x).map_err(|e| e.to_string())?;
            let r_n = stab.tail_sum(inst, &fx.eps, &far, 1e-13).map_err(|e| e.to_string())?.phi_hat();
            for p in 1..=p_max {
                let d = grp.dist(&eps[n + p], &eps[n]);
                if d > r_n + slack {
                    return Err(format!("{}: x={x:?} n={n} p={p}: step {d} exceeds r̂_n {r_n}", fx.label));
                }
                count += 1;
            }
            let d = grp.dist(&eps[n], &fx_x);
            if d > partial + slack {
                return Err(format!("{}: x={x:?} n={n}: d(ε_n, f) = {d} exceeds partial sum {partial}", fx.label));
            }
            partial += fx.eps.eval(&far);
            count += 1;
        }
    }
    Ok(count)
}

/// `ε_{n+1}(x) = g(x)⁻¹·ε_n(φ(x))`.
pub fn shift_identity<G, D>(fx: &Fixture<G, D>, stab: &Stabilizer, n_max: usize, tol: f64) -> Check
where
    G: MetricGroup,
    D: Clone + Debug,
{
    let inst = &fx.instance;
    let grp = inst.group();
    let mut count = 0;
    for x in &fx.points {
        let y = inst.phi(x);
        let g_inv = grp.inv(&inst.g(x));
        for n in 0..=n_max {
            let lhs = stab.epsilon_n(inst, &fx.f, n + 1, x).map_err(|e| e.to_string())?;
            let rhs = grp.op(&g_inv, &stab.epsilon_n(inst, &fx.f, n, &y).map_err(|e| e.to_string())?);
            if !close(grp, &lhs, &rhs, tol) {
                return Err(format!("{}: x={x:?} n={n}: {lhs:?} vs {rhs:?}", fx.label));
            }
            count += 1;
        }
    }
    Ok(count)
}

/// Stabilizes every point; each must converge with `d(f(x), F(x)) ≤ Φ̂(x) +
/// slack` and land within `tol` of the known `f₀(x)`.
pub fn bound<G, D>(fx: &Fixture<G, D>, stab: &Stabilizer, tol: f64, slack: f64) -> Result<Vec<StabilizationResult<G::Element>>, String>
where
    G: MetricGroup,
    D: Clone + Debug,
{
    let grp = fx.instance.group();
    let mut out = Vec::new();
    for x in &fx.points {
        let r = stab.stabilize(&fx.instance, &fx.f, &fx.eps, x, tol).map_err(|e| format!("{}: {e}", fx.label))?;
        if !r.status.is_converged() {
            return Err(format!("{}: x={x:?} status {}", fx.label, r.status));
        }
        let d = grp.dist(&fx.f.eval(x), &r.value);
        if d > r.certified_bound + slack {
            return Err(format!("{}: x={x:?} dist {d} exceeds Φ̂ {}", fx.label, r.certified_bound));
        }
        let err = grp.dist(&r.value, &fx.f0.eval(x));
        if err > tol + slack {
            return Err(format!("{}: x={x:?} off the exact solution by {err}", fx.label));
        }
        out.push(r);
    }
    Ok(out)
}

/// Stabilized values against the brute-force oracle.
pub fn oracle_agreement<G, D>(fx: &Fixture<G, D>, stab: &Stabilizer, tol: f64, oracle_tol: f64, max_diff: f64) -> Result<f64, String>
where
    G: MetricGroup,
    D: Clone + Debug,
{
    let grp = fx.instance.group();
    let mut worst: f64 = 0.0;
    for x in &fx.points {
        let s = stab.stabilize(&fx.instance, &fx.f, &fx.eps, x, tol).map_err(|e| format!("{}: {e}", fx.label))?;
        let o = brute_force_limit(&fx.instance, &fx.f, x, oracle_tol, DEFAULT_MAX_DEPTH).map_err(|e| format!("{}: {e}", fx.label))?;
        if !s.status.is_converged() || !o.converged {
            return Err(format!("{}: x={x:?} stabilizer {} / oracle converged {}", fx.label, s.status, o.converged));
        }
        let d = grp.dist(&s.value, &o.value);
        if d > max_diff {
            return Err(format!("{}: x={x:?} stabilizer and oracle differ by {d}", fx.label));
        }
        worst = worst.max(d);
    }
    Ok(worst)
}
