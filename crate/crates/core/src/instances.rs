//! Built-in equations and their reference solutions.
//!
//! | name        | equation                 | group                 |
//! |-------------|--------------------------|-----------------------|
//! | `abel`      | `f(φ(x)) = f(x) + c`     | `additive-reals`      |
//! | `schroeder` | `f(φ(x)) = c·f(x)`       | `mult-positive-reals` |
//! | `gamma`     | `f(x + 1) = x·f(x)`      | `mult-positive-reals` |
//! | `digamma`   | `f(x + 1) = f(x) + 1/x`  | `additive-reals`      |

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::equation::{ApproximateSolution, EquationInstance};
use crate::group::{AdditiveReals, GroupKind, LogPositive, MultPositiveReals};
use crate::special;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum InstanceError {
    #[error("{0}")]
    InvalidParameter(String),
    #[error("unknown equation {0:?}")]
    UnknownEquation(String),
    #[error("could not parse map {0:?}; expected `shift <h>` or `scale <s>`")]
    BadMap(String),
}

/// The map `φ` for `abel` and `schroeder`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PhiSpec {
    /// `x ↦ x + h`, `h ≠ 0`, on all of ℝ.
    Shift(f64),
    /// `x ↦ s·x`, `s > 0`, `s ≠ 1`, on `x > 0`.
    Scale(f64),
}

impl PhiSpec {
    fn validate(self) -> Result<Self, InstanceError> {
        match self {
            PhiSpec::Shift(h) if h.is_finite() && h != 0.0 => Ok(self),
            PhiSpec::Scale(s) if s.is_finite() && s > 0.0 && s != 1.0 => Ok(self),
            PhiSpec::Shift(h) => Err(InstanceError::InvalidParameter(format!("shift must be finite and nonzero, got {h}"))),
            PhiSpec::Scale(s) => Err(InstanceError::InvalidParameter(format!(
                "scale must be positive, finite and different from 1, got {s}"
            ))),
        }
    }

    pub fn apply(self, x: f64) -> f64 {
        match self {
            PhiSpec::Shift(h) => x + h,
            PhiSpec::Scale(s) => s * x,
        }
    }

    pub fn contains(self, x: f64) -> bool {
        match self {
            PhiSpec::Shift(_) => x.is_finite(),
            PhiSpec::Scale(_) => x.is_finite() && x > 0.0,
        }
    }

    /// `x ↦ log_base(φ)(x)`-type coordinate `τ` with `τ(φ(x)) = τ(x) + 1`.
    fn orbit_coordinate(self, x: f64) -> f64 {
        match self {
            PhiSpec::Shift(h) => x / h,
            PhiSpec::Scale(s) => x.ln() / s.ln(),
        }
    }
}

impl fmt::Display for PhiSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PhiSpec::Shift(h) => write!(f, "shift {h}"),
            PhiSpec::Scale(s) => write!(f, "scale {s}"),
        }
    }
}

impl FromStr for PhiSpec {
    type Err = InstanceError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || InstanceError::BadMap(s.to_string());
        let mut parts = s.split_whitespace();
        let kind = parts.next().ok_or_else(bad)?;
        let value: f64 = parts.next().ok_or_else(bad)?.parse().map_err(|_| bad())?;
        if parts.next().is_some() {
            return Err(bad());
        }
        match kind {
            "shift" => PhiSpec::Shift(value),
            "scale" => PhiSpec::Scale(value),
            _ => return Err(bad()),
        }
        .validate()
    }
}

/// The built-in equations by CLI name.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EquationKind {
    Abel,
    Schroeder,
    Gamma,
    Digamma,
}

impl EquationKind {
    pub const ALL: [EquationKind; 4] =
        [EquationKind::Abel, EquationKind::Schroeder, EquationKind::Gamma, EquationKind::Digamma];

    pub fn name(self) -> &'static str {
        match self {
            EquationKind::Abel => "abel",
            EquationKind::Schroeder => "schroeder",
            EquationKind::Gamma => "gamma",
            EquationKind::Digamma => "digamma",
        }
    }

    /// The group the equation lives in.
    pub fn group(self) -> GroupKind {
        match self {
            EquationKind::Abel | EquationKind::Digamma => GroupKind::AdditiveReals,
            EquationKind::Schroeder | EquationKind::Gamma => GroupKind::MultPositiveReals,
        }
    }
}

impl FromStr for EquationKind {
    type Err = InstanceError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        EquationKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| InstanceError::UnknownEquation(s.to_string()))
    }
}

/// Abel: `f(φ(x)) = f(x) + c`.
pub fn abel(c: f64, phi: PhiSpec) -> Result<EquationInstance<AdditiveReals>, InstanceError> {
    if !c.is_finite() {
        return Err(InstanceError::InvalidParameter(format!("c must be finite, got {c}")));
    }
    let phi = phi.validate()?;
    Ok(EquationInstance::new(format!("abel(c={c}, {phi})"), AdditiveReals::new(), move |x| phi.apply(*x), move |_| c)
        .with_domain(move |x| phi.contains(*x)))
}

/// The solution `c·τ(x)` of [`abel`], where `τ(φ(x)) = τ(x) + 1`.
pub fn abel_solution(c: f64, phi: PhiSpec) -> ApproximateSolution<f64> {
    ApproximateSolution::new(move |x: &f64| c * phi.orbit_coordinate(*x))
}

/// Schröder: `f(φ(x)) = c·f(x)` with `c > 0`.
pub fn schroeder(c: f64, phi: PhiSpec) -> Result<EquationInstance<MultPositiveReals>, InstanceError> {
    let factor = LogPositive::from_value(c)
        .filter(|l| l.ln().is_finite())
        .ok_or_else(|| InstanceError::InvalidParameter(format!("schroeder requires c > 0, got {c}")))?;
    let phi = phi.validate()?;
    Ok(EquationInstance::new(
        format!("schroeder(c={c}, {phi})"),
        MultPositiveReals::new(),
        move |x| phi.apply(*x),
        move |_| factor,
    )
    .with_domain(move |x| phi.contains(*x)))
}

/// The solution `c^{τ(x)}` of [`schroeder`], carried in log space.
pub fn schroeder_solution(c: f64, phi: PhiSpec) -> ApproximateSolution<LogPositive> {
    let ln_c = c.ln();
    ApproximateSolution::new(move |x: &f64| LogPositive::from_ln(ln_c * phi.orbit_coordinate(*x)))
}

/// Gamma: `f(x + 1) = x·f(x)` on `x > 0`.
pub fn gamma() -> EquationInstance<MultPositiveReals> {
    EquationInstance::new("gamma", MultPositiveReals::new(), |x: &f64| x + 1.0, |x: &f64| {
        LogPositive::from_ln(x.ln())
    })
    .with_domain(|x| x.is_finite() && *x > 0.0)
}

/// `Γ`, carried as `ln Γ`.
pub fn gamma_solution() -> ApproximateSolution<LogPositive> {
    ApproximateSolution::new(|x: &f64| LogPositive::from_ln(special::log_gamma(*x).unwrap_or(f64::NAN)))
}

/// Digamma: `f(x + 1) = f(x) + 1/x` on `x > 0`.
pub fn digamma() -> EquationInstance<AdditiveReals> {
    EquationInstance::new("digamma", AdditiveReals::new(), |x: &f64| x + 1.0, |x: &f64| 1.0 / x)
        .with_domain(|x| x.is_finite() && *x > 0.0)
}

/// `ψ₀`.
pub fn digamma_solution() -> ApproximateSolution<f64> {
    ApproximateSolution::new(|x: &f64| special::digamma(*x).unwrap_or(f64::NAN))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::MetricGroup;

    #[test]
    fn reference_solutions_have_zero_defect() {
        let phis = [PhiSpec::Scale(0.5), PhiSpec::Scale(3.0), PhiSpec::Shift(1.0), PhiSpec::Shift(-0.25)];
        for phi in phis {
            let inst = abel(2.5, phi).unwrap();
            let f = abel_solution(2.5, phi);
            for x in [0.3, 1.0, 7.5] {
                assert!(inst.defect(&f, &x).unwrap() < 1e-12, "abel {phi} at {x}");
            }
            let inst = schroeder(1.7, phi).unwrap();
            let f = schroeder_solution(1.7, phi);
            for x in [0.3, 1.0, 7.5] {
                assert!(inst.defect(&f, &x).unwrap() < 1e-12, "schroeder {phi} at {x}");
            }
        }
        for x in [0.1, 0.5, 1.0, 3.7, 42.0] {
            assert!(gamma().defect(&gamma_solution(), &x).unwrap() < 1e-12);
            assert!(digamma().defect(&digamma_solution(), &x).unwrap() < 1e-12);
        }
    }

    #[test]
    fn parameter_validation() {
        assert!(schroeder(0.0, PhiSpec::Shift(1.0)).is_err());
        assert!(schroeder(-2.0, PhiSpec::Shift(1.0)).is_err());
        assert!(abel(1.0, PhiSpec::Scale(1.0)).is_err());
        assert!(abel(1.0, PhiSpec::Shift(0.0)).is_err());
        assert!(abel(f64::NAN, PhiSpec::Shift(1.0)).is_err());
    }

    #[test]
    fn map_specs_parse() {
        assert_eq!("scale 0.5".parse::<PhiSpec>().unwrap(), PhiSpec::Scale(0.5));
        assert_eq!("shift 1".parse::<PhiSpec>().unwrap(), PhiSpec::Shift(1.0));
        assert!("scale".parse::<PhiSpec>().is_err());
        assert!("rotate 1".parse::<PhiSpec>().is_err());
        assert!("scale 1".parse::<PhiSpec>().is_err());
    }

    #[test]
    fn equation_groups() {
        assert_eq!(EquationKind::Gamma.group(), GroupKind::MultPositiveReals);
        assert_eq!(EquationKind::Digamma.group(), GroupKind::AdditiveReals);
        assert_eq!("schroeder".parse::<EquationKind>().unwrap(), EquationKind::Schroeder);
        assert_eq!(gamma().group().name(), "mult-positive-reals");
    }
}
