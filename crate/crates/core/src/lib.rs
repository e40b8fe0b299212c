//! Certified stabilization for the linear functional equation
//! `f(φ(x)) = g(x)·f(x)` on complete metric groups with left-invariant
//! metrics.
//!
//! Given an approximate solution `f` whose defect
//! `d(f(φ(x)), g(x)·f(x))` stays within a budget `ε(x)` with summable orbit
//! series `Φ(x) = Σ ε(φⁿ(x))`, [`Stabilizer::stabilize`] reconstructs the
//! unique exact solution `f₀` within `Φ` of `f`, together with a
//! [`TailCertificate`] bounding `d(f(x), f₀(x))`.
//!
//! ```
//! use ulam_core::{instances, ApproximateSolution, PerturbationBudget, Stabilizer};
//! use ulam_core::special::{digamma, EULER_GAMMA};
//!
//! let eq = instances::digamma();
//! let f = ApproximateSolution::new(|x: &f64| digamma(*x).unwrap() + 2f64.powf(-x));
//! let eps = PerturbationBudget::new(|x: &f64| 2f64.powf(-x - 1.0));
//! let r = Stabilizer::default().stabilize(&eq, &f, &eps, &1.0, 1e-9).unwrap();
//! assert!(r.status.is_converged());
//! assert!((r.value + EULER_GAMMA).abs() < 1e-9);
//! ```

// `!(t > 0.0)` is the NaN-rejecting positivity test throughout.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod equation;
pub mod group;
pub mod instances;
pub mod oracle;
pub mod special;
pub mod stabilizer;
pub mod sum;

pub use equation::{
    ApproximateSolution, EquationError, EquationInstance, Orbit, PerturbationBudget, TelescopingReport,
    TelescopingStatus,
};
pub use group::{MetricGroup, GroupKind};
pub use stabilizer::{
    StabilizationResult, StabilizationStatus, Stabilizer, StabilizerConfig, TailCertificate, TailFailure,
    TailStrategy,
};
