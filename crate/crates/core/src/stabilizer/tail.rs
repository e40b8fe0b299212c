//! Certified bounds on `r_N(x) = Σ_{k≥N} ε(φᵏ(x))`.

use std::fmt;

use thiserror::Error;

use super::StabilizerConfig;
use crate::equation::{EquationError, PerturbationBudget};
use crate::sum::NeumaierSum;

/// How a [`TailCertificate`] bounds the unsummed remainder.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TailStrategy {
    /// The caller's majorant evaluated at `φᴺ(x)`.
    ClosedForm,
    /// Consecutive ratios over the last window stayed below `ρ̄`; assumes
    /// they continue to.
    GeometricRatio,
    /// A run of exactly-zero budget terms; assumes the budget stays zero.
    ZeroTail,
}

impl TailStrategy {
    pub fn name(self) -> &'static str {
        match self {
            TailStrategy::ClosedForm => "closed_form",
            TailStrategy::GeometricRatio => "geometric_ratio",
            TailStrategy::ZeroTail => "zero_tail",
        }
    }
}

impl fmt::Display for TailStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Certified upper bound `Φ̂(x) = partial_sum + tail_bound ≥ Φ(x)`, valid
/// under the assumption recorded in `strategy`.
#[derive(Clone, Debug, PartialEq)]
pub struct TailCertificate {
    /// `Σ_{n<depth} ε(φⁿ(x))`.
    pub partial_sum: f64,
    /// Majorant of `r_depth(x)`.
    pub tail_bound: f64,
    pub depth: usize,
    pub strategy: TailStrategy,
    /// The window of ratios `ε(φᵏ⁺¹x)/ε(φᵏx)` behind a geometric bound.
    pub ratio_evidence: Vec<f64>,
}

impl TailCertificate {
    pub fn phi_hat(&self) -> f64 {
        self.partial_sum + self.tail_bound
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TailFailure {
    #[error("budget series shows no decay after {depth} terms (partial sum {partial_sum})")]
    Diverged { depth: usize, partial_sum: f64 },
    #[error("no tail certificate within {depth} iterations")]
    MaxIterations { depth: usize },
    #[error("budget value {value} at orbit step {step} is not a nonnegative number")]
    InvalidBudget { step: usize, value: f64 },
    #[error("tolerance must be positive, got {0}")]
    InvalidTolerance(f64),
    #[error(transparent)]
    Equation(#[from] EquationError),
}

/// Running state of a budget series along one orbit. Terms are pushed in
/// orbit order; candidate certificates look back over what is known.
pub(crate) struct TailWalker<'c, D> {
    cfg: &'c StabilizerConfig,
    terms: Vec<f64>,
    partial: NeumaierSum,
    _domain: std::marker::PhantomData<fn(&D)>,
}

impl<'c, D> TailWalker<'c, D> {
    pub fn new(cfg: &'c StabilizerConfig) -> Self {
        Self { cfg, terms: Vec::new(), partial: NeumaierSum::new(), _domain: Default::default() }
    }

    pub fn depth(&self) -> usize {
        self.terms.len()
    }

    /// Sum of all pushed terms.
    pub fn partial_sum(&self) -> f64 {
        self.partial.total()
    }

    /// Validates a budget value observed at orbit step `step`.
    pub fn check_term(step: usize, value: f64) -> Result<f64, TailFailure> {
        if value >= 0.0 && value.is_finite() {
            Ok(value)
        } else {
            Err(TailFailure::InvalidBudget { step, value })
        }
    }

    /// Records `ε(φᵏ(x))` for `k = self.depth()`.
    pub fn push(&mut self, value: f64) {
        self.terms.push(value);
        self.partial.add(value);
    }

    fn ratio(&self, k: usize) -> f64 {
        let (prev, next) = (self.terms[k - 1], self.terms[k]);
        match (prev == 0.0, next == 0.0) {
            (_, true) => 0.0,
            (true, false) => f64::INFINITY,
            _ => next / prev,
        }
    }

    /// Certificate for `r_N` at `N = self.depth()`, given `φᴺ(x)`.
    ///
    /// `None` when no strategy applies yet.
    pub fn certify(&self, budget: &PerturbationBudget<D>, point_at_depth: &D) -> Option<TailCertificate> {
        let n = self.depth();
        let partial_sum = self.partial_sum();
        let make = |tail_bound, strategy, ratio_evidence| TailCertificate {
            partial_sum,
            tail_bound,
            depth: n,
            strategy,
            ratio_evidence,
        };

        if let Some(m) = budget.tail_majorant(point_at_depth) {
            return (m >= 0.0 && m.is_finite()).then(|| make(m, TailStrategy::ClosedForm, Vec::new()));
        }

        let run = self.cfg.zero_run;
        if run > 0 && n >= run && self.terms[n - run..].iter().all(|&t| t == 0.0) {
            return Some(make(0.0, TailStrategy::ZeroTail, Vec::new()));
        }

        let w = self.cfg.ratio_window;
        if w > 0 && n > w {
            let ratios: Vec<f64> = (n - w..n).map(|k| self.ratio(k)).collect();
            if ratios.iter().all(|&r| r <= self.cfg.ratio_ceiling) {
                let rho = self.cfg.ratio_ceiling;
                let bound = self.terms[n - 1] * rho / (1.0 - rho);
                return Some(make(bound, TailStrategy::GeometricRatio, ratios));
            }
        }
        None
    }

    /// Whether the series visibly fails to converge: a non-finite partial
    /// sum, or positive terms that never decreased over the divergence window.
    pub fn diverged(&self) -> bool {
        if !self.partial_sum().is_finite() {
            return true;
        }
        let n = self.depth();
        let w = self.cfg.divergence_window;
        w > 0 && n > w && self.terms[n - 1 - w] > 0.0 && (n - w..n).all(|k| self.terms[k] >= self.terms[k - 1])
    }
}
