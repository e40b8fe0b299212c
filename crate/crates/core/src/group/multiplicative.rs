use std::fmt;

use super::{MetricGroup, DEFAULT_FLOAT_TOLERANCE};
use crate::sum::NeumaierSum;

/// A strictly positive real carried by its natural logarithm.
///
/// Products along long orbits (e.g. `x(x+1)(x+2)…`) stay representable long
/// after the value itself would overflow an `f64`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct LogPositive(f64);

impl LogPositive {
    pub fn from_ln(ln: f64) -> Self {
        Self(ln)
    }

    /// `None` unless `value > 0`.
    pub fn from_value(value: f64) -> Option<Self> {
        (value > 0.0).then(|| Self(value.ln()))
    }

    pub fn ln(self) -> f64 {
        self.0
    }

    /// The represented value. May overflow to `inf` even though the carrier
    /// does not.
    pub fn value(self) -> f64 {
        self.0.exp()
    }
}

impl fmt::Display for LogPositive {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "exp({})", self.0)
    }
}

/// `(ℝ₊*, ×)` with the metric `|ln a − ln b|`.
///
/// Complete: `ln` is an isometry onto `(ℝ, +)` with the Euclidean metric.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MultPositiveReals {
    tolerance: f64,
}

impl MultPositiveReals {
    pub fn new() -> Self {
        Self::with_tolerance(DEFAULT_FLOAT_TOLERANCE)
    }

    pub fn with_tolerance(tolerance: f64) -> Self {
        Self { tolerance }
    }
}

impl Default for MultPositiveReals {
    fn default() -> Self {
        Self::new()
    }
}

impl MetricGroup for MultPositiveReals {
    type Element = LogPositive;

    fn name(&self) -> &'static str {
        "mult-positive-reals"
    }

    fn identity(&self) -> LogPositive {
        LogPositive(0.0)
    }

    fn op(&self, a: &LogPositive, b: &LogPositive) -> LogPositive {
        LogPositive(a.0 + b.0)
    }

    fn inv(&self, a: &LogPositive) -> LogPositive {
        LogPositive(-a.0)
    }

    fn dist(&self, a: &LogPositive, b: &LogPositive) -> f64 {
        (a.0 - b.0).abs()
    }

    fn tolerance(&self) -> f64 {
        self.tolerance
    }

    fn is_commutative(&self) -> bool {
        true
    }

    fn is_valid(&self, a: &LogPositive) -> bool {
        a.0.is_finite()
    }

    fn ordered_product(&self, elements: &[LogPositive]) -> LogPositive {
        LogPositive(elements.iter().map(|a| a.0).collect::<NeumaierSum>().total())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::laws::check_axioms;

    #[test]
    fn logs_add() {
        let g = MultPositiveReals::new();
        let six = g.op(&LogPositive::from_ln(2f64.ln()), &LogPositive::from_ln(3f64.ln()));
        assert!((six.ln() - 6f64.ln()).abs() < 1e-15);
        assert!((six.value() - 6.0).abs() < 1e-13);
    }

    #[test]
    fn non_positive_values_rejected() {
        assert!(LogPositive::from_value(0.0).is_none());
        assert!(LogPositive::from_value(-1.0).is_none());
        assert!(LogPositive::from_value(f64::NAN).is_none());
    }

    #[test]
    fn huge_products_stay_finite() {
        let g = MultPositiveReals::new();
        // 1·2·…·400 overflows f64; its logarithm does not.
        let factors: Vec<_> = (1..=400).map(|k| LogPositive::from_value(k as f64).unwrap()).collect();
        let p = g.ordered_product(&factors);
        assert!(g.is_valid(&p));
        assert!(p.value().is_infinite());
    }

    #[test]
    fn laws_on_a_few_points() {
        let g = MultPositiveReals::new();
        let [a, b, c] = [0.3, -1.7, 4.0].map(LogPositive::from_ln);
        check_axioms(&g, &a, &b, &c, 1e-12);
    }
}
