use super::{MetricGroup, DEFAULT_FLOAT_TOLERANCE};
use crate::sum::NeumaierSum;

/// `(ℝ, +)` with the Euclidean metric `|a − b|`.
///
/// Complete: ℝ is complete and addition and negation are continuous.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AdditiveReals {
    tolerance: f64,
}

impl AdditiveReals {
    pub fn new() -> Self {
        Self::with_tolerance(DEFAULT_FLOAT_TOLERANCE)
    }

    pub fn with_tolerance(tolerance: f64) -> Self {
        Self { tolerance }
    }
}

impl Default for AdditiveReals {
    fn default() -> Self {
        Self::new()
    }
}

impl MetricGroup for AdditiveReals {
    type Element = f64;

    fn name(&self) -> &'static str {
        "additive-reals"
    }

    fn identity(&self) -> f64 {
        0.0
    }

    fn op(&self, a: &f64, b: &f64) -> f64 {
        a + b
    }

    fn inv(&self, a: &f64) -> f64 {
        -a
    }

    fn dist(&self, a: &f64, b: &f64) -> f64 {
        (a - b).abs()
    }

    fn tolerance(&self) -> f64 {
        self.tolerance
    }

    fn is_commutative(&self) -> bool {
        true
    }

    fn is_valid(&self, a: &f64) -> bool {
        a.is_finite()
    }

    /// Compensated sum; order is irrelevant in exact arithmetic.
    fn ordered_product(&self, elements: &[f64]) -> f64 {
        elements.iter().copied().collect::<NeumaierSum>().total()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::laws::check_axioms;

    #[test]
    fn examples() {
        let g = AdditiveReals::new();
        assert_eq!(g.op(&2.5, &-1.0), 1.5);
        assert_eq!(g.inv(&3.0), -3.0);
        assert_eq!(g.dist(&1.0, &4.0), 3.0);
        assert_eq!(g.dist(&7.25, &7.25), 0.0);
        assert_eq!(g.ordered_product(&[]), 0.0);
        assert_eq!(g.ordered_product(&[1.0, 2.0, 3.0]), 6.0);
    }

    #[test]
    fn laws_on_a_few_points() {
        let g = AdditiveReals::new();
        check_axioms(&g, &1.5, &-2.0, &3.25, 1e-12);
    }
}
