//! Metric groups with left-invariant metrics.
//!
//! Every instance here is a complete metric group `(G, ·, d)` whose metric
//! satisfies `d(x·y, x·z) = d(y, z)`. Completeness cannot be checked at
//! runtime; each instance states why it holds.

mod additive;
mod dynamic;
mod free;
mod heisenberg;
mod multiplicative;

pub use additive::AdditiveReals;
pub use dynamic::{AnyElement, AnyGroup, GroupKind, GroupMismatch, UnknownGroup};
pub use free::{FreeGroup2, Letter, ParseWordError, Word};
pub use heisenberg::{Heisenberg, HeisenbergElement};
pub use multiplicative::{LogPositive, MultPositiveReals};

use std::fmt::Debug;

/// Default element-equality tolerance for float-carried instances.
pub const DEFAULT_FLOAT_TOLERANCE: f64 = 1e-12;

/// A complete metric group with a left-invariant metric.
///
/// `op(a, b)` is written `a·b`. Implementations must be pure: instances are
/// immutable once built and may be shared across threads.
pub trait MetricGroup: Send + Sync {
    type Element: Clone + Debug + PartialEq + Send + Sync;

    /// Name used by the CLI and the Python bindings.
    fn name(&self) -> &'static str;

    fn identity(&self) -> Self::Element;

    fn op(&self, a: &Self::Element, b: &Self::Element) -> Self::Element;

    fn inv(&self, a: &Self::Element) -> Self::Element;

    /// The metric `d`. Nonnegative, symmetric, left-invariant.
    fn dist(&self, a: &Self::Element, b: &Self::Element) -> f64;

    /// Element-equality tolerance: `0` for exact carriers.
    fn tolerance(&self) -> f64;

    fn is_commutative(&self) -> bool;

    /// Whether `a` is a well-formed element of this instance.
    fn is_valid(&self, _a: &Self::Element) -> bool {
        true
    }

    /// Distance to the identity.
    fn norm(&self, a: &Self::Element) -> f64 {
        self.dist(&self.identity(), a)
    }

    fn approx_eq(&self, a: &Self::Element, b: &Self::Element) -> bool {
        self.dist(a, b) <= self.tolerance()
    }

    /// Ordered product of `a_p, …, a_n` (given in that order), evaluated as
    /// `a_n · a_{n−1} · … · a_p`. The empty product is the identity.
    fn ordered_product(&self, elements: &[Self::Element]) -> Self::Element {
        elements
            .iter()
            .fold(self.identity(), |acc, a| self.op(a, &acc))
    }
}
