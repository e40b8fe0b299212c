use super::{MetricGroup, DEFAULT_FLOAT_TOLERANCE};

/// A point `(x, y, z)` of the Heisenberg group in polarized coordinates.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct HeisenbergElement {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl HeisenbergElement {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    /// Central coordinate in exponential (symmetric) coordinates.
    fn symmetric_z(&self) -> f64 {
        self.z - 0.5 * self.x * self.y
    }

    /// Cygan–Korányi gauge `((x² + y²)² + 16 t²)^{1/4}`, `t = z − xy/2`.
    pub fn gauge(&self) -> f64 {
        let r2 = self.x * self.x + self.y * self.y;
        let t = self.symmetric_z();
        (r2 * r2 + 16.0 * t * t).sqrt().sqrt()
    }
}

/// ℝ³ with `(x,y,z)·(x',y',z') = (x+x', y+y', z+z'+xy')` and the metric
/// `d(p, q) = N(p⁻¹·q)`.
///
/// The gauge is the Cygan–Korányi norm taken in symmetric coordinates; in
/// polarized coordinates the same formula is not even symmetric.
///
/// Complete: closed gauge balls are compact in ℝ³, so the metric is proper.
///
/// Element equality is judged coordinate-wise (see [`MetricGroup::approx_eq`]).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Heisenberg {
    tolerance: f64,
}

impl Heisenberg {
    pub fn new() -> Self {
        Self::with_tolerance(DEFAULT_FLOAT_TOLERANCE)
    }

    pub fn with_tolerance(tolerance: f64) -> Self {
        Self { tolerance }
    }
}

impl Default for Heisenberg {
    fn default() -> Self {
        Self::new()
    }
}

impl MetricGroup for Heisenberg {
    type Element = HeisenbergElement;

    fn name(&self) -> &'static str {
        "heisenberg"
    }

    fn identity(&self) -> HeisenbergElement {
        HeisenbergElement::default()
    }

    fn op(&self, a: &HeisenbergElement, b: &HeisenbergElement) -> HeisenbergElement {
        HeisenbergElement::new(a.x + b.x, a.y + b.y, a.z + b.z + a.x * b.y)
    }

    fn inv(&self, a: &HeisenbergElement) -> HeisenbergElement {
        HeisenbergElement::new(-a.x, -a.y, -a.z + a.x * a.y)
    }

    fn dist(&self, a: &HeisenbergElement, b: &HeisenbergElement) -> f64 {
        self.op(&self.inv(a), b).gauge()
    }

    fn tolerance(&self) -> f64 {
        self.tolerance
    }

    fn is_commutative(&self) -> bool {
        false
    }

    fn is_valid(&self, a: &HeisenbergElement) -> bool {
        a.x.is_finite() && a.y.is_finite() && a.z.is_finite()
    }

    /// Coordinate-wise, relative to magnitude. Through `d` a rounding error
    /// `u` in the central coordinate reads as `≈ 2√u`, so metric equality
    /// is unusable at float tolerances.
    fn approx_eq(&self, a: &HeisenbergElement, b: &HeisenbergElement) -> bool {
        let scale = 1.0 + [a.x, a.y, a.z, b.x, b.y, b.z].iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let diff = (a.x - b.x).abs().max((a.y - b.y).abs()).max((a.z - b.z).abs());
        diff <= self.tolerance * scale
    }
}
