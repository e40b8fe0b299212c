//! Random fixtures with a known exact solution.
//!
//! Each fixture picks `f₀` and `φ`, sets `g(x) = f₀(φ(x))·f₀(x)⁻¹` so that
//! `f₀` solves the equation, and perturbs it as `f = f₀·δ`. Left-invariance
//! makes the defect `d(δ(φ(x)), δ(x))`, so `‖δ(x)‖ + ‖δ(φ(x))‖` is an
//! admissible budget and `ε_n(x) = f₀(x)·δ(φⁿ(x))`.

#![allow(dead_code)]

pub mod checks;

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ulam_core::group::{
    AdditiveReals, FreeGroup2, Heisenberg, HeisenbergElement, Letter, LogPositive, MultPositiveReals, Word,
};
use ulam_core::{ApproximateSolution, EquationInstance, MetricGroup, PerturbationBudget};

pub struct Fixture<G: MetricGroup, D> {
    pub label: String,
    pub instance: EquationInstance<G, D>,
    pub f0: ApproximateSolution<G::Element, D>,
    pub f: ApproximateSolution<G::Element, D>,
    pub eps: PerturbationBudget<D>,
    pub points: Vec<D>,
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn conjugate<G, D>(
    label: String,
    group: G,
    phi: impl Fn(&D) -> D + Send + Sync + 'static,
    domain: impl Fn(&D) -> bool + Send + Sync + 'static,
    f0: impl Fn(&D) -> G::Element + Send + Sync + 'static,
    delta: impl Fn(&D) -> G::Element + Send + Sync + 'static,
    points: Vec<D>,
) -> Fixture<G, D>
where
    G: MetricGroup + Clone + 'static,
    D: 'static,
{
    let phi = Arc::new(phi);
    let f0 = Arc::new(f0);
    let delta = Arc::new(delta);

    let (p, q, h, grp) = (Arc::clone(&phi), Arc::clone(&phi), Arc::clone(&f0), group.clone());
    let instance = EquationInstance::new(label.clone(), group.clone(), move |x| q(x), move |x| {
        grp.op(&h(&p(x)), &grp.inv(&h(x)))
    })
    .with_domain(domain);

    let (h, dl, grp) = (Arc::clone(&f0), Arc::clone(&delta), group.clone());
    let f = ApproximateSolution::new(move |x| grp.op(&h(x), &dl(x)));
    let (p, dl, grp) = (Arc::clone(&phi), Arc::clone(&delta), group.clone());
    let eps = PerturbationBudget::new(move |x| grp.norm(&dl(x)) + grp.norm(&dl(&p(x))));
    let h = Arc::clone(&f0);
    Fixture { label, instance, f0: ApproximateSolution::new(move |x| h(x)), f, eps, points }
}

/// Real-valued ingredients shared by the additive and multiplicative fixtures.
struct RealShape {
    shift: Option<f64>,
    scale: f64,
    a: f64,
    b: f64,
    c: f64,
    amp: f64,
    rate: f64,
    points: Vec<f64>,
    desc: String,
}

fn real_shape(rng: &mut ChaCha8Rng) -> RealShape {
    let a = rng.random_range(-2.0..2.0);
    let b = rng.random_range(0.2..3.0);
    let c = rng.random_range(-2.0..2.0);
    let amp = rng.random_range(-1.0..1.0);
    if rng.random_bool(0.5) {
        let h = rng.random_range(0.25..2.0);
        let rate = rng.random_range(0.2..2.0);
        let points = (0..4).map(|_| rng.random_range(-1.0..5.0)).collect();
        RealShape { shift: Some(h), scale: 1.0, a, b, c, amp, rate, points, desc: format!("shift {h:.3}, decay e^(-{rate:.3}x)") }
    } else {
        let s = rng.random_range(0.3..0.8);
        let rate = rng.random_range(1.0..3.0);
        let points = (0..4).map(|_| rng.random_range(0.1..10.0)).collect();
        RealShape { shift: None, scale: s, a, b, c, amp, rate, points, desc: format!("scale {s:.3}, decay x^{rate:.3}") }
    }
}

impl RealShape {
    fn phi(&self) -> impl Fn(&f64) -> f64 + Send + Sync + 'static {
        let (h, s) = (self.shift, self.scale);
        move |x| match h {
            Some(h) => x + h,
            None => s * x,
        }
    }

    fn domain(&self) -> impl Fn(&f64) -> bool + Send + Sync + 'static {
        let shift = self.shift.is_some();
        move |x| x.is_finite() && (shift || *x > 0.0)
    }

    fn f0(&self) -> impl Fn(&f64) -> f64 + Send + Sync + 'static {
        let (a, b, c) = (self.a, self.b, self.c);
        move |x| a * (b * x).sin() + c * x.tanh()
    }

    fn delta(&self) -> impl Fn(&f64) -> f64 + Send + Sync + 'static {
        let (shift, amp, rate) = (self.shift.is_some(), self.amp, self.rate);
        move |x| if shift { amp * (-rate * x).exp() } else { amp * x.powf(rate) }
    }
}

pub fn additive_fixture(seed: u64) -> Fixture<AdditiveReals, f64> {
    let s = real_shape(&mut rng(seed));
    conjugate(format!("additive #{seed}: {}", s.desc), AdditiveReals::new(), s.phi(), s.domain(), s.f0(), s.delta(), s.points.clone())
}

pub fn mult_fixture(seed: u64) -> Fixture<MultPositiveReals, f64> {
    let s = real_shape(&mut rng(seed ^ 0x9e37_79b9));
    let (f0, delta) = (s.f0(), s.delta());
    conjugate(
        format!("mult #{seed}: {}", s.desc),
        MultPositiveReals::new(),
        s.phi(),
        s.domain(),
        move |x| LogPositive::from_ln(f0(x)),
        move |x| LogPositive::from_ln(delta(x)),
        s.points.clone(),
    )
}

/// Deterministic small integer in `[-r, r]` from `(seed, k)`.
pub fn table(seed: u64, k: i64, r: i64) -> i64 {
    let mut z = seed.wrapping_add((k as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^= z >> 31;
    (z % (2 * r as u64 + 1)) as i64 - r
}

/// Perturbation support length of the Heisenberg fixtures.
pub const HEISENBERG_SUPPORT: i64 = 20;

/// Integer `f₀` on `k ≥ 0` with `φ(k) = k + 1` and a dyadic perturbation
/// along one horizontal axis, zero from step [`HEISENBERG_SUPPORT`] on. All
/// group arithmetic stays exact.
pub fn heisenberg_fixture(seed: u64) -> Fixture<Heisenberg, i64> {
    let mut r = rng(seed ^ 0x5bd1_e995);
    let amp = [-3.0, -2.0, -1.0, 1.0, 2.0, 3.0][r.random_range(0..6)];
    let along_x = r.random_bool(0.5);
    let points = (0..4).map(|_| r.random_range(0..6)).collect();
    conjugate(
        format!("heisenberg #{seed}: amp {amp}, {} axis", if along_x { "x" } else { "y" }),
        Heisenberg::new(),
        |k: &i64| k + 1,
        |k| *k >= 0,
        move |k| {
            let c = |i| table(seed.wrapping_add(i), *k, 3) as f64;
            HeisenbergElement::new(c(0), c(1), c(2))
        },
        move |k| {
            let d = if *k < HEISENBERG_SUPPORT { amp * 2f64.powi(-(*k as i32)) } else { 0.0 };
            if along_x { HeisenbergElement::new(d, 0.0, 0.0) } else { HeisenbergElement::new(0.0, d, 0.0) }
        },
        points,
    )
}

pub fn random_word(seed: u64, k: i64, max_len: i64) -> Word {
    let len = table(seed, k, max_len).unsigned_abs() as i64;
    Word::new((0..len).map(|i| {
        [Letter::A, Letter::AInv, Letter::B, Letter::BInv][(table(seed ^ 0xabcd, k * 16 + i, 2) + 2) as usize % 4]
    }))
}

/// Word-valued `f₀` on `k ≥ 0` with a perturbation supported on `k < support`.
pub fn free_fixture(seed: u64) -> (Fixture<FreeGroup2, i64>, i64) {
    let mut r = rng(seed ^ 0x1234_5678);
    let support = r.random_range(1..5);
    let points = (0..4).map(|_| r.random_range(0..7)).collect();
    let fx = conjugate(
        format!("free #{seed}: support {support}"),
        FreeGroup2,
        |k: &i64| k + 1,
        |k| *k >= 0,
        move |k| random_word(seed, *k, 4),
        move |k| {
            if *k < support {
                let w = random_word(seed ^ 0xfeed, *k, 3);
                if w.is_empty() { "a".parse().unwrap() } else { w }
            } else {
                Word::identity()
            }
        },
        points,
    );
    (fx, support)
}
