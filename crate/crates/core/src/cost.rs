//! Transportation costs over classifier pairs, faithfulness, balance and
//! alignment predicates.
//!
//! The transportation cost C(t -> c) is the fraction of unordered pairs of
//! individuals that are monochromatic in `t` but split in `c`. It is
//! asymmetric, violates the triangle inequality, and assigns distance zero
//! between a classifier and its complement. The symmetrized variant counts
//! pairs whose sameness status differs between the two classifiers.

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::classifier::Classifier;
use crate::error::Result;
use crate::rational::{exceeds_scaled_sqrt, rat, within_scaled_sqrt, Rat};

/// An exact pair-counting cost: `broken_pairs / pair_count` with
/// `pair_count = C(n,2)`. Always in [0, 1].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairCost {
    pub broken_pairs: u64,
    pub pair_count: u64,
}

impl PairCost {
    pub fn as_ratio(&self) -> Rat {
        rat(self.broken_pairs as i128, self.pair_count as i128)
    }

    pub fn is_zero(&self) -> bool {
        self.broken_pairs == 0
    }

    /// Exact comparison against a rational tolerance.
    pub fn at_most(&self, delta: Rat) -> bool {
        self.as_ratio() <= delta
    }

    pub fn exceeds(&self, delta: Rat) -> bool {
        self.as_ratio() > delta
    }
}

/// Transportation cost C(t -> c): pairs monochromatic in `t` but split in
/// `c`, as a fraction of C(n,2). Computed from quadrant sizes of the ordered
/// pair `(t, c)` as `(g00*g01 + g10*g11) / C(n,2)`.
pub fn transport_cost(t: &Classifier, c: &Classifier) -> Result<PairCost> {
    let q = t.quadrants(c)?;
    let (g00, g01, g10, g11) = q.sizes();
    Ok(PairCost {
        broken_pairs: g00 * g01 + g10 * g11,
        pair_count: t.universe().pair_count(),
    })
}

/// Symmetrized transportation cost C^s(u <-> v): the fraction of unordered
/// pairs monochromatic in exactly one of `u`, `v`. Computed by direct pair
/// classification; the quadrant identity
/// `g00*g01 + g10*g11 + g00*g10 + g01*g11` is asserted as a cross-check in
/// tests rather than trusted as the implementation route.
pub fn symmetric_cost(u: &Classifier, v: &Classifier) -> Result<PairCost> {
    u.quadrants(v)?; // dimension check
    let n = u.len();
    let mut broken = 0u64;
    for i in 0..n {
        for j in (i + 1)..n {
            let same_u = u.bit(i) == u.bit(j);
            let same_v = v.bit(i) == v.bit(j);
            if same_u != same_v {
                broken += 1;
            }
        }
    }
    Ok(PairCost {
        broken_pairs: broken,
        pair_count: u.universe().pair_count(),
    })
}

/// True iff `c` is delta-faithful to `t`: C(t -> c) <= delta. Equivalently,
/// `c` lies in the delta-neighborhood of `t`.
pub fn is_faithful(c: &Classifier, t: &Classifier, delta: Rat) -> Result<bool> {
    Ok(transport_cost(t, c)?.at_most(delta))
}

/// True iff both sides of `c` are strictly larger than `sqrt(2*delta) * n`.
pub fn is_balanced(c: &Classifier, delta: Rat) -> bool {
    let coeff = rat(2, 1) * delta;
    let n = c.len();
    exceeds_scaled_sqrt(c.zeros_count(), coeff, n) && exceeds_scaled_sqrt(c.ones_count(), coeff, n)
}

/// True iff both cross-intersections of the two classifiers' sides are at
/// most `sqrt(delta/2) * n`: `|p^0 ∩ q^1| <= thr` and `|q^0 ∩ p^1| <= thr`.
pub fn in_close_alignment(p: &Classifier, q: &Classifier, delta: Rat) -> Result<bool> {
    let quad = p.quadrants(q)?;
    let coeff = delta / rat(2, 1);
    let n = p.len();
    Ok(within_scaled_sqrt(quad.g01(), coeff, n) && within_scaled_sqrt(quad.g10(), coeff, n))
}

/// The per-side recovery error cap `((tau - sqrt(tau^2 - 2*delta)) / 2) * n`
/// as a float for display. `None` when `tau^2 < 2*delta` (cap undefined).
pub fn recovery_error_cap(tau: Rat, delta: Rat, n: usize) -> Option<f64> {
    let disc = tau * tau - rat(2, 1) * delta;
    if disc < Rat::zero() {
        return None;
    }
    let tau_f = crate::rational::rat_to_f64(&tau);
    let disc_f = crate::rational::rat_to_f64(&disc);
    Some((tau_f - disc_f.sqrt()) / 2.0 * n as f64)
}

/// Exact test of `error <= ((tau - sqrt(tau^2 - 2*delta)) / 2) * n`, decided
/// entirely in rational arithmetic:
/// `e <= (tau - sqrt(d))/2 * n  <=>  sqrt(d) <= tau - 2e/n  <=>  B >= 0 and d <= B^2`.
/// `None` when `tau^2 < 2*delta` (the cap is undefined).
pub fn error_within_cap(error: u64, tau: Rat, delta: Rat, n: usize) -> Option<bool> {
    let disc = tau * tau - rat(2, 1) * delta;
    if disc < Rat::zero() {
        return None;
    }
    let b = tau - rat(2 * error as i128, n as i128);
    if b < Rat::zero() {
        return Some(false);
    }
    Some(disc <= b * b)
}

/// Sum of the two mis-split products
/// `f(tau)*g(tau) + f(~tau)*g(~tau)` with `f(x) = (x - sqrt(x^2-2d))/2`,
/// `g(x) = (x + sqrt(x^2-2d))/2` and `~tau = 1 - tau`; equals `delta`
/// identically on `tau in [sqrt(2d), 1 - sqrt(2d)]` (the product telescopes
/// to `delta/2` on each side).
pub fn missplit_product_sum(tau: f64, delta: f64) -> f64 {
    let term = |x: f64| {
        // At the interval boundary x = sqrt(2*delta) the discriminant is
        // zero in exact arithmetic; clamp the float residue.
        let s = (x * x - 2.0 * delta).max(0.0).sqrt();
        ((x - s) / 2.0) * ((x + s) / 2.0)
    };
    term(tau) + term(1.0 - tau)
}
