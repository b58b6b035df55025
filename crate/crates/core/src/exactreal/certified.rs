//! Floating shadows with rigorous error radii, escalating to exact
//! arithmetic whenever a decision is within the radius.

use std::cmp::Ordering;
use std::sync::atomic::{AtomicU64, Ordering as AtomicOrdering};

use super::surd::SurdReal;

/// An `f64` approximation whose exact value lies within `radius`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CertifiedFloat {
    pub approx: f64,
    pub radius: f64,
}

impl CertifiedFloat {
    pub fn new(approx: f64, radius: f64) -> Self {
        debug_assert!(radius >= 0.0);
        Self { approx, radius }
    }

    pub fn from_surd(x: &SurdReal) -> Self {
        if x.is_rational() {
            let a = x.to_f64();
            return Self::new(a, a.abs() * f64::EPSILON);
        }
        let (hi, lo, err) = x.to_double_double();
        let a = hi + lo;
        Self::new(a, err + a.abs() * f64::EPSILON)
    }

    pub fn lower(&self) -> f64 {
        self.approx - self.radius
    }

    pub fn upper(&self) -> f64 {
        self.approx + self.radius
    }
}

/// Exact comparison threshold with a precomputed float enclosure.
#[derive(Clone, Debug)]
pub struct Threshold {
    exact: SurdReal,
    float: CertifiedFloat,
}

impl Threshold {
    pub fn new(exact: SurdReal) -> Self {
        let float = CertifiedFloat::from_surd(&exact);
        Self { exact, float }
    }

    pub fn exact(&self) -> &SurdReal {
        &self.exact
    }

    pub fn approx(&self) -> f64 {
        self.float.approx
    }
}

/// Outcome of a certified comparison.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Verdict {
    pub ordering: Ordering,
    pub escalated: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CompareError {
    /// The exact value equals the threshold. For orbit points of an
    /// irrational rotation compared against `0` or `1/2` this cannot happen
    /// after the seed, so it indicates an upstream arithmetic bug.
    #[error("exact tie against threshold {threshold}")]
    ExactTie { threshold: String },
}

/// Compares the value shadowed by `x` against `threshold`.
///
/// The float path decides only when the enclosures are disjoint; otherwise
/// `fallback` recomputes the value exactly.
pub fn certified_compare<F>(
    x: CertifiedFloat,
    threshold: &Threshold,
    fallback: F,
) -> Result<Verdict, CompareError>
where
    F: FnOnce() -> SurdReal,
{
    let t = threshold.float;
    if x.lower() > t.upper() {
        return Ok(Verdict {
            ordering: Ordering::Greater,
            escalated: false,
        });
    }
    if x.upper() < t.lower() {
        return Ok(Verdict {
            ordering: Ordering::Less,
            escalated: false,
        });
    }
    let exact = fallback();
    match exact.cmp(&threshold.exact) {
        Ordering::Equal => Err(CompareError::ExactTie {
            threshold: threshold.exact.to_string(),
        }),
        ordering => Ok(Verdict {
            ordering,
            escalated: true,
        }),
    }
}

/// Counts fast and escalated decisions; shareable across threads.
#[derive(Debug, Default)]
pub struct EscalationLog {
    fast: AtomicU64,
    escalated: AtomicU64,
}

impl EscalationLog {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record(&self, verdict: &Verdict) {
        let counter = if verdict.escalated {
            &self.escalated
        } else {
            &self.fast
        };
        counter.fetch_add(1, AtomicOrdering::Relaxed);
    }

    pub fn fast(&self) -> u64 {
        self.fast.load(AtomicOrdering::Relaxed)
    }

    pub fn escalated(&self) -> u64 {
        self.escalated.load(AtomicOrdering::Relaxed)
    }

    pub fn merge(&self, other: &EscalationLog) {
        self.fast.fetch_add(other.fast(), AtomicOrdering::Relaxed);
        self.escalated
            .fetch_add(other.escalated(), AtomicOrdering::Relaxed);
    }
}

/// Double-double shadow of the rotation orbit `frac(seed + n * alpha)`.
///
/// Each position is computed directly from `n`, so errors do not
/// accumulate across steps; the radius grows only through the
/// representation error of `alpha` times `|n|`.
#[derive(Clone, Debug)]
pub struct RotationShadow {
    seed_hi: f64,
    seed_lo: f64,
    seed_err: f64,
    alpha_hi: f64,
    alpha_lo: f64,
    alpha_err: f64,
}

/// Rounding slack of the handful of additions in [`RotationShadow::position`].
const ROUNDING_SLACK: f64 = 16.0 * f64::EPSILON;

impl RotationShadow {
    pub fn new(seed: &SurdReal, alpha: &SurdReal) -> Self {
        let (seed_hi, seed_lo, seed_err) = seed.to_double_double();
        let (alpha_hi, alpha_lo, alpha_err) = alpha.to_double_double();
        Self {
            seed_hi,
            seed_lo,
            seed_err,
            alpha_hi,
            alpha_lo,
            alpha_err,
        }
    }

    /// Largest `|n|` handled: products `n * alpha_hi` must stay exact
    /// under a fused multiply-add split.
    pub const MAX_STEPS: i64 = 1 << 50;

    /// Shadow of `frac(seed + n alpha)`.
    ///
    /// Near the wrap point `0 ~ 1` the float cannot tell which side of the
    /// cut the exact value lies on, so the radius is widened to `1`, which
    /// forces every comparison to escalate.
    pub fn position(&self, n: i64) -> CertifiedFloat {
        assert!(
            n.abs() <= Self::MAX_STEPS,
            "step index {n} too large for the float shadow"
        );
        let nf = n as f64;
        let prod = nf * self.alpha_hi;
        let prod_err = nf.mul_add(self.alpha_hi, -prod);
        let int_part = prod.floor();
        let frac = prod - int_part;
        let mut s = frac + self.seed_hi;
        s += prod_err + (nf * self.alpha_lo + self.seed_lo);
        let s = s - s.floor();
        let radius = (nf.abs() * (self.alpha_err + self.alpha_lo.abs() * f64::EPSILON))
            + self.seed_err
            + ROUNDING_SLACK;
        if s < radius || s > 1.0 - radius {
            return CertifiedFloat::new(s, 1.0);
        }
        CertifiedFloat::new(s, radius)
    }
}
