//! The base dynamics: rotation by `alpha`, the sign observable, the skew
//! product and its Birkhoff sums.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};

use crate::exactreal::{
    certified_compare, sign_of_surd, CFNumber, CompareError, EscalationLog, RotationShadow,
    SurdReal, Threshold,
};
use crate::words::Sign;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CircleError {
    #[error("position {0} is outside [0, 1)")]
    OutOfRange(String),
    #[error("max_gap needs at least one point")]
    NoPoints,
    #[error(transparent)]
    Compare(#[from] CompareError),
}

/// A point of the circle `[0, 1)`, stored exactly.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CirclePoint {
    pos: SurdReal,
}

impl CirclePoint {
    pub fn new(pos: SurdReal) -> Result<Self, CircleError> {
        if pos.is_negative() || pos >= SurdReal::one() {
            return Err(CircleError::OutOfRange(pos.to_string()));
        }
        Ok(Self { pos })
    }

    /// Reduces any real modulo 1.
    pub fn wrap(x: &SurdReal) -> Self {
        Self { pos: x.fract() }
    }

    pub fn half() -> Self {
        Self {
            pos: SurdReal::half(),
        }
    }

    pub fn from_ratio(num: i64, den: i64) -> Result<Self, CircleError> {
        let x =
            SurdReal::from_ratio(num, den).map_err(|e| CircleError::OutOfRange(e.to_string()))?;
        Self::new(x)
    }

    pub fn position(&self) -> &SurdReal {
        &self.pos
    }

    pub fn into_position(self) -> SurdReal {
        self.pos
    }

    pub fn to_f64(&self) -> f64 {
        self.pos.to_f64()
    }
}

/// `(x, s)` in the circle times the integers.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SkewPoint {
    pub base: CirclePoint,
    pub level: i64,
}

/// `frac(x + n alpha)`.
pub fn rotate(x: &CirclePoint, alpha: &CFNumber, n: i64) -> CirclePoint {
    rotate_by(x, alpha.value(), n)
}

pub(crate) fn rotate_by(x: &CirclePoint, alpha: &SurdReal, n: i64) -> CirclePoint {
    CirclePoint::wrap(&(x.position() + &alpha.mul_int(&BigInt::from(n))))
}

/// `+1` on `[0, 1/2)`, `-1` on `[1/2, 1)`.
pub fn sign_f(x: &CirclePoint) -> Sign {
    if *x.position() < SurdReal::half() {
        Sign::Plus
    } else {
        Sign::Minus
    }
}

/// `T(x, s) = (x + alpha, s + f(x))`.
pub fn skew_step(p: &SkewPoint, alpha: &CFNumber) -> SkewPoint {
    SkewPoint {
        base: rotate(&p.base, alpha, 1),
        level: p.level + sign_f(&p.base).value(),
    }
}

/// `T^n(x, s) = (t^n x, s + S_n(x))` for any signed `n`.
pub fn skew_power(p: &SkewPoint, alpha: &CFNumber, n: i64) -> SkewPoint {
    SkewPoint {
        base: rotate(&p.base, alpha, n),
        level: p.level + birkhoff(&p.base, alpha, n),
    }
}

/// `S_n(x)` by direct exact simulation.
///
/// For `n < 0` this is `-(f(t^-1 x) + ... + f(t^n x))`, so that the skew
/// product satisfies `T^n(x, s) = (t^n x, s + S_n(x))` for all integers `n`.
pub fn birkhoff(x: &CirclePoint, alpha: &CFNumber, n: i64) -> i64 {
    let mut orbit = ExactOrbit::new(x, alpha.value());
    let mut sum = 0i64;
    if n >= 0 {
        for _ in 0..n {
            sum += orbit.sign().value();
            orbit.step_forward();
        }
    } else {
        for _ in 0..(-n) {
            orbit.step_backward();
            sum -= orbit.sign().value();
        }
    }
    sum
}

/// Exact orbit `t^n x` kept as lattice numerators over one fixed
/// denominator: `(p + q sqrt(d)) / r`. Each step adds `alpha`'s numerators
/// and subtracts `r` on wrap-around, so no gcd work is done per step.
#[derive(Clone, Debug)]
pub struct ExactOrbit {
    n: i64,
    p: BigInt,
    q: BigInt,
    r: BigInt,
    d: u64,
    alpha_p: BigInt,
    alpha_q: BigInt,
}

impl ExactOrbit {
    pub fn new(x: &CirclePoint, alpha: &SurdReal) -> Self {
        let (xp, xq, xr) = x.position().parts();
        let (ap, aq, ar) = alpha.parts();
        let r = xr.lcm(ar);
        let (sx, sa) = (&r / xr, &r / ar);
        let d = if x.position().is_rational() {
            alpha.radicand()
        } else {
            assert!(
                alpha.is_rational() || alpha.radicand() == x.position().radicand(),
                "mixing Q(sqrt {}) with Q(sqrt {})",
                x.position().radicand(),
                alpha.radicand()
            );
            x.position().radicand()
        };
        Self {
            n: 0,
            p: xp * &sx,
            q: xq * &sx,
            r,
            d,
            alpha_p: ap * &sa,
            alpha_q: aq * &sa,
        }
    }

    pub fn index(&self) -> i64 {
        self.n
    }

    fn sign_of(&self, p: &BigInt, q: &BigInt) -> i32 {
        sign_of_surd(p, q, self.d)
    }

    /// `f(t^n x)`.
    pub fn sign(&self) -> Sign {
        // x < 1/2  <=>  2p - r + 2q sqrt(d) < 0
        let two = BigInt::from(2);
        if self.sign_of(&(&two * &self.p - &self.r), &(&two * &self.q)) < 0 {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }

    pub fn step_forward(&mut self) {
        self.p += &self.alpha_p;
        self.q += &self.alpha_q;
        if self.sign_of(&(&self.p - &self.r), &self.q) >= 0 {
            self.p -= &self.r;
        }
        self.n += 1;
    }

    pub fn step_backward(&mut self) {
        self.p -= &self.alpha_p;
        self.q -= &self.alpha_q;
        if self.sign_of(&self.p, &self.q) < 0 {
            self.p += &self.r;
        }
        self.n -= 1;
    }

    /// Exact comparison of `t^n x` with `y`, without leaving the lattice.
    pub fn cmp_to(&self, y: &SurdReal) -> Ordering {
        let (yp, yq, yr) = y.parts();
        let d = if y.is_rational() {
            self.d
        } else {
            assert!(
                self.q.is_zero() || self.d == y.radicand(),
                "mixing Q(sqrt {}) with Q(sqrt {})",
                self.d,
                y.radicand()
            );
            y.radicand()
        };
        // both denominators are positive
        let p = &self.p * yr - yp * &self.r;
        let q = &self.q * yr - yq * &self.r;
        sign_of_surd(&p, &q, d).cmp(&0)
    }

    pub fn point(&self) -> CirclePoint {
        let pos = SurdReal::new(
            self.p.clone(),
            self.q.clone(),
            self.r.clone(),
            self.d.max(1),
        )
        .expect("lattice denominator is positive");
        CirclePoint { pos }
    }

    /// Cheap display approximation; exactness lives in [`Self::point`].
    pub fn approx(&self) -> f64 {
        let sqrt_d = (self.d as f64).sqrt();
        let v = (self.p.to_f64().unwrap_or(f64::NAN)
            + self.q.to_f64().unwrap_or(f64::NAN) * sqrt_d)
            / self.r.to_f64().unwrap_or(f64::NAN);
        v.clamp(0.0, 1.0)
    }
}

/// How long scans decide `x < 1/2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Precision {
    /// Every decision in exact surd arithmetic.
    ExactOnly,
    /// Float shadow with certified radius; exact only on ambiguity.
    #[default]
    CertifiedFast,
}

/// One row of a Birkhoff scan: `t^n x` (approximate) and `S_n(x)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScanStep {
    pub n: i64,
    pub position: f64,
    pub sum: i64,
}

enum Engine {
    Exact(ExactOrbit),
    Fast {
        shadow: RotationShadow,
        half: Threshold,
    },
}

/// Streaming `(n, t^n x, S_n(x))` for `n = start, start + 1, ...`, or
/// `n = 0, -1, -2, ...` for a backward scan.
pub struct BirkhoffScan {
    seed: CirclePoint,
    alpha: SurdReal,
    engine: Engine,
    n: i64,
    sum: i64,
    forward: bool,
    log: EscalationLog,
}

impl BirkhoffScan {
    pub fn new(x: &CirclePoint, alpha: &CFNumber, precision: Precision) -> Self {
        Self::starting_at(x, alpha, precision, 0, 0)
    }

    /// Starts at index `n0` given `S_{n0}(x)`, which the caller supplies
    /// (for the seed `1/2` it comes from the renormalization tower).
    pub fn starting_at(
        x: &CirclePoint,
        alpha: &CFNumber,
        precision: Precision,
        n0: i64,
        s_n0: i64,
    ) -> Self {
        let a = alpha.value().clone();
        let engine = match precision {
            Precision::ExactOnly => {
                let mut orbit = ExactOrbit::new(&rotate_by(x, &a, n0), &a);
                orbit.n = n0;
                Engine::Exact(orbit)
            }
            Precision::CertifiedFast => Engine::Fast {
                shadow: RotationShadow::new(x.position(), &a),
                half: Threshold::new(SurdReal::half()),
            },
        };
        Self {
            seed: x.clone(),
            alpha: a,
            engine,
            n: n0,
            sum: s_n0,
            forward: true,
            log: EscalationLog::new(),
        }
    }

    /// Scans `n = 0, -1, -2, ...` with the backward-sum convention.
    pub fn backward(x: &CirclePoint, alpha: &CFNumber, precision: Precision) -> Self {
        let mut s = Self::new(x, alpha, precision);
        s.forward = false;
        s
    }

    pub fn escalations(&self) -> &EscalationLog {
        &self.log
    }

    // f(t^n x) and an approximation of t^n x; moves an exact orbit to n.
    fn sign_at(&mut self, n: i64) -> Result<(Sign, f64), CircleError> {
        match &mut self.engine {
            Engine::Exact(orbit) => {
                while orbit.index() < n {
                    orbit.step_forward();
                }
                while orbit.index() > n {
                    orbit.step_backward();
                }
                Ok((orbit.sign(), orbit.approx()))
            }
            Engine::Fast { shadow, half } => {
                let c = shadow.position(n);
                if n == 0 {
                    // the seed itself may sit exactly on 1/2
                    return Ok((sign_f(&self.seed), self.seed.to_f64()));
                }
                let (seed, alpha) = (&self.seed, &self.alpha);
                let verdict =
                    certified_compare(c, half, || rotate_by(seed, alpha, n).into_position())?;
                self.log.record(&verdict);
                let sign = if verdict.ordering == Ordering::Less {
                    Sign::Plus
                } else {
                    Sign::Minus
                };
                let approx = if verdict.escalated {
                    rotate_by(seed, alpha, n).to_f64()
                } else {
                    c.approx
                };
                Ok((sign, approx))
            }
        }
    }

    /// Next row, or an error if an exact tie with `1/2` was hit away from
    /// the seed, which no irrational rotation can produce.
    pub fn try_next(&mut self) -> Result<ScanStep, CircleError> {
        let n = self.n;
        let (sign, position) = self.sign_at(n)?;
        let step = ScanStep {
            n,
            position,
            sum: self.sum,
        };
        if self.forward {
            self.sum += sign.value();
            self.n += 1;
        } else {
            let (prev, _) = self.sign_at(n - 1)?;
            self.sum -= prev.value();
            self.n -= 1;
        }
        Ok(step)
    }
}

impl Iterator for BirkhoffScan {
    type Item = ScanStep;

    /// Panics on an exact tie, which only an arithmetic bug can produce;
    /// use [`BirkhoffScan::try_next`] to observe it instead.
    fn next(&mut self) -> Option<ScanStep> {
        Some(self.try_next().expect("exact tie in Birkhoff scan"))
    }
}

/// Times `n <= horizon` with `S_n(x) = m`.
///
/// Positions are those of the shifted orbit `t^{n + shift} x`, i.e. the
/// visit set `shift + Sigma(x, m)` as used for the density statement.
#[derive(Clone, Debug)]
pub struct VisitSet {
    pub seed: CirclePoint,
    pub alpha: CFNumber,
    pub m: i64,
    pub horizon: u64,
    pub shift: i64,
    pub times: Vec<u64>,
    approx: Vec<f64>,
}

impl VisitSet {
    pub fn count(&self) -> usize {
        self.times.len()
    }

    pub fn first_time(&self) -> Option<u64> {
        self.times.first().copied()
    }

    /// Exact positions `t^{n + shift} x` for every recorded `n`.
    pub fn positions(&self) -> Vec<CirclePoint> {
        self.times
            .iter()
            .map(|&n| rotate(&self.seed, &self.alpha, n as i64 + self.shift))
            .collect()
    }

    /// Certified-shadow positions, accurate to well below `1e-9`.
    pub fn approx_positions(&self) -> &[f64] {
        &self.approx
    }
}

/// Scans `n = 0..=horizon` for `S_n(x) = m`.
pub fn visit_set(
    x: &CirclePoint,
    alpha: &CFNumber,
    m: i64,
    horizon: u64,
    shift: i64,
    precision: Precision,
) -> Result<VisitSet, CircleError> {
    let mut sets = visit_sets(x, alpha, &[m], horizon, shift, precision)?;
    Ok(sets.pop().expect("one target"))
}

/// One pass over the orbit collecting the visit sets of several targets.
pub fn visit_sets(
    x: &CirclePoint,
    alpha: &CFNumber,
    targets: &[i64],
    horizon: u64,
    shift: i64,
    precision: Precision,
) -> Result<Vec<VisitSet>, CircleError> {
    let mut out: Vec<VisitSet> = targets
        .iter()
        .map(|&m| VisitSet {
            seed: x.clone(),
            alpha: alpha.clone(),
            m,
            horizon,
            shift,
            times: Vec::new(),
            approx: Vec::new(),
        })
        .collect();
    let shadow = RotationShadow::new(x.position(), alpha.value());
    let mut scan = BirkhoffScan::new(x, alpha, precision);
    for _ in 0..=horizon {
        let step = scan.try_next()?;
        for set in out.iter_mut().filter(|s| s.m == step.sum) {
            set.times.push(step.n as u64);
            let pos = if shift == 0 {
                step.position
            } else {
                shadow.position(step.n + shift).approx
            };
            set.approx.push(pos);
        }
    }
    Ok(out)
}

/// Largest circular gap between the sorted points, wrap-around included.
pub fn max_gap(points: &[CirclePoint]) -> Result<SurdReal, CircleError> {
    if points.is_empty() {
        return Err(CircleError::NoPoints);
    }
    let mut sorted: Vec<&SurdReal> = points.iter().map(CirclePoint::position).collect();
    sorted.sort();
    let wrap = SurdReal::one() - sorted[sorted.len() - 1] + sorted[0];
    let gap = sorted
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(wrap, |best, g| if g > best { g } else { best });
    Ok(gap)
}

/// Float version of [`max_gap`] for long scans.
pub fn max_gap_approx(points: &[f64]) -> Result<f64, CircleError> {
    if points.is_empty() {
        return Err(CircleError::NoPoints);
    }
    let mut sorted = points.to_vec();
    sorted.sort_by(f64::total_cmp);
    let wrap = 1.0 - sorted[sorted.len() - 1] + sorted[0];
    Ok(sorted.windows(2).map(|w| w[1] - w[0]).fold(wrap, f64::max))
}

/// Integer helper used by callers that need `S_n` at many indices at once.
pub fn birkhoff_table(
    x: &CirclePoint,
    alpha: &CFNumber,
    horizon: u64,
    precision: Precision,
) -> Result<Vec<i64>, CircleError> {
    let mut scan = BirkhoffScan::new(x, alpha, precision);
    let mut out = Vec::with_capacity(horizon as usize + 1);
    for _ in 0..=horizon {
        out.push(scan.try_next()?.sum);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn alpha() -> CFNumber {
        "[0;5,(6)]".parse().unwrap()
    }

    fn surd(p: i64, q: i64, r: i64, d: u64) -> SurdReal {
        SurdReal::new(p.into(), q.into(), r.into(), d).unwrap()
    }

    #[test]
    fn rotation_examples() {
        let h = CirclePoint::half();
        assert_eq!(rotate(&h, &alpha(), 0), h);
        let one = rotate(&h, &alpha(), 1);
        assert_eq!(one.position(), &surd(1, 1, 6, 10));
        assert!((one.to_f64() - 0.693_712_943).abs() < 1e-9);
        let three = rotate(&h, &alpha(), 3);
        // 1/2 + 3 alpha - 1 = (sqrt(10) - 3)/2 ... as an exact surd
        let expect = SurdReal::half() + alpha().value().mul_int(&BigInt::from(3)) - SurdReal::one();
        assert_eq!(three.position(), &expect);
        assert!((three.to_f64() - 0.081_138_830).abs() < 1e-9);
        assert_eq!(rotate(&three, &alpha(), -3), h);
    }

    #[test]
    fn sign_examples() {
        assert_eq!(sign_f(&CirclePoint::from_ratio(3, 10).unwrap()), Sign::Plus);
        assert_eq!(sign_f(&CirclePoint::half()), Sign::Minus);
        assert_eq!(sign_f(&CirclePoint::from_ratio(0, 1).unwrap()), Sign::Plus);
        assert!(CirclePoint::from_ratio(1, 1).is_err());
        assert!(CirclePoint::from_ratio(-1, 3).is_err());
    }

    #[test]
    fn skew_examples() {
        let a = alpha();
        let p = SkewPoint {
            base: CirclePoint::half(),
            level: 0,
        };
        let q = skew_step(&p, &a);
        assert_eq!(q.level, -1);
        assert_eq!(q.base, rotate(&CirclePoint::half(), &a, 1));
        let p2 = SkewPoint {
            base: CirclePoint::from_ratio(3, 10).unwrap(),
            level: 5,
        };
        assert_eq!(skew_step(&p2, &a).level, 6);
        let mut cur = p.clone();
        for _ in 0..4 {
            cur = skew_step(&cur, &a);
        }
        assert_eq!(cur.level, -2);
        assert_eq!(skew_power(&p, &a, 4), cur);
        assert_eq!(skew_power(&cur, &a, -4), p);
    }

    #[test]
    fn birkhoff_examples() {
        let a = alpha();
        let h = CirclePoint::half();
        assert_eq!(birkhoff(&h, &a, 0), 0);
        assert_eq!(birkhoff(&h, &a, 1), -1);
        assert_eq!(birkhoff(&h, &a, 4), -2);
        // x = (1 + alpha)/2 is symmetric: S_{-n} = S_n
        let x =
            CirclePoint::new((SurdReal::one() + a.value()) / SurdReal::from_integer(2)).unwrap();
        for n in [1, 2, 7, 30] {
            assert_eq!(birkhoff(&x, &a, -n), birkhoff(&x, &a, n), "n={n}");
        }
    }

    #[test]
    fn scan_modes_agree() {
        let a = alpha();
        let h = CirclePoint::half();
        let exact: Vec<_> = BirkhoffScan::new(&h, &a, Precision::ExactOnly)
            .take(3000)
            .collect();
        let fast: Vec<_> = BirkhoffScan::new(&h, &a, Precision::CertifiedFast)
            .take(3000)
            .collect();
        for (e, f) in exact.iter().zip(&fast) {
            assert_eq!((e.n, e.sum), (f.n, f.sum));
            assert!((e.position - f.position).abs() < 1e-9);
        }
        assert_eq!(exact[4].sum, -2);
        let back_e: Vec<_> = BirkhoffScan::backward(&h, &a, Precision::ExactOnly)
            .take(500)
            .collect();
        let back_f: Vec<_> = BirkhoffScan::backward(&h, &a, Precision::CertifiedFast)
            .take(500)
            .collect();
        for (e, f) in back_e.iter().zip(&back_f) {
            assert_eq!((e.n, e.sum), (f.n, f.sum));
            assert_eq!(e.sum, birkhoff(&h, &a, e.n));
        }
    }

    #[test]
    fn visit_examples() {
        let a = alpha();
        let h = CirclePoint::half();
        let v = visit_set(&h, &a, -1, 10, 0, Precision::ExactOnly).unwrap();
        assert!(v.times.contains(&1));
        let v = visit_set(&h, &a, 0, 0, 0, Precision::ExactOnly).unwrap();
        assert_eq!(v.times, vec![0]);
        assert_eq!(v.positions(), vec![h.clone()]);
        let v = visit_set(&h, &a, 1, 100_000, 0, Precision::CertifiedFast).unwrap();
        assert!(v.count() > 0);
        for &n in v.times.iter().take(50) {
            assert_eq!(birkhoff(&h, &a, n as i64), 1);
        }
        // shifted positions are the rotated ones
        let v1 = visit_set(&h, &a, 1, 2_000, 1, Precision::ExactOnly).unwrap();
        for (p, &n) in v1.positions().iter().zip(&v1.times) {
            assert_eq!(*p, rotate(&rotate(&h, &a, n as i64), &a, 1));
        }
    }

    #[test]
    fn gaps() {
        let pts = |v: &[(i64, i64)]| -> Vec<CirclePoint> {
            v.iter()
                .map(|&(p, q)| CirclePoint::from_ratio(p, q).unwrap())
                .collect()
        };
        assert_eq!(max_gap(&pts(&[(1, 4)])).unwrap(), SurdReal::one());
        assert_eq!(max_gap(&pts(&[(0, 1), (1, 2)])).unwrap(), SurdReal::half());
        assert_eq!(
            max_gap(&pts(&[(0, 1), (1, 4), (1, 2), (3, 4)])).unwrap(),
            SurdReal::from_ratio(1, 4).unwrap()
        );
        assert_eq!(max_gap(&[]).unwrap_err(), CircleError::NoPoints);
        assert_eq!(max_gap_approx(&[0.25]).unwrap(), 1.0);
        assert_eq!(max_gap_approx(&[0.0, 0.25, 0.5, 0.75]).unwrap(), 0.25);
    }
}
