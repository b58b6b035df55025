//! Exact elements of a real quadratic field `Q(sqrt(D))`.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::ExactError;

/// `(p + q*sqrt(d)) / r` in lowest terms.
///
/// Canonical form: `r > 0`, `gcd(p, q, r) = 1`, `d` square-free, and
/// `d = 1` exactly when `q = 0`. Rationals therefore carry `d = 1` and mix
/// freely with any field; two irrational operands must share `d`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct SurdReal {
    p: BigInt,
    q: BigInt,
    r: BigInt,
    d: u64,
}

impl SurdReal {
    /// Builds `(p + q*sqrt(d)) / r`, pulling square factors out of `d`.
    pub fn new(p: BigInt, q: BigInt, r: BigInt, d: u64) -> Result<Self, ExactError> {
        if r.is_zero() {
            return Err(ExactError::ZeroDenominator);
        }
        if d == 0 {
            return Err(ExactError::BadRadicand(0));
        }
        let (s, d) = squarefree_split(d);
        Ok(Self::canonical(p, q * BigInt::from(s), r, d))
    }

    pub fn from_integer<T: Into<BigInt>>(n: T) -> Self {
        Self::canonical(n.into(), BigInt::zero(), BigInt::one(), 1)
    }

    pub fn from_ratio<T: Into<BigInt>>(num: T, den: T) -> Result<Self, ExactError> {
        let den = den.into();
        if den.is_zero() {
            return Err(ExactError::ZeroDenominator);
        }
        Ok(Self::canonical(num.into(), BigInt::zero(), den, 1))
    }

    /// `sqrt(n)` for a positive integer `n`.
    pub fn sqrt(n: u64) -> Result<Self, ExactError> {
        Self::new(BigInt::zero(), BigInt::one(), BigInt::one(), n)
    }

    pub fn zero() -> Self {
        Self::from_integer(0)
    }

    pub fn one() -> Self {
        Self::from_integer(1)
    }

    pub fn half() -> Self {
        Self::canonical(BigInt::one(), BigInt::zero(), BigInt::from(2), 1)
    }

    // Assumes `d` is already square-free.
    fn canonical(mut p: BigInt, mut q: BigInt, mut r: BigInt, mut d: u64) -> Self {
        if r.is_negative() {
            p = -p;
            q = -q;
            r = -r;
        }
        if q.is_zero() || d == 1 {
            if d == 1 {
                p += &q;
            }
            q = BigInt::zero();
            d = 1;
        }
        let g = p.gcd(&q).gcd(&r);
        if !g.is_one() && !g.is_zero() {
            p /= &g;
            q /= &g;
            r /= &g;
        }
        Self { p, q, r, d }
    }

    /// Field radicand (1 for rationals).
    pub fn radicand(&self) -> u64 {
        self.d
    }

    pub fn parts(&self) -> (&BigInt, &BigInt, &BigInt) {
        (&self.p, &self.q, &self.r)
    }

    pub fn is_rational(&self) -> bool {
        self.q.is_zero()
    }

    pub fn is_zero(&self) -> bool {
        self.p.is_zero() && self.q.is_zero()
    }

    fn field_with(&self, other: &Self) -> u64 {
        match (self.d, other.d) {
            (1, d) | (d, 1) => d,
            (a, b) if a == b => a,
            (a, b) => panic!("mixed quadratic fields Q(sqrt({a})) and Q(sqrt({b}))"),
        }
    }

    /// Exact sign of `p + q*sqrt(d)` (the denominator is positive).
    pub fn signum(&self) -> i32 {
        sign_of_surd(&self.p, &self.q, self.d)
    }

    pub fn is_positive(&self) -> bool {
        self.signum() > 0
    }

    pub fn is_negative(&self) -> bool {
        self.signum() < 0
    }

    pub fn abs(&self) -> Self {
        if self.is_negative() {
            -self
        } else {
            self.clone()
        }
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn recip(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        // r / (p + q s) = r (p - q s) / (p^2 - q^2 d)
        let d = BigInt::from(self.d);
        let norm = &self.p * &self.p - &self.q * &self.q * d;
        Some(Self::canonical(
            &self.r * &self.p,
            -(&self.r * &self.q),
            norm,
            self.d,
        ))
    }

    /// Largest integer not exceeding the value.
    pub fn floor(&self) -> BigInt {
        floor_surd(&self.p, &self.q, &self.r, self.d)
    }

    /// `self - floor(self)`, in `[0, 1)`.
    pub fn fract(&self) -> Self {
        let f = self.floor();
        Self::canonical(
            &self.p - f * &self.r,
            self.q.clone(),
            self.r.clone(),
            self.d,
        )
    }

    pub fn mul_int(&self, k: &BigInt) -> Self {
        Self::canonical(&self.p * k, &self.q * k, self.r.clone(), self.d)
    }

    /// `floor(self * 2^bits)`.
    pub fn floor_scaled(&self, bits: u32) -> BigInt {
        floor_surd(&(&self.p << bits), &(&self.q << bits), &self.r, self.d)
    }

    /// Nearest-ish `f64`, accurate to about one ulp.
    pub fn to_f64(&self) -> f64 {
        if self.is_rational() {
            return ratio_to_f64(&self.p, &self.r);
        }
        let (hi, lo, _) = self.to_double_double();
        hi + lo
    }

    /// Splits the value into `hi + lo` with an absolute error bound.
    ///
    /// Intended for moderate magnitudes (orbit points, rotation numbers);
    /// the error bound is about `2^-95` times the magnitude scale.
    pub fn to_double_double(&self) -> (f64, f64, f64) {
        let int_bits = self.floor().magnitude().bits() as i32;
        let bits = (110 - int_bits).max(0) as u32;
        let scaled = self.floor_scaled(bits);
        let scale = (-(bits as f64)).exp2();
        let hi_units = scaled.to_f64().unwrap_or(f64::NAN);
        let hi_int = float_to_bigint(hi_units);
        let lo_units = (&scaled - hi_int).to_f64().unwrap_or(f64::NAN);
        // floor error (1 unit) plus rounding of lo (at most 2^14 units)
        let err = 2.0 * 16385.0 * scale;
        (hi_units * scale, lo_units * scale, err)
    }
}

fn float_to_bigint(x: f64) -> BigInt {
    // x is an integer-valued float; decompose exactly.
    if x == 0.0 {
        return BigInt::zero();
    }
    let bits = x.to_bits();
    let negative = bits >> 63 == 1;
    let exponent = ((bits >> 52) & 0x7ff) as i64;
    let mantissa = if exponent == 0 {
        (bits & ((1 << 52) - 1)) << 1
    } else {
        (bits & ((1 << 52) - 1)) | (1 << 52)
    };
    let shift = exponent - 1075;
    let mut m = BigInt::from(mantissa);
    if shift >= 0 {
        m <<= shift as usize;
    } else {
        m >>= (-shift) as usize;
    }
    if negative {
        -m
    } else {
        m
    }
}

fn ratio_to_f64(p: &BigInt, r: &BigInt) -> f64 {
    match (p.to_f64(), r.to_f64()) {
        (Some(a), Some(b)) if a.is_finite() && b.is_finite() && b != 0.0 => {
            if p.bits() < 53 && r.bits() < 53 {
                return a / b;
            }
            let shift = 64i64 + r.bits() as i64 - p.bits() as i64;
            let scaled = if shift >= 0 {
                (p << shift as usize).div_floor(r)
            } else {
                p.div_floor(r) >> (-shift) as usize
            };
            scaled.to_f64().unwrap_or(f64::NAN) * (-(shift as f64)).exp2()
        }
        _ => f64::NAN,
    }
}

/// Exact sign of `p + q*sqrt(d)` with `d` square-free.
pub(crate) fn sign_of_surd(p: &BigInt, q: &BigInt, d: u64) -> i32 {
    let sp = p.sign();
    let sq = q.sign();
    match (sp, sq) {
        (Sign::NoSign, Sign::NoSign) => 0,
        (s, Sign::NoSign) | (Sign::NoSign, s) => sign_to_i32(s),
        (a, b) if a == b => sign_to_i32(a),
        (a, _) => {
            // opposite signs: compare p^2 with q^2 d
            let lhs = p * p;
            let rhs = q * q * BigInt::from(d);
            match lhs.cmp(&rhs) {
                Ordering::Greater => sign_to_i32(a),
                Ordering::Less => -sign_to_i32(a),
                Ordering::Equal => 0,
            }
        }
    }
}

fn sign_to_i32(s: Sign) -> i32 {
    match s {
        Sign::Minus => -1,
        Sign::NoSign => 0,
        Sign::Plus => 1,
    }
}

/// `floor((p + q*sqrt(d)) / r)` for `r > 0`, `d` square-free.
pub(crate) fn floor_surd(p: &BigInt, q: &BigInt, r: &BigInt, d: u64) -> BigInt {
    let numerator_floor = if q.is_zero() || d == 1 {
        p + q
    } else {
        // q*sqrt(d) is irrational, so it lies strictly between integers.
        let sq = (q * q * BigInt::from(d)).magnitude().sqrt();
        let sq = BigInt::from_biguint(Sign::Plus, sq);
        if q.is_positive() {
            p + sq
        } else {
            p - sq - 1
        }
    };
    numerator_floor.div_floor(r)
}

/// Writes `n = s^2 * d` with `d` square-free.
pub(crate) fn squarefree_split(mut n: u64) -> (u64, u64) {
    let mut s = 1u64;
    let mut d = 1u64;
    let mut f = 2u64;
    while f.saturating_mul(f) <= n {
        let mut e = 0;
        while n.is_multiple_of(f) {
            n /= f;
            e += 1;
        }
        for _ in 0..e / 2 {
            s *= f;
        }
        if e % 2 == 1 {
            d *= f;
        }
        f += if f == 2 { 1 } else { 2 };
    }
    (s, d * n)
}

/// Square-free split for a discriminant that may not fit in `u64`.
pub(crate) fn squarefree_split_big(n: &BigUint) -> Result<(BigUint, u64), ExactError> {
    let root = n.sqrt();
    if &root * &root == *n {
        return Ok((root, 1));
    }
    let mut s = BigUint::one();
    let mut d = BigUint::one();
    let mut rest = n.clone();
    let mut f = 2u64;
    while BigUint::from(f) * BigUint::from(f) <= rest {
        if f > 10_000_000 {
            return Err(ExactError::DiscriminantTooLarge(n.to_string()));
        }
        let bf = BigUint::from(f);
        let mut e = 0;
        while (&rest % &bf).is_zero() {
            rest /= &bf;
            e += 1;
        }
        for _ in 0..e / 2 {
            s *= &bf;
        }
        if e % 2 == 1 {
            d *= &bf;
        }
        f += if f == 2 { 1 } else { 2 };
    }
    d *= rest;
    let d = d
        .to_u64()
        .ok_or_else(|| ExactError::DiscriminantTooLarge(n.to_string()))?;
    Ok((s, d))
}

impl PartialOrd for SurdReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for SurdReal {
    fn cmp(&self, other: &Self) -> Ordering {
        let d = self.field_with(other);
        // sign of p1 r2 - p2 r1 + (q1 r2 - q2 r1) sqrt(d)
        let p = &self.p * &other.r - &other.p * &self.r;
        let q = &self.q * &other.r - &other.q * &self.r;
        sign_of_surd(&p, &q, d).cmp(&0)
    }
}

impl Neg for &SurdReal {
    type Output = SurdReal;
    fn neg(self) -> SurdReal {
        SurdReal {
            p: -&self.p,
            q: -&self.q,
            r: self.r.clone(),
            d: self.d,
        }
    }
}

impl Neg for SurdReal {
    type Output = SurdReal;
    fn neg(self) -> SurdReal {
        -&self
    }
}

impl Add for &SurdReal {
    type Output = SurdReal;
    fn add(self, rhs: &SurdReal) -> SurdReal {
        let d = self.field_with(rhs);
        if self.r == rhs.r {
            return SurdReal::canonical(&self.p + &rhs.p, &self.q + &rhs.q, self.r.clone(), d);
        }
        SurdReal::canonical(
            &self.p * &rhs.r + &rhs.p * &self.r,
            &self.q * &rhs.r + &rhs.q * &self.r,
            &self.r * &rhs.r,
            d,
        )
    }
}

impl Sub for &SurdReal {
    type Output = SurdReal;
    fn sub(self, rhs: &SurdReal) -> SurdReal {
        self + &(-rhs)
    }
}

impl Mul for &SurdReal {
    type Output = SurdReal;
    fn mul(self, rhs: &SurdReal) -> SurdReal {
        let d = self.field_with(rhs);
        let bd = BigInt::from(d);
        SurdReal::canonical(
            &self.p * &rhs.p + &self.q * &rhs.q * bd,
            &self.p * &rhs.q + &self.q * &rhs.p,
            &self.r * &rhs.r,
            d,
        )
    }
}

impl Div for &SurdReal {
    type Output = SurdReal;
    /// Panics on division by zero, like integer division.
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, rhs: &SurdReal) -> SurdReal {
        let inv = rhs.recip().expect("division of SurdReal by zero");
        self * &inv
    }
}

macro_rules! forward_owned {
    ($($tr:ident $m:ident),*) => {$(
        impl $tr for SurdReal {
            type Output = SurdReal;
            fn $m(self, rhs: SurdReal) -> SurdReal { (&self).$m(&rhs) }
        }
        impl $tr<&SurdReal> for SurdReal {
            type Output = SurdReal;
            fn $m(self, rhs: &SurdReal) -> SurdReal { (&self).$m(rhs) }
        }
        impl $tr<SurdReal> for &SurdReal {
            type Output = SurdReal;
            fn $m(self, rhs: SurdReal) -> SurdReal { self.$m(&rhs) }
        }
    )*};
}
forward_owned!(Add add, Sub sub, Mul mul, Div div);

impl fmt::Display for SurdReal {
    /// `p`, `p/r`, `(p + q√d)/r` style, with unit coefficients elided.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut num = String::new();
        if self.q.is_zero() {
            num.push_str(&self.p.to_string());
        } else {
            let mag = self.q.magnitude();
            let coef = if mag.is_one() {
                String::new()
            } else {
                mag.to_string()
            };
            let root = format!("{coef}√{}", self.d);
            if self.p.is_zero() {
                if self.q.is_negative() {
                    num.push('-');
                }
                num.push_str(&root);
            } else {
                let op = if self.q.is_negative() { '-' } else { '+' };
                num = format!("{} {op} {root}", self.p);
            }
        }
        if self.r.is_one() {
            write!(f, "{num}")
        } else if self.q.is_zero() || (self.p.is_zero() && self.q.is_positive()) {
            write!(f, "{num}/{}", self.r)
        } else {
            write!(f, "({num})/{}", self.r)
        }
    }
}

impl fmt::Debug for SurdReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (~{:.12})", self, self.to_f64())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(p: i64, q: i64, r: i64, d: u64) -> SurdReal {
        SurdReal::new(p.into(), q.into(), r.into(), d).unwrap()
    }

    #[test]
    fn canonical_form_is_structural() {
        assert_eq!(s(2, 4, 6, 10), s(1, 2, 3, 10));
        assert_eq!(s(-1, -2, -3, 10), s(1, 2, 3, 10));
        assert_eq!(s(3, 0, 6, 10), SurdReal::half());
        // sqrt(40) = 2 sqrt(10)
        assert_eq!(SurdReal::sqrt(40).unwrap(), s(0, 2, 1, 10));
        // sqrt(9) is rational
        assert_eq!(SurdReal::sqrt(9).unwrap(), SurdReal::from_integer(3));
    }

    #[test]
    fn sign_and_order() {
        let a = s(-3, 1, 1, 10); // sqrt(10) - 3 > 0
        assert!(a.is_positive());
        assert!(s(3, -1, 1, 10).is_negative());
        assert!(a < SurdReal::from_ratio(1, 6).unwrap());
        assert!(a > SurdReal::from_ratio(1, 7).unwrap());
        assert_eq!(a.cmp(&a), Ordering::Equal);
    }

    #[test]
    fn field_arithmetic() {
        let beta = s(-3, 1, 1, 10);
        // beta^2 = 1 - 6 beta
        let lhs = &beta * &beta;
        let rhs = SurdReal::one() - beta.mul_int(&BigInt::from(6));
        assert_eq!(lhs, rhs);
        let inv = beta.recip().unwrap();
        assert_eq!(&inv * &beta, SurdReal::one());
        assert_eq!(inv, s(3, 1, 1, 10));
        assert_eq!(&(&beta / &beta), &SurdReal::one());
    }

    #[test]
    fn floor_and_fract() {
        let x = s(0, 1, 1, 10);
        assert_eq!(x.floor(), BigInt::from(3));
        assert_eq!(x.fract(), s(-3, 1, 1, 10));
        assert_eq!((-&x).floor(), BigInt::from(-4));
        assert_eq!(
            SurdReal::from_ratio(-7, 2).unwrap().floor(),
            BigInt::from(-4)
        );
        assert_eq!(SurdReal::from_ratio(6, 3).unwrap().floor(), BigInt::from(2));
        // (sqrt(10) + 2)/6 ~ 0.86
        assert_eq!(s(2, 1, 6, 10).floor(), BigInt::zero());
    }

    #[test]
    fn float_conversions() {
        let a = s(-2, 1, 6, 10);
        let exact = (10f64.sqrt() - 2.0) / 6.0;
        assert!((a.to_f64() - exact).abs() < 1e-16);
        let (hi, lo, err) = a.to_double_double();
        assert!((hi - exact).abs() < 1e-16);
        assert!(lo.abs() < 1e-16 && err < 1e-25);
        assert_eq!(SurdReal::from_ratio(1, 3).unwrap().to_f64(), 1.0 / 3.0);
    }

    #[test]
    fn display_forms() {
        assert_eq!(s(-2, 1, 6, 10).to_string(), "(-2 + √10)/6");
        assert_eq!(s(0, 1, 1, 2).to_string(), "√2");
        assert_eq!(s(1, -3, 1, 2).to_string(), "1 - 3√2");
        assert_eq!(SurdReal::half().to_string(), "1/2");
    }

    #[test]
    fn squarefree() {
        assert_eq!(squarefree_split(40), (2, 10));
        assert_eq!(squarefree_split(72), (6, 2));
        assert_eq!(squarefree_split(1), (1, 1));
        assert_eq!(
            squarefree_split_big(&BigUint::from(40u32)).unwrap(),
            (BigUint::from(2u32), 10)
        );
        assert_eq!(
            squarefree_split_big(&BigUint::from(8u32)).unwrap(),
            (BigUint::from(2u32), 2)
        );
        assert_eq!(
            squarefree_split_big(&BigUint::from(36u32)).unwrap(),
            (BigUint::from(6u32), 1)
        );
        assert_eq!(
            squarefree_split_big(&BigUint::from(2u32 * 9 * 5 * 5 * 7)).unwrap(),
            (BigUint::from(15u32), 14)
        );
    }

    #[test]
    #[should_panic(expected = "mixed quadratic fields")]
    fn mixing_fields_panics() {
        let _ = SurdReal::sqrt(2).unwrap() + SurdReal::sqrt(3).unwrap();
    }
}
