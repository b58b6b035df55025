//! Eventually periodic continued fractions `[0; a_1, a_2, ...]`.

use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::surd::{squarefree_split_big, SurdReal};
use super::ExactError;

/// `[0; preperiod, (period)]` with every coefficient at least 1.
///
/// The exact value is computed lazily and cached. Equality compares the
/// normalized coefficient lists, which identifies equal numbers.
#[derive(Clone)]
pub struct CFNumber {
    preperiod: Vec<u64>,
    period: Vec<u64>,
    value: OnceLock<SurdReal>,
}

impl CFNumber {
    pub fn new(preperiod: Vec<u64>, period: Vec<u64>) -> Result<Self, ExactError> {
        if period.is_empty() {
            return Err(ExactError::EmptyPeriod);
        }
        if let Some(pos) = preperiod.iter().chain(&period).position(|&a| a == 0) {
            return Err(ExactError::ZeroCoefficient(pos + 1));
        }
        let mut cf = Self {
            preperiod,
            period,
            value: OnceLock::new(),
        };
        cf.normalize();
        Ok(cf)
    }

    /// Purely periodic `[0; (period)]`.
    pub fn periodic(period: Vec<u64>) -> Result<Self, ExactError> {
        Self::new(Vec::new(), period)
    }

    // Shortest period, then absorb preperiod tail into the period.
    fn normalize(&mut self) {
        let k = self.period.len();
        for len in 1..=k {
            if k.is_multiple_of(len) && (len..k).all(|i| self.period[i] == self.period[i - len]) {
                self.period.truncate(len);
                break;
            }
        }
        while let Some(&last) = self.preperiod.last() {
            if last != *self.period.last().unwrap() {
                break;
            }
            self.preperiod.pop();
            self.period.rotate_right(1);
        }
    }

    pub fn preperiod(&self) -> &[u64] {
        &self.preperiod
    }

    pub fn period(&self) -> &[u64] {
        &self.period
    }

    /// The `k`-th coefficient, 1-based (`a_1` is the first after the `0;`).
    pub fn coefficient(&self, k: usize) -> u64 {
        assert!(k >= 1, "coefficients are 1-based");
        let i = k - 1;
        if i < self.preperiod.len() {
            self.preperiod[i]
        } else {
            self.period[(i - self.preperiod.len()) % self.period.len()]
        }
    }

    pub fn coefficients(&self) -> impl Iterator<Item = u64> + '_ {
        (1..).map(move |k| self.coefficient(k))
    }

    /// Drops `a_1`: `[0; a_2, a_3, ...]`.
    pub fn shift(&self) -> Self {
        let (pre, per) = if self.preperiod.is_empty() {
            let mut per = self.period.clone();
            per.rotate_left(1);
            (Vec::new(), per)
        } else {
            (self.preperiod[1..].to_vec(), self.period.clone())
        };
        Self::new(pre, per).expect("shift preserves well-formedness")
    }

    /// Exact value; see [`cf_value`].
    pub fn value(&self) -> &SurdReal {
        self.value.get_or_init(|| {
            evaluate(&self.preperiod, &self.period).expect("validated at construction")
        })
    }

    /// Radicand of the quadratic field containing the value.
    pub fn radicand(&self) -> u64 {
        self.value().radicand()
    }
}

impl PartialEq for CFNumber {
    fn eq(&self, other: &Self) -> bool {
        self.preperiod == other.preperiod && self.period == other.period
    }
}

impl Eq for CFNumber {}

impl fmt::Debug for CFNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for CFNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |v: &[u64]| v.iter().map(u64::to_string).collect::<Vec<_>>().join(",");
        if self.preperiod.is_empty() {
            write!(f, "[0;({})]", join(&self.period))
        } else {
            write!(f, "[0;{},({})]", join(&self.preperiod), join(&self.period))
        }
    }
}

impl FromStr for CFNumber {
    type Err = ExactError;

    /// Parses `[0;5,(6)]`, `[0;(2)]`, `[0;5,8,(6,7)]`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || ExactError::Parse(s.to_string());
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let body = compact
            .strip_prefix("[0;")
            .and_then(|b| b.strip_suffix(']'))
            .ok_or_else(bad)?;
        let open = body.find('(').ok_or_else(bad)?;
        let close = body.rfind(')').ok_or_else(bad)?;
        if close != body.len() - 1 || close < open {
            return Err(bad());
        }
        let head = &body[..open];
        let head = if head.is_empty() {
            head
        } else {
            head.strip_suffix(',').ok_or_else(bad)?
        };
        let parse_list = |t: &str| -> Result<Vec<u64>, ExactError> {
            if t.is_empty() {
                return Ok(Vec::new());
            }
            t.split(',')
                .map(|x| x.parse::<u64>().map_err(|_| bad()))
                .collect()
        };
        let preperiod = parse_list(head)?;
        let period = parse_list(&body[open + 1..close])?;
        Self::new(preperiod, period)
    }
}

/// Exact value of an eventually periodic continued fraction.
///
/// The periodic tail `y = [0; (p_1..p_k)]` is the positive root of the
/// fixed-point quadratic of the period's Möbius map; the preperiod is then
/// folded back as `1/(a + x)` from the inside out.
pub fn cf_value(cf: &CFNumber) -> Result<SurdReal, ExactError> {
    evaluate(&cf.preperiod, &cf.period)
}

fn evaluate(preperiod: &[u64], period: &[u64]) -> Result<SurdReal, ExactError> {
    if period.is_empty() {
        return Err(ExactError::EmptyPeriod);
    }
    // y -> (a y + b) / (c y + e); each coefficient contributes 1/(p + y).
    let (mut a, mut b, mut c, mut e) =
        (BigInt::one(), BigInt::zero(), BigInt::zero(), BigInt::one());
    for &p in period {
        // M * [[0, 1], [1, p]]
        let p = BigInt::from(p);
        let (na, nb) = (b.clone(), &a + &b * &p);
        let (nc, ne) = (e.clone(), &c + &e * &p);
        a = na;
        b = nb;
        c = nc;
        e = ne;
    }
    // c y^2 + (e - a) y - b = 0, positive root
    let disc = (&e - &a) * (&e - &a) + BigInt::from(4) * &b * &c;
    let disc_mag: BigUint = disc.magnitude().clone();
    let (s, d) = squarefree_split_big(&disc_mag)?;
    if d == 1 {
        return Err(ExactError::RationalCollapse);
    }
    let mut x = SurdReal::new(&a - &e, BigInt::from(s), BigInt::from(2) * &c, d)?;
    for &a_k in preperiod.iter().rev() {
        let denom = SurdReal::from_integer(a_k) + &x;
        x = denom.recip().ok_or(ExactError::RationalCollapse)?;
    }
    if x.is_rational() {
        return Err(ExactError::RationalCollapse);
    }
    Ok(x)
}

/// Gauss map `1/x - floor(1/x)` on `(0, 1)`.
pub fn gauss_step(x: &SurdReal) -> Result<SurdReal, ExactError> {
    if !x.is_positive() || *x >= SurdReal::one() {
        return Err(ExactError::OutOfUnitInterval(x.to_string()));
    }
    Ok(x.recip().expect("positive").fract())
}

/// `[0; c_1, c_2, c_3, ...] -> [0; c_2 - 1, c_3, ...]`, the renormalized
/// rotation number `G(x) / (1 - G(x))`.
pub fn alpha_next(alpha: &CFNumber) -> Result<CFNumber, ExactError> {
    let c2 = alpha.coefficient(2);
    if c2 < 2 {
        return Err(ExactError::DecrementBelowOne { coefficient: 2 });
    }
    let shifted = alpha.shift();
    let mut pre = shifted.preperiod.clone();
    let mut per = shifted.period.clone();
    if pre.is_empty() {
        // head of a purely periodic expansion becomes the preperiod
        let head = per[0];
        per.rotate_left(1);
        pre.push(head - 1);
    } else {
        pre[0] -= 1;
    }
    CFNumber::new(pre, per)
}

/// A rational `p/q` with `q > 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Convergent {
    pub p: BigInt,
    pub q: BigInt,
}

impl Convergent {
    pub fn to_surd(&self) -> SurdReal {
        SurdReal::from_ratio(self.p.clone(), self.q.clone()).expect("q > 0")
    }

    pub fn to_f64(&self) -> f64 {
        self.to_surd().to_f64()
    }
}

/// `p_k / q_k`, the value of `[0; a_1, ..., a_k]`.
pub fn convergent(cf: &CFNumber, k: usize) -> Result<Convergent, ExactError> {
    if k == 0 {
        return Err(ExactError::ConvergentIndex);
    }
    // p_{-1} = 1, p_0 = 0; q_{-1} = 0, q_0 = 1
    let (mut p_prev, mut p) = (BigInt::one(), BigInt::zero());
    let (mut q_prev, mut q) = (BigInt::zero(), BigInt::one());
    for a in cf.coefficients().take(k) {
        let a = BigInt::from(a);
        let p_next = &a * &p + &p_prev;
        let q_next = &a * &q + &q_prev;
        p_prev = std::mem::replace(&mut p, p_next);
        q_prev = std::mem::replace(&mut q, q_next);
    }
    Ok(Convergent { p, q })
}

/// Re-expands a value by greedy Gauss iteration with exact floors, stopping
/// when a complete state repeats. Returns `(preperiod, period)`.
pub fn expand_cf(x: &SurdReal, max_terms: usize) -> Result<(Vec<u64>, Vec<u64>), ExactError> {
    if !x.is_positive() || *x >= SurdReal::one() {
        return Err(ExactError::OutOfUnitInterval(x.to_string()));
    }
    let mut seen: Vec<SurdReal> = Vec::new();
    let mut coeffs = Vec::new();
    let mut cur = x.clone();
    for _ in 0..max_terms {
        if let Some(start) = seen.iter().position(|s| *s == cur) {
            let period = coeffs.split_off(start);
            return Ok((coeffs, period));
        }
        seen.push(cur.clone());
        let inv = cur.recip().ok_or(ExactError::RationalCollapse)?;
        let a = inv.floor();
        coeffs.push(
            a.to_u64()
                .filter(|_| !a.is_negative())
                .ok_or_else(|| ExactError::OutOfUnitInterval(cur.to_string()))?,
        );
        cur = inv.fract();
        if cur.is_zero() {
            return Err(ExactError::RationalCollapse);
        }
    }
    Err(ExactError::NoPeriodFound(max_terms))
}
