//! The tower of first-return intervals `I_1 ⊃ I_2 ⊃ ...` around `1/2`.
//!
//! Each `I_i` is symmetric about `1/2`, its rescaled first-return map is the
//! rotation by `beta_i = ±alpha_i`, and the f-value word of a return depends
//! only on which of three case regions the start lies in. Words are built by
//! substitution as hash-consed DAGs, so their prefix-sum bounds are read off
//! without expansion.

use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circle::{CirclePoint, ExactOrbit};
use crate::exactreal::{alpha_next, gauss_step, CFNumber, ExactError, SurdReal};
use crate::words::{concat, Sign, SignWord, WordError, WordInterner};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RenormError {
    #[error("alpha = {alpha}: coefficient a_{index} = {value} {reason}")]
    Coefficient {
        alpha: String,
        index: usize,
        value: u64,
        reason: &'static str,
    },
    #[error("level {level}: rotation number {found} has the wrong sign for this step")]
    WrongSign { level: usize, found: String },
    #[error("level {level}: first coefficient {value} of |beta| must be odd and at least 5")]
    FirstCoefficient { level: usize, value: u64 },
    #[error("level {level}: second coefficient {value} of |beta| must be at least 4")]
    SecondCoefficient { level: usize, value: u64 },
    #[error("level {level}: G/(1-G) = {surd} but the shifted expansion gives {cf}")]
    BetaMismatch {
        level: usize,
        surd: String,
        cf: String,
    },
    #[error("level {level}: {what}")]
    Invariant { level: usize, what: String },
    #[error("interval [{left}, {right}) is not a sub-interval of [0, 1) centred at 1/2")]
    BadInterval { left: String, right: String },
    #[error("point {x} is outside I_{level}")]
    NotInInterval { level: usize, x: String },
    #[error("point {x} lies on the case boundary {boundary} of I_{level}")]
    CaseBoundary {
        level: usize,
        x: String,
        boundary: String,
    },
    #[error("no return to I_{level} within {budget} steps from {x}")]
    BudgetExceeded {
        level: usize,
        budget: u64,
        x: String,
    },
    #[error("tower of depth {depth} is too short for n = {n}")]
    DepthExhausted { depth: usize, n: String },
    #[error("level {level}: {inequality} fails ({lhs} vs {rhs})")]
    BoundViolated {
        level: usize,
        inequality: String,
        lhs: i64,
        rhs: i64,
    },
    #[error(transparent)]
    Exact(#[from] ExactError),
    #[error(transparent)]
    Word(#[from] WordError),
}

/// Half-open `[left, right)` with `left + right = 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExactInterval {
    left: SurdReal,
    right: SurdReal,
}

impl ExactInterval {
    pub fn new(left: SurdReal, right: SurdReal) -> Result<Self, RenormError> {
        let ok = !left.is_negative()
            && left < right
            && right <= SurdReal::one()
            && &left + &right == SurdReal::one();
        if !ok {
            return Err(RenormError::BadInterval {
                left: left.to_string(),
                right: right.to_string(),
            });
        }
        Ok(Self { left, right })
    }

    pub fn unit() -> Self {
        Self {
            left: SurdReal::zero(),
            right: SurdReal::one(),
        }
    }

    /// The interval of the given length centred at `1/2`.
    pub fn centered(length: &SurdReal) -> Result<Self, RenormError> {
        let half_len = length / &SurdReal::from_integer(2);
        Self::new(SurdReal::half() - &half_len, SurdReal::half() + &half_len)
    }

    pub fn left(&self) -> &SurdReal {
        &self.left
    }

    pub fn right(&self) -> &SurdReal {
        &self.right
    }

    pub fn length(&self) -> SurdReal {
        &self.right - &self.left
    }

    pub fn contains(&self, x: &SurdReal) -> bool {
        &self.left <= x && x < &self.right
    }

    /// `(x - left) / |I|`, the inverse of the affine chart fixing `1/2`.
    pub fn local(&self, x: &SurdReal) -> SurdReal {
        &(x - &self.left) / &self.length()
    }

    /// `left + u |I|`.
    pub fn global(&self, u: &SurdReal) -> SurdReal {
        &self.left + &(u * &self.length())
    }
}

impl fmt::Display for ExactInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {})", self.left, self.right)
    }
}

/// One level of the tower.
#[derive(Clone, Debug)]
pub struct RenormLevel {
    index: usize,
    interval: ExactInterval,
    beta: SurdReal,
    beta_abs: CFNumber,
    f_plus: SignWord,
    f_minus: SignWord,
    f_zero: SignWord,
    n_half: u64,
}

impl RenormLevel {
    pub fn index(&self) -> usize {
        self.index
    }

    pub fn interval(&self) -> &ExactInterval {
        &self.interval
    }

    /// Signed rotation number of the rescaled first-return map.
    pub fn beta(&self) -> &SurdReal {
        &self.beta
    }

    /// Continued fraction of `|beta|`.
    pub fn beta_abs(&self) -> &CFNumber {
        &self.beta_abs
    }

    pub fn f_plus(&self) -> &SignWord {
        &self.f_plus
    }

    pub fn f_minus(&self) -> &SignWord {
        &self.f_minus
    }

    pub fn f_zero(&self) -> &SignWord {
        &self.f_zero
    }

    /// `n` with `2n + 1` the first coefficient of `|beta|`.
    pub fn n_half(&self) -> u64 {
        self.n_half
    }

    /// Step budget for direct return simulation: ten times the longest
    /// possible return word.
    pub fn return_budget(&self) -> u64 {
        let longest = self.f_zero.length() + self.f_minus.length().max(self.f_plus.length());
        (longest * 10u32).to_u64().unwrap_or(u64::MAX)
    }

    /// Case regions `[lo, hi)` in local coordinates, left to right.
    pub fn regions(&self) -> Vec<(ReturnCase, SurdReal, SurdReal)> {
        let half = SurdReal::half();
        let (zero, one) = (SurdReal::zero(), SurdReal::one());
        if self.beta.is_positive() {
            let cut = &one - &self.beta;
            vec![
                (ReturnCase::Plus, zero, half.clone()),
                (ReturnCase::Minus, half, cut.clone()),
                (ReturnCase::MinusZero, cut, one),
            ]
        } else {
            let gamma = -&self.beta;
            vec![
                (ReturnCase::PlusZero, zero, gamma.clone()),
                (ReturnCase::Plus, gamma, half.clone()),
                (ReturnCase::Minus, half, one),
            ]
        }
    }

    fn word_for(&self, case: ReturnCase) -> SignWord {
        match case {
            ReturnCase::Plus => self.f_plus.clone(),
            ReturnCase::Minus => self.f_minus.clone(),
            ReturnCase::PlusZero => concat(&self.f_plus, &self.f_zero),
            ReturnCase::MinusZero => concat(&self.f_minus, &self.f_zero),
        }
    }
}

/// Which word a return from a given start produces.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReturnCase {
    Plus,
    Minus,
    PlusZero,
    MinusZero,
}

/// A first return computed by direct simulation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReturnRecord {
    pub start: CirclePoint,
    pub time: u64,
    pub word: Vec<Sign>,
    pub landing: CirclePoint,
}

fn check_alpha(alpha: &CFNumber) -> Result<(), RenormError> {
    let bad = |index: usize, value: u64, reason| RenormError::Coefficient {
        alpha: alpha.to_string(),
        index,
        value,
        reason,
    };
    let a1 = alpha.coefficient(1);
    if a1.is_multiple_of(2) || a1 < 5 {
        return Err(bad(1, a1, "must be odd and at least 5"));
    }
    // one full period past the preperiod covers every distinct coefficient
    let last = 1 + alpha.preperiod().len() + alpha.period().len();
    for k in 2..=last {
        let a = alpha.coefficient(k);
        if a % 2 == 1 || a < 6 {
            return Err(bad(k, a, "must be even and at least 6"));
        }
    }
    Ok(())
}

/// `I_1 = [0, 1)`, `beta_1 = alpha`, `F_+ = (+1)`, `F_- = (-1)`, `F_0` empty.
pub fn base_level(alpha: &CFNumber, words: &WordInterner) -> Result<RenormLevel, RenormError> {
    check_alpha(alpha)?;
    Ok(RenormLevel {
        index: 1,
        interval: ExactInterval::unit(),
        beta: alpha.value().clone(),
        beta_abs: alpha.clone(),
        f_plus: words.atom(Sign::Plus),
        f_minus: words.atom(Sign::Minus),
        f_zero: words.empty(),
        n_half: (alpha.coefficient(1) - 1) / 2,
    })
}

struct StepGeometry {
    n: u64,
    interval: ExactInterval,
    beta_abs: CFNumber,
}

fn step_geometry(level: &RenormLevel) -> Result<StepGeometry, RenormError> {
    let index = level.index;
    let b = level.beta_abs.coefficient(1);
    if b.is_multiple_of(2) || b < 5 {
        return Err(RenormError::FirstCoefficient {
            level: index,
            value: b,
        });
    }
    let c1 = level.beta_abs.coefficient(2);
    if c1 < 4 {
        return Err(RenormError::SecondCoefficient {
            level: index,
            value: c1,
        });
    }
    let abs = level.beta.abs();
    let g = gauss_step(&abs)?;
    let one_minus_g = SurdReal::one() - &g;
    let by_surd = &g / &one_minus_g;
    let beta_abs = alpha_next(&level.beta_abs)?;
    if beta_abs.value() != &by_surd {
        return Err(RenormError::BetaMismatch {
            level: index,
            surd: by_surd.to_string(),
            cf: beta_abs.value().to_string(),
        });
    }
    let old_len = level.interval.length();
    let new_len = &(&abs * &one_minus_g) * &old_len;
    if new_len > &abs * &old_len {
        return Err(RenormError::Invariant {
            level: index + 1,
            what: "|I_{i+1}| > |beta_i| |I_i|".into(),
        });
    }
    Ok(StepGeometry {
        n: (b - 1) / 2,
        interval: ExactInterval::centered(&new_len)?,
        beta_abs,
    })
}

fn check_totals(level: &RenormLevel) -> Result<(), RenormError> {
    let totals = [
        level.f_plus.total(),
        level.f_minus.total(),
        level.f_zero.total(),
    ];
    if *totals[0] != BigInt::one() || *totals[1] != -BigInt::one() || !totals[2].is_zero() {
        return Err(RenormError::Invariant {
            level: level.index,
            what: format!(
                "word totals are ({}, {}, {}) instead of (1, -1, 0)",
                totals[0], totals[1], totals[2]
            ),
        });
    }
    Ok(())
}

/// Induction step for `beta > 0`:
/// `F_+' = F_+ F_-^n F_0 F_+^n`, `F_-' = F_-^{n+1} F_0 F_+^n`,
/// `F_0' = F_+ F_-^{n+1} F_0 F_+^n`, `beta' = -G(beta)/(1 - G(beta))`.
pub fn step_positive(
    level: &RenormLevel,
    words: &mut WordInterner,
) -> Result<RenormLevel, RenormError> {
    if !level.beta.is_positive() {
        return Err(RenormError::WrongSign {
            level: level.index,
            found: level.beta.to_string(),
        });
    }
    let geo = step_geometry(level)?;
    let n = geo.n;
    let (fp, fm, f0) = (&level.f_plus, &level.f_minus, &level.f_zero);
    let fm_n = words.power(fm, n)?;
    let fm_n1 = words.power(fm, n + 1)?;
    let fp_n = words.power(fp, n)?;
    let next = RenormLevel {
        index: level.index + 1,
        interval: geo.interval,
        beta: -geo.beta_abs.value(),
        f_plus: words.concat_all(&[fp, &fm_n, f0, &fp_n]),
        f_minus: words.concat_all(&[&fm_n1, f0, &fp_n]),
        f_zero: words.concat_all(&[fp, &fm_n1, f0, &fp_n]),
        n_half: (geo.beta_abs.coefficient(1).saturating_sub(1)) / 2,
        beta_abs: geo.beta_abs,
    };
    check_totals(&next)?;
    Ok(next)
}

/// Induction step for `beta = -gamma < 0`:
/// `F_+' = F_+^{n+1} F_0 F_-^n`, `F_-' = F_- F_+^n F_0 F_-^n`,
/// `F_0' = F_- F_+^{n+1} F_0 F_-^n`, `beta' = G(gamma)/(1 - G(gamma))`.
pub fn step_negative(
    level: &RenormLevel,
    words: &mut WordInterner,
) -> Result<RenormLevel, RenormError> {
    if !level.beta.is_negative() {
        return Err(RenormError::WrongSign {
            level: level.index,
            found: level.beta.to_string(),
        });
    }
    let geo = step_geometry(level)?;
    let n = geo.n;
    let (fp, fm, f0) = (&level.f_plus, &level.f_minus, &level.f_zero);
    let fp_n = words.power(fp, n)?;
    let fp_n1 = words.power(fp, n + 1)?;
    let fm_n = words.power(fm, n)?;
    let next = RenormLevel {
        index: level.index + 1,
        interval: geo.interval,
        beta: geo.beta_abs.value().clone(),
        f_plus: words.concat_all(&[&fp_n1, f0, &fm_n]),
        f_minus: words.concat_all(&[fm, &fp_n, f0, &fm_n]),
        f_zero: words.concat_all(&[fm, &fp_n1, f0, &fm_n]),
        n_half: (geo.beta_abs.coefficient(1).saturating_sub(1)) / 2,
        beta_abs: geo.beta_abs,
    };
    check_totals(&next)?;
    Ok(next)
}

/// The step matching the sign of `beta`.
pub fn step(level: &RenormLevel, words: &mut WordInterner) -> Result<RenormLevel, RenormError> {
    if level.beta.is_positive() {
        step_positive(level, words)
    } else {
        step_negative(level, words)
    }
}

/// Levels `1..=depth`.
pub fn tower(alpha: &CFNumber, depth: usize) -> Result<Vec<RenormLevel>, RenormError> {
    Ok(Tower::build(alpha, depth)?.levels)
}

/// A growable tower sharing one word interner.
pub struct Tower {
    alpha: CFNumber,
    levels: Vec<RenormLevel>,
    words: WordInterner,
}

impl Tower {
    pub fn new(alpha: &CFNumber) -> Result<Self, RenormError> {
        let words = WordInterner::new();
        let base = base_level(alpha, &words)?;
        Ok(Self {
            alpha: alpha.clone(),
            levels: vec![base],
            words,
        })
    }

    pub fn build(alpha: &CFNumber, depth: usize) -> Result<Self, RenormError> {
        let mut t = Self::new(alpha)?;
        t.extend_to(depth)?;
        Ok(t)
    }

    pub fn extend_to(&mut self, depth: usize) -> Result<(), RenormError> {
        while self.levels.len() < depth {
            let next = step(self.levels.last().expect("nonempty"), &mut self.words)?;
            self.levels.push(next);
        }
        Ok(())
    }

    pub fn alpha(&self) -> &CFNumber {
        &self.alpha
    }

    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    pub fn levels(&self) -> &[RenormLevel] {
        &self.levels
    }

    /// Level `i`, 1-based.
    pub fn level(&self, i: usize) -> Option<&RenormLevel> {
        i.checked_sub(1).and_then(|k| self.levels.get(k))
    }

    /// `S_n(1/2)` from the first `F_-^i` of length at least `n`, without
    /// growing the tower.
    pub fn half_birkhoff(&self, n: &BigUint) -> Result<BigInt, RenormError> {
        if n.is_zero() {
            return Ok(BigInt::zero());
        }
        let level = self
            .levels
            .iter()
            .find(|l| l.f_minus.length() >= n)
            .ok_or_else(|| RenormError::DepthExhausted {
                depth: self.depth(),
                n: n.to_string(),
            })?;
        Ok(level.f_minus.prefix_sum_at(n)?)
    }

    /// As [`Self::half_birkhoff`], adding levels as needed.
    pub fn half_birkhoff_extending(&mut self, n: &BigUint) -> Result<BigInt, RenormError> {
        while self.levels.last().expect("nonempty").f_minus.length() < n {
            let depth = self.depth() + 1;
            self.extend_to(depth)?;
        }
        self.half_birkhoff(n)
    }
}

/// How far [`fast_birkhoff`] may build the tower.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum DepthHint {
    /// Grow until the word is long enough.
    #[default]
    Auto,
    /// Build exactly this many levels; fail if they are too short.
    Fixed(usize),
}

/// `S_n(1/2)` for rotation by `alpha`, via the tower.
pub fn fast_birkhoff(alpha: &CFNumber, n: u64, hint: DepthHint) -> Result<i64, RenormError> {
    let n = BigUint::from(n);
    let s = match hint {
        DepthHint::Auto => Tower::new(alpha)?.half_birkhoff_extending(&n)?,
        DepthHint::Fixed(depth) => Tower::build(alpha, depth)?.half_birkhoff(&n)?,
    };
    Ok(s.to_i64().expect("|S_n| <= n"))
}

/// Which case region of `level` the point lies in.
pub fn return_case(level: &RenormLevel, x: &CirclePoint) -> Result<ReturnCase, RenormError> {
    let u = local_coordinate(level, x)?;
    for (case, lo, hi) in level.regions() {
        if u == lo && !lo.is_zero() && lo != SurdReal::half() {
            return Err(RenormError::CaseBoundary {
                level: level.index,
                x: x.position().to_string(),
                boundary: lo.to_string(),
            });
        }
        if lo <= u && u < hi {
            return Ok(case);
        }
    }
    unreachable!("regions cover [0, 1)")
}

/// The return word the case analysis assigns to `x`.
pub fn predicted_return_word(
    level: &RenormLevel,
    x: &CirclePoint,
) -> Result<SignWord, RenormError> {
    Ok(level.word_for(return_case(level, x)?))
}

/// `frac(u + beta)` mapped back from local coordinates.
pub fn predicted_landing(level: &RenormLevel, x: &CirclePoint) -> Result<CirclePoint, RenormError> {
    let u = local_coordinate(level, x)?;
    let v = (&u + &level.beta).fract();
    Ok(CirclePoint::wrap(&level.interval.global(&v)))
}

/// Local coordinate of `x` in `I_i`.
pub fn local_coordinate(level: &RenormLevel, x: &CirclePoint) -> Result<SurdReal, RenormError> {
    if !level.interval.contains(x.position()) {
        return Err(RenormError::NotInInterval {
            level: level.index,
            x: x.position().to_string(),
        });
    }
    Ok(level.interval.local(x.position()))
}

/// First return to `I_i` by plain orbit simulation.
pub fn oracle_first_return(
    level: &RenormLevel,
    x: &CirclePoint,
    alpha: &CFNumber,
) -> Result<ReturnRecord, RenormError> {
    let interval = &level.interval;
    if !interval.contains(x.position()) {
        return Err(RenormError::NotInInterval {
            level: level.index,
            x: x.position().to_string(),
        });
    }
    let budget = level.return_budget();
    let mut orbit = ExactOrbit::new(x, alpha.value());
    let mut word = Vec::new();
    for time in 1..=budget {
        word.push(orbit.sign());
        orbit.step_forward();
        let inside =
            orbit.cmp_to(interval.left()).is_ge() && orbit.cmp_to(interval.right()).is_lt();
        if inside {
            return Ok(ReturnRecord {
                start: x.clone(),
                time,
                word,
                landing: orbit.point(),
            });
        }
    }
    Err(RenormError::BudgetExceeded {
        level: level.index,
        budget,
        x: x.position().to_string(),
    })
}

/// Outcome of oracle validation for one case region of one level.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleReport {
    pub level: usize,
    pub case: ReturnCase,
    pub samples: usize,
    pub word_matches: usize,
    pub landing_matches: usize,
    pub max_return_time: u64,
    pub budget: u64,
}

impl OracleReport {
    pub fn passed(&self) -> bool {
        self.samples > 0
            && self.word_matches == self.samples
            && self.landing_matches == self.samples
    }
}

const SAMPLE_BITS: u32 = 52;

/// A dyadic rational drawn uniformly from the region `[lo, hi)` of local
/// coordinates. Dyadic starts keep every orbit clear of the irrational case
/// boundaries and of `1/2`.
pub fn sample_region<R: Rng>(
    level: &RenormLevel,
    lo: &SurdReal,
    hi: &SurdReal,
    rng: &mut R,
) -> CirclePoint {
    let (a, b) = (level.interval.global(lo), level.interval.global(hi));
    let scale = (1u64 << SAMPLE_BITS) as f64;
    let (ka, kb) = (
        (a.to_f64() * scale).ceil() as u64,
        (b.to_f64() * scale).floor() as u64,
    );
    assert!(ka + 2 < kb, "region [{a}, {b}) too narrow to sample");
    loop {
        let k = rng.gen_range(ka..kb);
        let x =
            SurdReal::from_ratio(BigInt::from(k), BigInt::one() << SAMPLE_BITS).expect("nonzero");
        if a <= x && x < b && x != SurdReal::half() {
            return CirclePoint::new(x).expect("inside the unit interval");
        }
    }
}

/// Compares predicted words and landings against the oracle on
/// `samples` random starts per case region of level `i`.
pub fn validate_level(
    tower: &Tower,
    i: usize,
    samples: usize,
    seed: u64,
) -> Result<Vec<OracleReport>, RenormError> {
    let level = tower.level(i).ok_or_else(|| RenormError::DepthExhausted {
        depth: tower.depth(),
        n: format!("level {i}"),
    })?;
    let alpha = tower.alpha();
    let mut reports = Vec::new();
    for (r, (case, lo, hi)) in level.regions().into_iter().enumerate() {
        let outcomes: Vec<(bool, bool, u64)> = (0..samples)
            .into_par_iter()
            .map(|s| -> Result<_, RenormError> {
                let stream = ((i as u64) << 40) ^ ((r as u64) << 32) ^ s as u64;
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(stream);
                let x = sample_region(level, &lo, &hi, &mut rng);
                let record = oracle_first_return(level, &x, alpha)?;
                let predicted = predicted_return_word(level, &x)?;
                let cap = record.word.len().max(1);
                let word_ok = predicted
                    .expand(cap)
                    .map(|w| w == record.word)
                    .unwrap_or(false);
                let landing_ok = predicted_landing(level, &x)? == record.landing;
                Ok((word_ok, landing_ok, record.time))
            })
            .collect::<Result<_, _>>()?;
        reports.push(OracleReport {
            level: i,
            case,
            samples,
            word_matches: outcomes.iter().filter(|o| o.0).count(),
            landing_matches: outcomes.iter().filter(|o| o.1).count(),
            max_return_time: outcomes.iter().map(|o| o.2).max().unwrap_or(0),
            budget: level.return_budget(),
        });
    }
    Ok(reports)
}

/// `max` and `min` prefix sums of `F_+` and `F_-`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrefixBounds {
    pub max_plus: i64,
    pub min_plus: i64,
    pub max_minus: i64,
    pub min_minus: i64,
}

fn small(x: &BigInt) -> i64 {
    x.to_i64()
        .expect("prefix sums are bounded by the tower depth")
}

pub fn prefix_bounds(level: &RenormLevel) -> Result<PrefixBounds, RenormError> {
    Ok(PrefixBounds {
        max_plus: small(level.f_plus.max_prefix()?),
        min_plus: small(level.f_plus.min_prefix()?),
        max_minus: small(level.f_minus.max_prefix()?),
        min_minus: small(level.f_minus.min_prefix()?),
    })
}

/// One evaluated inequality `lhs <= rhs` or `lhs >= rhs`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub level: usize,
    pub inequality: String,
    pub lhs: i64,
    pub rhs: i64,
    pub holds: bool,
}

impl BoundCheck {
    fn le(level: usize, inequality: &str, lhs: i64, rhs: i64) -> Self {
        Self {
            level,
            inequality: inequality.into(),
            lhs,
            rhs,
            holds: lhs <= rhs,
        }
    }

    fn ge(level: usize, inequality: &str, lhs: i64, rhs: i64) -> Self {
        Self {
            level,
            inequality: inequality.into(),
            lhs,
            rhs,
            holds: lhs >= rhs,
        }
    }

    pub fn into_result(self) -> Result<Self, RenormError> {
        if self.holds {
            Ok(self)
        } else {
            Err(RenormError::BoundViolated {
                level: self.level,
                inequality: self.inequality,
                lhs: self.lhs,
                rhs: self.rhs,
            })
        }
    }
}

/// First failing check, if any.
pub fn first_violation(checks: &[BoundCheck]) -> Result<(), RenormError> {
    match checks.iter().find(|c| !c.holds) {
        Some(c) => c.clone().into_result().map(|_| ()),
        None => Ok(()),
    }
}

/// `min <= total <= max` for each nonempty word of the level.
pub fn containment_checks(level: &RenormLevel) -> Result<Vec<BoundCheck>, RenormError> {
    let mut out = Vec::new();
    for (name, w) in [
        ("F_+", &level.f_plus),
        ("F_-", &level.f_minus),
        ("F_0", &level.f_zero),
    ] {
        if w.is_empty() {
            continue;
        }
        let total = small(w.total());
        out.push(BoundCheck::le(
            level.index,
            &format!("min prefix of {name} <= total"),
            small(w.min_prefix()?),
            total,
        ));
        out.push(BoundCheck::ge(
            level.index,
            &format!("max prefix of {name} >= total"),
            small(w.max_prefix()?),
            total,
        ));
    }
    Ok(out)
}

/// The four prefix-bound inequalities of the step from `parent` to `child`,
/// from word statistics alone.
pub fn verify_bounds(
    parent: &RenormLevel,
    child: &RenormLevel,
) -> Result<Vec<BoundCheck>, RenormError> {
    if child.index != parent.index + 1 {
        return Err(RenormError::Invariant {
            level: child.index,
            what: format!(
                "level {} is not the child of level {}",
                child.index, parent.index
            ),
        });
    }
    let p = prefix_bounds(parent)?;
    let c = prefix_bounds(child)?;
    let n = parent.n_half as i64;
    let i = child.index;
    let checks = if parent.beta.is_positive() {
        vec![
            BoundCheck::ge(i, "M_+' >= M_+", c.max_plus, p.max_plus),
            BoundCheck::le(
                i,
                "m_+' <= m_- - (n - 2)",
                c.min_plus,
                p.min_minus - (n - 2),
            ),
            BoundCheck::ge(i, "M_-' >= M_-", c.max_minus, p.max_minus),
            BoundCheck::le(i, "m_-' <= m_- - n", c.min_minus, p.min_minus - n),
        ]
    } else {
        vec![
            BoundCheck::ge(i, "M_+' >= M_+ + n", c.max_plus, p.max_plus + n),
            BoundCheck::le(i, "m_+' <= m_+", c.min_plus, p.min_plus),
            BoundCheck::ge(
                i,
                "M_-' >= M_+ + (n - 2)",
                c.max_minus,
                p.max_plus + (n - 2),
            ),
            BoundCheck::le(i, "m_-' <= m_-", c.min_minus, p.min_minus),
        ]
    };
    Ok(checks)
}

/// Two-level consequences along the whole tower:
/// `m_-^{i+2} <= m_-^i - 2` and `M_-^{2i+2} >= M_-^{2i+1} >= M_+^{2i} + (n_{2i} - 2)`.
pub fn verify_chains(levels: &[RenormLevel]) -> Result<Vec<BoundCheck>, RenormError> {
    let bounds: Vec<PrefixBounds> = levels.iter().map(prefix_bounds).collect::<Result<_, _>>()?;
    let at = |i: usize| &bounds[i - 1];
    let mut out = Vec::new();
    for i in 1..=levels.len().saturating_sub(2) {
        out.push(BoundCheck::le(
            i + 2,
            &format!("m_-^{} <= m_-^{} - 2", i + 2, i),
            at(i + 2).min_minus,
            at(i).min_minus - 2,
        ));
    }
    for i in 1.. {
        if 2 * i + 2 > levels.len() {
            break;
        }
        let n = levels[2 * i - 1].n_half as i64;
        out.push(BoundCheck::ge(
            2 * i + 2,
            &format!("M_-^{} >= M_-^{}", 2 * i + 2, 2 * i + 1),
            at(2 * i + 2).max_minus,
            at(2 * i + 1).max_minus,
        ));
        out.push(BoundCheck::ge(
            2 * i + 1,
            &format!("M_-^{} >= M_+^{} + (n_{} - 2)", 2 * i + 1, 2 * i, 2 * i),
            at(2 * i + 1).max_minus,
            at(2 * i).max_plus + (n - 2),
        ));
        out.push(BoundCheck::ge(
            2 * i + 2,
            &format!("M_-^{} >= M_+^{}", 2 * i + 2, 2 * i),
            at(2 * i + 2).max_minus,
            at(2 * i).max_plus,
        ));
    }
    Ok(out)
}

/// Per-level entry of the tower report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelReport {
    pub index: usize,
    pub length_approx: f64,
    pub length_exact: String,
    pub beta_sign: String,
    pub beta_exact: String,
    pub beta_cf: String,
    pub n_half: u64,
    pub word_lengths: [String; 3],
    pub bounds: PrefixBounds,
    pub bounds_pass: bool,
    pub failed: Vec<BoundCheck>,
}

/// Tower summary; `bounds_pass` covers the step inequalities into the
/// level, prefix containment, and every chain check ending at the level.
pub fn tower_report(t: &Tower) -> Result<Vec<LevelReport>, RenormError> {
    let levels = t.levels();
    let chains = verify_chains(levels)?;
    let mut out = Vec::new();
    for (k, level) in levels.iter().enumerate() {
        let mut checks = containment_checks(level)?;
        if k > 0 {
            checks.extend(verify_bounds(&levels[k - 1], level)?);
        }
        checks.extend(chains.iter().filter(|c| c.level == level.index).cloned());
        let failed: Vec<BoundCheck> = checks.into_iter().filter(|c| !c.holds).collect();
        let len = level.interval.length();
        out.push(LevelReport {
            index: level.index,
            length_approx: len.to_f64(),
            length_exact: len.to_string(),
            beta_sign: if level.beta.is_positive() { "+" } else { "-" }.into(),
            beta_exact: level.beta.to_string(),
            beta_cf: level.beta_abs.to_string(),
            n_half: level.n_half,
            word_lengths: [
                level.f_plus.length().to_string(),
                level.f_minus.length().to_string(),
                level.f_zero.length().to_string(),
            ],
            bounds: prefix_bounds(level)?,
            bounds_pass: failed.is_empty(),
            failed,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circle::birkhoff;
    use crate::words::Sign::{Minus as M, Plus as P};

    fn cf(s: &str) -> CFNumber {
        s.parse().unwrap()
    }

    fn surd(p: i64, q: i64, r: i64, d: u64) -> SurdReal {
        SurdReal::new(p.into(), q.into(), r.into(), d).unwrap()
    }

    #[test]
    fn base_level_validation() {
        let words = WordInterner::new();
        let l = base_level(&cf("[0;5,(6)]"), &words).unwrap();
        assert_eq!(l.n_half(), 2);
        assert_eq!(l.interval(), &ExactInterval::unit());
        assert!(l.f_zero().is_empty());
        let err = base_level(&cf("[0;4,(6)]"), &words).unwrap_err();
        assert!(err.to_string().contains("a_1 = 4"), "{err}");
        let err = base_level(&cf("[0;5,7,(6)]"), &words).unwrap_err();
        assert!(err.to_string().contains("a_2 = 7"), "{err}");
        let err = base_level(&cf("[0;3,(6)]"), &words).unwrap_err();
        assert!(err.to_string().contains("a_1 = 3"), "{err}");
        assert!(base_level(&cf("[0;5,(6,4)]"), &words).is_err());
    }

    #[test]
    fn second_level_for_self_similar_alpha() {
        let a = cf("[0;5,(6)]");
        let t = Tower::build(&a, 3).unwrap();
        let l2 = t.level(2).unwrap();
        assert_eq!(l2.interval().length(), surd(-3, 1, 1, 10));
        assert_eq!(l2.beta(), &-a.value());
        assert_eq!(l2.f_minus().expand(100).unwrap(), vec![M, M, M, P, P]);
        assert_eq!(l2.f_plus().expand(100).unwrap(), vec![P, M, M, P, P]);
        let totals: Vec<i64> = [l2.f_plus(), l2.f_minus(), l2.f_zero()]
            .iter()
            .map(|w| w.total().to_i64().unwrap())
            .collect();
        assert_eq!(totals, vec![1, -1, 0]);
        let l3 = t.level(3).unwrap();
        assert_eq!(l3.beta(), a.value());
        assert_eq!(l3.f_plus().total(), &BigInt::one());
        let gamma = a.value().clone();
        let g = gauss_step(&gamma).unwrap();
        assert_eq!(
            l3.interval().length(),
            &(&gamma * &(SurdReal::one() - &g)) * &l2.interval().length()
        );
    }

    #[test]
    fn wrong_sign_and_coefficients_rejected() {
        let mut words = WordInterner::new();
        let l1 = base_level(&cf("[0;5,(6)]"), &words).unwrap();
        assert!(matches!(
            step_negative(&l1, &mut words),
            Err(RenormError::WrongSign { .. })
        ));
        let l2 = step_positive(&l1, &mut words).unwrap();
        assert!(step_positive(&l2, &mut words).is_err());
    }

    #[test]
    fn signs_alternate_and_words_grow() {
        let t = Tower::build(&cf("[0;5,(6)]"), 20).unwrap();
        for (k, l) in t.levels().iter().enumerate() {
            assert_eq!(l.beta().is_positive(), k % 2 == 0);
            assert!(l.beta().abs() < SurdReal::from_ratio(1, 5).unwrap());
            if k > 0 {
                assert!(l.f_minus().length() > t.levels()[k - 1].f_minus().length());
            }
        }
        let t = Tower::build(&cf("[0;7,(8)]"), 5).unwrap();
        for l in t.levels() {
            check_totals(l).unwrap();
        }
    }

    #[test]
    fn first_bounds_example() {
        let t = Tower::build(&cf("[0;5,(6)]"), 2).unwrap();
        let c = prefix_bounds(t.level(2).unwrap()).unwrap();
        assert_eq!(c.min_minus, -3);
        let checks = verify_bounds(t.level(1).unwrap(), t.level(2).unwrap()).unwrap();
        assert!(checks.iter().all(|c| c.holds));
    }

    #[test]
    fn oracle_examples() {
        let a = cf("[0;5,(6)]");
        let t = Tower::build(&a, 3).unwrap();
        let l1 = t.level(1).unwrap();
        let x = CirclePoint::from_ratio(3, 10).unwrap();
        let r = oracle_first_return(l1, &x, &a).unwrap();
        assert_eq!((r.time, r.word.clone()), (1, vec![P]));
        let l2 = t.level(2).unwrap();
        let h = CirclePoint::half();
        let r = oracle_first_return(l2, &h, &a).unwrap();
        assert_eq!(r.time, 5);
        assert_eq!(r.word, vec![M, M, M, P, P]);
        assert_eq!(predicted_landing(l2, &h).unwrap(), r.landing);
        assert_eq!(
            predicted_return_word(l2, &h).unwrap().expand(10).unwrap(),
            r.word
        );
        assert!(matches!(
            oracle_first_return(l2, &CirclePoint::from_ratio(1, 10).unwrap(), &a),
            Err(RenormError::NotInInterval { .. })
        ));
    }

    #[test]
    fn case_boundaries_rejected() {
        let a = cf("[0;5,(6)]");
        let t = Tower::build(&a, 2).unwrap();
        let l2 = t.level(2).unwrap();
        let gamma = -l2.beta();
        let x = CirclePoint::new(l2.interval().global(&gamma)).unwrap();
        assert!(matches!(
            return_case(l2, &x),
            Err(RenormError::CaseBoundary { .. })
        ));
        // just left of 1/2 in an even level
        let x = CirclePoint::new(SurdReal::half() - SurdReal::from_ratio(1, 1_000_000).unwrap())
            .unwrap();
        assert_eq!(return_case(l2, &x).unwrap(), ReturnCase::Plus);
    }

    #[test]
    fn fast_birkhoff_small() {
        let a = cf("[0;5,(6)]");
        assert_eq!(fast_birkhoff(&a, 0, DepthHint::Auto).unwrap(), 0);
        assert_eq!(fast_birkhoff(&a, 1, DepthHint::Auto).unwrap(), -1);
        assert_eq!(fast_birkhoff(&a, 4, DepthHint::Auto).unwrap(), -2);
        assert!(matches!(
            fast_birkhoff(&a, 1000, DepthHint::Fixed(2)),
            Err(RenormError::DepthExhausted { .. })
        ));
        let mut t = Tower::new(&a).unwrap();
        let h = CirclePoint::half();
        for n in 0..300u64 {
            let s = t.half_birkhoff_extending(&BigUint::from(n)).unwrap();
            assert_eq!(s, BigInt::from(birkhoff(&h, &a, n as i64)), "n={n}");
        }
    }

    #[test]
    fn small_oracle_run() {
        let t = Tower::build(&cf("[0;5,(6)]"), 4).unwrap();
        for i in 1..=4 {
            for r in validate_level(&t, i, 8, 7).unwrap() {
                assert!(r.passed(), "{r:?}");
            }
        }
    }

    #[test]
    fn report_serializes() {
        let t = Tower::build(&cf("[0;5,(6)]"), 6).unwrap();
        let rep = tower_report(&t).unwrap();
        assert!(
            rep.iter().all(|l| l.bounds_pass),
            "{:?}",
            rep.iter()
                .flat_map(|l| l.failed.clone())
                .collect::<Vec<_>>()
        );
        let json = serde_json::to_string(&rep).unwrap();
        let back: Vec<LevelReport> = serde_json::from_str(&json).unwrap();
        assert_eq!(back, rep);
    }
}
