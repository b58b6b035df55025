//! Leaves of the foliated chain of unit squares `R_j`, `j ∈ Z`.
//!
//! A leaf runs up a vertical segment at `x` in `R_j`, turns over the top to
//! the down-going segment at `b(x) = 1 - t(x)`, and leaves through the bottom
//! into `R_{j ± 1}` (up when `b > 1/2`), re-entering upward at `1 - b`. The
//! tracer only uses this geometry; levels are never taken from Birkhoff sums.

use std::fmt;

use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::circle::CirclePoint;
use crate::exactreal::{CFNumber, SurdReal};
use crate::renorm::{RenormError, Tower};
use crate::words::{self, SignWord, WordError};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FoliationError {
    #[error("x = {0} sits on the turn boundary 1 - alpha")]
    TurnBoundary(String),
    #[error("leaf meets the singular coordinate 1/2 at step {step}")]
    Singular { step: i64 },
    #[error("seed 1/2 is singular; trace the rays from it instead")]
    SingularSeed,
    #[error("seed 0 puts the leaf on the edge of the square")]
    EdgeSeed,
    #[error("example needs m >= 2, got {0}")]
    ExampleParameter(i64),
    #[error("m = {m}, k = {k}: {formula} gives {expected}, word statistics give {actual}")]
    FormulaMismatch {
        m: i64,
        k: usize,
        formula: String,
        expected: i64,
        actual: i64,
    },
    #[error(transparent)]
    Renorm(#[from] RenormError),
    #[error(transparent)]
    Word(#[from] WordError),
}

/// Direction of travel along the vertical segment.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Up,
    Down,
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::Up => "up",
            Direction::Down => "down",
        })
    }
}

/// Position on a leaf: a vertical segment at `x` in `R_j`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LeafState {
    pub x: CirclePoint,
    pub j: i64,
    pub dir: Direction,
}

/// One rectangle visit: the up-going segment at `x` in `R_level`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LeafEntry {
    pub n: i64,
    pub x: CirclePoint,
    pub level: i64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LeafSeed {
    /// The ray `r_i` leaving the singularity `(1/2, 0, i)` upwards.
    Ray { i: i64 },
    /// The leaf whose down-going segment at `1 - x0` lies in `R_{j0}`.
    Through { x0: String, j0: i64 },
}

impl fmt::Display for LeafSeed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LeafSeed::Ray { i } => write!(f, "ray {i}"),
            LeafSeed::Through { x0, j0 } => write!(f, "through ({x0}, {j0})"),
        }
    }
}

/// A traced leaf. Forward traces list entries `n = 1, 2, ...`; backward
/// traces list `n = 0, -1, ...`, traversing each segment downwards.
///
/// Entry `n` is the up-going segment at `t^{n-1}(x0)` in `R_{j0 + S_n(x0)}`
/// (for rays, `x0 = 1/2` and `j0 = i + 1`).
#[derive(Clone, Debug)]
pub struct LeafTrace {
    pub seed: LeafSeed,
    pub alpha: CFNumber,
    pub direction: Direction,
    pub entries: Vec<LeafEntry>,
}

impl LeafTrace {
    pub fn min_level(&self) -> Option<i64> {
        self.entries.iter().map(|e| e.level).min()
    }

    pub fn max_level(&self) -> Option<i64> {
        self.entries.iter().map(|e| e.level).max()
    }

    /// Distinct levels, sorted.
    pub fn levels_visited(&self) -> Vec<i64> {
        let mut v: Vec<i64> = self.entries.iter().map(|e| e.level).collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    /// Re-derives every level from the geometric sign of the segment
    /// between consecutive entries.
    pub fn levels_consistent(&self) -> bool {
        self.entries.windows(2).all(|w| {
            let (a, b) = match self.direction {
                Direction::Up => (&w[0], &w[1]),
                Direction::Down => (&w[1], &w[0]),
            };
            // leaving `a` down through b(a.x) = 1 - b.x
            let step = if *b.x.position() < SurdReal::half() {
                1
            } else {
                -1
            };
            b.level == a.level + step && b.n == a.n + 1
        })
    }

    /// Entries as leaf states, in the direction of travel.
    pub fn states(&self) -> impl Iterator<Item = LeafState> + '_ {
        self.entries.iter().map(|e| LeafState {
            x: e.x.clone(),
            j: e.level,
            dir: self.direction,
        })
    }

    pub fn summary(&self) -> TraceSummary {
        TraceSummary {
            seed: self.seed.to_string(),
            alpha: self.alpha.to_string(),
            direction: self.direction,
            steps: self.entries.len() as u64,
            min_level: self.min_level(),
            max_level: self.max_level(),
            levels_visited: self.levels_visited(),
        }
    }

    /// `n,x_approx,level,dir` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,x_approx,level,dir\n");
        for e in &self.entries {
            out.push_str(&format!(
                "{},{:.15},{},{}\n",
                e.n,
                e.x.to_f64(),
                e.level,
                self.direction
            ));
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceSummary {
    pub seed: String,
    pub alpha: String,
    pub direction: Direction,
    #[serde(rename = "N")]
    pub steps: u64,
    pub min_level: Option<i64>,
    pub max_level: Option<i64>,
    pub levels_visited: Vec<i64>,
}

/// The turn over the top of a square: `1 - alpha - x` below `1 - alpha`,
/// `2 - alpha - x` above.
pub fn leaf_turn(x: &CirclePoint, alpha: &CFNumber) -> Result<CirclePoint, FoliationError> {
    Turns::new(alpha).turn(x)
}

struct Turns {
    one_minus_alpha: SurdReal,
    two_minus_alpha: SurdReal,
    alpha: SurdReal,
    half: SurdReal,
    one: SurdReal,
}

impl Turns {
    fn new(alpha: &CFNumber) -> Self {
        let a = alpha.value().clone();
        Self {
            one_minus_alpha: SurdReal::one() - &a,
            two_minus_alpha: SurdReal::from_integer(2) - &a,
            alpha: a,
            half: SurdReal::half(),
            one: SurdReal::one(),
        }
    }

    fn turn(&self, x: &CirclePoint) -> Result<CirclePoint, FoliationError> {
        let x = x.position();
        let b = match x.cmp(&self.one_minus_alpha) {
            std::cmp::Ordering::Less => &self.one_minus_alpha - x,
            std::cmp::Ordering::Greater => &self.two_minus_alpha - x,
            std::cmp::Ordering::Equal => return Err(FoliationError::TurnBoundary(x.to_string())),
        };
        Ok(CirclePoint::new(b).expect("turn lands in (0, 1)"))
    }

    // inverse of `turn`: the up-going x whose turn is b
    fn unturn(&self, b: &CirclePoint) -> CirclePoint {
        let y = &self.one - b.position();
        if y >= self.alpha {
            CirclePoint::new(&y - &self.alpha).expect("in [0, 1)")
        } else {
            CirclePoint::new(&(&y + &self.one) - &self.alpha).expect("in [0, 1)")
        }
    }

    // Leaves the bottom of R_j on the down-going segment at b.
    fn descend(
        &self,
        b: &CirclePoint,
        j: i64,
        step: i64,
    ) -> Result<(CirclePoint, i64), FoliationError> {
        let j_next = match b.position().cmp(&self.half) {
            std::cmp::Ordering::Greater => j + 1,
            std::cmp::Ordering::Less => j - 1,
            std::cmp::Ordering::Equal => return Err(FoliationError::Singular { step }),
        };
        let x = CirclePoint::new(&self.one - b.position()).expect("b in (0, 1)");
        Ok((x, j_next))
    }
}

fn trace_forward(
    turns: &Turns,
    mut x: CirclePoint,
    mut level: i64,
    steps: u64,
) -> Result<Vec<LeafEntry>, FoliationError> {
    let mut out = Vec::with_capacity(steps as usize);
    for n in 1..=steps as i64 {
        out.push(LeafEntry {
            n,
            x: x.clone(),
            level,
        });
        if n == steps as i64 {
            break;
        }
        let b = turns.turn(&x)?;
        let (nx, nl) = turns.descend(&b, level, n + 1)?;
        x = nx;
        level = nl;
    }
    Ok(out)
}

/// The ray `r_i`: `N` rectangle entries starting from `(1/2, R_i)`.
pub fn trace_ray(i: i64, steps: u64, alpha: &CFNumber) -> Result<LeafTrace, FoliationError> {
    let turns = Turns::new(alpha);
    let entries = trace_forward(&turns, CirclePoint::half(), i, steps)?;
    Ok(LeafTrace {
        seed: LeafSeed::Ray { i },
        alpha: alpha.clone(),
        direction: Direction::Up,
        entries,
    })
}

/// The leaf through the skew point `(x0, j0)`, i.e. through the down-going
/// segment at `1 - x0` in `R_{j0}`, traced `N` entries forward
/// (`n = 1..=N`) or backward (`n = 0, -1, ..., 1 - N`).
pub fn trace_leaf_through(
    x0: &CirclePoint,
    j0: i64,
    steps: u64,
    backward: bool,
    alpha: &CFNumber,
) -> Result<LeafTrace, FoliationError> {
    if *x0 == CirclePoint::half() {
        return Err(FoliationError::SingularSeed);
    }
    let turns = Turns::new(alpha);
    let seed = LeafSeed::Through {
        x0: x0.position().to_string(),
        j0,
    };
    let down =
        CirclePoint::new(SurdReal::one() - x0.position()).map_err(|_| FoliationError::EdgeSeed)?;
    if !backward {
        let (x, level) = turns.descend(&down, j0, 1)?;
        let entries = trace_forward(&turns, x, level, steps)?;
        return Ok(LeafTrace {
            seed,
            alpha: alpha.clone(),
            direction: Direction::Up,
            entries,
        });
    }
    // entry 0 shares R_{j0} with the down-going segment above it
    let mut x = turns.unturn(&down);
    let mut level = j0;
    let mut entries = Vec::with_capacity(steps as usize);
    for k in 0..steps as i64 {
        let n = -k;
        entries.push(LeafEntry {
            n,
            x: x.clone(),
            level,
        });
        if k + 1 == steps as i64 {
            break;
        }
        // back out through the bottom, then back over the top
        let b = CirclePoint::new(SurdReal::one() - x.position())
            .map_err(|_| FoliationError::Singular { step: n })?;
        level -= match b.position().cmp(&turns.half) {
            std::cmp::Ordering::Greater => 1,
            std::cmp::Ordering::Less => -1,
            std::cmp::Ordering::Equal => return Err(FoliationError::Singular { step: n }),
        };
        x = turns.unturn(&b);
    }
    Ok(LeafTrace {
        seed,
        alpha: alpha.clone(),
        direction: Direction::Down,
        entries,
    })
}

/// `[0; 2m+1, (2m+2)]`.
pub fn example_alpha(m: i64) -> Result<CFNumber, FoliationError> {
    if m < 2 {
        return Err(FoliationError::ExampleParameter(m));
    }
    let m = m as u64;
    Ok(CFNumber::new(vec![2 * m + 1], vec![2 * m + 2]).expect("valid coefficients"))
}

/// `(1 + alpha)/2`, whose leaf stays at non-positive levels.
pub fn example_point(m: i64) -> Result<CirclePoint, FoliationError> {
    let a = example_alpha(m)?;
    Ok(
        CirclePoint::new((SurdReal::one() + a.value()) / SurdReal::from_integer(2))
            .expect("in (1/2, 1)"),
    )
}

/// One formula evaluated against word statistics.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FormulaCheck {
    pub k: usize,
    pub formula: String,
    pub expected: i64,
    pub actual: i64,
}

impl FormulaCheck {
    pub fn holds(&self) -> bool {
        self.expected == self.actual
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExampleReport {
    pub m: i64,
    pub k_max: usize,
    pub alpha: String,
    pub checks: Vec<FormulaCheck>,
    /// Number of bracketed blocks in the symbolic orbit word.
    pub blocks: usize,
    pub word_length: String,
    /// Max prefix sum of the symbolic word after each block.
    pub block_maxima: Vec<i64>,
}

impl ExampleReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(FormulaCheck::holds) && self.block_maxima.iter().all(|&v| v == -1)
    }

    pub fn first_failure(&self) -> Option<FoliationError> {
        self.checks
            .iter()
            .find(|c| !c.holds())
            .map(|c| FoliationError::FormulaMismatch {
                m: self.m,
                k: c.k,
                formula: c.formula.clone(),
                expected: c.expected,
                actual: c.actual,
            })
    }
}

/// The f-value word of the orbit of `(1+alpha)/2` through `blocks` brackets
/// `(F_-^{2j-1})^{m+1} F_0^{2j-1} (F_+^{2j-1})^m (F_-^{2j})^m`.
///
/// The `F_0` factor comes from the last of the `m + 1` returns to `I_{2j-1}`,
/// which starts at local coordinate `1/2 + (m + 1/2) beta >= 1 - beta`; it is
/// empty for `j = 1`.
pub fn example_orbit_word(
    tower: &Tower,
    m: i64,
    blocks: usize,
) -> Result<SignWord, FoliationError> {
    let m = m as u64;
    let mut parts = Vec::new();
    for j in 1..=blocks {
        let odd = tower.level(2 * j - 1).expect("tower deep enough");
        let even = tower.level(2 * j).expect("tower deep enough");
        parts.push(words::power(odd.f_minus(), m + 1)?);
        parts.push(odd.f_zero().clone());
        parts.push(words::power(odd.f_plus(), m)?);
        parts.push(words::power(even.f_minus(), m)?);
    }
    Ok(words::concat_all(parts.iter()))
}

/// Evaluates the recursions and closed forms for the maxima `M_±^i`,
/// `M_0^i` for `k <= k_max`, and the running maximum of the symbolic orbit
/// word block by block.
pub fn example_m_report(m: i64, k_max: usize) -> Result<ExampleReport, FoliationError> {
    let alpha = example_alpha(m)?;
    let tower = Tower::build(&alpha, 2 * k_max + 1)?;
    let max = |i: usize, which: char| -> Result<i64, FoliationError> {
        let l = tower.level(i).expect("built");
        let w = match which {
            '+' => l.f_plus(),
            '-' => l.f_minus(),
            _ => l.f_zero(),
        };
        Ok(w.max_prefix()?.to_i64().expect("small"))
    };
    let mut checks = Vec::new();
    let mut push = |k: usize, formula: String, expected: i64, actual: i64| {
        checks.push(FormulaCheck {
            k,
            formula,
            expected,
            actual,
        })
    };
    for k in 1..=k_max {
        let (e, o, o2) = (2 * k, 2 * k - 1, 2 * k + 1);
        push(k, format!("M_+^{e} = M_+^{o}"), max(o, '+')?, max(e, '+')?);
        push(k, format!("M_-^{e} = M_-^{o}"), max(o, '-')?, max(e, '-')?);
        push(k, format!("M_0^{e} = M_+^{o}"), max(o, '+')?, max(e, '0')?);
        push(
            k,
            format!("M_+^{o2} = M_0^{e} + m + 1"),
            max(e, '0')? + m + 1,
            max(o2, '+')?,
        );
        push(
            k,
            format!("M_-^{o2} = M_0^{e} + m - 1"),
            max(e, '0')? + m - 1,
            max(o2, '-')?,
        );
        push(
            k,
            format!("M_0^{o2} = M_0^{e} + m"),
            max(e, '0')? + m,
            max(o2, '0')?,
        );
        let kk = k as i64;
        let closed = (m + 1) * kk - m;
        if k >= 2 {
            push(k, format!("M_+^{o} = (m+1)k - m"), closed, max(o, '+')?);
            push(
                k,
                format!("M_-^{o} = (m+1)k - m - 2"),
                closed - 2,
                max(o, '-')?,
            );
            push(
                k,
                format!("M_0^{o} = (m+1)k - m - 1"),
                closed - 1,
                max(o, '0')?,
            );
        }
        push(k, format!("M_+^{e} = (m+1)k - m"), closed, max(e, '+')?);
        push(
            k,
            format!("M_-^{e} = (m+1)k - m - 2"),
            closed - 2,
            max(e, '-')?,
        );
        push(k, format!("M_0^{e} = (m+1)k - m"), closed, max(e, '0')?);
    }
    let mut block_maxima = Vec::new();
    let mut word = words::empty();
    for blocks in 1..=k_max {
        word = example_orbit_word(&tower, m, blocks)?;
        block_maxima.push(word.max_prefix()?.to_i64().expect("small"));
    }
    Ok(ExampleReport {
        m,
        k_max,
        alpha: alpha.to_string(),
        checks,
        blocks: k_max,
        word_length: word.length().to_string(),
        block_maxima,
    })
}

/// [`example_m_report`], failing on the first mismatch.
pub fn example_m_formulas(m: i64, k_max: usize) -> Result<ExampleReport, FoliationError> {
    let report = example_m_report(m, k_max)?;
    match report.first_failure() {
        Some(e) => Err(e),
        None => Ok(report),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circle::{birkhoff, rotate};
    use crate::renorm::{oracle_first_return, predicted_return_word};
    use num_bigint::BigUint;

    fn alpha() -> CFNumber {
        "[0;5,(6)]".parse().unwrap()
    }

    #[test]
    fn turn_examples() {
        let a = alpha();
        let x = CirclePoint::from_ratio(3, 10).unwrap();
        let b = leaf_turn(&x, &a).unwrap();
        assert_eq!(b.position(), &(SurdReal::one() - x.position() - a.value()));
        assert!((b.to_f64() - 0.506_287_056_6).abs() < 1e-9);
        let x = CirclePoint::from_ratio(9, 10).unwrap();
        let b = leaf_turn(&x, &a).unwrap();
        assert!((b.to_f64() - 0.906_287_056_6).abs() < 1e-9);
        let edge = CirclePoint::new(SurdReal::one() - a.value()).unwrap();
        assert!(matches!(
            leaf_turn(&edge, &a),
            Err(FoliationError::TurnBoundary(_))
        ));
        for k in 0..200 {
            let x = CirclePoint::from_ratio(k, 200).unwrap();
            let expect = SurdReal::one() - rotate(&x, &a, 1).position();
            assert_eq!(leaf_turn(&x, &a).unwrap().position(), &expect);
        }
    }

    #[test]
    fn ray_entries() {
        let a = alpha();
        let h = CirclePoint::half();
        for i in [-1, 0, 2] {
            let t = trace_ray(i, 60, &a).unwrap();
            assert_eq!(t.entries[0].x, h);
            assert_eq!(t.entries[0].level, i);
            for e in &t.entries {
                assert_eq!(e.x, rotate(&h, &a, e.n - 1));
                assert_eq!(e.level, i + 1 + birkhoff(&h, &a, e.n));
            }
            assert!(t.levels_consistent());
        }
        let t = trace_ray(0, 4, &a).unwrap();
        assert_eq!(t.entries[3].level, -1);
        assert!((t.entries[3].x.to_f64() - 0.081_138_830).abs() < 1e-9);
    }

    #[test]
    fn through_leaf_both_ways() {
        let a = alpha();
        let x0 = example_point(2).unwrap();
        let fwd = trace_leaf_through(&x0, 0, 400, false, &a).unwrap();
        let back = trace_leaf_through(&x0, 0, 400, true, &a).unwrap();
        assert!(fwd.levels_consistent() && back.levels_consistent());
        for e in fwd.entries.iter().chain(&back.entries) {
            assert_eq!(e.x, rotate(&x0, &a, e.n - 1), "n={}", e.n);
            assert_eq!(e.level, birkhoff(&x0, &a, e.n), "n={}", e.n);
        }
        assert_eq!(fwd.max_level(), Some(-1));
        assert!(back.max_level().unwrap() <= 0);
        let shifted = trace_leaf_through(&x0, 3, 400, false, &a).unwrap();
        for (p, q) in fwd.entries.iter().zip(&shifted.entries) {
            assert_eq!(q.level, p.level + 3);
        }
        assert!(matches!(
            trace_leaf_through(&CirclePoint::half(), 0, 5, false, &a),
            Err(FoliationError::SingularSeed)
        ));
    }

    #[test]
    fn leaf_returns_match_tower() {
        let a = alpha();
        let tower = Tower::build(&a, 5).unwrap();
        let l5 = tower.level(5).unwrap();
        let eps = SurdReal::from_ratio(1, 1 << 20).unwrap();
        let x0 = CirclePoint::new(SurdReal::half() + eps).unwrap();
        assert!(l5.interval().contains(x0.position()));
        let rec = oracle_first_return(l5, &x0, &a).unwrap();
        let trace = trace_leaf_through(&x0, 0, rec.time + 2, false, &a).unwrap();
        // first entry after the start that is back in I_5
        let back = trace.entries[1..]
            .iter()
            .find(|e| l5.interval().contains(e.x.position()))
            .unwrap();
        assert_eq!((back.n - 1) as u64, rec.time);
        let word = predicted_return_word(l5, &x0).unwrap();
        let total = word.prefix_sum_at(&BigUint::from(rec.time)).unwrap();
        assert_eq!(
            BigInt::from(trace.entries[rec.time as usize - 1].level),
            total
        );
    }

    use num_bigint::BigInt;

    #[test]
    fn example_small_cases() {
        let r = example_m_formulas(2, 4).unwrap();
        assert!(r.passed(), "{r:?}");
        let a = example_alpha(2).unwrap();
        assert_eq!(a, alpha());
        let t = Tower::build(&a, 2).unwrap();
        let l2 = t.level(2).unwrap();
        assert_eq!(l2.f_plus().max_prefix().unwrap(), &BigInt::from(1));
        assert_eq!(l2.f_minus().max_prefix().unwrap(), &BigInt::from(-1));
        assert_eq!(l2.f_zero().max_prefix().unwrap(), &BigInt::from(1));
        assert!(example_m_formulas(3, 8).unwrap().passed());
        assert!(matches!(
            example_alpha(1),
            Err(FoliationError::ExampleParameter(1))
        ));
    }

    #[test]
    fn example_word_is_the_orbit() {
        for m in [2, 3] {
            let a = example_alpha(m).unwrap();
            let x = example_point(m).unwrap();
            let t = Tower::build(&a, 6).unwrap();
            let w = example_orbit_word(&t, m, 3).unwrap();
            let mut scan =
                crate::circle::BirkhoffScan::new(&x, &a, crate::circle::Precision::ExactOnly);
            scan.next();
            let len = w.length().to_u64().unwrap().min(30_000);
            for n in 1..=len {
                let s = scan.next().unwrap().sum;
                assert_eq!(
                    w.prefix_sum_at_u64(n).unwrap(),
                    BigInt::from(s),
                    "m={m} n={n}"
                );
            }
        }
    }
}
