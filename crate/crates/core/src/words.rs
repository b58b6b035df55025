//! Immutable sign words over `{+1, -1}` stored as a DAG of atoms,
//! concatenations and powers.
//!
//! Every node carries its length, total, and the extrema of its nonempty
//! prefix sums, computed at construction from the children's statistics.
//! Words whose explicit length exceeds any machine integer are therefore
//! handled in time proportional to the DAG depth.

use std::collections::HashMap;
use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum WordError {
    #[error("power exponent must be at least 1 (use the empty word instead)")]
    ZeroExponent,
    #[error("word of length {length} exceeds expansion cap {cap}")]
    TooLong { length: BigUint, cap: usize },
    #[error("prefix index {index} outside 1..={length}")]
    IndexOutOfRange { index: BigUint, length: BigUint },
    #[error("the empty word has no prefix extrema")]
    EmptyExtrema,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> i64 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }

    pub fn from_value(v: i64) -> Option<Self> {
        match v {
            1 => Some(Sign::Plus),
            -1 => Some(Sign::Minus),
            _ => None,
        }
    }

    fn symbol(self) -> char {
        match self {
            Sign::Plus => '+',
            Sign::Minus => '-',
        }
    }
}

/// Length, total and prefix-sum extrema of a word.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WordStats {
    pub length: BigUint,
    pub total: BigInt,
    /// `(min, max)` over prefix sums of length `>= 1`; `None` when empty.
    pub extrema: Option<(BigInt, BigInt)>,
}

impl WordStats {
    fn empty() -> Self {
        Self {
            length: BigUint::zero(),
            total: BigInt::zero(),
            extrema: None,
        }
    }

    fn atom(s: Sign) -> Self {
        let v = BigInt::from(s.value());
        Self {
            length: BigUint::one(),
            total: v.clone(),
            extrema: Some((v.clone(), v)),
        }
    }

    fn concat(a: &Self, b: &Self) -> Self {
        let extrema = match (&a.extrema, &b.extrema) {
            (None, None) => None,
            (Some(x), None) => Some(x.clone()),
            (None, Some((lo, hi))) => Some((&a.total + lo, &a.total + hi)),
            (Some((alo, ahi)), Some((blo, bhi))) => Some((
                alo.clone().min(&a.total + blo),
                ahi.clone().max(&a.total + bhi),
            )),
        };
        Self {
            length: &a.length + &b.length,
            total: &a.total + &b.total,
            extrema,
        }
    }

    fn power(a: &Self, n: &BigUint) -> Self {
        let n_int = BigInt::from(n.clone());
        let drift: BigInt = (&n_int - BigInt::one()) * &a.total;
        let zero = BigInt::zero();
        Self {
            length: &a.length * n,
            total: &a.total * &n_int,
            extrema: a.extrema.as_ref().map(|(lo, hi): &(BigInt, BigInt)| {
                let down: BigInt = drift.clone().min(zero.clone());
                let up: BigInt = drift.clone().max(zero);
                (lo + down, hi + up)
            }),
        }
    }
}

/// Node shape of a [`SignWord`].
#[derive(Clone)]
pub enum WordKind {
    Empty,
    Atom(Sign),
    Concat(SignWord, SignWord),
    Power(SignWord, u64),
}

struct Node {
    id: u64,
    kind: WordKind,
    stats: WordStats,
}

static NEXT_ID: AtomicU64 = AtomicU64::new(0);

/// A shared, immutable sign word.
#[derive(Clone)]
pub struct SignWord(Arc<Node>);

impl SignWord {
    fn make(kind: WordKind, stats: WordStats) -> Self {
        let id = NEXT_ID.fetch_add(1, Ordering::Relaxed);
        Self(Arc::new(Node { id, kind, stats }))
    }

    pub fn id(&self) -> u64 {
        self.0.id
    }

    pub fn kind(&self) -> &WordKind {
        &self.0.kind
    }

    pub fn stats(&self) -> &WordStats {
        &self.0.stats
    }

    pub fn length(&self) -> &BigUint {
        &self.0.stats.length
    }

    pub fn total(&self) -> &BigInt {
        &self.0.stats.total
    }

    pub fn is_empty(&self) -> bool {
        self.length().is_zero()
    }

    pub fn max_prefix(&self) -> Result<&BigInt, WordError> {
        self.0
            .stats
            .extrema
            .as_ref()
            .map(|e| &e.1)
            .ok_or(WordError::EmptyExtrema)
    }

    pub fn min_prefix(&self) -> Result<&BigInt, WordError> {
        self.0
            .stats
            .extrema
            .as_ref()
            .map(|e| &e.0)
            .ok_or(WordError::EmptyExtrema)
    }

    pub fn ptr_eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
    }

    fn check_index(&self, k: &BigUint) -> Result<(), WordError> {
        if k.is_zero() || k > self.length() {
            return Err(WordError::IndexOutOfRange {
                index: k.clone(),
                length: self.length().clone(),
            });
        }
        Ok(())
    }

    /// Sum of the first `k` letters, `1 <= k <= length`, by descending the DAG.
    pub fn prefix_sum_at(&self, k: &BigUint) -> Result<BigInt, WordError> {
        self.check_index(k)?;
        let mut node = self.clone();
        let mut k = k.clone();
        let mut offset = BigInt::zero();
        loop {
            if &k == node.length() {
                return Ok(offset + node.total());
            }
            let next = match node.kind() {
                WordKind::Atom(s) => return Ok(offset + s.value()),
                WordKind::Empty => unreachable!("index checked against length"),
                WordKind::Concat(l, r) => {
                    if &k <= l.length() {
                        l.clone()
                    } else {
                        k -= l.length();
                        offset += l.total();
                        r.clone()
                    }
                }
                WordKind::Power(b, _) => {
                    let (full, rem) = (&k - 1u32).div_rem(b.length());
                    offset += BigInt::from(full) * b.total();
                    k = rem + 1u32;
                    b.clone()
                }
            };
            node = next;
        }
    }

    pub fn prefix_sum_at_u64(&self, k: u64) -> Result<BigInt, WordError> {
        self.prefix_sum_at(&BigUint::from(k))
    }

    /// The `k`-th letter, 1-based.
    pub fn letter_at(&self, k: &BigUint) -> Result<Sign, WordError> {
        let here = self.prefix_sum_at(k)?;
        let before = if k.is_one() {
            BigInt::zero()
        } else {
            self.prefix_sum_at(&(k - 1u32))?
        };
        let d = (here - before).to_i64().expect("letters are +-1");
        Ok(Sign::from_value(d).expect("letters are +-1"))
    }

    /// `(min, max)` of the prefix sums at indices `1..=k`.
    pub fn prefix_extrema_upto(&self, k: &BigUint) -> Result<(BigInt, BigInt), WordError> {
        self.check_index(k)?;
        Ok(extrema_upto(self, k))
    }

    /// Explicit letters, refusing words longer than `cap`.
    pub fn expand(&self, cap: usize) -> Result<Vec<Sign>, WordError> {
        if self.length() > &BigUint::from(cap) {
            return Err(WordError::TooLong {
                length: self.length().clone(),
                cap,
            });
        }
        let mut out = Vec::with_capacity(self.length().to_usize().unwrap_or(0));
        let mut stack = vec![self.clone()];
        while let Some(w) = stack.pop() {
            match w.kind() {
                WordKind::Empty => {}
                WordKind::Atom(s) => out.push(*s),
                WordKind::Concat(l, r) => {
                    stack.push(r.clone());
                    stack.push(l.clone());
                }
                WordKind::Power(b, n) => {
                    for _ in 0..*n {
                        stack.push(b.clone());
                    }
                }
            }
        }
        Ok(out)
    }
}

fn combine(a: (BigInt, BigInt), b: (BigInt, BigInt)) -> (BigInt, BigInt) {
    (a.0.min(b.0), a.1.max(b.1))
}

// Caller guarantees 1 <= k <= length.
fn extrema_upto(w: &SignWord, k: &BigUint) -> (BigInt, BigInt) {
    if k == w.length() {
        return w.stats().extrema.clone().expect("nonempty");
    }
    match w.kind() {
        WordKind::Empty => unreachable!("index checked against length"),
        WordKind::Atom(s) => (BigInt::from(s.value()), BigInt::from(s.value())),
        WordKind::Concat(l, r) => {
            if k <= l.length() {
                extrema_upto(l, k)
            } else {
                let tail = extrema_upto(r, &(k - l.length()));
                let head = l.stats().extrema.clone();
                let shifted = (tail.0 + l.total(), tail.1 + l.total());
                match head {
                    Some(h) => combine(h, shifted),
                    None => shifted,
                }
            }
        }
        WordKind::Power(b, _) => {
            let (full, rem) = (k - 1u32).div_rem(b.length());
            let rem = rem + 1u32;
            let partial = extrema_upto(b, &rem);
            if full.is_zero() {
                return partial;
            }
            let head = WordStats::power(b.stats(), &full);
            let offset = &head.total;
            let shifted = (partial.0 + offset, partial.1 + offset);
            combine(head.extrema.expect("nonempty base"), shifted)
        }
    }
}

pub fn empty() -> SignWord {
    SignWord::make(WordKind::Empty, WordStats::empty())
}

pub fn atom(s: Sign) -> SignWord {
    SignWord::make(WordKind::Atom(s), WordStats::atom(s))
}

pub fn concat(a: &SignWord, b: &SignWord) -> SignWord {
    let stats = WordStats::concat(a.stats(), b.stats());
    SignWord::make(WordKind::Concat(a.clone(), b.clone()), stats)
}

pub fn power(a: &SignWord, n: u64) -> Result<SignWord, WordError> {
    if n == 0 {
        return Err(WordError::ZeroExponent);
    }
    let stats = WordStats::power(a.stats(), &BigUint::from(n));
    Ok(SignWord::make(WordKind::Power(a.clone(), n), stats))
}

/// Left-nested concatenation of `parts`; empty input gives the empty word.
pub fn concat_all<'a, I>(parts: I) -> SignWord
where
    I: IntoIterator<Item = &'a SignWord>,
{
    let mut it = parts.into_iter();
    match it.next() {
        None => empty(),
        Some(first) => it.fold(first.clone(), |acc, w| concat(&acc, w)),
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
enum Key {
    Concat(u64, u64),
    Power(u64, u64),
}

/// Hash-consing table: structurally identical nodes built through the same
/// interner are one shared node. Confined to one thread (one tower).
pub struct WordInterner {
    table: HashMap<Key, SignWord>,
    plus: SignWord,
    minus: SignWord,
    empty: SignWord,
}

impl Default for WordInterner {
    fn default() -> Self {
        Self::new()
    }
}

impl WordInterner {
    pub fn new() -> Self {
        Self {
            table: HashMap::new(),
            plus: atom(Sign::Plus),
            minus: atom(Sign::Minus),
            empty: empty(),
        }
    }

    pub fn atom(&self, s: Sign) -> SignWord {
        match s {
            Sign::Plus => self.plus.clone(),
            Sign::Minus => self.minus.clone(),
        }
    }

    pub fn empty(&self) -> SignWord {
        self.empty.clone()
    }

    pub fn concat(&mut self, a: &SignWord, b: &SignWord) -> SignWord {
        self.table
            .entry(Key::Concat(a.id(), b.id()))
            .or_insert_with(|| concat(a, b))
            .clone()
    }

    pub fn power(&mut self, a: &SignWord, n: u64) -> Result<SignWord, WordError> {
        if n == 0 {
            return Err(WordError::ZeroExponent);
        }
        if n == 1 {
            return Ok(a.clone());
        }
        let key = Key::Power(a.id(), n);
        if let Some(w) = self.table.get(&key) {
            return Ok(w.clone());
        }
        let w = power(a, n)?;
        self.table.insert(key, w.clone());
        Ok(w)
    }

    /// Concatenation that drops empty parts; the result is left-nested.
    pub fn concat_all(&mut self, parts: &[&SignWord]) -> SignWord {
        let mut acc: Option<SignWord> = None;
        for w in parts.iter().filter(|w| !w.is_empty()) {
            acc = Some(match acc {
                None => (*w).clone(),
                Some(a) => self.concat(&a, w),
            });
        }
        acc.unwrap_or_else(|| self.empty())
    }

    /// Number of distinct composite nodes.
    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }
}

impl fmt::Display for SignWord {
    /// Nested text such as `(+ (-^3) (+^2))`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind() {
            WordKind::Empty => write!(f, "()"),
            WordKind::Atom(s) => write!(f, "{}", s.symbol()),
            WordKind::Power(b, n) => write!(f, "({b}^{n})"),
            WordKind::Concat(..) => {
                let mut parts = Vec::new();
                flatten(self, &mut parts);
                write!(f, "(")?;
                for (i, p) in parts.iter().enumerate() {
                    if i > 0 {
                        write!(f, " ")?;
                    }
                    write!(f, "{p}")?;
                }
                write!(f, ")")
            }
        }
    }
}

fn flatten(w: &SignWord, out: &mut Vec<SignWord>) {
    match w.kind() {
        WordKind::Concat(l, r) => {
            flatten(l, out);
            flatten(r, out);
        }
        WordKind::Empty => {}
        _ => out.push(w.clone()),
    }
}

impl fmt::Debug for SignWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = self.stats();
        write!(f, "SignWord(len={}, total={}", s.length, s.total)?;
        if let Some((lo, hi)) = &s.extrema {
            write!(f, ", min={lo}, max={hi}")?;
        }
        write!(f, ")")
    }
}
