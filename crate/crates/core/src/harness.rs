//! Reproducible experiments: one config in, one self-describing document
//! out (a JSON header line, a JSON summary line, then CSV rows).

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::circle::{
    max_gap, max_gap_approx, visit_sets, BirkhoffScan, CircleError, CirclePoint, ExactOrbit,
    Precision, ScanStep, VisitSet,
};
use crate::exactreal::{CFNumber, ExactError, SurdReal};
use crate::foliation::{
    example_m_report, example_point, trace_leaf_through, trace_ray, FoliationError, LeafTrace,
};
use crate::renorm::{tower_report, validate_level, RenormError, Tower};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("cannot parse seed expression {expr:?}: {reason}")]
    Seed { expr: String, reason: String },
    #[error("not a rotn output document: {0}")]
    Document(String),
    #[error(transparent)]
    Exact(#[from] ExactError),
    #[error(transparent)]
    Circle(#[from] CircleError),
    #[error(transparent)]
    Renorm(#[from] RenormError),
    #[error(transparent)]
    Foliation(#[from] FoliationError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Where a leaf trace starts.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LeafStart {
    Ray {
        i: i64,
    },
    /// Seed expression in `a` (alpha), e.g. `(1+a)/2`.
    Through {
        x0: String,
        level: i64,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Experiment {
    Tower {
        alpha: String,
        depth: usize,
    },
    Density {
        alpha: String,
        m: i64,
        k: i64,
        #[serde(rename = "N")]
        n: u64,
        /// Optional pass threshold on the final max gap.
        max_gap: Option<f64>,
    },
    Example {
        m: i64,
        k_max: usize,
        #[serde(rename = "N")]
        n: u64,
    },
    Leaf {
        alpha: String,
        start: LeafStart,
        #[serde(rename = "N")]
        n: u64,
        backward: bool,
    },
    HeavyContrast {
        alpha: String,
        #[serde(rename = "N")]
        n: u64,
    },
    Oracle {
        alpha: String,
        depth: usize,
        samples: usize,
        seed: u64,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub precision: Precision,
}

const MAX_STEPS: u64 = 1_000_000_000;
const MAX_DEPTH: usize = 200;

impl ExperimentConfig {
    pub fn new(experiment: Experiment, precision: Precision) -> Self {
        Self {
            experiment,
            precision,
        }
    }

    /// Checks documented parameter ranges and that literals parse.
    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |msg: String| Err(HarnessError::Config(msg));
        let steps = |n: u64| {
            if n > MAX_STEPS {
                bad(format!("N = {n} exceeds {MAX_STEPS}"))
            } else {
                Ok(())
            }
        };
        match &self.experiment {
            Experiment::Tower { alpha, depth } => {
                alpha.parse::<CFNumber>()?;
                if *depth == 0 || *depth > MAX_DEPTH {
                    return bad(format!("depth must be in 1..={MAX_DEPTH}"));
                }
            }
            Experiment::Density {
                alpha, n, max_gap, ..
            } => {
                alpha.parse::<CFNumber>()?;
                steps(*n)?;
                if let Some(g) = max_gap {
                    if !(*g > 0.0 && *g <= 1.0) {
                        return bad(format!("max_gap threshold {g} outside (0, 1]"));
                    }
                }
            }
            Experiment::Example { m, k_max, n } => {
                if *m < 2 {
                    return bad(format!("example needs m >= 2, got {m}"));
                }
                if *k_max == 0 || *k_max > 40 {
                    return bad("k_max must be in 1..=40".into());
                }
                steps(*n)?;
            }
            Experiment::Leaf {
                alpha, start, n, ..
            } => {
                let a = alpha.parse::<CFNumber>()?;
                if let LeafStart::Through { x0, .. } = start {
                    parse_seed(x0, &a)?;
                }
                if *n == 0 {
                    return bad("leaf traces need N >= 1".into());
                }
                steps(*n)?;
            }
            Experiment::HeavyContrast { alpha, n } => {
                alpha.parse::<CFNumber>()?;
                steps(*n)?;
            }
            Experiment::Oracle {
                alpha,
                depth,
                samples,
                ..
            } => {
                alpha.parse::<CFNumber>()?;
                if *depth < 2 || *depth > 12 {
                    return bad("oracle depth must be in 2..=12".into());
                }
                if *samples == 0 || *samples > 1_000_000 {
                    return bad("samples must be in 1..=1000000".into());
                }
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct Header {
    tool: String,
    version: String,
    config: ExperimentConfig,
}

/// Column-named rows, rendered as CSV.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for r in &self.rows {
            out.push_str(&r.join(","));
            out.push('\n');
        }
        out
    }
}

/// Result of one experiment.
#[derive(Clone, Debug, PartialEq)]
pub struct RunOutput {
    pub config: ExperimentConfig,
    pub passed: bool,
    pub summary: Value,
    pub table: Table,
}

impl RunOutput {
    fn header(&self) -> Header {
        Header {
            tool: "rotn".into(),
            version: VERSION.into(),
            config: self.config.clone(),
        }
    }

    /// `# {header}` / `# {summary}` lines followed by the CSV table.
    pub fn to_csv_document(&self) -> String {
        let mut out = String::new();
        let header = serde_json::to_string(&self.header()).expect("serializable");
        let summary = json!({"passed": self.passed, "summary": self.summary});
        writeln!(out, "# {header}").unwrap();
        writeln!(out, "# {summary}").unwrap();
        out.push_str(&self.table.to_csv());
        out
    }

    /// One JSON object with header, summary and table.
    pub fn to_json_document(&self) -> String {
        let doc = json!({
            "header": self.header(),
            "passed": self.passed,
            "summary": self.summary,
            "table": self.table,
        });
        serde_json::to_string_pretty(&doc).expect("serializable") + "\n"
    }

    /// JSON for `.json` paths, CSV document otherwise.
    pub fn write(&self, path: &Path) -> Result<(), HarnessError> {
        let text = if path.extension().is_some_and(|e| e == "json") {
            self.to_json_document()
        } else {
            self.to_csv_document()
        };
        std::fs::write(path, text)?;
        Ok(())
    }
}

/// Recovers the config from either document form.
pub fn read_config(text: &str) -> Result<ExperimentConfig, HarnessError> {
    let header: Header = if let Some(rest) = text.strip_prefix("# ") {
        let line = rest.lines().next().unwrap_or_default();
        serde_json::from_str(line)?
    } else {
        let doc: Value = serde_json::from_str(text)?;
        serde_json::from_value(
            doc.get("header")
                .cloned()
                .ok_or_else(|| HarnessError::Document("missing header".into()))?,
        )?
    };
    if header.tool != "rotn" {
        return Err(HarnessError::Document(format!("tool {:?}", header.tool)));
    }
    Ok(header.config)
}

/// Parses a seed such as `(1+a)/2`, `0.3` or `1/2 + 1/1000` in `Q(sqrt D)`;
/// `a` (or `alpha`) stands for the rotation number. The value must lie in
/// `[0, 1)`.
pub fn parse_seed(expr: &str, alpha: &CFNumber) -> Result<CirclePoint, HarnessError> {
    let err = |reason: &str| HarnessError::Seed {
        expr: expr.to_string(),
        reason: reason.to_string(),
    };
    let mut p = SeedParser {
        chars: expr.chars().filter(|c| !c.is_whitespace()).collect(),
        pos: 0,
        alpha: alpha.value(),
    };
    let v = p.sum().map_err(|r| err(&r))?;
    if p.pos != p.chars.len() {
        return Err(err("trailing input"));
    }
    CirclePoint::new(v).map_err(|_| err("value outside [0, 1)"))
}

struct SeedParser<'a> {
    chars: Vec<char>,
    pos: usize,
    alpha: &'a SurdReal,
}

impl SeedParser<'_> {
    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn sum(&mut self) -> Result<SurdReal, String> {
        let mut acc = self.product()?;
        while let Some(c @ ('+' | '-')) = self.peek() {
            self.pos += 1;
            let rhs = self.product()?;
            acc = if c == '+' { acc + rhs } else { acc - rhs };
        }
        Ok(acc)
    }

    fn product(&mut self) -> Result<SurdReal, String> {
        let mut acc = self.unary()?;
        while let Some(c @ ('*' | '/')) = self.peek() {
            self.pos += 1;
            let rhs = self.unary()?;
            acc = if c == '*' {
                acc * rhs
            } else {
                if rhs.is_zero() {
                    return Err("division by zero".into());
                }
                acc / rhs
            };
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<SurdReal, String> {
        if self.peek() == Some('-') {
            self.pos += 1;
            return Ok(-self.unary()?);
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<SurdReal, String> {
        match self.peek() {
            Some('(') => {
                self.pos += 1;
                let v = self.sum()?;
                if self.peek() != Some(')') {
                    return Err("missing ')'".into());
                }
                self.pos += 1;
                Ok(v)
            }
            Some('a') => {
                let rest: String = self.chars[self.pos..].iter().collect();
                self.pos += if rest.starts_with("alpha") { 5 } else { 1 };
                Ok(self.alpha.clone())
            }
            Some(c) if c.is_ascii_digit() => {
                let start = self.pos;
                while self.peek().is_some_and(|c| c.is_ascii_digit() || c == '.') {
                    self.pos += 1;
                }
                let lit: String = self.chars[start..self.pos].iter().collect();
                decimal(&lit).ok_or_else(|| format!("bad number {lit:?}"))
            }
            Some(c) => Err(format!("unexpected {c:?}")),
            None => Err("unexpected end".into()),
        }
    }
}

// exact value of a decimal literal
fn decimal(lit: &str) -> Option<SurdReal> {
    let (int, frac) = lit.split_once('.').unwrap_or((lit, ""));
    if int.is_empty() || frac.contains('.') {
        return None;
    }
    let digits: num_bigint::BigInt = format!("{int}{frac}").parse().ok()?;
    let den = num_bigint::BigInt::from(10u32).pow(frac.len() as u32);
    SurdReal::from_ratio(digits, den).ok()
}

fn alpha_of(lit: &str) -> Result<CFNumber, HarnessError> {
    Ok(lit.parse()?)
}

/// Runs any experiment.
pub fn run(config: &ExperimentConfig) -> Result<RunOutput, HarnessError> {
    config.validate()?;
    let p = config.precision;
    let (passed, summary, table) = match &config.experiment {
        Experiment::Tower { alpha, depth } => run_tower(&alpha_of(alpha)?, *depth)?,
        Experiment::Density {
            alpha,
            m,
            k,
            n,
            max_gap,
        } => run_density(&alpha_of(alpha)?, *m, *k, *n, *max_gap, p)?,
        Experiment::Example { m, k_max, n } => run_example(*m, *k_max, *n, p)?,
        Experiment::Leaf {
            alpha,
            start,
            n,
            backward,
        } => run_leaf(&alpha_of(alpha)?, start, *n, *backward)?,
        Experiment::HeavyContrast { alpha, n } => run_heavy(&alpha_of(alpha)?, *n, p)?,
        Experiment::Oracle {
            alpha,
            depth,
            samples,
            seed,
        } => run_oracle(&alpha_of(alpha)?, *depth, *samples, *seed)?,
    };
    Ok(RunOutput {
        config: config.clone(),
        passed,
        summary,
        table,
    })
}

type Outcome = (bool, Value, Table);

fn gap_of(set: &VisitSet, upto: usize, precision: Precision) -> Result<Option<f64>, HarnessError> {
    if upto == 0 {
        return Ok(None);
    }
    Ok(Some(match precision {
        Precision::CertifiedFast => max_gap_approx(&set.approx_positions()[..upto])?,
        Precision::ExactOnly => {
            let pts = set.positions();
            max_gap(&pts[..upto])?.to_f64()
        }
    }))
}

/// Visits of `S_n(1/2) = m` for `n <= N`, positions shifted by `k`, with
/// a max-gap table over decades of `N`.
pub fn run_density(
    alpha: &CFNumber,
    m: i64,
    k: i64,
    n: u64,
    threshold: Option<f64>,
    precision: Precision,
) -> Result<Outcome, HarnessError> {
    let half = CirclePoint::half();
    let set = visit_sets(&half, alpha, &[m], n, k, precision)?
        .pop()
        .expect("one target");
    let mut horizons: Vec<u64> = std::iter::successors(Some(10u64), |h| h.checked_mul(10))
        .take_while(|&h| h < n)
        .collect();
    horizons.push(n);
    let mut table = Table::new(&["N", "count", "max_gap"]);
    let mut last_gap = None;
    for &h in &horizons {
        let upto = set.times.partition_point(|&t| t <= h);
        let gap = gap_of(&set, upto, precision)?;
        table.push(vec![
            h.to_string(),
            upto.to_string(),
            gap.map_or("".into(), |g| format!("{g:.12}")),
        ]);
        last_gap = gap;
    }
    let nonempty = set.count() > 0;
    let below = match (threshold, last_gap) {
        (Some(t), Some(g)) => g < t,
        (Some(_), None) => false,
        (None, _) => true,
    };
    let summary = json!({
        "m": m,
        "k": k,
        "N": n,
        "count": set.count(),
        "first_time": set.first_time(),
        "max_gap": last_gap,
        "threshold": threshold,
    });
    Ok((nonempty && below, summary, table))
}

/// Visit-set rows `n,position_approx,S_n`.
pub fn visits_csv(set: &VisitSet) -> String {
    let mut out = String::from("n,position_approx,S_n\n");
    for (t, x) in set.times.iter().zip(set.approx_positions()) {
        writeln!(out, "{t},{x:.15},{}", set.m).unwrap();
    }
    out
}

/// Tower report with all bound and chain checks.
pub fn run_tower(alpha: &CFNumber, depth: usize) -> Result<Outcome, HarnessError> {
    let tower = Tower::build(alpha, depth)?;
    let report = tower_report(&tower)?;
    let mut table = Table::new(&[
        "index",
        "length_approx",
        "beta_sign",
        "len_plus",
        "len_minus",
        "len_zero",
        "max_plus",
        "min_plus",
        "max_minus",
        "min_minus",
        "bounds_pass",
    ]);
    for l in &report {
        table.push(vec![
            l.index.to_string(),
            format!("{:.6e}", l.length_approx),
            l.beta_sign.clone(),
            l.word_lengths[0].clone(),
            l.word_lengths[1].clone(),
            l.word_lengths[2].clone(),
            l.bounds.max_plus.to_string(),
            l.bounds.min_plus.to_string(),
            l.bounds.max_minus.to_string(),
            l.bounds.min_minus.to_string(),
            l.bounds_pass.to_string(),
        ]);
    }
    let passed = report.iter().all(|l| l.bounds_pass);
    Ok((passed, json!({ "depth": depth, "levels": report }), table))
}

/// Prefix-sum statistics of `S_n(x)` over `1 <= n <= N`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScanExtrema {
    pub min: i64,
    pub max: i64,
    /// Number of `n >= 1` with `S_n >= 0`.
    pub nonnegative: u64,
    pub escalated: u64,
}

impl ScanExtrema {
    fn empty() -> Self {
        Self {
            min: i64::MAX,
            max: i64::MIN,
            nonnegative: 0,
            escalated: 0,
        }
    }

    fn add(mut self, s: &ScanStep) -> Self {
        self.min = self.min.min(s.sum);
        self.max = self.max.max(s.sum);
        self.nonnegative += u64::from(s.sum >= 0);
        self
    }
}

/// `S_n(1/2)` extrema over `1..=N`.
pub fn scan_half(
    alpha: &CFNumber,
    n: u64,
    precision: Precision,
) -> Result<ScanExtrema, HarnessError> {
    let mut scan = BirkhoffScan::new(&CirclePoint::half(), alpha, precision);
    scan.try_next()?;
    let mut acc = ScanExtrema::empty();
    for _ in 1..=n {
        acc = acc.add(&scan.try_next()?);
    }
    acc.escalated = scan.escalations().escalated();
    Ok(acc)
}

/// `S_n(1/2) < 0` for every `1 <= n <= N`.
pub fn run_heavy(alpha: &CFNumber, n: u64, precision: Precision) -> Result<Outcome, HarnessError> {
    let ext = scan_half(alpha, n, precision)?;
    let mut table = Table::new(&["N", "min", "max", "violations"]);
    table.push(vec![
        n.to_string(),
        ext.min.to_string(),
        ext.max.to_string(),
        ext.nonnegative.to_string(),
    ]);
    let summary = json!({ "N": n, "scan": ext });
    Ok((ext.nonnegative == 0, summary, table))
}

/// Forward and backward sums along the orbit of `x`, `1 <= n <= N`.
pub fn example_scan(
    x: &CirclePoint,
    alpha: &CFNumber,
    n: u64,
    precision: Precision,
) -> Result<(i64, u64), HarnessError> {
    let mut fwd = BirkhoffScan::new(x, alpha, precision);
    let mut back = BirkhoffScan::backward(x, alpha, precision);
    fwd.try_next()?;
    back.try_next()?;
    let mut max = i64::MIN;
    let mut asymmetric = 0u64;
    for _ in 1..=n {
        let f = fwd.try_next()?;
        let b = back.try_next()?;
        max = max.max(f.sum);
        asymmetric += u64::from(f.sum != b.sum);
    }
    Ok((max, asymmetric))
}

/// Word formulas, `max S_n = -1` and `S_{-n} = S_n` for `x = (1+alpha)/2`.
pub fn run_example(
    m: i64,
    k_max: usize,
    n: u64,
    precision: Precision,
) -> Result<Outcome, HarnessError> {
    let report = example_m_report(m, k_max)?;
    let alpha = crate::foliation::example_alpha(m)?;
    let x = example_point(m)?;
    let (max, asymmetric) = example_scan(&x, &alpha, n, precision)?;
    let mut table = Table::new(&["k", "formula", "expected", "actual", "holds"]);
    for c in &report.checks {
        table.push(vec![
            c.k.to_string(),
            c.formula.clone(),
            c.expected.to_string(),
            c.actual.to_string(),
            c.holds().to_string(),
        ]);
    }
    let scan_ok = n == 0 || max == -1;
    let passed = report.passed() && scan_ok && asymmetric == 0;
    let summary = json!({
        "m": m,
        "alpha": alpha.to_string(),
        "x": x.position().to_string(),
        "N": n,
        "max_forward": if n == 0 { None } else { Some(max) },
        "asymmetric": asymmetric,
        "word_blocks": report.blocks,
        "word_length": report.word_length,
        "block_maxima": report.block_maxima,
        "formulas_pass": report.passed(),
    });
    Ok((passed, summary, table))
}

/// Checks each entry against the rotation orbit: entry `n` sits at
/// `t^{n-1}(x0)`.
pub fn entry_positions_hold(trace: &LeafTrace, x0: &CirclePoint) -> bool {
    let Some(first) = trace.entries.first() else {
        return true;
    };
    let mut orbit = ExactOrbit::new(x0, trace.alpha.value());
    while orbit.index() < first.n - 1 {
        orbit.step_forward();
    }
    while orbit.index() > first.n - 1 {
        orbit.step_backward();
    }
    trace.entries.iter().all(|e| {
        while orbit.index() < e.n - 1 {
            orbit.step_forward();
        }
        while orbit.index() > e.n - 1 {
            orbit.step_backward();
        }
        orbit.cmp_to(e.x.position()).is_eq()
    })
}

pub fn run_leaf(
    alpha: &CFNumber,
    start: &LeafStart,
    n: u64,
    backward: bool,
) -> Result<Outcome, HarnessError> {
    let (trace, x0) = match start {
        LeafStart::Ray { i } => (trace_ray(*i, n, alpha)?, CirclePoint::half()),
        LeafStart::Through { x0, level } => {
            let x0 = parse_seed(x0, alpha)?;
            (trace_leaf_through(&x0, *level, n, backward, alpha)?, x0)
        }
    };
    let consistent = trace.levels_consistent();
    let positions = entry_positions_hold(&trace, &x0);
    let mut table = Table::new(&["n", "x_approx", "level", "dir"]);
    for e in &trace.entries {
        table.push(vec![
            e.n.to_string(),
            format!("{:.15}", e.x.to_f64()),
            e.level.to_string(),
            trace.direction.to_string(),
        ]);
    }
    let summary = json!({
        "trace": trace.summary(),
        "levels_consistent": consistent,
        "entry_positions": positions,
    });
    Ok((consistent && positions, summary, table))
}

/// Oracle validation of levels `2..=depth`.
pub fn run_oracle(
    alpha: &CFNumber,
    depth: usize,
    samples: usize,
    seed: u64,
) -> Result<Outcome, HarnessError> {
    let tower = Tower::build(alpha, depth)?;
    let mut table = Table::new(&[
        "level",
        "case",
        "samples",
        "word_matches",
        "landing_matches",
        "max_return_time",
        "budget",
    ]);
    let mut reports = Vec::new();
    for i in 2..=depth {
        reports.extend(validate_level(&tower, i, samples, seed)?);
    }
    for r in &reports {
        table.push(vec![
            r.level.to_string(),
            serde_json::to_value(r.case)?
                .as_str()
                .unwrap_or_default()
                .to_string(),
            r.samples.to_string(),
            r.word_matches.to_string(),
            r.landing_matches.to_string(),
            r.max_return_time.to_string(),
            r.budget.to_string(),
        ]);
    }
    let passed = reports.iter().all(|r| r.passed());
    Ok((
        passed,
        json!({ "depth": depth, "seed": seed, "reports": reports }),
        table,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cf(s: &str) -> CFNumber {
        s.parse().unwrap()
    }

    #[test]
    fn seed_expressions() {
        let a = cf("[0;5,(6)]");
        let x = parse_seed("(1+a)/2", &a).unwrap();
        assert_eq!(
            x.position(),
            &((SurdReal::one() + a.value()) / SurdReal::from_integer(2))
        );
        assert_eq!(
            parse_seed("0.3", &a).unwrap(),
            CirclePoint::from_ratio(3, 10).unwrap()
        );
        assert_eq!(
            parse_seed("1/2 + 1/1000", &a).unwrap(),
            CirclePoint::from_ratio(501, 1000).unwrap()
        );
        assert_eq!(
            parse_seed("-alpha + 1", &a).unwrap().position(),
            &(SurdReal::one() - a.value())
        );
        for bad in ["", "(1+a", "1/0", "2", "a+", "x", "1..2"] {
            assert!(parse_seed(bad, &a).is_err(), "{bad}");
        }
    }

    #[test]
    fn documents_round_trip_config() {
        let configs = [
            Experiment::Tower {
                alpha: "[0;5,(6)]".into(),
                depth: 6,
            },
            Experiment::Density {
                alpha: "[0;5,(6)]".into(),
                m: 0,
                k: 1,
                n: 2000,
                max_gap: Some(0.5),
            },
            Experiment::Example {
                m: 2,
                k_max: 3,
                n: 500,
            },
            Experiment::Leaf {
                alpha: "[0;5,(6)]".into(),
                start: LeafStart::Through {
                    x0: "(1+a)/2".into(),
                    level: 0,
                },
                n: 50,
                backward: true,
            },
            Experiment::HeavyContrast {
                alpha: "[0;(2)]".into(),
                n: 1000,
            },
            Experiment::Oracle {
                alpha: "[0;5,(6)]".into(),
                depth: 3,
                samples: 5,
                seed: 1,
            },
        ];
        for e in configs {
            for p in [Precision::ExactOnly, Precision::CertifiedFast] {
                let c = ExperimentConfig::new(e.clone(), p);
                let out = run(&c).unwrap();
                assert!(out.passed, "{c:?}: {}", out.summary);
                assert_eq!(read_config(&out.to_csv_document()).unwrap(), c);
                assert_eq!(read_config(&out.to_json_document()).unwrap(), c);
            }
        }
    }

    #[test]
    fn density_examples() {
        let a = cf("[0;5,(6)]");
        let (ok, s, t) = run_density(&a, 0, 0, 0, None, Precision::ExactOnly).unwrap();
        assert!(ok);
        assert_eq!(s["count"], 1);
        assert_eq!(s["max_gap"], 1.0);
        assert_eq!(t.rows.len(), 1);
        let (_, s, _) = run_density(&a, -1, 0, 10, None, Precision::CertifiedFast).unwrap();
        assert_eq!(s["first_time"], 1);
        let (_, s4, _) = run_density(&a, 0, 0, 10_000, None, Precision::CertifiedFast).unwrap();
        let (_, s6, _) = run_density(&a, 0, 0, 1_000_000, None, Precision::CertifiedFast).unwrap();
        assert!(s6["max_gap"].as_f64().unwrap() < s4["max_gap"].as_f64().unwrap());
    }

    #[test]
    fn exact_only_is_deterministic() {
        let c = ExperimentConfig::new(
            Experiment::Density {
                alpha: "[0;5,(6)]".into(),
                m: 1,
                k: 0,
                n: 3000,
                max_gap: None,
            },
            Precision::ExactOnly,
        );
        assert_eq!(
            run(&c).unwrap().to_csv_document(),
            run(&c).unwrap().to_csv_document()
        );
    }

    #[test]
    fn heavy_small() {
        let (ok, _, _) = run_heavy(&cf("[0;(2)]"), 200_000, Precision::CertifiedFast).unwrap();
        assert!(ok);
        let ext = scan_half(&cf("[0;5,(6)]"), 300_000, Precision::CertifiedFast).unwrap();
        assert!(ext.max > 0 && ext.min < 0);
    }

    #[test]
    fn invalid_configs() {
        let c = ExperimentConfig::new(
            Experiment::Example {
                m: 1,
                k_max: 3,
                n: 5,
            },
            Precision::ExactOnly,
        );
        assert!(matches!(c.validate(), Err(HarnessError::Config(_))));
        let c = ExperimentConfig::new(
            Experiment::Tower {
                alpha: "[0;5,6]".into(),
                depth: 3,
            },
            Precision::ExactOnly,
        );
        assert!(c.validate().is_err());
        let c = ExperimentConfig::new(
            Experiment::Tower {
                alpha: "[0;4,(6)]".into(),
                depth: 3,
            },
            Precision::ExactOnly,
        );
        assert!(matches!(run(&c), Err(HarnessError::Renorm(_))));
    }
}
