//! Exact quadratic irrationals from eventually periodic continued fractions,
//! plus a certified floating path for long scans.

mod certified;
mod cf;
mod surd;

pub use certified::{
    certified_compare, CertifiedFloat, CompareError, EscalationLog, RotationShadow, Threshold,
    Verdict,
};
pub use cf::{alpha_next, cf_value, convergent, expand_cf, gauss_step, CFNumber, Convergent};
pub(crate) use surd::sign_of_surd;
pub use surd::SurdReal;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ExactError {
    #[error("continued fraction has an empty period")]
    EmptyPeriod,
    #[error("coefficient a_{0} is zero")]
    ZeroCoefficient(usize),
    #[error("continued fraction evaluates to a rational number")]
    RationalCollapse,
    #[error("cannot parse continued fraction literal {0:?}")]
    Parse(String),
    #[error("zero denominator")]
    ZeroDenominator,
    #[error("radicand {0} is not a positive integer")]
    BadRadicand(u64),
    #[error("discriminant {0} too large to factor")]
    DiscriminantTooLarge(String),
    #[error("value {0} is outside (0, 1)")]
    OutOfUnitInterval(String),
    #[error("coefficient a_{coefficient} would drop below 1")]
    DecrementBelowOne { coefficient: usize },
    #[error("convergent index must be at least 1")]
    ConvergentIndex,
    #[error("no period found within {0} terms")]
    NoPeriodFound(usize),
}
