//! Skew products over quadratic irrational circle rotations.
//!
//! The crate follows the Birkhoff sums `S_n(x)` of the observable
//! `f = 1 on [0, 1/2), -1 on [1/2, 1)` along rotations by continued-fraction
//! numbers `alpha`, using exact arithmetic in `Q(sqrt(D))` throughout:
//!
//! - [`exactreal`]: surds, continued fractions, certified float comparisons;
//! - [`circle`]: the rotation, the skew product, Birkhoff sums, visit sets;
//! - [`words`]: hash-consed sign-word DAGs with prefix-sum statistics;
//! - [`renorm`]: the tower of first-return intervals around `1/2`;
//! - [`foliation`]: leaf tracing through the chain of foliated unit squares;
//! - [`harness`]: reproducible experiments with CSV/JSON output.

pub mod circle;
pub mod exactreal;
pub mod foliation;
pub mod harness;
pub mod renorm;
pub mod words;

pub use exactreal::{CFNumber, SurdReal};
