//! Numerical toolkit for sine and two-sided complex trigonometric series with
//! monotone-type coefficients: class membership certificates, counterexample
//! generators and uniform-convergence probes.

pub mod complexseries;
pub mod error;
pub mod generators;
pub mod relations;
pub mod seqclass;
pub mod sequence;
pub mod sineseries;
pub mod spec_io;
pub mod summation;

pub use complexseries::{ComplexSequenceProvider, ExplicitComplexSequence};
pub use error::{Error, Result};
pub use seqclass::{certify, Certificate, ClassId, ClassParams, Verdict};
pub use sequence::{ExplicitSequence, FnSequence, SequenceProvider, SharedSequence};
pub use sineseries::{ProbeThresholds, SeriesVerdict};
pub use spec_io::{parse_sequence_spec, Builtin, LoadedSpec};

/// Crate version, written into artifact headers.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
