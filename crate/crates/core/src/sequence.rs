//! Indexed access to nonnegative real coefficient sequences.
//!
//! Sequences are indexed from 1; the zeroth coefficient is always taken to
//! be 0 and is never requested through [`SequenceProvider::term`].

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Read-only access to a nonnegative sequence `a_1, a_2, ...`.
///
/// Implementations must be callable from several worker threads at once.
pub trait SequenceProvider: Send + Sync {
    /// The `k`-th term, `k >= 1`.
    fn term(&self, k: u64) -> Result<f64>;

    /// Largest valid index, or `None` for unbounded closed-form sequences.
    fn known_length(&self) -> Option<u64>;

    fn label(&self) -> &str;

    /// Terms `lo..=hi` as a vector.
    fn terms(&self, lo: u64, hi: u64) -> Result<Vec<f64>> {
        if lo == 0 {
            return Err(Error::ZeroIndex);
        }
        (lo..=hi).map(|k| self.term(k)).collect()
    }
}

impl<S: SequenceProvider + ?Sized> SequenceProvider for &S {
    fn term(&self, k: u64) -> Result<f64> {
        (**self).term(k)
    }
    fn known_length(&self) -> Option<u64> {
        (**self).known_length()
    }
    fn label(&self) -> &str {
        (**self).label()
    }
}

impl<S: SequenceProvider + ?Sized> SequenceProvider for Arc<S> {
    fn term(&self, k: u64) -> Result<f64> {
        (**self).term(k)
    }
    fn known_length(&self) -> Option<u64> {
        (**self).known_length()
    }
    fn label(&self) -> &str {
        (**self).label()
    }
}

impl<S: SequenceProvider + ?Sized> SequenceProvider for Box<S> {
    fn term(&self, k: u64) -> Result<f64> {
        (**self).term(k)
    }
    fn known_length(&self) -> Option<u64> {
        (**self).known_length()
    }
    fn label(&self) -> &str {
        (**self).label()
    }
}

/// Shared, type-erased provider.
pub type SharedSequence = Arc<dyn SequenceProvider>;

/// Checks `k` against the bounds of `seq`.
pub(crate) fn check_index<S: SequenceProvider + ?Sized>(seq: &S, k: u64) -> Result<()> {
    if k == 0 {
        return Err(Error::ZeroIndex);
    }
    match seq.known_length() {
        Some(len) if k > len => Err(Error::OutOfRange {
            label: seq.label().to_string(),
            index: k,
            len,
        }),
        _ => Ok(()),
    }
}

/// A materialized finite prefix `a_1..a_len`.
#[derive(Clone, PartialEq)]
pub struct ExplicitSequence {
    values: Vec<f64>,
    label: String,
}

impl ExplicitSequence {
    /// Rejects negative or non-finite entries, naming the 1-based index.
    pub fn new(values: Vec<f64>, label: impl Into<String>) -> Result<Self> {
        let label = label.into();
        if let Some((i, &v)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !(v.is_finite() && **v >= 0.0))
        {
            return Err(Error::InvalidTerm {
                label,
                index: i as u64 + 1,
                value: v,
            });
        }
        Ok(Self { values, label })
    }

    /// Materializes `seq` on `1..=len`.
    pub fn from_provider<S: SequenceProvider + ?Sized>(seq: &S, len: u64) -> Result<Self> {
        let values = seq.terms(1, len)?;
        Self::new(values, seq.label())
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Multiplies every term by `factor > 0`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        if !(factor.is_finite() && factor > 0.0) {
            return Err(Error::param("factor", format!("must be positive, got {factor}")));
        }
        Self::new(
            self.values.iter().map(|v| v * factor).collect(),
            format!("{}*{factor}", self.label),
        )
    }
}

impl fmt::Debug for dyn SequenceProvider {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SequenceProvider({})", self.label())
    }
}

impl fmt::Debug for ExplicitSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ExplicitSequence")
            .field("label", &self.label)
            .field("len", &self.values.len())
            .finish()
    }
}

impl SequenceProvider for ExplicitSequence {
    fn term(&self, k: u64) -> Result<f64> {
        check_index(self, k)?;
        Ok(self.values[(k - 1) as usize])
    }

    fn known_length(&self) -> Option<u64> {
        Some(self.values.len() as u64)
    }

    fn label(&self) -> &str {
        &self.label
    }

    fn terms(&self, lo: u64, hi: u64) -> Result<Vec<f64>> {
        check_index(self, lo)?;
        if hi >= lo {
            check_index(self, hi)?;
        }
        Ok(self.values[(lo - 1) as usize..hi.max(lo - 1) as usize].to_vec())
    }
}

/// A closed-form sequence given by a function of the index.
pub struct FnSequence<F> {
    f: F,
    known_length: Option<u64>,
    label: String,
}

impl<F> FnSequence<F>
where
    F: Fn(u64) -> f64 + Send + Sync,
{
    pub fn new(label: impl Into<String>, f: F) -> Self {
        Self {
            f,
            known_length: None,
            label: label.into(),
        }
    }

    pub fn with_length(mut self, len: u64) -> Self {
        self.known_length = Some(len);
        self
    }
}

impl<F> fmt::Debug for FnSequence<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FnSequence")
            .field("label", &self.label)
            .field("known_length", &self.known_length)
            .finish()
    }
}

impl<F> SequenceProvider for FnSequence<F>
where
    F: Fn(u64) -> f64 + Send + Sync,
{
    fn term(&self, k: u64) -> Result<f64> {
        check_index(self, k)?;
        let value = (self.f)(k);
        if !(value.is_finite() && value >= 0.0) {
            return Err(Error::InvalidTerm {
                label: self.label.clone(),
                index: k,
                value,
            });
        }
        Ok(value)
    }

    fn known_length(&self) -> Option<u64> {
        self.known_length
    }

    fn label(&self) -> &str {
        &self.label
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn explicit_rejects_negative_entry_by_index() {
        let err = ExplicitSequence::new(vec![1.0, 0.5, -0.25], "bad").unwrap_err();
        assert!(matches!(err, Error::InvalidTerm { index: 3, .. }));
    }

    #[test]
    fn explicit_bounds() {
        let seq = ExplicitSequence::new(vec![1.0, 0.5, 0.25], "x").unwrap();
        assert_eq!(seq.known_length(), Some(3));
        assert_eq!(seq.term(3).unwrap(), 0.25);
        assert_eq!(seq.term(0).unwrap_err(), Error::ZeroIndex);
        assert!(matches!(seq.term(4), Err(Error::OutOfRange { index: 4, len: 3, .. })));
        assert_eq!(seq.terms(2, 3).unwrap(), vec![0.5, 0.25]);
    }

    #[test]
    fn fn_sequence_validates_terms() {
        let seq = FnSequence::new("neg", |k| 1.0 - k as f64);
        assert!(seq.term(1).is_ok());
        assert!(matches!(seq.term(2), Err(Error::InvalidTerm { index: 2, .. })));
        let bounded = FnSequence::new("b", |_| 1.0).with_length(5);
        assert!(bounded.term(6).is_err());
    }
}
