//! Generalized-monotonicity sequence classes.
//!
//! Each class is characterised by an inequality `lhs(n) <= C * rhs(n)` that
//! must hold for every `n` with a constant `C` depending only on the sequence.
//! The *defect* at `n` is the ratio `lhs / rhs`; a sequence belongs to the
//! class exactly when its defect is bounded. Everything here works on finite
//! windows, so verdicts are relative to the window that was checked.
//!
//! | class | `lhs(n)` | `rhs(n)` |
//! |-------|----------|----------|
//! | MVBVS | `sum_{k=n}^{2n} abs(a_k - a_{k+1})` | `(1/n) sum_{k=[n/lambda]}^{[lambda n]} a_k` |
//! | GBVS  | same | `max_{n <= k < n + N0} a_k` |
//! | NBVS  | same | `a_n + a_{2n}` |
//! | RBVS  | `sum_{k >= n} abs(a_k - a_{k+1})` | `a_n` |
//! | AMS   | `max_{k >= n} a_k` | `a_n` |
//!
//! The three quasi-monotone classes (MS, CQMS, RVQMS) ask for `a_n / w(n)`
//! to be non-increasing for a weight `w` (1, `n^alpha`, or a regulator
//! `R(n)`); their defect is the step ratio `(a_{n+1}/w(n+1)) / (a_n/w(n))`
//! and membership means the defect never exceeds 1.

mod certify;
mod defects;

use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::sequence::SharedSequence;

pub use certify::{
    certify, certify_mvbvs_search, growth_slope, Certificate, DefectEntry, DefectProfile,
    Verdict, MVBVS_LAMBDA_CANDIDATES, SLOPE_THRESHOLD,
};
pub use defects::{
    ams_defect, cqms_check, delta, gbv_defect, gbv_sides, lemma8_bound_check, mvbv_defect,
    mvbv_sides, na_n_probe, na_n_window_sides, nbv_defect, nbv_sides, rbv_defect, rvqms_check,
    variation, MonotoneCheck, RegulatorCheck, TruncatedDefect,
};

/// Sequence classes known to the certifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum ClassId {
    Ms,
    Cqms,
    Rvqms,
    Rbvs,
    Gbvs,
    Nbvs,
    Ams,
    Mvbvs,
}

impl ClassId {
    pub const ALL: [ClassId; 8] = [
        ClassId::Ms,
        ClassId::Cqms,
        ClassId::Rvqms,
        ClassId::Rbvs,
        ClassId::Gbvs,
        ClassId::Nbvs,
        ClassId::Ams,
        ClassId::Mvbvs,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ClassId::Ms => "MS",
            ClassId::Cqms => "CQMS",
            ClassId::Rvqms => "RVQMS",
            ClassId::Rbvs => "RBVS",
            ClassId::Gbvs => "GBVS",
            ClassId::Nbvs => "NBVS",
            ClassId::Ams => "AMS",
            ClassId::Mvbvs => "MVBVS",
        }
    }

    /// Classes whose membership is monotonicity of a weighted sequence.
    pub fn is_quasi_monotone(self) -> bool {
        matches!(self, ClassId::Ms | ClassId::Cqms | ClassId::Rvqms)
    }

    /// Classes whose defect looks at the whole tail and is truncated on finite data.
    pub fn uses_tail(self) -> bool {
        matches!(self, ClassId::Rbvs | ClassId::Ams)
    }
}

impl fmt::Display for ClassId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ClassId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ClassId::ALL
            .into_iter()
            .find(|c| c.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::param("class_id", format!("unknown class `{s}`")))
    }
}

/// Parameters of a class check.
///
/// Only the fields relevant to `class_id` are consulted. A `lambda` of `None`
/// asks the MVBVS certifier to search [`MVBVS_LAMBDA_CANDIDATES`].
#[derive(Clone)]
pub struct ClassParams {
    pub class_id: ClassId,
    pub lambda: Option<f64>,
    pub n0_group: u64,
    pub alpha: f64,
    pub regulator: Option<SharedSequence>,
    /// Last index used by the tail classes (RBVS, AMS). Defaults to the
    /// sequence's known length, or `4 * n_max` for unbounded sequences.
    pub horizon: Option<u64>,
}

impl ClassParams {
    pub fn new(class_id: ClassId) -> Self {
        Self {
            class_id,
            lambda: if class_id == ClassId::Mvbvs { Some(2.0) } else { None },
            n0_group: 1,
            alpha: 0.0,
            regulator: None,
            horizon: None,
        }
    }

    pub fn mvbvs(lambda: f64) -> Self {
        Self {
            lambda: Some(lambda),
            ..Self::new(ClassId::Mvbvs)
        }
    }

    pub fn gbvs(n0_group: u64) -> Self {
        Self {
            n0_group,
            ..Self::new(ClassId::Gbvs)
        }
    }

    pub fn cqms(alpha: f64) -> Self {
        Self {
            alpha,
            ..Self::new(ClassId::Cqms)
        }
    }

    pub fn rvqms(regulator: SharedSequence) -> Self {
        Self {
            regulator: Some(regulator),
            ..Self::new(ClassId::Rvqms)
        }
    }

    pub fn with_horizon(mut self, horizon: u64) -> Self {
        self.horizon = Some(horizon);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(lambda) = self.lambda {
            if !(lambda.is_finite() && lambda >= 2.0) {
                return Err(Error::param("lambda", format!("must be >= 2, got {lambda}")));
            }
        }
        if self.n0_group < 1 {
            return Err(Error::param("n0_group", "must be >= 1"));
        }
        if !(self.alpha.is_finite() && self.alpha >= 0.0) {
            return Err(Error::param("alpha", format!("must be >= 0, got {}", self.alpha)));
        }
        if self.class_id == ClassId::Rvqms && self.regulator.is_none() {
            return Err(Error::param("regulator", "RVQMS requires a regulator sequence R(n)"));
        }
        Ok(())
    }
}

impl fmt::Debug for ClassParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ClassParams")
            .field("class_id", &self.class_id)
            .field("lambda", &self.lambda)
            .field("n0_group", &self.n0_group)
            .field("alpha", &self.alpha)
            .field("regulator", &self.regulator.as_ref().map(|r| r.label().to_string()))
            .field("horizon", &self.horizon)
            .finish()
    }
}

impl PartialEq for ClassParams {
    fn eq(&self, other: &Self) -> bool {
        self.class_id == other.class_id
            && self.lambda == other.lambda
            && self.n0_group == other.n0_group
            && self.alpha == other.alpha
            && self.horizon == other.horizon
            && self.regulator.as_ref().map(|r| r.label().to_string())
                == other.regulator.as_ref().map(|r| r.label().to_string())
    }
}

impl Serialize for ClassParams {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        let mut map = serializer.serialize_map(None)?;
        map.serialize_entry("lambda", &self.lambda)?;
        map.serialize_entry("n0_group", &self.n0_group)?;
        map.serialize_entry("alpha", &self.alpha)?;
        map.serialize_entry("regulator", &self.regulator.as_ref().map(|r| r.label()))?;
        map.serialize_entry("horizon", &self.horizon)?;
        map.end()
    }
}

/// The two sides of a class inequality at one index.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sides {
    pub lhs: f64,
    pub rhs: f64,
}

impl Sides {
    pub fn defect(&self) -> f64 {
        defect_ratio(self.lhs, self.rhs)
    }
}

/// `lhs / rhs` with `0 / anything = 0` and `positive / 0 = +inf`.
pub fn defect_ratio(lhs: f64, rhs: f64) -> f64 {
    if lhs == 0.0 {
        0.0
    } else if rhs == 0.0 {
        f64::INFINITY
    } else {
        lhs / rhs
    }
}

/// `[lambda^-1 n]` clamped below at 1, and `[lambda n]`.
pub fn mean_window(n: u64, lambda: f64) -> (u64, u64) {
    let lo = ((n as f64) / lambda).floor() as u64;
    let hi = ((n as f64) * lambda).floor() as u64;
    (lo.max(1), hi)
}
