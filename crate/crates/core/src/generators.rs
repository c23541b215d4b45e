//! Closed-form counterexample sequences and witness families.
//!
//! The two divergence constructions share a block layout: a generation `j`
//! (with start `n_j`) covers indices `[4 n_j, 4 n_{j+1})`, split into blocks
//! `[4k n_j, 4(k+1) n_j)`. The first half of every block carries
//! `c_j / m`, the second half `c_j / (8 m)`, so at `t_j = pi / (2 n_j)` the
//! positive half-waves of `sin(m t_j)` meet the large coefficients. All terms
//! are computed in O(1) without materialization.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sequence::{check_index, SequenceProvider, SharedSequence};

/// A sequence built generation by generation, exposing its block schedule.
pub trait BlockSchedule: SequenceProvider {
    /// Deepest generation `j_max` with fully defined blocks.
    fn deepest_generation(&self) -> usize;

    /// Generation start `n_j` for `1 <= j <= j_max + 1`.
    fn generation_start(&self, j: usize) -> u64;

    /// Growth scale of the partial-sum gap in generation `j`: the inverse of
    /// the per-generation coefficient factor.
    fn gap_scale(&self, j: usize) -> f64;

    /// `[n_1, ..., n_{j_max+1}]`.
    fn schedule(&self) -> Vec<u64> {
        (1..=self.deepest_generation() + 1)
            .map(|j| self.generation_start(j))
            .collect()
    }
}

/// Shared block arithmetic of the two divergence constructions.
#[derive(Debug, Clone)]
struct Blocks {
    /// `starts[j - 1] = n_j`.
    starts: Vec<u64>,
    /// `factors[j - 1]` is the coefficient `1 / sqrt(log scale_j)` of generation `j`.
    factors: Vec<f64>,
    /// Indices `m < prefix_end` carry the constant 1.
    prefix_end: u64,
}

impl Blocks {
    fn len(&self) -> u64 {
        4 * self.starts[self.starts.len() - 1] - 1
    }

    fn term(&self, m: u64) -> f64 {
        if m < self.prefix_end {
            return 1.0;
        }
        let j = self.generation_of(m);
        let start = self.starts[j - 1];
        let offset = m % (4 * start);
        let factor = self.factors[j - 1];
        if offset < 2 * start {
            factor / m as f64
        } else {
            factor / (8.0 * m as f64)
        }
    }

    /// Generation `j >= 2` with `4 n_j <= m < 4 n_{j+1}`.
    fn generation_of(&self, m: u64) -> usize {
        let mut j = 2;
        while m >= 4 * self.starts[j] {
            j += 1;
        }
        j
    }
}

/// Parameters of the almost-monotone divergent sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Thm1Spec {
    /// Deepest block generation, `2 <= j_max <= 5` (`n_6 = 10^16`).
    pub j_max: usize,
}

/// An almost-monotone sequence with `n b_n -> 0` whose sine series does not
/// converge uniformly.
///
/// Schedule `n_1 = 1`, `n_2 = 10`, `n_{j+1} = n_j^2`; `b_m = 1` for `m < 40`
/// and for `j >= 2`, `k = 1, ..., n_j - 1`:
/// `b_m = 1 / (sqrt(ln n_j) m)` on `[4k n_j, (4k+2) n_j)` and
/// `b_m = 1 / (8 sqrt(ln n_j) m)` on `[(4k+2) n_j, 4(k+1) n_j)`.
/// Index 40 starts the first block, so the constant prefix ends at 39.
#[derive(Debug, Clone)]
pub struct Thm1Sequence {
    spec: Thm1Spec,
    blocks: Blocks,
    label: String,
}

pub fn gen_thm1(spec: Thm1Spec) -> Result<Thm1Sequence> {
    if !(2..=5).contains(&spec.j_max) {
        return Err(Error::param("j_max", format!("must lie in 2..=5, got {}", spec.j_max)));
    }
    let mut starts = vec![1u64, 10];
    while starts.len() < spec.j_max + 1 {
        let last = *starts.last().unwrap();
        starts.push(last * last);
    }
    let factors = starts
        .iter()
        .map(|&n| if n > 1 { 1.0 / (n as f64).ln().sqrt() } else { f64::NAN })
        .collect();
    Ok(Thm1Sequence {
        spec,
        blocks: Blocks { starts, factors, prefix_end: 40 },
        label: format!("thm1(j_max={})", spec.j_max),
    })
}

impl Thm1Sequence {
    pub fn spec(&self) -> Thm1Spec {
        self.spec
    }
}

impl SequenceProvider for Thm1Sequence {
    fn term(&self, k: u64) -> Result<f64> {
        check_index(self, k)?;
        Ok(self.blocks.term(k))
    }
    fn known_length(&self) -> Option<u64> {
        Some(self.blocks.len())
    }
    fn label(&self) -> &str {
        &self.label
    }
}

impl BlockSchedule for Thm1Sequence {
    fn deepest_generation(&self) -> usize {
        self.spec.j_max
    }
    fn generation_start(&self, j: usize) -> u64 {
        self.blocks.starts[j - 1]
    }
    fn gap_scale(&self, j: usize) -> f64 {
        (self.blocks.starts[j - 1] as f64).ln().sqrt()
    }
}

/// Growth sequences `M_n` for the sharpness construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Growth {
    /// `M_n = scale * ceil(log2(n + 2))`.
    Log2Ceil { scale: f64 },
    /// `M_n = value`; not tending to infinity, useful only for schedule checks.
    Constant { value: f64 },
}

impl Growth {
    pub fn provider(self) -> SharedSequence {
        Arc::new(GrowthSequence(self))
    }
}

struct GrowthSequence(Growth);

impl SequenceProvider for GrowthSequence {
    fn term(&self, k: u64) -> Result<f64> {
        check_index(self, k)?;
        Ok(match self.0 {
            Growth::Log2Ceil { scale } => scale * ((k + 2) as f64).log2().ceil(),
            Growth::Constant { value } => value,
        })
    }
    fn known_length(&self) -> Option<u64> {
        None
    }
    fn label(&self) -> &str {
        match self.0 {
            Growth::Log2Ceil { .. } => "log2_ceil",
            Growth::Constant { .. } => "constant",
        }
    }
}

/// Parameters of the sharpness construction.
#[derive(Clone)]
pub struct Thm6Spec {
    /// Nonnegative non-decreasing `M_n` with `M_1 >= 10`.
    pub growth: SharedSequence,
    pub j_max: usize,
}

impl fmt::Debug for Thm6Spec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Thm6Spec")
            .field("growth", &self.growth.label())
            .field("j_max", &self.j_max)
            .finish()
    }
}

/// A sequence with `n a_n -> 0` that misses the mean value bounded variation
/// condition only by the factor `M_n`, yet has a non-uniformly convergent sine series.
///
/// Schedule `n_1 = 1`, `n_2 = 10`, `n_{j+1} = 2 [M_{4 n_j}^{1/2}] n_j`;
/// `a_m = 1` for `m < 40`, blocks `k = 1, ..., 2[M_{4n_j}^{1/2}] - 1` as in
/// [`Thm1Sequence`] with coefficient `1 / sqrt(ln M_{4 n_j})`.
#[derive(Clone)]
pub struct Thm6Sequence {
    spec: Thm6Spec,
    blocks: Blocks,
    /// `M_{4 n_j}` per generation.
    growth_at_starts: Vec<f64>,
    label: String,
}

/// Indices beyond which the full monotonicity sweep of `M` is skipped.
const GROWTH_SWEEP_LIMIT: u64 = 1 << 22;

pub fn gen_thm6(spec: Thm6Spec) -> Result<Thm6Sequence> {
    if !(2..=8).contains(&spec.j_max) {
        return Err(Error::param("j_max", format!("must lie in 2..=8, got {}", spec.j_max)));
    }
    let m = &spec.growth;
    if m.term(1)? < 10.0 {
        return Err(Error::param("growth", format!("M_1 = {} must be >= 10", m.term(1)?)));
    }
    let mut starts = vec![1u64, 10];
    let mut growth_at_starts = vec![m.term(4)?];
    while starts.len() < spec.j_max + 1 {
        let last = *starts.last().unwrap();
        let m_at = m.term(4 * last)?;
        growth_at_starts.push(m_at);
        let root = m_at.sqrt().floor() as u64;
        let next = root
            .checked_mul(2)
            .and_then(|r| r.checked_mul(last))
            .filter(|n| n.checked_mul(4).is_some())
            .ok_or_else(|| Error::param("j_max", "schedule overflows u64"))?;
        starts.push(next);
    }
    let last = *starts.last().unwrap();
    growth_at_starts.push(m.term(4 * last)?);
    let sweep_end = (4 * last).min(GROWTH_SWEEP_LIMIT);
    let mut prev = m.term(1)?;
    for k in 2..=sweep_end {
        let cur = m.term(k)?;
        if cur < prev {
            return Err(Error::param("growth", format!("M decreases at n = {}", k - 1)));
        }
        prev = cur;
    }
    if growth_at_starts.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::param("growth", "M decreases between generation starts"));
    }
    let factors = growth_at_starts.iter().map(|g| 1.0 / g.ln().sqrt()).collect();
    let label = format!("thm6(M={}, j_max={})", m.label(), spec.j_max);
    Ok(Thm6Sequence {
        blocks: Blocks { starts, factors, prefix_end: 40 },
        growth_at_starts,
        spec,
        label,
    })
}

impl Thm6Sequence {
    pub fn growth(&self) -> &SharedSequence {
        &self.spec.growth
    }

    /// `M_{4 n_j}`.
    pub fn growth_at_generation(&self, j: usize) -> f64 {
        self.growth_at_starts[j - 1]
    }
}

impl fmt::Debug for Thm6Sequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Thm6Sequence")
            .field("spec", &self.spec)
            .field("schedule", &self.blocks.starts)
            .finish()
    }
}

impl SequenceProvider for Thm6Sequence {
    fn term(&self, k: u64) -> Result<f64> {
        check_index(self, k)?;
        Ok(self.blocks.term(k))
    }
    fn known_length(&self) -> Option<u64> {
        Some(self.blocks.len())
    }
    fn label(&self) -> &str {
        &self.label
    }
}

impl BlockSchedule for Thm6Sequence {
    fn deepest_generation(&self) -> usize {
        self.spec.j_max
    }
    fn generation_start(&self, j: usize) -> u64 {
        self.blocks.starts[j - 1]
    }
    fn gap_scale(&self, j: usize) -> f64 {
        self.growth_at_starts[j - 1].ln().sqrt()
    }
}

/// Parameters of the dyadic zero-band sequence.
#[derive(Clone)]
pub struct Prop3Spec {
    /// Non-increasing nonnegative base sequence.
    pub base: SharedSequence,
    /// Highest dyadic level; the sequence is defined on `1..2^(k_max+1)`.
    pub k_max: u32,
}

impl fmt::Debug for Prop3Spec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Prop3Spec")
            .field("base", &self.base.label())
            .field("k_max", &self.k_max)
            .finish()
    }
}

/// The base sequence with zero bands `[2^k, 2^k + k)` and `[2^(k+1) - k, 2^(k+1))`
/// cut out of every dyadic block: a mean value bounded variation sequence
/// outside both the group and the non-onesided bounded variation classes.
#[derive(Clone)]
pub struct Prop3Sequence {
    spec: Prop3Spec,
    label: String,
}

pub fn gen_prop3(spec: Prop3Spec) -> Result<Prop3Sequence> {
    if !(1..=40).contains(&spec.k_max) {
        return Err(Error::param("k_max", format!("must lie in 1..=40, got {}", spec.k_max)));
    }
    let len = (1u64 << (spec.k_max + 1)) - 1;
    if let Some(base_len) = spec.base.known_length() {
        if base_len < len {
            return Err(Error::param("base", format!("needs {len} terms, has {base_len}")));
        }
    }
    let mut prev = spec.base.term(1)?;
    for k in 2..=len.min(GROWTH_SWEEP_LIMIT) {
        let cur = spec.base.term(k)?;
        if cur > prev {
            return Err(Error::param("base", format!("must be non-increasing, rises at n = {}", k - 1)));
        }
        prev = cur;
    }
    let label = format!("prop3(base={}, k_max={})", spec.base.label(), spec.k_max);
    Ok(Prop3Sequence { spec, label })
}

impl Prop3Sequence {
    pub fn k_max(&self) -> u32 {
        self.spec.k_max
    }

    /// Whether `n` falls in one of the zero bands.
    pub fn in_zero_band(n: u64) -> bool {
        let k = 63 - n.leading_zeros() as u64;
        let start = 1u64 << k;
        n < start + k || n >= 2 * start - k
    }
}

impl fmt::Debug for Prop3Sequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Prop3Sequence").field("spec", &self.spec).finish()
    }
}

impl SequenceProvider for Prop3Sequence {
    fn term(&self, n: u64) -> Result<f64> {
        check_index(self, n)?;
        if Self::in_zero_band(n) {
            Ok(0.0)
        } else {
            self.spec.base.term(n)
        }
    }
    fn known_length(&self) -> Option<u64> {
        Some((1u64 << (self.spec.k_max + 1)) - 1)
    }
    fn label(&self) -> &str {
        &self.label
    }
}

/// Standard witness families for the class-relations corpus.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum Family {
    /// `1 / n^p`.
    PowerP { p: f64 },
    /// `1 / (n (1 + ln n))`.
    LogDamped,
    /// `c` for every `n`.
    Constant { c: f64 },
    /// `n^alpha / 2^(k (alpha + 1))` on `[2^k, 2^(k+1))`: rises inside every
    /// dyadic block, while `a_n / n^alpha` is non-increasing.
    DyadicRamp { alpha: f64 },
    /// `1 / n` with isolated zeros at `n = 2^k + 1`, `k >= 1`.
    SparseZeros,
}

#[derive(Debug, Clone)]
pub struct FamilySequence {
    family: Family,
    label: String,
}

pub fn gen_family(family: Family) -> Result<FamilySequence> {
    match family {
        Family::PowerP { p } if !(p.is_finite() && p >= 0.0) => {
            return Err(Error::param("p", format!("must be >= 0, got {p}")))
        }
        Family::Constant { c } if !(c.is_finite() && c >= 0.0) => {
            return Err(Error::param("c", format!("must be >= 0, got {c}")))
        }
        Family::DyadicRamp { alpha } if !(alpha.is_finite() && alpha >= 0.0) => {
            return Err(Error::param("alpha", format!("must be >= 0, got {alpha}")))
        }
        _ => {}
    }
    let label = match family {
        Family::PowerP { p } => format!("power_p(p={p})"),
        Family::LogDamped => "log_damped".to_string(),
        Family::Constant { c } => format!("constant(c={c})"),
        Family::DyadicRamp { alpha } => format!("dyadic_ramp(alpha={alpha})"),
        Family::SparseZeros => "sparse_zeros".to_string(),
    };
    Ok(FamilySequence { family, label })
}

impl FamilySequence {
    pub fn family(&self) -> Family {
        self.family
    }
}

impl SequenceProvider for FamilySequence {
    fn term(&self, n: u64) -> Result<f64> {
        check_index(self, n)?;
        let x = n as f64;
        Ok(match self.family {
            Family::PowerP { p } => x.powf(-p),
            Family::LogDamped => 1.0 / (x * (1.0 + x.ln())),
            Family::Constant { c } => c,
            Family::DyadicRamp { alpha } => {
                let k = 63 - n.leading_zeros() as i32;
                x.powf(alpha) * 2f64.powf(-(k as f64) * (alpha + 1.0))
            }
            Family::SparseZeros => {
                if n >= 3 && (n - 1).is_power_of_two() {
                    0.0
                } else {
                    1.0 / x
                }
            }
        })
    }
    fn known_length(&self) -> Option<u64> {
        None
    }
    fn label(&self) -> &str {
        &self.label
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn thm1(j_max: usize) -> Thm1Sequence {
        gen_thm1(Thm1Spec { j_max }).unwrap()
    }

    #[test]
    fn thm1_schedule_and_prefix() {
        let s = thm1(4);
        assert_eq!(s.schedule(), vec![1, 10, 100, 10_000, 100_000_000]);
        assert_eq!(s.known_length(), Some(400_000_000 - 1));
        assert_eq!(s.term(1).unwrap(), 1.0);
        assert_eq!(s.term(39).unwrap(), 1.0);
        let root = 10f64.ln().sqrt();
        assert_eq!(s.term(40).unwrap(), 1.0 / (root * 40.0));
        assert!(s.term(400_000_000).is_err());
        assert!(gen_thm1(Thm1Spec { j_max: 1 }).is_err());
        assert!(gen_thm1(Thm1Spec { j_max: 6 }).is_err());
    }

    #[test]
    fn thm1_block_values() {
        let s = thm1(3);
        let root = 10f64.ln().sqrt();
        assert!((s.term(45).unwrap() * root * 45.0 - 1.0).abs() < 1e-15);
        assert!((s.term(65).unwrap() * 8.0 * root * 65.0 - 1.0).abs() < 1e-15);
        // generation 3 starts at 4 n_3 = 400 with ln 100
        let root3 = 100f64.ln().sqrt();
        assert!((s.term(399).unwrap() * 8.0 * root * 399.0 - 1.0).abs() < 1e-15);
        assert!((s.term(400).unwrap() * root3 * 400.0 - 1.0).abs() < 1e-15);
        assert!((s.term(600).unwrap() * 8.0 * root3 * 600.0 - 1.0).abs() < 1e-15);
    }

    #[test]
    fn thm6_schedule_with_constant_growth() {
        let s = gen_thm6(Thm6Spec {
            growth: Growth::Constant { value: 16.0 }.provider(),
            j_max: 3,
        })
        .unwrap();
        assert_eq!(s.schedule(), vec![1, 10, 80, 640]);
        assert_eq!(s.term(1).unwrap(), 1.0);
        assert_eq!(s.term(39).unwrap(), 1.0);
        assert_eq!(s.known_length(), Some(4 * 640 - 1));
    }

    #[test]
    fn thm6_schedule_with_log_growth() {
        let s = gen_thm6(Thm6Spec {
            growth: Growth::Log2Ceil { scale: 10.0 }.provider(),
            j_max: 4,
        })
        .unwrap();
        // M_40 = 60, M_560 = 100, M_11200 = 140
        assert_eq!(s.schedule(), vec![1, 10, 140, 2800, 61_600]);
        assert_eq!(s.growth_at_generation(2), 60.0);
        let root = 60f64.ln().sqrt();
        assert_eq!(s.term(41).unwrap(), 1.0 / (root * 41.0));
        assert_eq!(s.term(60).unwrap(), 1.0 / (8.0 * root * 60.0));
    }

    #[test]
    fn thm6_rejects_bad_growth() {
        let small = Growth::Constant { value: 9.0 }.provider();
        assert!(gen_thm6(Thm6Spec { growth: small, j_max: 3 }).is_err());
        let dec: SharedSequence = Arc::new(crate::sequence::FnSequence::new("dec", |k| {
            if k < 100 { 20.0 } else { 15.0 }
        }));
        assert!(gen_thm6(Thm6Spec { growth: dec, j_max: 3 }).is_err());
    }

    #[test]
    fn prop3_zero_bands() {
        let base = gen_family(Family::PowerP { p: 1.0 }).unwrap();
        let s = gen_prop3(Prop3Spec { base: Arc::new(base), k_max: 6 }).unwrap();
        for n in [8, 9, 10, 13, 14, 15, 16, 17, 18, 19] {
            assert_eq!(s.term(n).unwrap(), 0.0, "n = {n}");
        }
        assert_eq!(s.term(11).unwrap(), 1.0 / 11.0);
        assert_eq!(s.term(12).unwrap(), 1.0 / 12.0);
        assert_eq!(s.term(20).unwrap(), 1.0 / 20.0);
        assert_eq!(s.term(1).unwrap(), 1.0);
        assert_eq!(s.known_length(), Some(127));
    }

    #[test]
    fn prop3_rejects_increasing_base() {
        let inc: SharedSequence = Arc::new(crate::sequence::FnSequence::new("inc", |k| k as f64));
        assert!(gen_prop3(Prop3Spec { base: inc, k_max: 4 }).is_err());
    }

    #[test]
    fn family_values() {
        assert_eq!(gen_family(Family::PowerP { p: 1.0 }).unwrap().term(4).unwrap(), 0.25);
        assert_eq!(gen_family(Family::LogDamped).unwrap().term(1).unwrap(), 1.0);
        let zero = gen_family(Family::Constant { c: 0.0 }).unwrap();
        assert!((1..100).all(|k| zero.term(k).unwrap() == 0.0));
        let ramp = gen_family(Family::DyadicRamp { alpha: 1.0 }).unwrap();
        assert_eq!(ramp.term(4).unwrap(), 4.0 / 16.0);
        assert_eq!(ramp.term(7).unwrap(), 7.0 / 16.0);
        assert_eq!(ramp.term(8).unwrap(), 8.0 / 64.0);
        let sz = gen_family(Family::SparseZeros).unwrap();
        assert_eq!(sz.term(3).unwrap(), 0.0);
        assert_eq!(sz.term(9).unwrap(), 0.0);
        assert_eq!(sz.term(2).unwrap(), 0.5);
        assert_eq!(sz.term(10).unwrap(), 0.1);
        assert!(gen_family(Family::PowerP { p: -1.0 }).is_err());
    }
}
