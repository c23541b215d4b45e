//! Two-sided complex trigonometric series with sector-valued coefficients.
//!
//! Coefficients `c_k`, `k != 0`, are checked against the closed sector
//! `K(theta0) = { z : |arg z| <= theta0 }` with `0 <= theta0 < pi/2`;
//! `z = 0` is treated as a member. `c_0` defaults to 0.
//!
//! The tail split used here is
//! `c_k e^{ikx} + c_{-k} e^{-ikx} = (c_k + c_{-k}) e^{-ikx} + 2i c_k sin(kx)`,
//! so the symmetric part carries `e^{-ikx}`.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::seqclass::{defect_ratio, mean_window, Sides};
use crate::summation::CompensatedSum;

/// Read-only access to two-sided complex coefficients.
pub trait ComplexSequenceProvider: Send + Sync {
    /// `c_k` for `k != 0`.
    fn term(&self, k: i64) -> Result<Complex64>;

    /// Largest valid `|k|`, or `None` if unbounded.
    fn known_bound(&self) -> Option<u64>;

    fn theta0(&self) -> f64;

    /// `c_0`; zero unless supplied.
    fn constant_term(&self) -> Complex64 {
        Complex64::new(0.0, 0.0)
    }

    fn label(&self) -> &str;
}

fn check_theta0(theta0: f64) -> Result<()> {
    if (0.0..FRAC_PI_2).contains(&theta0) {
        Ok(())
    } else {
        Err(Error::param("theta0", format!("must lie in [0, pi/2), got {theta0}")))
    }
}

fn check_k<C: ComplexSequenceProvider + ?Sized>(cseq: &C, k: i64) -> Result<()> {
    if k == 0 {
        return Err(Error::ZeroIndex);
    }
    match cseq.known_bound() {
        Some(bound) if k.unsigned_abs() > bound => Err(Error::OutOfRange {
            label: cseq.label().to_string(),
            index: k.unsigned_abs(),
            len: bound,
        }),
        _ => Ok(()),
    }
}

/// Finite coefficient table; indices within the bound that were not given are 0.
#[derive(Clone, PartialEq)]
pub struct ExplicitComplexSequence {
    coeffs: BTreeMap<i64, Complex64>,
    c0: Complex64,
    bound: u64,
    theta0: f64,
    label: String,
}

impl ExplicitComplexSequence {
    /// `triples` are `(k, c_k)`; `k = 0` sets `c_0`. The bound is the largest `|k|`.
    pub fn new(
        triples: impl IntoIterator<Item = (i64, Complex64)>,
        theta0: f64,
        label: impl Into<String>,
    ) -> Result<Self> {
        check_theta0(theta0)?;
        let label = label.into();
        let mut coeffs = BTreeMap::new();
        let mut c0 = Complex64::new(0.0, 0.0);
        for (k, c) in triples {
            if !(c.re.is_finite() && c.im.is_finite()) {
                return Err(Error::InvalidTerm { label, index: k.unsigned_abs(), value: c.norm() });
            }
            if k == 0 {
                c0 = c;
            } else {
                coeffs.insert(k, c);
            }
        }
        let bound = coeffs.keys().map(|k| k.unsigned_abs()).max().unwrap_or(0);
        Ok(Self { coeffs, c0, bound, theta0, label })
    }

    /// Coefficients `c_k = pos[k-1]`, `c_{-k} = neg[k-1]`.
    pub fn from_halves(pos: &[Complex64], neg: &[Complex64], theta0: f64, label: impl Into<String>) -> Result<Self> {
        let triples = pos
            .iter()
            .enumerate()
            .map(|(i, &c)| (i as i64 + 1, c))
            .chain(neg.iter().enumerate().map(|(i, &c)| (-(i as i64) - 1, c)));
        Self::new(triples, theta0, label)
    }
}

impl fmt::Debug for ExplicitComplexSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ExplicitComplexSequence")
            .field("label", &self.label)
            .field("bound", &self.bound)
            .field("theta0", &self.theta0)
            .finish()
    }
}

impl ComplexSequenceProvider for ExplicitComplexSequence {
    fn term(&self, k: i64) -> Result<Complex64> {
        check_k(self, k)?;
        Ok(self.coeffs.get(&k).copied().unwrap_or_default())
    }
    fn known_bound(&self) -> Option<u64> {
        Some(self.bound)
    }
    fn theta0(&self) -> f64 {
        self.theta0
    }
    fn constant_term(&self) -> Complex64 {
        self.c0
    }
    fn label(&self) -> &str {
        &self.label
    }
}

/// Closed-form two-sided coefficients.
pub struct FnComplexSequence<F> {
    f: F,
    theta0: f64,
    bound: Option<u64>,
    label: String,
}

impl<F> FnComplexSequence<F>
where
    F: Fn(i64) -> Complex64 + Send + Sync,
{
    pub fn new(label: impl Into<String>, theta0: f64, f: F) -> Result<Self> {
        check_theta0(theta0)?;
        Ok(Self { f, theta0, bound: None, label: label.into() })
    }

    pub fn with_bound(mut self, bound: u64) -> Self {
        self.bound = Some(bound);
        self
    }
}

impl<F> ComplexSequenceProvider for FnComplexSequence<F>
where
    F: Fn(i64) -> Complex64 + Send + Sync,
{
    fn term(&self, k: i64) -> Result<Complex64> {
        check_k(self, k)?;
        Ok((self.f)(k))
    }
    fn known_bound(&self) -> Option<u64> {
        self.bound
    }
    fn theta0(&self) -> f64 {
        self.theta0
    }
    fn label(&self) -> &str {
        &self.label
    }
}

/// Angular slack absorbing the rounding of `arg` for points built on the boundary ray.
const ARG_SLACK: f64 = 4.0 * f64::EPSILON;

/// Whether `z` lies in the closed sector `|arg z| <= theta0` (zero included).
pub fn sector_check(z: Complex64, theta0: f64) -> Result<bool> {
    check_theta0(theta0)?;
    Ok(in_sector(z, theta0))
}

fn in_sector(z: Complex64, theta0: f64) -> bool {
    z == Complex64::new(0.0, 0.0) || z.arg().abs() <= theta0 + ARG_SLACK * theta0.max(1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SectorCheck {
    pub holds: bool,
    /// First `n` where `c_n` or `c_n + c_{-n}` leaves the sector.
    pub first_violation: Option<u64>,
}

/// Checks `c_n` and `c_n + c_{-n}` against the sector for `1 <= n <= n_max`.
pub fn cond_d1_check<C: ComplexSequenceProvider + ?Sized>(cseq: &C, n_max: u64) -> Result<SectorCheck> {
    let theta0 = cseq.theta0();
    check_theta0(theta0)?;
    for n in 1..=n_max as i64 {
        let c = cseq.term(n)?;
        let sym = c + cseq.term(-n)?;
        if !(in_sector(c, theta0) && in_sector(sym, theta0)) {
            return Ok(SectorCheck { holds: false, first_violation: Some(n as u64) });
        }
    }
    Ok(SectorCheck { holds: true, first_violation: None })
}

pub fn cond_d2_sides<C: ComplexSequenceProvider + ?Sized>(cseq: &C, n: u64, lambda: f64) -> Result<Sides> {
    if !(lambda.is_finite() && lambda >= 2.0) {
        return Err(Error::param("lambda", format!("must be >= 2, got {lambda}")));
    }
    if n == 0 {
        return Err(Error::ZeroIndex);
    }
    let n = n as i64;
    let mut variation = CompensatedSum::new();
    let mut prev = cseq.term(n)?;
    for k in n + 1..=2 * n + 1 {
        let cur = cseq.term(k)?;
        variation.add((prev - cur).norm());
        prev = cur;
    }
    let (lo, hi) = mean_window(n as u64, lambda);
    let mass: CompensatedSum = (lo as i64..=hi as i64)
        .map(|k| cseq.term(k).map(|c| c.norm()))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .collect();
    Ok(Sides { lhs: variation.value(), rhs: mass.value() / n as f64 })
}

/// Complex mean value bounded variation defect at `n`.
pub fn cond_d2_defect<C: ComplexSequenceProvider + ?Sized>(cseq: &C, n: u64, lambda: f64) -> Result<f64> {
    let s = cond_d2_sides(cseq, n, lambda)?;
    Ok(defect_ratio(s.lhs, s.rhs))
}

/// `|z| / Re z` for nonzero `z` in the sector; lies in `[1, 1/cos theta0]`.
pub fn lemma12_ratio(z: Complex64, theta0: f64) -> Result<f64> {
    check_theta0(theta0)?;
    if z == Complex64::new(0.0, 0.0) || !in_sector(z, theta0) {
        return Err(Error::OutsideSector { re: z.re, im: z.im, theta0 });
    }
    Ok(z.norm() / z.re)
}

/// `(n0, max_{n0 <= n <= K} n |c_n|)` for each checkpoint.
pub fn cond_d3_probe<C: ComplexSequenceProvider + ?Sized>(
    cseq: &C,
    checkpoints: &[u64],
    horizon: u64,
) -> Result<Vec<(u64, f64)>> {
    check_k(cseq, horizon as i64)?;
    let mut order: Vec<usize> = (0..checkpoints.len()).collect();
    order.sort_by_key(|&i| std::cmp::Reverse(checkpoints[i]));
    let mut out = vec![(0, 0.0); checkpoints.len()];
    let mut running = 0.0_f64;
    let mut k = horizon + 1;
    for i in order {
        let n0 = checkpoints[i];
        if n0 == 0 || n0 > horizon {
            return Err(Error::param("checkpoints", format!("{n0} must lie in 1..={horizon}")));
        }
        while k > n0 {
            k -= 1;
            running = running.max(k as f64 * cseq.term(k as i64)?.norm());
        }
        out[i] = (n0, running);
    }
    Ok(out)
}

/// Partial sums of `sum |c_n + c_{-n}|` with a dyadic Cauchy-tail diagnostic.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SymmetricSumReport {
    pub n_max: u64,
    pub partial_sum: f64,
    /// `(lo, hi, sum_{lo <= n < hi} |c_n + c_{-n}|)` over complete dyadic blocks.
    pub dyadic_blocks: Vec<(u64, u64, f64)>,
    /// Largest block sum over the upper half of the complete blocks.
    pub max_tail_block: f64,
    /// Set when at least three blocks exist and the last block keeps at
    /// least half the largest block mass.
    pub flagged_divergent: bool,
}

pub fn cond_d4_partial<C: ComplexSequenceProvider + ?Sized>(cseq: &C, n_max: u64) -> Result<SymmetricSumReport> {
    let mut total = CompensatedSum::new();
    let mut blocks = Vec::new();
    let mut block = CompensatedSum::new();
    let mut block_lo = 1u64;
    for n in 1..=n_max {
        let v = (cseq.term(n as i64)? + cseq.term(-(n as i64))?).norm();
        total.add(v);
        block.add(v);
        if n + 1 == 2 * block_lo {
            blocks.push((block_lo, n + 1, block.value()));
            block = CompensatedSum::new();
            block_lo = n + 1;
        }
    }
    let max_tail_block = blocks[blocks.len() / 2..]
        .iter()
        .map(|b| b.2)
        .fold(0.0_f64, f64::max);
    let max_block = blocks.iter().map(|b| b.2).fold(0.0_f64, f64::max);
    let flagged_divergent = blocks.len() >= 3 && blocks.last().map_or(false, |b| b.2 >= 0.5 * max_block && b.2 > 0.0);
    Ok(SymmetricSumReport {
        n_max,
        partial_sum: total.value(),
        dyadic_blocks: blocks,
        max_tail_block,
        flagged_divergent,
    })
}

#[derive(Default)]
struct ComplexAcc {
    re: CompensatedSum,
    im: CompensatedSum,
}

impl ComplexAcc {
    fn add(&mut self, z: Complex64) {
        self.re.add(z.re);
        self.im.add(z.im);
    }
    fn value(&self) -> Complex64 {
        Complex64::new(self.re.value(), self.im.value())
    }
}

fn unit(k: f64, x: f64) -> Complex64 {
    let (s, c) = (k * x).sin_cos();
    Complex64::new(c, s)
}

/// `S_n(x) = sum_{k=-n}^{n} c_k e^{ikx}`.
pub fn complex_partial_sum<C: ComplexSequenceProvider + ?Sized>(cseq: &C, n: u64, x: f64) -> Result<Complex64> {
    let mut acc = ComplexAcc::default();
    acc.add(cseq.constant_term());
    for k in 1..=n as i64 {
        let e = unit(k as f64, x);
        acc.add(cseq.term(k)? * e);
        acc.add(cseq.term(-k)? * e.conj());
    }
    Ok(acc.value())
}

/// `sum_{k=N}^{M} (c_k e^{ikx} + c_{-k} e^{-ikx})`, evaluated directly.
pub fn two_sided_block_sum<C: ComplexSequenceProvider + ?Sized>(cseq: &C, lo: u64, hi: u64, x: f64) -> Result<Complex64> {
    if lo == 0 {
        return Err(Error::ZeroIndex);
    }
    let mut acc = ComplexAcc::default();
    for k in lo as i64..=hi as i64 {
        let e = unit(k as f64, x);
        acc.add(cseq.term(k)? * e);
        acc.add(cseq.term(-k)? * e.conj());
    }
    Ok(acc.value())
}

/// The two parts of the block sum `sum_{k=N}^{M} (c_k e^{ikx} + c_{-k} e^{-ikx}) = I1 + 2i I2`
/// with `I1 = sum (c_k + c_{-k}) e^{-ikx}` and `I2 = sum c_k sin(kx)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailSplit {
    pub symmetric: Complex64,
    pub sine: Complex64,
}

impl TailSplit {
    pub fn reconstruct(&self) -> Complex64 {
        self.symmetric + Complex64::new(0.0, 2.0) * self.sine
    }
}

pub fn lemma14_split<C: ComplexSequenceProvider + ?Sized>(cseq: &C, lo: u64, hi: u64, x: f64) -> Result<TailSplit> {
    if lo == 0 {
        return Err(Error::ZeroIndex);
    }
    let mut symmetric = ComplexAcc::default();
    let mut sine = ComplexAcc::default();
    for k in lo as i64..=hi as i64 {
        let c = cseq.term(k)?;
        let (s, cos) = (k as f64 * x).sin_cos();
        symmetric.add((c + cseq.term(-k)?) * Complex64::new(cos, -s));
        sine.add(c * s);
    }
    Ok(TailSplit { symmetric: symmetric.value(), sine: sine.value() })
}

/// The antisymmetric window sum at `x0 = pi / (2 lambda n)` over
/// `[[n/(2 lambda)], [lambda n]]` (lower end clamped at 1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowPhases {
    pub x0: f64,
    pub window: (u64, u64),
    /// `|sum c_k (e^{ikx0} - e^{-ikx0})|`.
    pub antisymmetric_modulus: f64,
    /// `2 sum Re(c_k) sin(k x0)`.
    pub real_sine_mass: f64,
    /// `min sin(k x0)` over the window.
    pub min_phase_sine: f64,
}

pub fn window_phases<C: ComplexSequenceProvider + ?Sized>(cseq: &C, n: u64, lambda: f64) -> Result<WindowPhases> {
    if !(lambda.is_finite() && lambda >= 2.0) {
        return Err(Error::param("lambda", format!("must be >= 2, got {lambda}")));
    }
    if n == 0 {
        return Err(Error::ZeroIndex);
    }
    let x0 = PI / (2.0 * lambda * n as f64);
    let lo = (((n as f64) / (2.0 * lambda)).floor() as u64).max(1);
    let hi = ((n as f64) * lambda).floor() as u64;
    let mut anti = ComplexAcc::default();
    let mut mass = CompensatedSum::new();
    let mut min_phase_sine = f64::INFINITY;
    for k in lo..=hi {
        let c = cseq.term(k as i64)?;
        let s = (k as f64 * x0).sin();
        anti.add(c * Complex64::new(0.0, 2.0 * s));
        mass.add(2.0 * c.re * s);
        min_phase_sine = min_phase_sine.min(s);
    }
    Ok(WindowPhases {
        x0,
        window: (lo, hi),
        antisymmetric_modulus: anti.value().norm(),
        real_sine_mass: mass.value(),
        min_phase_sine,
    })
}

/// Largest `|S_n(x)|` differences are not needed here; this maps a real
/// sine-series coefficient sequence to the odd complex one with
/// `c_k = a_k / (2i)`, `c_{-k} = -c_k`, whose two-sided sums equal the sine sums.
pub fn odd_embedding<S>(seq: S, theta0: f64) -> Result<impl ComplexSequenceProvider>
where
    S: crate::sequence::SequenceProvider,
{
    check_theta0(theta0)?;
    Ok(OddEmbedding { seq, theta0, label: String::new() }.labelled())
}

struct OddEmbedding<S> {
    seq: S,
    theta0: f64,
    label: String,
}

impl<S: crate::sequence::SequenceProvider> OddEmbedding<S> {
    fn labelled(mut self) -> Self {
        self.label = format!("odd({})", self.seq.label());
        self
    }
}

impl<S: crate::sequence::SequenceProvider> ComplexSequenceProvider for OddEmbedding<S> {
    fn term(&self, k: i64) -> Result<Complex64> {
        check_k(self, k)?;
        let c = Complex64::new(0.0, -0.5 * self.seq.term(k.unsigned_abs())?);
        Ok(if k > 0 { c } else { -c })
    }
    fn known_bound(&self) -> Option<u64> {
        self.seq.known_length()
    }
    fn theta0(&self) -> f64 {
        self.theta0
    }
    fn label(&self) -> &str {
        &self.label
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn sector_examples() {
        assert!(sector_check(c(1.0, 0.0), 0.0).unwrap());
        assert!(!sector_check(c(0.0, 1.0), PI / 4.0).unwrap());
        for theta0 in [0.0, PI / 6.0, PI / 4.0, 0.49 * PI] {
            assert!(sector_check(Complex64::from_polar(1.0, theta0), theta0).unwrap());
            assert!(sector_check(Complex64::from_polar(1.0, -theta0), theta0).unwrap());
            assert!(!sector_check(Complex64::from_polar(1.0, theta0 + 1e-9), theta0).unwrap());
        }
        assert!(sector_check(c(0.0, 0.0), 0.0).unwrap());
        assert!(sector_check(c(1.0, 0.0), FRAC_PI_2).is_err());
    }

    #[test]
    fn d1_examples() {
        let real = FnComplexSequence::new("real", 0.0, |k| if k > 0 { c(1.0 / k as f64, 0.0) } else { c(0.0, 0.0) }).unwrap();
        assert!(cond_d1_check(&real, 100).unwrap().holds);
        let tilted = FnComplexSequence::new("tilt", PI / 4.0, |_| Complex64::from_polar(1.0, PI / 3.0)).unwrap();
        assert_eq!(cond_d1_check(&tilted, 10).unwrap(), SectorCheck { holds: false, first_violation: Some(1) });
        let conj = FnComplexSequence::new("conj", PI / 5.0, |k| {
            let z = Complex64::from_polar(1.0 / k.unsigned_abs() as f64, PI / 6.0);
            if k > 0 { z } else { z.conj() }
        })
        .unwrap();
        assert!(cond_d1_check(&conj, 100).unwrap().holds);
    }

    #[test]
    fn lemma12_examples() {
        assert_eq!(lemma12_ratio(c(2.5, 0.0), 0.0).unwrap(), 1.0);
        assert_eq!(lemma12_ratio(c(1.0, 0.0), PI / 4.0).unwrap(), 1.0);
        for theta0 in [PI / 6.0, PI / 4.0, 0.49 * PI] {
            let r = lemma12_ratio(Complex64::from_polar(1.0, theta0), theta0).unwrap();
            assert!((r - 1.0 / theta0.cos()).abs() <= 1e-14 / theta0.cos());
        }
        assert!(lemma12_ratio(c(0.0, 0.0), 0.3).is_err());
        assert!(lemma12_ratio(c(0.0, 1.0), 0.3).is_err());
    }

    #[test]
    fn d2_examples() {
        let constant = FnComplexSequence::new("c", 0.5, |_| c(0.3, 0.1)).unwrap();
        assert_eq!(cond_d2_defect(&constant, 10, 2.0).unwrap(), 0.0);
        let h = FnComplexSequence::new("h", 0.0, |k| c(1.0 / k.unsigned_abs() as f64, 0.0)).unwrap();
        let expected = (0.25 - 1.0 / 9.0) / ((2..=8).map(|k| 1.0 / k as f64).sum::<f64>() / 4.0);
        assert!((cond_d2_defect(&h, 4, 2.0).unwrap() - expected).abs() < 1e-14);
    }

    #[test]
    fn d4_examples() {
        let odd = FnComplexSequence::new("odd", 0.0, |k| if k > 0 { c(1.0 / k as f64, 0.0) } else { c(1.0 / k as f64, 0.0) }).unwrap();
        let r = cond_d4_partial(&odd, 1000).unwrap();
        assert_eq!(r.partial_sum, 0.0);
        assert!(!r.flagged_divergent);
        let sq = FnComplexSequence::new("sq", 0.0, |k| if k > 0 { c(1.0 / (k * k) as f64, 0.0) } else { c(0.0, 0.0) }).unwrap();
        let r = cond_d4_partial(&sq, 1 << 14).unwrap();
        assert!((r.partial_sum - PI * PI / 6.0).abs() < 1e-4);
        assert!(!r.flagged_divergent);
        assert!(r.max_tail_block < 5e-3);
        let harm = FnComplexSequence::new("h", 0.0, |k| if k > 0 { c(1.0 / k as f64, 0.0) } else { c(0.0, 0.0) }).unwrap();
        let r = cond_d4_partial(&harm, 1 << 14).unwrap();
        assert!(r.flagged_divergent);
        let last = r.dyadic_blocks.last().unwrap().2;
        assert!((last - 2f64.ln()).abs() < 1e-3);
    }

    #[test]
    fn partial_sum_examples() {
        let zero = FnComplexSequence::new("0", 0.0, |_| c(0.0, 0.0)).unwrap();
        assert_eq!(complex_partial_sum(&zero, 50, 0.4).unwrap(), c(0.0, 0.0));
        let e1 = ExplicitComplexSequence::new([(1, c(1.0, 0.0))], 0.0, "e1").unwrap();
        let s = complex_partial_sum(&e1, 1, PI / 2.0).unwrap();
        assert!((s - c(0.0, 1.0)).norm() < 1e-15);
    }

    #[test]
    fn split_with_odd_coefficients_has_no_symmetric_part() {
        let odd = FnComplexSequence::new("odd", 0.2, |k| {
            let z = c(1.0 / k.unsigned_abs() as f64, 0.3 / k.unsigned_abs() as f64);
            if k > 0 { z } else { -z }
        })
        .unwrap();
        let split = lemma14_split(&odd, 3, 40, 0.7).unwrap();
        assert_eq!(split.symmetric, c(0.0, 0.0));
        let direct = two_sided_block_sum(&odd, 3, 40, 0.7).unwrap();
        assert!((split.reconstruct() - direct).norm() < 1e-14);
    }

    #[test]
    fn explicit_from_triples() {
        let s = ExplicitComplexSequence::new([(1, c(1.0, 0.0)), (-3, c(0.0, 2.0)), (0, c(5.0, 0.0))], 0.1, "t").unwrap();
        assert_eq!(s.known_bound(), Some(3));
        assert_eq!(s.term(2).unwrap(), c(0.0, 0.0));
        assert_eq!(s.term(-3).unwrap(), c(0.0, 2.0));
        assert_eq!(s.constant_term(), c(5.0, 0.0));
        assert!(s.term(4).is_err());
        assert!(ExplicitComplexSequence::new([], 2.0, "bad").is_err());
    }
}
