//! Pointwise defect functionals, evaluated directly from the provider.

use crate::error::{Error, Result};
use crate::sequence::{check_index, SequenceProvider};
use crate::summation::CompensatedSum;

use super::{mean_window, Sides};

/// `a_k - a_{k+1}`.
pub fn delta<S: SequenceProvider + ?Sized>(seq: &S, k: u64) -> Result<f64> {
    check_index(seq, k)?;
    check_index(seq, k + 1)?;
    Ok(seq.term(k)? - seq.term(k + 1)?)
}

/// `sum_{k=n}^{2n} |a_k - a_{k+1}|`.
pub fn variation<S: SequenceProvider + ?Sized>(seq: &S, n: u64) -> Result<f64> {
    check_index(seq, n)?;
    check_index(seq, 2 * n + 1)?;
    let terms = seq.terms(n, 2 * n + 1)?;
    Ok(terms.windows(2).map(|w| (w[0] - w[1]).abs()).collect::<CompensatedSum>().value())
}

fn window_sum<S: SequenceProvider + ?Sized>(seq: &S, lo: u64, hi: u64) -> Result<f64> {
    check_index(seq, hi.max(lo))?;
    Ok(seq.terms(lo, hi)?.into_iter().collect::<CompensatedSum>().value())
}

fn check_lambda(lambda: f64) -> Result<()> {
    if lambda.is_finite() && lambda >= 2.0 {
        Ok(())
    } else {
        Err(Error::param("lambda", format!("must be >= 2, got {lambda}")))
    }
}

pub fn mvbv_sides<S: SequenceProvider + ?Sized>(seq: &S, n: u64, lambda: f64) -> Result<Sides> {
    check_lambda(lambda)?;
    let lhs = variation(seq, n)?;
    let (lo, hi) = mean_window(n, lambda);
    let rhs = window_sum(seq, lo, hi)? / n as f64;
    Ok(Sides { lhs, rhs })
}

/// Mean value bounded variation defect at `n`.
pub fn mvbv_defect<S: SequenceProvider + ?Sized>(seq: &S, n: u64, lambda: f64) -> Result<f64> {
    Ok(mvbv_sides(seq, n, lambda)?.defect())
}

pub fn gbv_sides<S: SequenceProvider + ?Sized>(seq: &S, n: u64, n0_group: u64) -> Result<Sides> {
    if n0_group == 0 {
        return Err(Error::param("n0_group", "must be >= 1"));
    }
    let lhs = variation(seq, n)?;
    check_index(seq, n + n0_group - 1)?;
    let rhs = seq
        .terms(n, n + n0_group - 1)?
        .into_iter()
        .fold(0.0_f64, f64::max);
    Ok(Sides { lhs, rhs })
}

/// Group bounded variation defect, with the half-open group `n <= k < n + N0`.
pub fn gbv_defect<S: SequenceProvider + ?Sized>(seq: &S, n: u64, n0_group: u64) -> Result<f64> {
    Ok(gbv_sides(seq, n, n0_group)?.defect())
}

pub fn nbv_sides<S: SequenceProvider + ?Sized>(seq: &S, n: u64) -> Result<Sides> {
    let lhs = variation(seq, n)?;
    let rhs = seq.term(n)? + seq.term(2 * n)?;
    Ok(Sides { lhs, rhs })
}

/// Non-onesided bounded variation defect.
pub fn nbv_defect<S: SequenceProvider + ?Sized>(seq: &S, n: u64) -> Result<f64> {
    Ok(nbv_sides(seq, n)?.defect())
}

/// A tail defect computed up to a finite horizon.
///
/// The true defect involves the infinite tail, so `value` is only a lower
/// bound of it: a rejection is sound, an acceptance is horizon-relative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncatedDefect {
    pub value: f64,
    pub sides: Sides,
    pub horizon: u64,
}

impl TruncatedDefect {
    pub const IS_LOWER_BOUND: bool = true;
}

fn check_horizon<S: SequenceProvider + ?Sized>(seq: &S, n: u64, horizon: u64) -> Result<()> {
    check_index(seq, n)?;
    check_index(seq, horizon)?;
    if horizon < n {
        return Err(Error::param("horizon", format!("horizon {horizon} is below n = {n}")));
    }
    Ok(())
}

/// Rest bounded variation defect `sum_{k=n}^{K-1} |a_k - a_{k+1}| / a_n`.
pub fn rbv_defect<S: SequenceProvider + ?Sized>(
    seq: &S,
    n: u64,
    horizon: u64,
) -> Result<TruncatedDefect> {
    check_horizon(seq, n, horizon)?;
    let terms = seq.terms(n, horizon)?;
    let lhs = terms.windows(2).map(|w| (w[0] - w[1]).abs()).collect::<CompensatedSum>().value();
    let sides = Sides { lhs, rhs: terms[0] };
    Ok(TruncatedDefect { value: sides.defect(), sides, horizon })
}

/// Almost-monotone defect `max_{n <= k <= K} a_k / a_n`.
pub fn ams_defect<S: SequenceProvider + ?Sized>(
    seq: &S,
    n: u64,
    horizon: u64,
) -> Result<TruncatedDefect> {
    check_horizon(seq, n, horizon)?;
    let a_n = seq.term(n)?;
    let mut peak = 0.0_f64;
    for k in n..=horizon {
        peak = peak.max(seq.term(k)?);
    }
    let sides = Sides { lhs: peak, rhs: a_n };
    Ok(TruncatedDefect { value: sides.defect(), sides, horizon })
}

/// Outcome of a monotonicity check on a window.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct MonotoneCheck {
    pub holds: bool,
    /// First `n` with `a_{n+1}/w(n+1) > a_n/w(n)`.
    pub first_violation: Option<u64>,
}

/// Relative slack allowed when comparing weighted terms, covering the
/// rounding of `a_n / w(n)`.
pub(crate) const WEIGHTED_SLACK: f64 = 1e-12;

pub(crate) fn weighted_increase(prev: f64, next: f64, slack: f64) -> bool {
    next > prev * (1.0 + slack)
}

fn check_window(n_min: u64, n_max: u64) -> Result<()> {
    if n_min == 0 || n_max < n_min {
        return Err(Error::InvalidWindow {
            n_min,
            n_max,
            reason: "need 1 <= n_min <= n_max".into(),
        });
    }
    Ok(())
}

/// Checks that `a_n / n^alpha` is non-increasing on `window`.
pub fn cqms_check<S: SequenceProvider + ?Sized>(
    seq: &S,
    alpha: f64,
    window: (u64, u64),
) -> Result<MonotoneCheck> {
    if !(alpha.is_finite() && alpha >= 0.0) {
        return Err(Error::param("alpha", format!("must be >= 0, got {alpha}")));
    }
    let (n_min, n_max) = window;
    check_window(n_min, n_max)?;
    let weighted = |k: u64| -> Result<f64> { Ok(seq.term(k)? / (k as f64).powf(alpha)) };
    let slack = if alpha == 0.0 { 0.0 } else { WEIGHTED_SLACK };
    let mut prev = weighted(n_min)?;
    for n in n_min..n_max {
        let next = weighted(n + 1)?;
        if weighted_increase(prev, next, slack) {
            return Ok(MonotoneCheck { holds: false, first_violation: Some(n) });
        }
        prev = next;
    }
    Ok(MonotoneCheck { holds: true, first_violation: None })
}

/// Outcome of an O-regularly varying quasimonotone check.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct RegulatorCheck {
    pub holds: bool,
    pub first_violation: Option<u64>,
    /// `max R(2n)/R(n)` over the window: the boundedness witness for `R`.
    pub sup_doubling_ratio: f64,
}

/// Validates the regulator `R` on `[n_min, 2 n_max]`: positive and non-decreasing.
pub(crate) fn regulator_values<R: SequenceProvider + ?Sized>(
    regulator: &R,
    n_min: u64,
    n_max: u64,
) -> Result<Vec<f64>> {
    let values = regulator.terms(n_min, 2 * n_max)?;
    if let Some(i) = values.iter().position(|&r| r <= 0.0) {
        return Err(Error::param(
            "regulator",
            format!("R({}) must be positive", n_min + i as u64),
        ));
    }
    if let Some(i) = values.windows(2).position(|w| w[1] < w[0]) {
        return Err(Error::RegulatorDecreasing {
            index: n_min + i as u64,
            current: values[i],
            next_value: values[i + 1],
        });
    }
    Ok(values)
}

/// Checks that `a_n / R(n)` is non-increasing on `window` and measures `R(2n)/R(n)`.
pub fn rvqms_check<S, R>(seq: &S, regulator: &R, window: (u64, u64)) -> Result<RegulatorCheck>
where
    S: SequenceProvider + ?Sized,
    R: SequenceProvider + ?Sized,
{
    let (n_min, n_max) = window;
    check_window(n_min, n_max)?;
    let r = regulator_values(regulator, n_min, n_max)?;
    let r_at = |k: u64| r[(k - n_min) as usize];
    let sup_doubling_ratio = (n_min..=n_max)
        .map(|n| r_at(2 * n) / r_at(n))
        .fold(0.0_f64, f64::max);
    let mut prev = seq.term(n_min)? / r_at(n_min);
    for n in n_min..n_max {
        let next = seq.term(n + 1)? / r_at(n + 1);
        if weighted_increase(prev, next, WEIGHTED_SLACK) {
            return Ok(RegulatorCheck {
                holds: false,
                first_violation: Some(n),
                sup_doubling_ratio,
            });
        }
        prev = next;
    }
    Ok(RegulatorCheck { holds: true, first_violation: None, sup_doubling_ratio })
}

/// Running tail supremum of `n a_n`: for each checkpoint `n0`, the value
/// `max_{n0 <= n <= K} n a_n`.
pub fn na_n_probe<S: SequenceProvider + ?Sized>(
    seq: &S,
    checkpoints: &[u64],
    horizon: u64,
) -> Result<Vec<(u64, f64)>> {
    let Some(&first) = checkpoints.iter().min() else {
        return Ok(Vec::new());
    };
    check_horizon(seq, first, horizon)?;
    let mut order: Vec<usize> = (0..checkpoints.len()).collect();
    order.sort_by_key(|&i| std::cmp::Reverse(checkpoints[i]));
    let mut out = vec![(0, 0.0); checkpoints.len()];
    let mut running = 0.0_f64;
    let mut k = horizon + 1;
    for i in order {
        let n0 = checkpoints[i];
        if n0 > horizon {
            return Err(Error::param("checkpoints", format!("{n0} exceeds horizon {horizon}")));
        }
        while k > n0 {
            k -= 1;
            running = running.max(k as f64 * seq.term(k)?);
        }
        out[i] = (n0, running);
    }
    Ok(out)
}

/// `(n a_n, sum_{k=[n/(2 lambda)]}^{[lambda n]} a_k)`; the lower index is
/// clamped at 1 because `a_0 = 0`.
pub fn na_n_window_sides<S: SequenceProvider + ?Sized>(
    seq: &S,
    n: u64,
    lambda: f64,
) -> Result<(f64, f64)> {
    check_lambda(lambda)?;
    let lo = (((n as f64) / (2.0 * lambda)).floor() as u64).max(1);
    let hi = ((n as f64) * lambda).floor() as u64;
    Ok((n as f64 * seq.term(n)?, window_sum(seq, lo, hi)?))
}

/// Whether `n a_n <= c * sum_{k=[n/(2 lambda)]}^{[lambda n]} a_k`.
pub fn lemma8_bound_check<S: SequenceProvider + ?Sized>(
    seq: &S,
    n: u64,
    lambda: f64,
    c: f64,
) -> Result<bool> {
    let (weighted, mass) = na_n_window_sides(seq, n, lambda)?;
    Ok(weighted <= c * mass)
}
