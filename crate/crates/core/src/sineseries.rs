//! Sine-series partial sums, kernel bounds and uniform-convergence probes.
//!
//! Partial sums `S_n(x) = sum_{k=1}^n a_k sin(kx)` are evaluated with the
//! three-term recurrence `sin((k+1)x) = 2 cos(x) sin(kx) - sin((k-1)x)`,
//! reseeded from `f64::sin` every [`RESEED_INTERVAL`] steps, and accumulated
//! with compensation. An error introduced at one step of the recurrence is
//! propagated by `sin((k-i)x)/sin(x)`, bounded by `k - i`, so reseeding keeps
//! the per-term error near `RESEED_INTERVAL^2 * eps` for every `x`.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::generators::BlockSchedule;
use crate::seqclass::{certify_mvbvs_search, na_n_probe, Certificate};
use crate::sequence::{check_index, SequenceProvider};
use crate::summation::CompensatedSum;

pub const RESEED_INTERVAL: usize = 256;

/// Terms per parallel chunk of a long partial sum.
const CHUNK: u64 = 1 << 16;

/// Upper limit on the uniform part of a probe grid.
pub const MAX_GRID_POINTS: usize = 1 << 16;

/// Number of leading grid points `pi i / (4m)` always kept after thinning.
const GRID_HEAD: u64 = 64;

pub(crate) fn check_open_interval(x: f64) -> Result<()> {
    if x > 0.0 && x < PI {
        Ok(())
    } else {
        Err(Error::PointOutsideInterval(x))
    }
}

/// `sum_i coeffs[i] sin((first + i) x)` by reseeded recurrence.
pub fn sine_sum_slice(coeffs: &[f64], first: u64, x: f64) -> CompensatedSum {
    let two_cos = 2.0 * x.cos();
    let mut acc = CompensatedSum::new();
    for (block, chunk) in coeffs.chunks(RESEED_INTERVAL).enumerate() {
        let k0 = first + (block * RESEED_INTERVAL) as u64;
        let mut prev = ((k0 - 1) as f64 * x).sin();
        let mut cur = ((k0 as f64) * x).sin();
        for &a in chunk {
            acc.add(a * cur);
            let next = two_cos * cur - prev;
            prev = cur;
            cur = next;
        }
    }
    acc
}

/// `sum_{k=lo}^{hi} a_k sin(kx)` for any `x`; chunks are evaluated in
/// parallel and merged in index order, so the result is deterministic.
pub fn sine_sum_range<S: SequenceProvider + ?Sized>(seq: &S, lo: u64, hi: u64, x: f64) -> Result<f64> {
    if hi < lo {
        return Ok(0.0);
    }
    check_index(seq, lo)?;
    check_index(seq, hi)?;
    let n_chunks = (hi - lo) / CHUNK + 1;
    let parts: Vec<CompensatedSum> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let start = lo + c * CHUNK;
            let end = (start + CHUNK - 1).min(hi);
            let coeffs = seq.terms(start, end)?;
            Ok(sine_sum_slice(&coeffs, start, x))
        })
        .collect::<Result<_>>()?;
    let mut total = CompensatedSum::new();
    for p in &parts {
        total.merge(p);
    }
    Ok(total.value())
}

/// `S_n(x) = sum_{k=1}^n a_k sin(kx)` for `x` in `(0, pi)`.
pub fn partial_sum<S: SequenceProvider + ?Sized>(seq: &S, n: u64, x: f64) -> Result<f64> {
    check_open_interval(x)?;
    sine_sum_range(seq, 1, n, x)
}

/// Conjugate Dirichlet kernel `D_n(x) = sum_{k=1}^n sin(kx)` in closed form,
/// for `0 < x < 2 pi`.
pub fn dirichlet_sine(n: u64, x: f64) -> Result<f64> {
    if !(x > 0.0 && x < 2.0 * PI) {
        return Err(Error::param("x", format!("must lie in (0, 2 pi), got {x}")));
    }
    let nf = n as f64;
    Ok((0.5 * nf * x).sin() * (0.5 * (nf + 1.0) * x).sin() / (0.5 * x).sin())
}

/// The kernel bound `pi / x`, valid for `0 < x <= pi`.
pub fn dirichlet_bound(x: f64) -> Result<f64> {
    if !(x > 0.0 && x <= PI) {
        return Err(Error::param("x", format!("must lie in (0, pi], got {x}")));
    }
    Ok(PI / x)
}

/// Summation-by-parts bound for `|sum_{k=N}^{M} a_k sin(kx)|`:
/// `(pi/x) (sum_{k=N}^{M-1} |a_k - a_{k+1}| + a_N + a_M)`.
pub fn abel_tail_bound<S: SequenceProvider + ?Sized>(seq: &S, lo: u64, hi: u64, x: f64) -> Result<f64> {
    if lo >= hi {
        return Err(Error::param("N", format!("need N < M, got N = {lo}, M = {hi}")));
    }
    check_open_interval(x)?;
    check_index(seq, lo)?;
    check_index(seq, hi)?;
    let terms = seq.terms(lo, hi)?;
    let mut acc: CompensatedSum = terms.windows(2).map(|w| (w[0] - w[1]).abs()).collect();
    acc.add(terms[0]);
    acc.add(terms[terms.len() - 1]);
    Ok(PI / x * acc.value())
}

/// `x sum_{k=lo}^{hi} k a_k`, which dominates `|sum_{k=lo}^{hi} a_k sin(kx)|`
/// because `|sin(kx)| <= kx`.
pub fn small_angle_bound<S: SequenceProvider + ?Sized>(seq: &S, lo: u64, hi: u64, x: f64) -> Result<f64> {
    if hi < lo {
        return Ok(0.0);
    }
    check_index(seq, lo)?;
    check_index(seq, hi)?;
    let terms = seq.terms(lo, hi)?;
    let acc: CompensatedSum = terms
        .iter()
        .zip(lo..)
        .map(|(a, k)| k as f64 * a)
        .collect();
    Ok(x * acc.value())
}

/// Probe grid for the pair `(n, m)`: `pi i / (4m)` for `1 <= i < 4m`,
/// thinned by a uniform stride to at most [`MAX_GRID_POINTS`], with the
/// first 64 points kept unthinned, plus `pi / (2 nu)` for `nu` in `{n, m}`
/// and `extra`. Sorted, deduplicated, strictly inside `(0, pi)`.
pub fn pair_grid(n: u64, m: u64, extra: &[u64]) -> Vec<f64> {
    let count = 4 * m - 1;
    let stride = count.div_ceil(MAX_GRID_POINTS as u64).max(1);
    let denom = 4.0 * m as f64;
    let mut grid: Vec<f64> = (1..4 * m)
        .filter(|&i| i <= GRID_HEAD || (i - 1) % stride == 0)
        .map(|i| PI * i as f64 / denom)
        .collect();
    grid.extend(
        [n, m]
            .iter()
            .chain(extra)
            .filter(|&&nu| nu >= 1)
            .map(|&nu| PI / (2.0 * nu as f64)),
    );
    grid.retain(|&x| x > 0.0 && x < PI);
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    grid
}

/// `max_x |S_m(x) - S_n(x)|` over `grid` together with a maximizing point.
pub fn sup_gap_with_point<S: SequenceProvider + ?Sized>(
    seq: &S,
    n: u64,
    m: u64,
    grid: &[f64],
) -> Result<(f64, f64)> {
    if m <= n {
        return Err(Error::param("m", format!("need n < m, got n = {n}, m = {m}")));
    }
    for &x in grid {
        check_open_interval(x)?;
    }
    check_index(seq, m)?;
    let coeffs = seq.terms(n + 1, m)?;
    let best = grid
        .par_iter()
        .map(|&x| (sine_sum_slice(&coeffs, n + 1, x).value().abs(), x))
        .reduce(|| (0.0, f64::NAN), |a, b| if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) { b } else { a });
    Ok(best)
}

/// `max_x |S_m(x) - S_n(x)|` over `grid`.
pub fn sup_gap<S: SequenceProvider + ?Sized>(seq: &S, n: u64, m: u64, grid: &[f64]) -> Result<f64> {
    Ok(sup_gap_with_point(seq, n, m, grid)?.0)
}

/// Partial-sum gap at the adversarial point of one generation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AdversarialPoint {
    pub j: usize,
    pub n_j: u64,
    pub t_j: f64,
    pub gap: f64,
    /// `sqrt(log)` growth scale of generation `j`.
    pub scale: f64,
}

impl AdversarialPoint {
    pub fn normalized(&self) -> f64 {
        self.gap / self.scale
    }
}

/// `sum_{m = 4 n_j}^{4 n_{j+1} - 1} a_m sin(m t_j)` at `t_j = pi / (2 n_j)`:
/// the partial-sum difference over every block of generation `j`.
pub fn adversarial_gap<S: BlockSchedule + ?Sized>(seq: &S, j: usize) -> Result<AdversarialPoint> {
    if j < 2 || j > seq.deepest_generation() {
        return Err(Error::param(
            "j",
            format!("must lie in 2..={}, got {j}", seq.deepest_generation()),
        ));
    }
    let n_j = seq.generation_start(j);
    let t_j = PI / (2.0 * n_j as f64);
    let gap = sine_sum_range(seq, 4 * n_j, 4 * seq.generation_start(j + 1) - 1, t_j)?;
    Ok(AdversarialPoint { j, n_j, t_j, gap, scale: seq.gap_scale(j) })
}

/// Verdict thresholds on the sup-gaps of the three largest levels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProbeThresholds {
    /// Divergence evidence when all three gaps exceed this.
    pub divergence_floor: f64,
    /// Convergence evidence when the gaps decrease and the last is below this.
    pub convergence_ceiling: f64,
}

impl Default for ProbeThresholds {
    fn default() -> Self {
        Self { divergence_floor: 0.05, convergence_ceiling: 0.005 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SeriesVerdict {
    UniformlyConvergentEvidence,
    DivergenceEvidence,
    Inconclusive,
}

impl SeriesVerdict {
    pub fn as_str(self) -> &'static str {
        match self {
            SeriesVerdict::UniformlyConvergentEvidence => "uniformly_convergent_evidence",
            SeriesVerdict::DivergenceEvidence => "divergence_evidence",
            SeriesVerdict::Inconclusive => "inconclusive",
        }
    }
}

/// Applies [`ProbeThresholds`] to gaps ordered by increasing level.
pub fn classify_gaps(gaps: &[f64], thresholds: &ProbeThresholds) -> SeriesVerdict {
    if gaps.len() < 3 {
        return SeriesVerdict::Inconclusive;
    }
    let tail = &gaps[gaps.len() - 3..];
    if tail.iter().all(|&g| g > thresholds.divergence_floor) {
        SeriesVerdict::DivergenceEvidence
    } else if tail.windows(2).all(|w| w[1] < w[0]) && tail[2] < thresholds.convergence_ceiling {
        SeriesVerdict::UniformlyConvergentEvidence
    } else {
        SeriesVerdict::Inconclusive
    }
}

/// Uniform-convergence diagnostics for one sequence.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeriesProbe {
    pub label: String,
    pub pairs: Vec<(u64, u64)>,
    pub gaps: Vec<f64>,
    /// A grid point attaining each gap.
    pub gap_points: Vec<f64>,
    pub grid_sizes: Vec<usize>,
    /// `(n0, max_{n0 <= n <= K} n a_n)` at every level.
    pub na_n: Vec<(u64, f64)>,
    pub certificate: Option<Certificate>,
    pub adversarial_points: Vec<AdversarialPoint>,
    pub thresholds: ProbeThresholds,
    pub verdict: SeriesVerdict,
}

/// Sup-gaps over dyadic pairs `(n, 2n)` for each level, the `n a_n` profile
/// and an MVBVS certificate on `[min level, max level]`, summarized by
/// [`classify_gaps`].
pub fn convergence_report<S: SequenceProvider + ?Sized>(
    seq: &S,
    levels: &[u64],
    thresholds: ProbeThresholds,
) -> Result<SeriesProbe> {
    let mut levels = levels.to_vec();
    levels.sort_unstable();
    levels.dedup();
    let (&lo, &hi) = match (levels.first(), levels.last()) {
        (Some(lo), Some(hi)) if *lo >= 1 => (lo, hi),
        _ => return Err(Error::param("levels", "need at least one level >= 1")),
    };
    check_index(seq, 2 * hi)?;
    let mut pairs = Vec::new();
    let mut gaps = Vec::new();
    let mut gap_points = Vec::new();
    let mut grid_sizes = Vec::new();
    for &n in &levels {
        let grid = pair_grid(n, 2 * n, &[]);
        let (gap, at) = sup_gap_with_point(seq, n, 2 * n, &grid)?;
        pairs.push((n, 2 * n));
        gaps.push(gap);
        gap_points.push(at);
        grid_sizes.push(grid.len());
    }
    let na_n = na_n_probe(seq, &levels, 2 * hi)?;
    let certificate = certify_mvbvs_search(seq, (lo, hi)).ok();
    let verdict = classify_gaps(&gaps, &thresholds);
    Ok(SeriesProbe {
        label: seq.label().to_string(),
        pairs,
        gaps,
        gap_points,
        grid_sizes,
        na_n,
        certificate,
        adversarial_points: Vec::new(),
        thresholds,
        verdict,
    })
}

/// Adversarial gaps for generations `2..=j_max`.
pub fn adversarial_profile<S: BlockSchedule + ?Sized>(seq: &S, j_max: usize) -> Result<Vec<AdversarialPoint>> {
    (2..=j_max).map(|j| adversarial_gap(seq, j)).collect()
}

/// Dyadic levels `2^lo, ..., 2^hi`.
pub fn dyadic_levels(lo: u32, hi: u32) -> Vec<u64> {
    (lo..=hi).map(|e| 1u64 << e).collect()
}
