//! Window certification: defect profiles, constant estimates and verdicts.

use rayon::prelude::*;
use serde::ser::SerializeSeq;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::sequence::{check_index, SequenceProvider};
use crate::summation::{CompensatedSum, RangeMax, RangeSums};

use super::defects::{regulator_values, weighted_increase, WEIGHTED_SLACK};
use super::{mean_window, ClassId, ClassParams, Sides};

/// Least-squares slope of `ln defect` against `ln n` above which a bounded
/// class is rejected for growing defect.
pub const SLOPE_THRESHOLD: f64 = 0.15;

/// Values of `lambda` tried when an MVBVS check is requested without one.
pub const MVBVS_LAMBDA_CANDIDATES: [f64; 4] = [2.0, 3.0, 5.0, 8.0];

/// One row of a defect profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DefectEntry {
    pub n: u64,
    pub lhs: f64,
    pub rhs: f64,
    pub defect: f64,
}

impl DefectEntry {
    fn new(n: u64, sides: Sides) -> Self {
        Self { n, lhs: sides.lhs, rhs: sides.rhs, defect: sides.defect() }
    }
}

/// `+inf` is written as the string `"inf"`.
pub(crate) fn serialize_extended<S: Serializer>(
    value: &f64,
    serializer: S,
) -> std::result::Result<S::Ok, S::Error> {
    let value = *value;
    if value == f64::INFINITY {
        serializer.serialize_str("inf")
    } else {
        serializer.serialize_f64(value)
    }
}

struct Extended(f64);

impl Serialize for Extended {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        serialize_extended(&self.0, s)
    }
}

impl Serialize for DefectEntry {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(4))?;
        seq.serialize_element(&self.n)?;
        seq.serialize_element(&Extended(self.lhs))?;
        seq.serialize_element(&Extended(self.rhs))?;
        seq.serialize_element(&Extended(self.defect))?;
        seq.end()
    }
}

/// Per-index defect values of one class on a window.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DefectProfile {
    pub class_id: ClassId,
    pub params: ClassParams,
    pub window: [u64; 2],
    pub entries: Vec<DefectEntry>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    MemberOnWindow,
    Rejected,
    /// No infinite defect, but the window spans less than one doubling so
    /// the growth of the profile cannot be judged.
    InconclusiveGrowth,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::MemberOnWindow => "member_on_window",
            Verdict::Rejected => "rejected",
            Verdict::InconclusiveGrowth => "inconclusive_growth",
        }
    }
}

/// Outcome of certifying one class on a window.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Certificate {
    #[serde(flatten)]
    pub profile: DefectProfile,
    #[serde(serialize_with = "serialize_extended")]
    pub constant_estimate: f64,
    pub growth_slope: f64,
    pub verdict: Verdict,
    /// Set for tail classes: the defects are lower bounds computed up to this index.
    pub truncated_horizon: Option<u64>,
}

impl Certificate {
    pub fn class_id(&self) -> ClassId {
        self.profile.class_id
    }

    pub fn window(&self) -> (u64, u64) {
        (self.profile.window[0], self.profile.window[1])
    }

    pub fn is_member(&self) -> bool {
        self.verdict == Verdict::MemberOnWindow
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("certificate serializes")
    }
}

/// Least-squares slope of `ln defect` against `ln n` over finite positive defects.
pub fn growth_slope(entries: &[DefectEntry]) -> f64 {
    let pts: Vec<(f64, f64)> = entries
        .iter()
        .filter(|e| e.defect.is_finite() && e.defect > 0.0)
        .map(|e| ((e.n as f64).ln(), e.defect.ln()))
        .collect();
    if pts.len() < 2 {
        return 0.0;
    }
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        0.0
    } else {
        sxy / sxx
    }
}

/// Terms `a_1..a_hi` materialized once, with range-sum and range-max support.
struct Materialized {
    terms: Vec<f64>,
    sums: RangeSums,
    variation: RangeSums,
    max: Option<RangeMax>,
}

impl Materialized {
    fn new<S: SequenceProvider + ?Sized>(seq: &S, hi: u64, with_max: bool) -> Result<Self> {
        check_index(seq, hi)?;
        let terms = seq.terms(1, hi)?;
        let diffs: Vec<f64> = terms.windows(2).map(|w| (w[0] - w[1]).abs()).collect();
        Ok(Self {
            sums: RangeSums::new(&terms),
            variation: RangeSums::new(&diffs),
            max: with_max.then(|| RangeMax::new(&terms)),
            terms,
        })
    }

    fn a(&self, k: u64) -> f64 {
        self.terms[(k - 1) as usize]
    }

    /// `sum_{k=lo}^{hi} a_k`.
    fn sum(&self, lo: u64, hi: u64) -> f64 {
        self.sums.sum((lo - 1) as usize, hi as usize)
    }

    /// `sum_{k=n}^{2n} |a_k - a_{k+1}|`; `diffs[i] = |a_{i+1} - a_{i+2}|`.
    fn variation(&self, n: u64) -> f64 {
        self.variation.sum((n - 1) as usize, (2 * n) as usize)
    }

    fn max(&self, lo: u64, hi: u64) -> f64 {
        self.max.as_ref().expect("range max built").max((lo - 1) as usize, hi as usize)
    }
}

fn default_horizon<S: SequenceProvider + ?Sized>(seq: &S, params: &ClassParams, n_max: u64) -> u64 {
    params
        .horizon
        .or_else(|| seq.known_length())
        .unwrap_or(4 * n_max)
}

/// Builds the defect profile of `params.class_id` on `window` and issues a certificate.
///
/// Bounded-defect classes are rejected when any defect is infinite or when
/// the log-log slope of the profile exceeds [`SLOPE_THRESHOLD`]. The
/// quasi-monotone classes are rejected as soon as a step ratio exceeds 1.
/// For MVBVS with `lambda: None` this delegates to [`certify_mvbvs_search`].
pub fn certify<S: SequenceProvider + ?Sized>(
    seq: &S,
    params: &ClassParams,
    window: (u64, u64),
) -> Result<Certificate> {
    params.validate()?;
    let (n_min, n_max) = window;
    if n_min == 0 || n_max < n_min {
        return Err(Error::InvalidWindow { n_min, n_max, reason: "need 1 <= n_min <= n_max".into() });
    }
    if params.class_id == ClassId::Mvbvs && params.lambda.is_none() {
        return certify_mvbvs_search(seq, window);
    }

    let mut params = params.clone();
    let mut truncated_horizon = None;
    let entries = match params.class_id {
        ClassId::Mvbvs => {
            let lambda = params.lambda.expect("lambda resolved");
            let hi = (2 * n_max + 1).max(mean_window(n_max, lambda).1);
            let mat = Materialized::new(seq, hi, false)?;
            bounded_profile(n_min, n_max, |n| {
                let (lo, hi) = mean_window(n, lambda);
                Sides { lhs: mat.variation(n), rhs: mat.sum(lo, hi) / n as f64 }
            })
        }
        ClassId::Gbvs => {
            let n0 = params.n0_group;
            let hi = (2 * n_max + 1).max(n_max + n0 - 1);
            let mat = Materialized::new(seq, hi, true)?;
            bounded_profile(n_min, n_max, |n| Sides {
                lhs: mat.variation(n),
                rhs: mat.max(n, n + n0 - 1),
            })
        }
        ClassId::Nbvs => {
            let mat = Materialized::new(seq, 2 * n_max + 1, false)?;
            bounded_profile(n_min, n_max, |n| Sides {
                lhs: mat.variation(n),
                rhs: mat.a(n) + mat.a(2 * n),
            })
        }
        ClassId::Rbvs | ClassId::Ams => {
            let horizon = default_horizon(seq, &params, n_max);
            if horizon < n_max {
                return Err(Error::InvalidWindow {
                    n_min,
                    n_max,
                    reason: format!("horizon {horizon} lies inside the window"),
                });
            }
            check_index(seq, horizon)?;
            params.horizon = Some(horizon);
            truncated_horizon = Some(horizon);
            tail_profile(seq, params.class_id, n_min, n_max, horizon)?
        }
        ClassId::Ms | ClassId::Cqms | ClassId::Rvqms => {
            return certify_quasi_monotone(seq, params, window);
        }
    };

    let constant_estimate = sup_finite(&entries);
    let growth_slope = growth_slope(&entries);
    let verdict = if entries.iter().any(|e| e.defect.is_infinite()) || growth_slope > SLOPE_THRESHOLD {
        Verdict::Rejected
    } else if n_max < 2 * n_min {
        Verdict::InconclusiveGrowth
    } else {
        Verdict::MemberOnWindow
    };
    Ok(Certificate {
        profile: DefectProfile {
            class_id: params.class_id,
            params,
            window: [n_min, n_max],
            entries,
        },
        constant_estimate,
        growth_slope,
        verdict,
        truncated_horizon,
    })
}

fn sup_finite(entries: &[DefectEntry]) -> f64 {
    entries
        .iter()
        .map(|e| e.defect)
        .filter(|d| d.is_finite())
        .fold(0.0_f64, f64::max)
}

fn bounded_profile<F>(n_min: u64, n_max: u64, sides: F) -> Vec<DefectEntry>
where
    F: Fn(u64) -> Sides + Sync,
{
    (n_min..=n_max)
        .into_par_iter()
        .map(|n| DefectEntry::new(n, sides(n)))
        .collect()
}

/// RBVS and AMS profiles by a single backward sweep from the horizon.
fn tail_profile<S: SequenceProvider + ?Sized>(
    seq: &S,
    class_id: ClassId,
    n_min: u64,
    n_max: u64,
    horizon: u64,
) -> Result<Vec<DefectEntry>> {
    let mut entries = Vec::with_capacity((n_max - n_min + 1) as usize);
    let mut tail_variation = CompensatedSum::new();
    let mut peak = 0.0_f64;
    let mut next: Option<f64> = None;
    for k in (n_min..=horizon).rev() {
        let a = seq.term(k)?;
        if let Some(b) = next {
            tail_variation.add((a - b).abs());
        }
        peak = peak.max(a);
        next = Some(a);
        if k <= n_max {
            let lhs = match class_id {
                ClassId::Rbvs => tail_variation.value(),
                _ => peak,
            };
            entries.push(DefectEntry::new(k, Sides { lhs, rhs: a }));
        }
    }
    entries.reverse();
    Ok(entries)
}

fn certify_quasi_monotone<S: SequenceProvider + ?Sized>(
    seq: &S,
    params: ClassParams,
    window: (u64, u64),
) -> Result<Certificate> {
    let (n_min, n_max) = window;
    let terms = seq.terms(n_min, n_max)?;
    let (weights, slack): (Vec<f64>, f64) = match params.class_id {
        ClassId::Ms => (vec![1.0; terms.len()], 0.0),
        ClassId::Cqms => (
            (n_min..=n_max).map(|k| (k as f64).powf(params.alpha)).collect(),
            if params.alpha == 0.0 { 0.0 } else { WEIGHTED_SLACK },
        ),
        _ => {
            let r = params.regulator.as_ref().expect("validated");
            let values = regulator_values(r.as_ref(), n_min, n_max)?;
            (values[..terms.len()].to_vec(), WEIGHTED_SLACK)
        }
    };
    let weighted: Vec<f64> = terms.iter().zip(&weights).map(|(a, w)| a / w).collect();
    let entries: Vec<DefectEntry> = (n_min..n_max)
        .zip(weighted.windows(2))
        .map(|(n, w)| DefectEntry::new(n, Sides { lhs: w[1], rhs: w[0] }))
        .collect();
    let violated = weighted.windows(2).any(|w| weighted_increase(w[0], w[1], slack));
    let constant_estimate = sup_finite(&entries);
    Ok(Certificate {
        growth_slope: growth_slope(&entries),
        profile: DefectProfile {
            class_id: params.class_id,
            params,
            window: [n_min, n_max],
            entries,
        },
        constant_estimate,
        verdict: if violated { Verdict::Rejected } else { Verdict::MemberOnWindow },
        truncated_horizon: None,
    })
}

/// Certifies MVBVS for each of [`MVBVS_LAMBDA_CANDIDATES`] that fits the
/// sequence and keeps the best: members before non-members, then the
/// smallest constant estimate.
pub fn certify_mvbvs_search<S: SequenceProvider + ?Sized>(
    seq: &S,
    window: (u64, u64),
) -> Result<Certificate> {
    let mut best: Option<Certificate> = None;
    let mut first_err = None;
    for lambda in MVBVS_LAMBDA_CANDIDATES {
        match certify(seq, &ClassParams::mvbvs(lambda), window) {
            Ok(cert) => {
                let better = match &best {
                    None => true,
                    Some(b) => {
                        (cert.is_member(), -cert.constant_estimate)
                            > (b.is_member(), -b.constant_estimate)
                    }
                };
                if better {
                    best = Some(cert);
                }
            }
            Err(e) => {
                first_err.get_or_insert(e);
            }
        }
    }
    best.ok_or_else(|| first_err.expect("at least one candidate tried"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seqclass::{ams_defect, gbv_defect, mvbv_defect, nbv_defect, rbv_defect};
    use crate::sequence::{ExplicitSequence, FnSequence};

    fn harmonic() -> FnSequence<impl Fn(u64) -> f64 + Send + Sync> {
        FnSequence::new("1/k", |k| 1.0 / k as f64)
    }

    #[test]
    fn profile_matches_pointwise_ops() {
        let seq = ExplicitSequence::new(
            (1..=400).map(|k| (1.0 + 0.5 * ((k % 7) as f64)) / k as f64).collect(),
            "wiggle",
        )
        .unwrap();
        let cases = [
            (ClassParams::mvbvs(2.0), 1u64, 90u64),
            (ClassParams::mvbvs(3.0), 5, 60),
            (ClassParams::gbvs(3), 1, 150),
            (ClassParams::new(ClassId::Nbvs), 1, 150),
        ];
        for (params, lo, hi) in cases {
            let cert = certify(&seq, &params, (lo, hi)).unwrap();
            assert_eq!(cert.profile.entries.len() as u64, hi - lo + 1);
            for e in &cert.profile.entries {
                let direct = match params.class_id {
                    ClassId::Mvbvs => mvbv_defect(&seq, e.n, params.lambda.unwrap()).unwrap(),
                    ClassId::Gbvs => gbv_defect(&seq, e.n, params.n0_group).unwrap(),
                    _ => nbv_defect(&seq, e.n).unwrap(),
                };
                assert!((e.defect - direct).abs() <= 1e-12 * direct, "{:?} n={}", params.class_id, e.n);
            }
        }
    }

    #[test]
    fn tail_profile_matches_pointwise_ops() {
        let seq = ExplicitSequence::new(
            (1..=300).map(|k| (2.0 + ((k * 13) % 5) as f64) / (k as f64).sqrt()).collect(),
            "tail",
        )
        .unwrap();
        for class in [ClassId::Rbvs, ClassId::Ams] {
            for window in [(3, 40), (250, 300), (300, 300)] {
                let cert = certify(&seq, &ClassParams::new(class), window).unwrap();
                assert_eq!(cert.truncated_horizon, Some(300));
                assert_eq!(cert.profile.entries.first().unwrap().n, window.0);
                assert_eq!(cert.profile.entries.last().unwrap().n, window.1);
                for e in &cert.profile.entries {
                    let direct = match class {
                        ClassId::Rbvs => rbv_defect(&seq, e.n, 300).unwrap().value,
                        _ => ams_defect(&seq, e.n, 300).unwrap().value,
                    };
                    assert!((e.defect - direct).abs() <= 1e-12 * direct.max(1e-300), "{class} n={}", e.n);
                }
            }
        }
    }

    #[test]
    fn harmonic_is_mvbvs_member() {
        let cert = certify(&harmonic(), &ClassParams::mvbvs(2.0), (4, 256)).unwrap();
        assert_eq!(cert.verdict, Verdict::MemberOnWindow);
        assert!(cert.constant_estimate.is_finite() && cert.constant_estimate > 0.0);
        assert!(cert.growth_slope.abs() < SLOPE_THRESHOLD);
        for e in &cert.profile.entries {
            assert!(cert.constant_estimate >= e.defect);
        }
    }

    #[test]
    fn quasi_monotone_verdicts() {
        let cert = certify(&harmonic(), &ClassParams::new(ClassId::Ms), (1, 100)).unwrap();
        assert!(cert.is_member());
        assert!((cert.constant_estimate - 0.99).abs() < 1e-15);
        let sq = FnSequence::new("k^2", |k| (k * k) as f64);
        assert!(!certify(&sq, &ClassParams::cqms(1.0), (1, 50)).unwrap().is_member());
        assert!(certify(&sq, &ClassParams::cqms(2.0), (1, 50)).unwrap().is_member());
    }

    #[test]
    fn short_window_is_inconclusive() {
        let cert = certify(&harmonic(), &ClassParams::mvbvs(2.0), (100, 150)).unwrap();
        assert_eq!(cert.verdict, Verdict::InconclusiveGrowth);
    }

    #[test]
    fn infinite_defect_rejects_and_serializes_as_inf() {
        let seq = ExplicitSequence::new(vec![1.0, 0.0, 0.3, 0.0, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5], "z").unwrap();
        let cert = certify(&seq, &ClassParams::new(ClassId::Nbvs), (1, 4)).unwrap();
        assert_eq!(cert.verdict, Verdict::Rejected);
        let json: serde_json::Value = serde_json::from_str(&cert.to_json()).unwrap();
        assert_eq!(json["class_id"], "NBVS");
        assert_eq!(json["window"], serde_json::json!([1, 4]));
        assert_eq!(json["verdict"], "rejected");
        let entries = json["entries"].as_array().unwrap();
        assert!(entries.iter().any(|e| e[3] == "inf"));
        assert!(json["constant_estimate"].is_number());
        assert!(json["growth_slope"].is_number());
    }

    #[test]
    fn lambda_search_picks_smallest_constant() {
        let seq = harmonic();
        let best = certify(&seq, &ClassParams { lambda: None, ..ClassParams::new(ClassId::Mvbvs) }, (4, 512)).unwrap();
        for lambda in MVBVS_LAMBDA_CANDIDATES {
            let c = certify(&seq, &ClassParams::mvbvs(lambda), (4, 512)).unwrap();
            assert!(best.constant_estimate <= c.constant_estimate);
        }
        assert!(best.profile.params.lambda.is_some());
    }

    #[test]
    fn lambda_search_skips_candidates_that_do_not_fit() {
        let seq = ExplicitSequence::new((1..=300).map(|k| 1.0 / k as f64).collect(), "h").unwrap();
        let best = certify_mvbvs_search(&seq, (4, 50)).unwrap();
        assert!(best.profile.params.lambda.unwrap() <= 5.0);
    }
}
