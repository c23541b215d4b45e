//! A fixed witness corpus for the inclusion diagram of the coefficient
//! classes, with the expected membership of every witness in every class.
//!
//! ```text
//!            MS
//!        /        \
//!     RBVS        CQMS -- RVQMS
//!       |
//!     GBVS
//!       |
//!     NBVS  ---  MVBVS          AMS (overlaps MVBVS, contains neither)
//! ```

use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;
use crate::generators::{gen_family, gen_prop3, gen_thm1, Family, Prop3Spec, Thm1Spec};
use crate::seqclass::{certify, ClassId, ClassParams, Verdict};
use crate::sequence::{FnSequence, SharedSequence};

/// One corpus sequence with the window it is certified on.
#[derive(Debug, Clone)]
pub struct Witness {
    pub name: &'static str,
    pub seq: SharedSequence,
    pub window: (u64, u64),
    /// Expected membership, in the order of [`relation_columns`].
    pub expected: [bool; 8],
}

/// Column labels and class parameters of the table.
pub fn relation_columns() -> Vec<(&'static str, ClassParams)> {
    vec![
        ("MS", ClassParams::new(ClassId::Ms)),
        ("CQMS(alpha=1)", ClassParams::cqms(1.0)),
        ("RVQMS(R=n)", ClassParams::rvqms(Arc::new(FnSequence::new("R(n)=n", |n| n as f64)))),
        ("RBVS", ClassParams::new(ClassId::Rbvs)),
        ("GBVS(N0=1)", ClassParams::gbvs(1)),
        ("NBVS", ClassParams::new(ClassId::Nbvs)),
        ("AMS", ClassParams::new(ClassId::Ams)),
        ("MVBVS(lambda=2)", ClassParams::mvbvs(2.0)),
    ]
}

pub fn relations_corpus() -> Result<Vec<Witness>> {
    const Y: bool = true;
    const N: bool = false;
    let harmonic: SharedSequence = Arc::new(gen_family(Family::PowerP { p: 1.0 })?);
    Ok(vec![
        Witness { name: "harmonic", seq: harmonic.clone(), window: (16, 4096), expected: [Y, Y, Y, Y, Y, Y, Y, Y] },
        Witness {
            name: "dyadic_ramp(alpha=1)",
            seq: Arc::new(gen_family(Family::DyadicRamp { alpha: 1.0 })?),
            window: (16, 4096),
            expected: [N, Y, Y, Y, Y, Y, Y, Y],
        },
        Witness {
            name: "sparse_zeros",
            seq: Arc::new(gen_family(Family::SparseZeros)?),
            window: (16, 4096),
            expected: [N, N, N, N, N, Y, N, Y],
        },
        Witness {
            name: "prop3(base=harmonic)",
            seq: Arc::new(gen_prop3(Prop3Spec { base: harmonic, k_max: 14 })?),
            window: (16, 4096),
            expected: [N, N, N, N, N, N, N, Y],
        },
        Witness {
            name: "thm1(j_max=3)",
            seq: Arc::new(gen_thm1(Thm1Spec { j_max: 3 })?),
            window: (40, 19_999),
            expected: [N, N, N, N, N, N, Y, N],
        },
    ])
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RelationCell {
    pub witness: String,
    pub class: String,
    pub expected_member: bool,
    pub verdict: Verdict,
    pub constant_estimate: f64,
    pub growth_slope: f64,
    pub matches: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RelationsTable {
    pub columns: Vec<String>,
    pub cells: Vec<RelationCell>,
}

impl RelationsTable {
    pub fn mismatches(&self) -> impl Iterator<Item = &RelationCell> {
        self.cells.iter().filter(|c| !c.matches)
    }

    pub fn all_match(&self) -> bool {
        self.mismatches().next().is_none()
    }
}

/// Certifies every witness against every column. A cell matches when an
/// expected member is certified `member_on_window` and an expected
/// non-member is `rejected`; inconclusive verdicts never match.
pub fn relations_matrix() -> Result<RelationsTable> {
    let columns = relation_columns();
    let corpus = relations_corpus()?;
    let jobs: Vec<(&Witness, usize)> = corpus
        .iter()
        .flat_map(|w| (0..columns.len()).map(move |c| (w, c)))
        .collect();
    let cells = jobs
        .par_iter()
        .map(|&(w, c)| {
            let (label, params) = &columns[c];
            let cert = certify(w.seq.as_ref(), params, w.window)?;
            let expected = w.expected[c];
            let wanted = if expected { Verdict::MemberOnWindow } else { Verdict::Rejected };
            Ok(RelationCell {
                witness: w.name.to_string(),
                class: label.to_string(),
                expected_member: expected,
                verdict: cert.verdict,
                constant_estimate: cert.constant_estimate,
                growth_slope: cert.growth_slope,
                matches: cert.verdict == wanted,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RelationsTable {
        columns: columns.iter().map(|c| c.0.to_string()).collect(),
        cells,
    })
}
