//! Benchmark fixtures shared by the criterion targets.

use mvbv_core::ExplicitSequence;

/// `a_k = 1/k` for `1 <= k <= n`.
pub fn harmonic(n: usize) -> ExplicitSequence {
    let values = (1..=n).map(|k| 1.0 / k as f64).collect();
    ExplicitSequence::new(values, "harmonic").expect("positive finite terms")
}
