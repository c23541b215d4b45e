//! Randomized invariants checked against brute-force oracles.

use std::f64::consts::PI;

use proptest::prelude::*;

use mvbv_core::complexseries::{
    complex_partial_sum, cond_d2_defect, lemma14_split, two_sided_block_sum, ExplicitComplexSequence,
    FnComplexSequence,
};
use mvbv_core::seqclass::{ams_defect, gbv_defect, mvbv_defect, nbv_defect, rbv_defect};
use mvbv_core::sineseries::{abel_tail_bound, dirichlet_bound, dirichlet_sine, partial_sum, small_angle_bound, sine_sum_range};
use mvbv_core::{certify, ClassId, ClassParams, ExplicitSequence, SequenceProvider};
use num_complex::Complex64;

fn direct_sine_sum(values: &[f64], lo: usize, hi: usize, x: f64) -> f64 {
    (lo..=hi).map(|k| values[k - 1] * (k as f64 * x).sin()).sum()
}

/// Nonnegative terms with a sprinkling of exact zeros.
fn terms(len: std::ops::Range<usize>) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(prop_oneof![1 => Just(0.0), 6 => 0.0..1.0f64], len)
}

fn non_increasing(len: std::ops::Range<usize>) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0..1.0f64, len).prop_map(|steps| {
        let mut v = Vec::with_capacity(steps.len());
        let mut cur = 1.0;
        for s in steps {
            v.push(cur);
            cur *= 0.5 + 0.5 * s;
        }
        v
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn abel_bound_dominates_block_sums(values in terms(2..300), a in 0.0..1.0f64, b in 0.0..1.0f64, x in 1e-6..PI - 1e-6) {
        let seq = ExplicitSequence::new(values.clone(), "rand").unwrap();
        let len = values.len();
        let lo = 1 + ((len - 1) as f64 * a.min(b)) as usize;
        let hi = (1 + ((len - 1) as f64 * a.max(b)) as usize).max(lo + 1).min(len);
        prop_assume!(lo < hi);
        let bound = abel_tail_bound(&seq, lo as u64, hi as u64, x).unwrap();
        let actual = direct_sine_sum(&values, lo, hi, x).abs();
        prop_assert!(actual <= bound, "{actual} > {bound}");
    }

    #[test]
    fn conjugate_kernel_bound_and_closed_form(n in 1u64..10_000, x in 1e-9..PI) {
        let d = dirichlet_sine(n, x).unwrap();
        prop_assert!(d.abs() <= dirichlet_bound(x).unwrap());
        let direct: f64 = (1..=n).map(|k| (k as f64 * x).sin()).sum();
        prop_assert!((d - direct).abs() <= 1e-10 * (1.0 + n as f64 * 1e-3), "{d} vs {direct}");
    }

    #[test]
    fn small_angle_part_is_dominated(values in terms(2..400), f in 0.0..1.0f64, g in 0.0..1.0f64, u in 0.0..1.0f64) {
        // With N = [1/x], |sum_{k=n}^{N-1} a_k sin kx| <= x sum k a_k.
        let len = values.len();
        let big_n = 2 + ((len - 1) as f64 * f) as usize;
        let x = 1.0 / (big_n as f64 + u);
        let big_n = (1.0 / x).floor() as usize;
        let n = 1 + ((big_n - 2) as f64 * g) as usize;
        prop_assume!(n < big_n && big_n - 1 <= len);
        let seq = ExplicitSequence::new(values.clone(), "rand").unwrap();
        let lhs = sine_sum_range(&seq, n as u64, (big_n - 1) as u64, x).unwrap().abs();
        let rhs = small_angle_bound(&seq, n as u64, (big_n - 1) as u64, x).unwrap();
        prop_assert!(lhs <= rhs, "{lhs} > {rhs}");
    }

    #[test]
    fn defects_are_total(values in terms(16..120), lambda in 2.0..6.0f64) {
        let seq = ExplicitSequence::new(values.clone(), "rand").unwrap();
        let len = values.len() as u64;
        for n in 1..=(len - 1) / 2 {
            let mut ds = vec![gbv_defect(&seq, n, 2).unwrap(), nbv_defect(&seq, n).unwrap()];
            if (lambda * n as f64).floor() as u64 <= len {
                ds.push(mvbv_defect(&seq, n, lambda).unwrap());
            }
            ds.push(rbv_defect(&seq, n, len).unwrap().value);
            ds.push(ams_defect(&seq, n, len).unwrap().value);
            for d in ds {
                prop_assert!(!d.is_nan() && d >= 0.0);
            }
        }
    }

    #[test]
    fn monotone_baseline(values in non_increasing(8..200)) {
        let seq = ExplicitSequence::new(values.clone(), "mono").unwrap();
        let len = values.len() as u64;
        for n in 1..=(len - 1) / 2 {
            prop_assert!(rbv_defect(&seq, n, len).unwrap().value <= 1.0 + 1e-12);
            prop_assert_eq!(ams_defect(&seq, n, len).unwrap().value, 1.0);
            prop_assert!(gbv_defect(&seq, n, 1).unwrap() <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn power_of_two_scaling_is_bit_exact(values in terms(16..100), e in -40i32..40) {
        let s = 2f64.powi(e);
        let seq = ExplicitSequence::new(values.clone(), "a").unwrap();
        let scaled = seq.scaled(s).unwrap();
        let len = values.len() as u64;
        for n in 1..=len / 2 - 1 {
            prop_assert_eq!(mvbv_defect(&seq, n, 2.0).unwrap(), mvbv_defect(&scaled, n, 2.0).unwrap());
            prop_assert_eq!(gbv_defect(&seq, n, 3).unwrap(), gbv_defect(&scaled, n, 3).unwrap());
            prop_assert_eq!(nbv_defect(&seq, n).unwrap(), nbv_defect(&scaled, n).unwrap());
        }
    }

    #[test]
    fn lemma14_split_reconstructs(
        coeffs in prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64), 2..120),
        lo_frac in 0.0..1.0f64,
        x in -PI..PI,
    ) {
        let pos: Vec<Complex64> = coeffs.iter().map(|c| Complex64::new(c.0, c.1)).collect();
        let neg: Vec<Complex64> = coeffs.iter().map(|c| Complex64::new(c.2, c.3)).collect();
        let cseq = ExplicitComplexSequence::from_halves(&pos, &neg, 0.0, "rand").unwrap();
        let hi = coeffs.len() as u64;
        let lo = 1 + ((hi - 1) as f64 * lo_frac) as u64;
        let split = lemma14_split(&cseq, lo, hi, x).unwrap();
        let direct = two_sided_block_sum(&cseq, lo, hi, x).unwrap();
        let scale: f64 = (lo..=hi).map(|k| pos[k as usize - 1].norm() + neg[k as usize - 1].norm()).sum();
        prop_assert!((split.reconstruct() - direct).norm() <= 1e-12 * scale.max(f64::MIN_POSITIVE));
        let sym_mass: f64 = (lo..=hi).map(|k| (pos[k as usize - 1] + neg[k as usize - 1]).norm()).sum();
        prop_assert!(split.symmetric.norm() <= sym_mass * (1.0 + 1e-12));
    }

    #[test]
    fn rotation_leaves_complex_defect_unchanged(values in terms(20..80), phi in -PI..PI) {
        let rot = Complex64::from_polar(1.0, phi);
        let plain = values.clone();
        let a = FnComplexSequence::new("a", 0.0, move |k| if k > 0 { Complex64::new(plain[k as usize - 1], 0.0) } else { Complex64::new(0.0, 0.0) }).unwrap().with_bound(values.len() as u64);
        let rotated_values = values.clone();
        let b = FnComplexSequence::new("b", 0.0, move |k| if k > 0 { rot * rotated_values[k as usize - 1] } else { Complex64::new(0.0, 0.0) }).unwrap().with_bound(values.len() as u64);
        let real = ExplicitSequence::new(values.clone(), "r").unwrap();
        for n in 1..=values.len() as u64 / 2 - 1 {
            let da = cond_d2_defect(&a, n, 2.0).unwrap();
            let db = cond_d2_defect(&b, n, 2.0).unwrap();
            let dr = mvbv_defect(&real, n, 2.0).unwrap();
            prop_assert!(da == dr || (da - dr).abs() <= 1e-12 * dr);
            prop_assert!(da == db || (da - db).abs() <= 1e-12 * da);
        }
    }
}

#[test]
fn recurrence_matches_direct_evaluation() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
    for _ in 0..20 {
        let n = rng.gen_range(1_000..200_000usize);
        let values: Vec<f64> = (1..=n).map(|k| rng.gen_range(0.0..1.0) / k as f64).collect();
        let seq = ExplicitSequence::new(values.clone(), "r").unwrap();
        let x = rng.gen_range(1e-4..PI - 1e-4);
        let fast = partial_sum(&seq, n as u64, x).unwrap();
        let slow = direct_sine_sum(&values, 1, n, x);
        let abs_mass: f64 = values.iter().sum();
        assert!((fast - slow).abs() <= 1e-8 * abs_mass.max(fast.abs()), "n={n} x={x}: {fast} vs {slow}");
    }
}

#[test]
fn odd_embedding_reproduces_sine_sums() {
    let values: Vec<f64> = (1..=500).map(|k| 1.0 / (k as f64).powf(0.7)).collect();
    let seq = ExplicitSequence::new(values, "p").unwrap();
    let cseq = mvbv_core::complexseries::odd_embedding(seq.clone(), 0.0).unwrap();
    for x in [0.01, 0.5, 1.0, 2.9] {
        let z = complex_partial_sum(&cseq, 500, x).unwrap();
        let s = partial_sum(&seq, 500, x).unwrap();
        assert!((z.re - s).abs() <= 1e-10, "{} vs {s}", z.re);
        assert!(z.im.abs() <= 1e-12);
    }
}

#[test]
fn certification_is_deterministic_across_thread_counts() {
    let values: Vec<f64> = (1..=5_000).map(|k| (1.0 + (k as f64).sin().abs()) / k as f64).collect();
    let seq = ExplicitSequence::new(values, "osc").unwrap();
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| {
            ClassId::ALL
                .iter()
                .filter(|c| **c != ClassId::Rvqms)
                .map(|&c| certify(&seq, &ClassParams::new(c), (8, 2_000)).unwrap().to_json())
                .collect::<Vec<_>>()
        })
    };
    let one = run(1);
    assert_eq!(one, run(4));
    assert_eq!(one, run(4));
    let s1 = partial_sum(&seq, 5_000, 0.3).unwrap();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
    assert_eq!(s1.to_bits(), pool.install(|| partial_sum(&seq, 5_000, 0.3).unwrap()).to_bits());
    assert!(seq.known_length().is_some());
}
