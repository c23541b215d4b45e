//! Accurate accumulation of long floating point sums.
//!
//! Window sums in the class checks are ratios of nearby magnitudes, so every
//! sum goes through either [`CompensatedSum`] (Neumaier's variant of Kahan
//! summation) or [`RangeSums`], a segment tree whose node sums are formed
//! pairwise.

/// Neumaier compensated accumulator.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.compensation += (self.sum - t) + value;
        } else {
            self.compensation += (value - t) + self.sum;
        }
        self.sum = t;
    }

    /// Folds another partial sum in, keeping both compensation terms.
    #[inline]
    pub fn merge(&mut self, other: &CompensatedSum) {
        self.add(other.sum);
        self.add(other.compensation);
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

impl Extend<f64> for CompensatedSum {
    fn extend<I: IntoIterator<Item = f64>>(&mut self, iter: I) {
        for v in iter {
            self.add(v);
        }
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = CompensatedSum::new();
        acc.extend(iter);
        acc
    }
}

/// Compensated sum of an iterator of values.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    values.into_iter().collect::<CompensatedSum>().value()
}

/// Recursive pairwise summation; leaves of up to 32 values are summed directly.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    const LEAF: usize = 32;
    if values.len() <= LEAF {
        values.iter().sum()
    } else {
        let mid = values.len() / 2;
        pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
    }
}

/// Range-sum queries over a fixed slice of nonnegative values.
///
/// Each internal node holds the sum of its two children, so every node is a
/// pairwise sum of a contiguous block. A query combines at most `2 log2 n`
/// nonnegative node sums with a compensated accumulator; for nonnegative data
/// there is no cancellation and the relative error stays near `log2(n)^2 * eps`.
#[derive(Debug, Clone)]
pub struct RangeSums {
    len: usize,
    tree: Vec<f64>,
}

impl RangeSums {
    pub fn new(values: &[f64]) -> Self {
        let len = values.len();
        let mut tree = vec![0.0; 2 * len.max(1)];
        tree[len..len + values.len()].copy_from_slice(values);
        for i in (1..len).rev() {
            tree[i] = tree[2 * i] + tree[2 * i + 1];
        }
        Self { len, tree }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Sum of `values[lo..hi]` (half-open, zero-based).
    pub fn sum(&self, lo: usize, hi: usize) -> f64 {
        assert!(lo <= hi && hi <= self.len, "range {lo}..{hi} out of bounds");
        let mut acc = CompensatedSum::new();
        let (mut l, mut r) = (lo + self.len, hi + self.len);
        while l < r {
            if l & 1 == 1 {
                acc.add(self.tree[l]);
                l += 1;
            }
            if r & 1 == 1 {
                r -= 1;
                acc.add(self.tree[r]);
            }
            l >>= 1;
            r >>= 1;
        }
        acc.value()
    }
}

/// Range-maximum queries over a fixed slice (sparse table, O(1) per query).
#[derive(Debug, Clone)]
pub struct RangeMax {
    levels: Vec<Vec<f64>>,
}

impl RangeMax {
    pub fn new(values: &[f64]) -> Self {
        let mut levels = vec![values.to_vec()];
        let mut width = 1;
        while 2 * width <= values.len() {
            let prev = levels.last().unwrap();
            let next: Vec<f64> = (0..prev.len() - width)
                .map(|i| prev[i].max(prev[i + width]))
                .collect();
            levels.push(next);
            width *= 2;
        }
        Self { levels }
    }

    /// Maximum of `values[lo..hi]` (half-open, zero-based, non-empty).
    pub fn max(&self, lo: usize, hi: usize) -> f64 {
        assert!(lo < hi && hi <= self.levels[0].len(), "range {lo}..{hi} out of bounds");
        let level = (usize::BITS - 1 - (hi - lo).leading_zeros()) as usize;
        let row = &self.levels[level];
        row[lo].max(row[hi - (1 << level)])
    }
}
