//! Kendall-tau kernels.
//!
//! Provides a quadratic reference implementation, an `O(n log n)`
//! merge-counting implementation, and the variance-normalized tau restricted
//! to the pixels above a pair of intensity thresholds. The tau convention is
//! tau-a: tied pairs contribute zero to the numerator while the denominator
//! stays `n(n-1)`, which keeps the two implementations bit-identical.

use serde::{Deserialize, Serialize};

use crate::channel::Channel;
use crate::error::{Error, Result};

/// Co-indexed intensity vectors from two channels.
#[derive(Debug, Clone, PartialEq)]
pub struct PairedSample {
    xs: Vec<f64>,
    ys: Vec<f64>,
}

impl PairedSample {
    /// Builds a paired sample, rejecting length mismatches and intensities
    /// that are not finite and nonnegative.
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        if xs.len() != ys.len() {
            return Err(Error::LengthMismatch {
                left: xs.len(),
                right: ys.len(),
            });
        }
        for values in [&xs, &ys] {
            for (index, v) in values.iter().enumerate() {
                if !v.is_finite() || *v < 0.0 {
                    return Err(Error::InvalidIntensity { index });
                }
            }
        }
        Ok(Self { xs, ys })
    }

    /// Flattens two channels of identical dimensions into a paired sample.
    pub fn from_channels(x: &Channel, y: &Channel) -> Result<Self> {
        if !x.same_dims(y) {
            return Err(x.dimension_mismatch(y));
        }
        Ok(Self {
            xs: x.pixels().to_vec(),
            ys: y.pixels().to_vec(),
        })
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn ys(&self) -> &[f64] {
        &self.ys
    }

    /// Iterates over `(x_i, y_i)` pairs.
    pub fn pairs(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.xs.iter().copied().zip(self.ys.iter().copied())
    }
}

/// Kendall tau by direct enumeration of all ordered pairs.
///
/// Evaluates `(1/(n(n-1))) * sum_{i != j} sign(x_i - x_j) * sign(y_i - y_j)`.
/// Quadratic; kept as the correctness oracle for [`kendall_tau_fast`].
pub fn kendall_tau_brute(s: &PairedSample) -> Result<f64> {
    let n = s.len();
    if n < 2 {
        return Err(Error::InsufficientSample { needed: 2, got: n });
    }
    let xs = s.xs();
    let ys = s.ys();
    let mut num: i64 = 0;
    for i in 0..n {
        for j in (i + 1)..n {
            let sx = sign(xs[i] - xs[j]);
            let sy = sign(ys[i] - ys[j]);
            num += sx * sy;
        }
    }
    // Ordered pairs double the unordered sum; the denominator is n(n-1).
    Ok((2 * num) as f64 / (n as i64 * (n as i64 - 1)) as f64)
}

/// Kendall tau in `O(n log n)` via sort plus merge-based discordance counting.
///
/// Returns exactly the same value as [`kendall_tau_brute`]: both reduce to
/// the integer `2(C - D)` divided by `n(n-1)`.
///
/// # Examples
///
/// ```
/// use coloc::rankcorr::{kendall_tau_fast, PairedSample};
///
/// let s = PairedSample::new(vec![1.0, 2.0, 3.0, 4.0], vec![2.0, 1.0, 3.0, 4.0]).unwrap();
/// assert_eq!(kendall_tau_fast(&s).unwrap(), 2.0 / 3.0);
/// ```
pub fn kendall_tau_fast(s: &PairedSample) -> Result<f64> {
    let n = s.len();
    if n < 2 {
        return Err(Error::InsufficientSample { needed: 2, got: n });
    }
    let mut pairs: Vec<(f64, f64)> = s.pairs().collect();
    pairs.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let mut scratch = TauScratch::default();
    let num = tau_numerator_xsorted(&pairs, &mut scratch);
    Ok(num as f64 / (n as i64 * (n as i64 - 1)) as f64)
}

fn sign(d: f64) -> i64 {
    if d > 0.0 {
        1
    } else if d < 0.0 {
        -1
    } else {
        0
    }
}

/// Reusable buffers for [`tau_numerator_xsorted`].
#[derive(Default)]
pub(crate) struct TauScratch {
    ys: Vec<f64>,
    tmp: Vec<f64>,
}

/// Twice the concordant-minus-discordant pair count, `2(C - D)`, for pairs
/// already sorted by x with ties broken by y.
///
/// Discordant pairs are counted as strict inversions of the y sequence by a
/// bottom-up merge sort; tie groups in x, y, and (x, y) are counted from runs
/// so that tied pairs drop out of the numerator.
pub(crate) fn tau_numerator_xsorted(pairs: &[(f64, f64)], scratch: &mut TauScratch) -> i64 {
    let m = pairs.len() as i64;
    if m < 2 {
        return 0;
    }
    let total = m * (m - 1) / 2;

    let mut tie_x: i64 = 0;
    let mut tie_xy: i64 = 0;
    let mut run_x: i64 = 1;
    let mut run_xy: i64 = 1;
    for w in pairs.windows(2) {
        if w[1].0 == w[0].0 {
            run_x += 1;
            if w[1].1 == w[0].1 {
                run_xy += 1;
            } else {
                tie_xy += run_xy * (run_xy - 1) / 2;
                run_xy = 1;
            }
        } else {
            tie_x += run_x * (run_x - 1) / 2;
            run_x = 1;
            tie_xy += run_xy * (run_xy - 1) / 2;
            run_xy = 1;
        }
    }
    tie_x += run_x * (run_x - 1) / 2;
    tie_xy += run_xy * (run_xy - 1) / 2;

    scratch.ys.clear();
    scratch.ys.extend(pairs.iter().map(|p| p.1));
    let discordant = count_inversions(&mut scratch.ys, &mut scratch.tmp);

    // ys is now sorted ascending; count pairs tied in y from runs.
    let mut tie_y: i64 = 0;
    let mut run_y: i64 = 1;
    for w in scratch.ys.windows(2) {
        if w[1] == w[0] {
            run_y += 1;
        } else {
            tie_y += run_y * (run_y - 1) / 2;
            run_y = 1;
        }
    }
    tie_y += run_y * (run_y - 1) / 2;

    let concordant_minus_discordant = total - tie_x - tie_y + tie_xy - 2 * discordant;
    2 * concordant_minus_discordant
}

/// Sorts `values` ascending, returning the number of strict inversions.
fn count_inversions(values: &mut [f64], tmp: &mut Vec<f64>) -> i64 {
    let n = values.len();
    tmp.clear();
    tmp.resize(n, 0.0);
    let mut inversions: i64 = 0;
    let mut width = 1;
    while width < n {
        let mut lo = 0;
        while lo < n {
            let mid = usize::min(lo + width, n);
            let hi = usize::min(lo + 2 * width, n);
            if mid < hi {
                let (mut i, mut j, mut k) = (lo, mid, lo);
                while i < mid && j < hi {
                    // Equal elements come from the left so ties are not
                    // counted as inversions.
                    if values[j] < values[i] {
                        tmp[k] = values[j];
                        inversions += (mid - i) as i64;
                        j += 1;
                    } else {
                        tmp[k] = values[i];
                        i += 1;
                    }
                    k += 1;
                }
                while i < mid {
                    tmp[k] = values[i];
                    i += 1;
                    k += 1;
                }
                while j < hi {
                    tmp[k] = values[j];
                    j += 1;
                    k += 1;
                }
                values[lo..hi].copy_from_slice(&tmp[lo..hi]);
            }
            lo = hi;
        }
        width *= 2;
    }
    inversions
}

/// `W(m) = sqrt(9 m (m-1) / (2 (2m+5)))`, the reciprocal standard deviation
/// of tau on `m` independent observations.
pub fn variance_normalizer(m: usize) -> Result<f64> {
    if m < 2 {
        return Err(Error::InsufficientSample { needed: 2, got: m });
    }
    let mf = m as f64;
    Ok(((9.0 * mf * (mf - 1.0)) / (2.0 * (2.0 * mf + 5.0))).sqrt())
}

/// Variance-normalized Kendall tau over the above-threshold subset.
///
/// `value` is `None` exactly when the subset has at most one pixel; this is
/// the minus-infinity convention, kept as a distinguished marker so that
/// max-reductions stay well-defined.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalizedTau {
    pub value: Option<f64>,
    pub subset_size: usize,
}

impl NormalizedTau {
    /// The value with the minus-infinity convention made explicit.
    pub fn value_or_neg_infinity(&self) -> f64 {
        self.value.unwrap_or(f64::NEG_INFINITY)
    }
}

/// Evaluates tau on the subset `{i : x_i >= t_x, y_i >= t_y}` and scales it
/// by `W(subset size)`. Threshold comparisons are inclusive.
pub fn normalized_tau(s: &PairedSample, t_x: f64, t_y: f64) -> NormalizedTau {
    let mut subset: Vec<(f64, f64)> = s.pairs().filter(|&(x, y)| x >= t_x && y >= t_y).collect();
    subset.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let mut scratch = TauScratch::default();
    normalized_tau_from_sorted(&subset, &mut scratch)
}

/// As [`normalized_tau`], for a subset already sorted by (x, y).
pub(crate) fn normalized_tau_from_sorted(
    subset: &[(f64, f64)],
    scratch: &mut TauScratch,
) -> NormalizedTau {
    let m = subset.len();
    if m <= 1 {
        return NormalizedTau {
            value: None,
            subset_size: m,
        };
    }
    let num = tau_numerator_xsorted(subset, scratch);
    let tau = num as f64 / (m as i64 * (m as i64 - 1)) as f64;
    let w = variance_normalizer(m).expect("m >= 2");
    NormalizedTau {
        value: Some(tau * w),
        subset_size: m,
    }
}

/// Indices of the pixels selected by the inclusive threshold pair.
#[cfg(test)]
pub(crate) fn above_threshold_indices(s: &PairedSample, t_x: f64, t_y: f64) -> Vec<usize> {
    s.pairs()
        .enumerate()
        .filter(|&(_, (x, y))| x >= t_x && y >= t_y)
        .map(|(i, _)| i)
        .collect()
}


#[cfg(test)]
mod proptests {
    use super::*;
    use proptest::prelude::*;

    // Integer-valued intensities keep monotone transforms free of rounding,
    // so rank structure is preserved exactly.
    fn int_sample() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
        (2usize..60).prop_flat_map(|n| {
            (
                proptest::collection::vec((0u32..50).prop_map(f64::from), n),
                proptest::collection::vec((0u32..50).prop_map(f64::from), n),
            )
        })
    }

    proptest! {
        #[test]
        fn fast_equals_brute((xs, ys) in int_sample()) {
            let s = PairedSample::new(xs, ys).unwrap();
            let brute = kendall_tau_brute(&s).unwrap();
            let fast = kendall_tau_fast(&s).unwrap();
            prop_assert!((brute - fast).abs() <= 1e-12);
        }

        #[test]
        fn monotone_transform_invariance((xs, ys) in int_sample()) {
            let s = PairedSample::new(xs.clone(), ys.clone()).unwrap();
            // Strictly increasing maps, exact on small integers.
            let gx: Vec<f64> = xs.iter().map(|v| v * v + v).collect();
            let hy: Vec<f64> = ys.iter().map(|v| 3.0 * v + 7.0).collect();
            let t = PairedSample::new(gx, hy).unwrap();
            let a = kendall_tau_fast(&s).unwrap();
            let b = kendall_tau_fast(&t).unwrap();
            prop_assert!((a - b).abs() <= 1e-12);
        }

        #[test]
        fn antisymmetry_for_tie_free(perm in proptest::sample::subsequence((0u32..64).collect::<Vec<_>>(), 2..40).prop_shuffle()) {
            // A shuffled subsequence of distinct integers: tie-free by construction.
            let n = perm.len();
            let xs: Vec<f64> = (0..n).map(|i| i as f64).collect();
            let ys: Vec<f64> = perm.iter().map(|&v| f64::from(v)).collect();
            let reflected: Vec<f64> = ys.iter().map(|v| 64.0 - v).collect();
            let s = PairedSample::new(xs.clone(), ys).unwrap();
            let r = PairedSample::new(xs, reflected).unwrap();
            let a = kendall_tau_fast(&s).unwrap();
            let b = kendall_tau_fast(&r).unwrap();
            prop_assert!((a + b).abs() <= 1e-12);
        }

        #[test]
        fn normalized_tau_is_bounded((xs, ys) in int_sample(), tx in 0.0f64..50.0, ty in 0.0f64..50.0) {
            let s = PairedSample::new(xs, ys).unwrap();
            let t = normalized_tau(&s, tx, ty);
            if let Some(v) = t.value {
                let w = variance_normalizer(t.subset_size).unwrap();
                prop_assert!(v.abs() <= w + 1e-12);
            } else {
                prop_assert!(t.subset_size <= 1);
            }
        }
    }
}
