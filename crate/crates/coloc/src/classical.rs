//! Classical colocalization baselines: Pearson's r, Manders' split
//! coefficients, and Otsu's threshold.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rankcorr::PairedSample;

/// Pearson product-moment correlation between the two channels.
pub fn pearson(s: &PairedSample) -> Result<f64> {
    let n = s.len();
    if n < 2 {
        return Err(Error::InsufficientSample { needed: 2, got: n });
    }
    let nf = n as f64;
    let mean_x = s.xs().iter().sum::<f64>() / nf;
    let mean_y = s.ys().iter().sum::<f64>() / nf;
    let mut cov = 0.0;
    let mut var_x = 0.0;
    let mut var_y = 0.0;
    for (x, y) in s.pairs() {
        let dx = x - mean_x;
        let dy = y - mean_y;
        cov += dx * dy;
        var_x += dx * dx;
        var_y += dy * dy;
    }
    if var_x == 0.0 || var_y == 0.0 {
        return Err(Error::DegenerateChannel);
    }
    Ok((cov / (var_x * var_y).sqrt()).clamp(-1.0, 1.0))
}

/// Manders' split coefficients with their thresholds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MandersPair {
    pub m1: f64,
    pub m2: f64,
    pub alpha_x: f64,
    pub alpha_y: f64,
}

/// Manders' split coefficients.
///
/// `m1` is the fraction of total x intensity on pixels where `y > alpha_y`;
/// `m2` the fraction of total y intensity where `x > alpha_x`. The
/// comparisons are strict: intensities at or below the threshold count as
/// background.
pub fn manders(s: &PairedSample, alpha_x: f64, alpha_y: f64) -> Result<MandersPair> {
    let total_x: f64 = s.xs().iter().sum();
    let total_y: f64 = s.ys().iter().sum();
    if total_x <= 0.0 || total_y <= 0.0 {
        return Err(Error::ZeroTotalIntensity);
    }
    let mut above_x = 0.0;
    let mut above_y = 0.0;
    for (x, y) in s.pairs() {
        if y > alpha_y {
            above_x += x;
        }
        if x > alpha_x {
            above_y += y;
        }
    }
    Ok(MandersPair {
        m1: above_x / total_x,
        m2: above_y / total_y,
        alpha_x,
        alpha_y,
    })
}

const OTSU_BINS: usize = 256;

/// Otsu's threshold on a 256-bin histogram over `[min, max]`.
///
/// Returns an observed value: the largest intensity assigned to the
/// background class of the split maximizing between-class variance. On ties
/// the smallest maximizer wins.
pub fn otsu(values: &[f64]) -> Result<f64> {
    if values.len() < 2 {
        return Err(Error::InsufficientSample {
            needed: 2,
            got: values.len(),
        });
    }
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if min == max {
        return Err(Error::DegenerateHistogram);
    }

    let mut counts = [0u64; OTSU_BINS];
    let mut bin_max = [f64::NEG_INFINITY; OTSU_BINS];
    let scale = OTSU_BINS as f64 / (max - min);
    for &v in values {
        let bin = (((v - min) * scale) as usize).min(OTSU_BINS - 1);
        counts[bin] += 1;
        if v > bin_max[bin] {
            bin_max[bin] = v;
        }
    }

    let total = values.len() as f64;
    let total_level_sum: f64 = counts
        .iter()
        .enumerate()
        .map(|(b, &c)| b as f64 * c as f64)
        .sum();

    let mut background_count = 0.0;
    let mut background_level_sum = 0.0;
    let mut best_variance = f64::NEG_INFINITY;
    let mut best_bin = 0usize;
    for (b, &count) in counts.iter().enumerate().take(OTSU_BINS - 1) {
        background_count += count as f64;
        background_level_sum += b as f64 * count as f64;
        let foreground_count = total - background_count;
        if background_count == 0.0 || foreground_count == 0.0 {
            continue;
        }
        let mean_b = background_level_sum / background_count;
        let mean_f = (total_level_sum - background_level_sum) / foreground_count;
        let variance = background_count * foreground_count * (mean_b - mean_f).powi(2);
        if variance > best_variance {
            best_variance = variance;
            best_bin = b;
        }
    }

    // Largest observed value in the background class.
    let threshold = bin_max[..=best_bin]
        .iter()
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(threshold)
}

/// Sample median: the midpoint of the two central order statistics for even
/// lengths.
pub fn median(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::InsufficientSample { needed: 1, got: 0 });
    }
    let mut sorted = values.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    let n = sorted.len();
    if n % 2 == 1 {
        Ok(sorted[n / 2])
    } else {
        Ok((sorted[n / 2 - 1] + sorted[n / 2]) / 2.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(xs: &[f64], ys: &[f64]) -> PairedSample {
        PairedSample::new(xs.to_vec(), ys.to_vec()).unwrap()
    }

    #[test]
    fn pearson_exact_linear() {
        let s = sample(&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0]);
        assert_eq!(pearson(&s).unwrap(), 1.0);
        let s = sample(&[1.0, 2.0, 3.0], &[6.0, 4.0, 2.0]);
        assert_eq!(pearson(&s).unwrap(), -1.0);
    }

    #[test]
    fn pearson_constant_channel_errors() {
        let s = sample(&[2.0, 2.0, 2.0], &[1.0, 2.0, 3.0]);
        assert!(matches!(pearson(&s), Err(Error::DegenerateChannel)));
    }

    #[test]
    fn pearson_affine_invariance_and_sign_flip() {
        let s = sample(&[1.0, 4.0, 2.0, 7.0], &[3.0, 1.0, 5.0, 9.0]);
        let r = pearson(&s).unwrap();
        let scaled = sample(
            &s.xs().iter().map(|v| 2.5 * v + 3.0).collect::<Vec<_>>(),
            s.ys(),
        );
        assert!((pearson(&scaled).unwrap() - r).abs() < 1e-12);
        let reflected = sample(
            s.xs(),
            &s.ys().iter().map(|v| 10.0 - v).collect::<Vec<_>>(),
        );
        assert!((pearson(&reflected).unwrap() + r).abs() < 1e-12);
    }

    #[test]
    fn manders_worked_example() {
        let s = sample(&[1.0, 2.0, 3.0, 4.0], &[0.0, 5.0, 0.0, 5.0]);
        let m = manders(&s, 2.5, 2.5).unwrap();
        assert_eq!(m.m1, 0.6);
        assert_eq!(m.m2, 0.5);
    }

    #[test]
    fn manders_threshold_extremes() {
        let s = sample(&[1.0, 2.0], &[3.0, 4.0]);
        let all = manders(&s, 0.5, 0.5).unwrap();
        assert_eq!((all.m1, all.m2), (1.0, 1.0));
        let none = manders(&s, 10.0, 10.0).unwrap();
        assert_eq!((none.m1, none.m2), (0.0, 0.0));
    }

    #[test]
    fn manders_zero_total_errors() {
        let s = sample(&[0.0, 0.0], &[1.0, 2.0]);
        assert!(matches!(
            manders(&s, 0.5, 0.5),
            Err(Error::ZeroTotalIntensity)
        ));
    }

    #[test]
    fn manders_indicator_scale_invariance() {
        let s = sample(&[1.0, 2.0, 3.0, 4.0], &[0.0, 5.0, 1.0, 5.0]);
        let base = manders(&s, 2.5, 2.5).unwrap();
        let scaled = sample(
            s.xs(),
            &s.ys().iter().map(|v| v * 3.0).collect::<Vec<_>>(),
        );
        let m = manders(&scaled, 2.5, 2.5 * 3.0).unwrap();
        assert!((m.m1 - base.m1).abs() < 1e-12);
    }

    #[test]
    fn otsu_even_split() {
        let values = [0.0, 0.0, 0.0, 0.0, 10.0, 10.0, 10.0, 10.0];
        assert_eq!(otsu(&values).unwrap(), 0.0);
    }

    #[test]
    fn otsu_separates_outlier() {
        let mut values = vec![0.0; 20];
        values.push(100.0);
        let t = otsu(&values).unwrap();
        assert!(t < 100.0);
        assert!(t >= 0.0);
    }

    #[test]
    fn otsu_all_identical_errors() {
        assert!(matches!(
            otsu(&[3.0, 3.0, 3.0]),
            Err(Error::DegenerateHistogram)
        ));
    }

    #[test]
    fn otsu_in_range() {
        let values: Vec<f64> = (0..100).map(|i| (i % 17) as f64 + (i / 17) as f64).collect();
        let t = otsu(&values).unwrap();
        let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        assert!(t >= min && t < max);
    }

    #[test]
    fn median_conventions() {
        assert_eq!(median(&[3.0, 1.0, 2.0]).unwrap(), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]).unwrap(), 2.5);
        assert!(median(&[]).is_err());
    }
}
