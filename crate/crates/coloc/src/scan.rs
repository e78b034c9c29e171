//! The threshold scan statistic.
//!
//! The statistic is the maximum, over pairs of intensity thresholds, of the
//! variance-normalized Kendall tau on the pixels above both thresholds.
//! Candidate thresholds are order statistics of each channel. The exact scan
//! uses every index from `floor(n/2)` up; the fast approximation restricts to
//! a near-geometric index grid whose size grows like `log n * log log n`, so
//! the whole scan costs close to linear time in the number of pixels.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classical::{median, otsu};
use crate::error::{Error, Result};
use crate::rankcorr::{normalized_tau_from_sorted, PairedSample, TauScratch};

/// Which family of threshold indices to scan.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GridMode {
    /// Every order-statistic index in `[floor(n/2), n-1]`.
    Full,
    /// The near-geometric index set `{ floor(n - (1 + 1/ln ln n)^j) }`
    /// clipped to `[floor(n/2), n-1]`.
    Approx,
}

/// How the lower bound of the scanned thresholds is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FloorPolicy {
    /// Only the `floor(n/2)` order-statistic clipping.
    Default,
    /// Additionally require thresholds at or above
    /// `max(otsu(channel), median(channel))` per channel.
    OtsuMedian,
}

/// Sorted candidate order-statistic indices (1-based) plus optional
/// intensity floors.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdGrid {
    indices: Vec<usize>,
    mode: GridMode,
    floor_x: Option<f64>,
    floor_y: Option<f64>,
}

impl ThresholdGrid {
    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn mode(&self) -> GridMode {
        self.mode
    }

    /// Adds intensity floors; candidate thresholds below a floor are dropped
    /// on top of the index clipping.
    pub fn with_floors(mut self, floor_x: Option<f64>, floor_y: Option<f64>) -> Self {
        self.floor_x = floor_x;
        self.floor_y = floor_y;
        self
    }

    pub fn floors(&self) -> (Option<f64>, Option<f64>) {
        (self.floor_x, self.floor_y)
    }
}

/// Builds the threshold index grid for a sample of size `n`.
///
/// `Full` needs `n >= 4`; `Approx` needs `n >= 16` so that `ln ln n` is
/// safely positive. Index `n` itself is never included: its cells select at
/// most one pixel in the tie-free case and fall under the minus-infinity
/// convention anyway.
pub fn build_grid(n: usize, mode: GridMode) -> Result<ThresholdGrid> {
    let min_n = match mode {
        GridMode::Full => 4,
        GridMode::Approx => 16,
    };
    if n < min_n {
        return Err(Error::SampleTooSmall {
            needed: min_n,
            got: n,
        });
    }
    let half = n / 2;
    let indices = match mode {
        GridMode::Full => (half..n).collect(),
        GridMode::Approx => {
            let nf = n as f64;
            let ratio = 1.0 + 1.0 / nf.ln().ln();
            let mut indices = Vec::new();
            let mut power = ratio;
            loop {
                let s = (nf - power).floor();
                if s < half as f64 {
                    break;
                }
                let s = s as usize;
                if indices.last() != Some(&s) {
                    indices.push(s);
                }
                power *= ratio;
            }
            indices.reverse();
            indices.dedup();
            indices
        }
    };
    Ok(ThresholdGrid {
        indices,
        mode,
        floor_x: None,
        floor_y: None,
    })
}

/// Upper bound on the approximate grid size,
/// `ceil(ln(n/2) / ln(1 + 1/ln ln n)) + 1`.
pub fn approx_grid_size_bound(n: usize) -> usize {
    let nf = n as f64;
    let ratio = 1.0 + 1.0 / nf.ln().ln();
    ((nf / 2.0).ln() / ratio.ln()).ceil() as usize + 1
}

/// Result of a threshold scan.
///
/// `value` is `None` when every evaluated cell was degenerate (at most one
/// pixel above both thresholds). The argmax fields always name the winning
/// cell, with ties broken to the smallest `(jx, jy)` in lexicographic order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanResult {
    pub value: Option<f64>,
    pub argmax_tx: f64,
    pub argmax_ty: f64,
    pub argmax_jx: usize,
    pub argmax_jy: usize,
    pub subset_size: usize,
    pub cells_evaluated: usize,
}

impl ScanResult {
    /// The scan value with the minus-infinity convention made explicit.
    pub fn value_or_neg_infinity(&self) -> f64 {
        self.value.unwrap_or(f64::NEG_INFINITY)
    }
}

#[derive(Debug, Clone, Copy)]
struct Cell {
    value: Option<f64>,
    jx: usize,
    jy: usize,
    tx: f64,
    ty: f64,
    subset_size: usize,
}

impl Cell {
    /// Larger value wins; on equal values (including two degenerate cells)
    /// the smaller `(jx, jy)` wins. Total, so parallel max-reductions are
    /// deterministic.
    fn beats(&self, other: &Cell) -> bool {
        match (self.value, other.value) {
            (Some(a), Some(b)) => {
                if a != b {
                    a > b
                } else {
                    (self.jx, self.jy) < (other.jx, other.jy)
                }
            }
            (Some(_), None) => true,
            (None, Some(_)) => false,
            (None, None) => (self.jx, self.jy) < (other.jx, other.jy),
        }
    }
}

/// Scans every admissible threshold cell of `grid` and returns the maximum
/// normalized tau with its argmax.
///
/// Cells are evaluated independently (in parallel) from a shared presort of
/// the sample; duplicate intensity values collapsing distinct indices onto
/// the same threshold are deduplicated before evaluation.
pub fn tau_star(s: &PairedSample, grid: &ThresholdGrid) -> Result<ScanResult> {
    let n = s.len();
    if n < 4 {
        return Err(Error::SampleTooSmall { needed: 4, got: n });
    }
    if grid.indices.is_empty() || grid.indices.iter().any(|&j| j < 1 || j > n) {
        return Err(Error::GridMismatch { n });
    }

    let mut sorted_x = s.xs().to_vec();
    sorted_x.sort_unstable_by(f64::total_cmp);
    let mut sorted_y = s.ys().to_vec();
    sorted_y.sort_unstable_by(f64::total_cmp);

    let cand_x = candidate_thresholds(&grid.indices, &sorted_x, grid.floor_x);
    let cand_y = candidate_thresholds(&grid.indices, &sorted_y, grid.floor_y);
    if cand_x.is_empty() || cand_y.is_empty() {
        return Err(Error::NoAdmissibleThresholds);
    }

    let mut presorted: Vec<(f64, f64)> = s.pairs().collect();
    presorted.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));

    let best = cand_x
        .par_iter()
        .map_init(
            || (Vec::new(), TauScratch::default()),
            |(subset, scratch), &(jx, tx)| {
                let start = presorted.partition_point(|p| p.0 < tx);
                let suffix = &presorted[start..];
                let mut best: Option<Cell> = None;
                for &(jy, ty) in &cand_y {
                    subset.clear();
                    subset.extend(suffix.iter().filter(|p| p.1 >= ty));
                    let t = normalized_tau_from_sorted(subset, scratch);
                    let cell = Cell {
                        value: t.value,
                        jx,
                        jy,
                        tx,
                        ty,
                        subset_size: t.subset_size,
                    };
                    if best.as_ref().is_none_or(|b| cell.beats(b)) {
                        best = Some(cell);
                    }
                }
                best
            },
        )
        .reduce(
            || None,
            |a, b| match (a, b) {
                (Some(a), Some(b)) => Some(if a.beats(&b) { a } else { b }),
                (x, None) | (None, x) => x,
            },
        )
        .expect("at least one candidate cell");

    Ok(ScanResult {
        value: best.value,
        argmax_tx: best.tx,
        argmax_ty: best.ty,
        argmax_jx: best.jx,
        argmax_jy: best.jy,
        subset_size: best.subset_size,
        cells_evaluated: cand_x.len() * cand_y.len(),
    })
}

/// Maps grid indices to threshold values, applies the floor, and collapses
/// duplicate values onto the smallest index.
fn candidate_thresholds(
    indices: &[usize],
    sorted: &[f64],
    floor: Option<f64>,
) -> Vec<(usize, f64)> {
    let mut out: Vec<(usize, f64)> = Vec::with_capacity(indices.len());
    for &j in indices {
        let t = sorted[j - 1];
        if floor.is_some_and(|f| t < f) {
            continue;
        }
        if out.last().is_none_or(|&(_, prev)| prev != t) {
            out.push((j, t));
        }
    }
    out
}

/// The fast scan: approximate grid plus the chosen floor policy.
///
/// # Examples
///
/// ```
/// use coloc::rankcorr::PairedSample;
/// use coloc::scan::{tau_star_app, FloorPolicy};
///
/// let xs: Vec<f64> = (0..32).map(f64::from).collect();
/// let s = PairedSample::new(xs.clone(), xs).unwrap();
/// let scan = tau_star_app(&s, FloorPolicy::Default).unwrap();
/// assert!(scan.value.unwrap() > 0.0);
/// assert_eq!(scan.subset_size, 32 - scan.argmax_jx + 1);
/// ```
pub fn tau_star_app(s: &PairedSample, policy: FloorPolicy) -> Result<ScanResult> {
    let grid = build_grid(s.len(), GridMode::Approx)?;
    let grid = match policy {
        FloorPolicy::Default => grid,
        FloorPolicy::OtsuMedian => {
            let fx = otsu(s.xs())?.max(median(s.xs())?);
            let fy = otsu(s.ys())?.max(median(s.ys())?);
            grid.with_floors(Some(fx), Some(fy))
        }
    };
    tau_star(s, &grid)
}
