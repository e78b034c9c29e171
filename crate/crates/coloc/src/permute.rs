//! Block-wise permutation testing.
//!
//! Shuffling one channel in rigid square blocks destroys cross-channel
//! association while preserving the within-channel spatial correlation that
//! the point-spread function induces. Replicate statistics under these
//! shuffles estimate the null distribution of any colocalization measure,
//! and the p-value is the fraction of replicates strictly exceeding the
//! observed value.

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::Channel;
use crate::error::{Error, Result};
use crate::rng::substream;
use crate::stat::Statistic;

/// A tiling of the top-left cropped region into `D x D` pixel blocks.
///
/// The cropped region is the largest multiple of `D` in each dimension;
/// trailing remainder rows and columns are dropped from the analysis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockPartition {
    width: usize,
    height: usize,
    block_size: usize,
    blocks_x: usize,
    blocks_y: usize,
}

/// Builds the block tiling for a `width x height` image.
pub fn block_partition(width: usize, height: usize, block_size: usize) -> Result<BlockPartition> {
    if block_size == 0 {
        return Err(Error::InvalidParameter("block size must be positive".into()));
    }
    if block_size > width || block_size > height {
        return Err(Error::BlockTooLarge {
            block_size,
            width,
            height,
        });
    }
    Ok(BlockPartition {
        width,
        height,
        block_size,
        blocks_x: width / block_size,
        blocks_y: height / block_size,
    })
}

impl BlockPartition {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn block_size(&self) -> usize {
        self.block_size
    }

    pub fn cropped_width(&self) -> usize {
        self.blocks_x * self.block_size
    }

    pub fn cropped_height(&self) -> usize {
        self.blocks_y * self.block_size
    }

    pub fn block_count(&self) -> usize {
        self.blocks_x * self.blocks_y
    }

    /// Top-left pixel coordinates of every block, row-major.
    pub fn block_origins(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let d = self.block_size;
        let bx = self.blocks_x;
        (0..self.block_count()).map(move |b| ((b % bx) * d, (b / bx) * d))
    }
}

/// Default block size for an `a x b` image: `floor(min(sqrt(a), sqrt(b)))`.
pub fn auto_block_size(width: usize, height: usize) -> usize {
    let d = (width.min(height) as f64).sqrt().floor() as usize;
    d.max(1)
}

/// Moves whole blocks to uniformly random positions, contents rigid.
///
/// The result has the partition's cropped dimensions; the multiset of
/// cropped intensities is preserved exactly. Deterministic for a fixed
/// generator state.
pub fn block_shuffle(
    ch: &Channel,
    partition: &BlockPartition,
    rng: &mut rand_chacha::ChaCha8Rng,
) -> Result<Channel> {
    if ch.width() != partition.width || ch.height() != partition.height {
        return Err(Error::DimensionMismatch {
            left_width: ch.width(),
            left_height: ch.height(),
            right_width: partition.width,
            right_height: partition.height,
        });
    }
    let d = partition.block_size;
    let (cw, chh) = (partition.cropped_width(), partition.cropped_height());
    let mut order: Vec<usize> = (0..partition.block_count()).collect();
    order.shuffle(rng);

    let mut pixels = vec![0.0f64; cw * chh];
    let origins: Vec<(usize, usize)> = partition.block_origins().collect();
    for (dest, &src) in order.iter().enumerate() {
        let (dx, dy) = origins[dest];
        let (sx, sy) = origins[src];
        for row in 0..d {
            for col in 0..d {
                pixels[(dy + row) * cw + dx + col] = ch.get(sx + col, sy + row);
            }
        }
    }
    Channel::new(cw, chh, pixels)
}

/// Options for [`permutation_pvalue_with`].
#[derive(Debug, Clone, Copy, Default)]
pub struct PermOptions {
    /// Shuffle the y channel instead of the default x channel.
    pub shuffle_y: bool,
    /// Report the add-one-smoothed p-value `(#{E_j >= E_0} + 1) / (B + 1)`
    /// instead of the plain strict-count `#{E_j > E_0} / B`, which can be
    /// exactly zero.
    pub smoothed: bool,
}

/// Outcome of a permutation test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PermReport {
    pub statistic_name: String,
    /// Observed statistic on the (cropped) original pair.
    pub e0: f64,
    /// Replicate statistics in replicate order.
    pub replicates: Vec<f64>,
    pub p_value: f64,
    pub seed: u64,
    pub block_size: usize,
}

impl PermReport {
    /// Assembles a report from an observed value and replicate values,
    /// computing the p-value by the strict count (or its smoothed variant).
    pub fn from_replicates(
        statistic_name: impl Into<String>,
        e0: f64,
        replicates: Vec<f64>,
        seed: u64,
        block_size: usize,
        smoothed: bool,
    ) -> Self {
        let b = replicates.len();
        let p_value = if smoothed {
            let geq = replicates.iter().filter(|&&e| e >= e0).count();
            (geq + 1) as f64 / (b + 1) as f64
        } else {
            let above = replicates.iter().filter(|&&e| e > e0).count();
            above as f64 / b as f64
        };
        Self {
            statistic_name: statistic_name.into(),
            e0,
            replicates,
            p_value,
            seed,
            block_size,
        }
    }
}

/// Block permutation test with the default options: the x channel is
/// shuffled and the p-value is the plain strict count.
///
/// # Examples
///
/// ```
/// use coloc::permute::permutation_pvalue;
/// use coloc::simgen::{sample_null, CopulaParams};
/// use coloc::stat::Statistic;
///
/// let params = CopulaParams {
///     width: 16,
///     height: 16,
///     r_threshold: 0.0,
///     theta: 1.0,
///     psf_sigma: 0.0,
/// };
/// let (x, y) = sample_null(&params, 1);
/// let report = permutation_pvalue(&Statistic::Pearson, &x, &y, 50, 4, 7).unwrap();
/// assert_eq!(report.replicates.len(), 50);
/// assert!((0.0..=1.0).contains(&report.p_value));
/// ```
pub fn permutation_pvalue(
    stat: &Statistic,
    x: &Channel,
    y: &Channel,
    replicates: usize,
    block_size: usize,
    seed: u64,
) -> Result<PermReport> {
    permutation_pvalue_with(
        stat,
        x,
        y,
        replicates,
        block_size,
        seed,
        PermOptions::default(),
    )
}

/// Block permutation test.
///
/// Crops both channels to the block tiling, freezes the statistic's
/// data-dependent settings on the cropped originals, computes the observed
/// value, then re-evaluates on `replicates` independently shuffled copies.
/// Replicate `j` uses substream `(seed, j)`, so the report is bit-identical
/// for a fixed seed regardless of how many threads execute.
pub fn permutation_pvalue_with(
    stat: &Statistic,
    x: &Channel,
    y: &Channel,
    replicates: usize,
    block_size: usize,
    seed: u64,
    options: PermOptions,
) -> Result<PermReport> {
    if replicates == 0 {
        return Err(Error::InvalidParameter(
            "need at least one permutation replicate".into(),
        ));
    }
    if !x.same_dims(y) {
        return Err(x.dimension_mismatch(y));
    }
    let partition = block_partition(x.width(), x.height(), block_size)?;
    let x = x.crop(partition.cropped_width(), partition.cropped_height())?;
    let y = y.crop(partition.cropped_width(), partition.cropped_height())?;
    let cropped_partition = block_partition(x.width(), x.height(), block_size)?;

    let prepared = stat.prepare(&x, &y)?;
    let e0 = prepared.evaluate(&x, &y)?;

    let values: Vec<f64> = (0..replicates)
        .into_par_iter()
        .map(|i| -> Result<f64> {
            let j = i + 1;
            let mut rng = substream(seed, j as u64);
            let result = if options.shuffle_y {
                block_shuffle(&y, &cropped_partition, &mut rng)
                    .and_then(|shuffled| prepared.evaluate(&x, &shuffled))
            } else {
                block_shuffle(&x, &cropped_partition, &mut rng)
                    .and_then(|shuffled| prepared.evaluate(&shuffled, &y))
            };
            result.map_err(|e| Error::ReplicateFailed {
                index: j,
                source: Box::new(e),
            })
        })
        .collect::<Result<Vec<f64>>>()?;

    Ok(PermReport::from_replicates(
        stat.name(),
        e0,
        values,
        seed,
        block_size,
        options.smoothed,
    ))
}
