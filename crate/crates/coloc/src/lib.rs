//! Robust nonparametric colocalization analysis for dual-channel images.
//!
//! Classical colocalization scores (Pearson correlation, Manders split
//! coefficients) assume a particular shape of association and are sensitive
//! to background. This crate implements a rank-based alternative: the
//! maximum of variance-normalized Kendall tau over pairs of intensity
//! thresholds, together with a fast grid approximation, a block-wise
//! permutation test for p-values, copula-based synthetic data generators,
//! and a Monte-Carlo power/critical-value harness.
//!
//! The building blocks live in focused modules:
//!
//! - [`rankcorr`]: Kendall-tau kernels and the thresholded, normalized tau;
//! - [`scan`]: the threshold scan statistic, exact and grid-approximated;
//! - [`classical`]: Pearson, Manders, and Otsu's threshold;
//! - [`permute`]: block partitions, block shuffles, permutation p-values;
//! - [`simgen`]: synthetic null and copula-alternative image generators;
//! - [`power`]: Monte-Carlo critical values and power sweeps;
//! - [`stat`]: the statistic registry shared by the permutation and power
//!   machinery.
//!
//! Everything randomized takes an explicit `u64` seed and is deterministic
//! for a fixed seed regardless of thread count.

pub mod channel;
pub mod classical;
pub mod error;
pub mod permute;
pub mod power;
pub mod rankcorr;
pub mod rng;
pub mod scan;
pub mod simgen;
pub mod stat;

pub use channel::Channel;
pub use error::{Error, Result};
pub use rankcorr::{
    kendall_tau_brute, kendall_tau_fast, normalized_tau, variance_normalizer, NormalizedTau,
    PairedSample,
};
pub use scan::{build_grid, tau_star, tau_star_app, FloorPolicy, GridMode, ScanResult, ThresholdGrid};
pub use stat::{ChannelStatistic, Statistic};
