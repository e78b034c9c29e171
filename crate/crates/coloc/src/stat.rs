//! The statistic registry shared by the permutation and power machinery.
//!
//! A [`Statistic`] names one of the supported colocalization measures. For
//! permutation testing it is first *prepared* against the observed image
//! pair: data-dependent settings (Otsu thresholds, scan floors) are computed
//! once from the original channels and frozen, then reused on every shuffled
//! replicate.

use crate::channel::Channel;
use crate::classical::{manders, median, otsu, pearson};
use crate::error::Result;
use crate::rankcorr::PairedSample;
use crate::scan::{build_grid, tau_star, FloorPolicy, GridMode};

/// A colocalization test statistic.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Statistic {
    Pearson,
    MandersM1,
    MandersM2,
    TauStarApp(FloorPolicy),
    TauStarFull(FloorPolicy),
}

impl Statistic {
    pub fn name(&self) -> &'static str {
        match self {
            Statistic::Pearson => "pearson",
            Statistic::MandersM1 => "manders_m1",
            Statistic::MandersM2 => "manders_m2",
            Statistic::TauStarApp(_) => "tau_star_app",
            Statistic::TauStarFull(_) => "tau_star_full",
        }
    }

    /// Freezes data-dependent settings against the observed pair.
    pub fn prepare(&self, x: &Channel, y: &Channel) -> Result<PreparedStatistic> {
        let frozen = match self {
            Statistic::Pearson => Frozen::None,
            Statistic::MandersM1 | Statistic::MandersM2 => Frozen::MandersThresholds {
                alpha_x: otsu(x.pixels())?,
                alpha_y: otsu(y.pixels())?,
            },
            Statistic::TauStarApp(policy) | Statistic::TauStarFull(policy) => match policy {
                FloorPolicy::Default => Frozen::ScanFloors {
                    floor_x: None,
                    floor_y: None,
                },
                FloorPolicy::OtsuMedian => Frozen::ScanFloors {
                    floor_x: Some(otsu(x.pixels())?.max(median(x.pixels())?)),
                    floor_y: Some(otsu(y.pixels())?.max(median(y.pixels())?)),
                },
            },
        };
        Ok(PreparedStatistic {
            kind: *self,
            frozen,
        })
    }

    /// One-shot evaluation: prepare against this pair, then evaluate it.
    pub fn evaluate(&self, x: &Channel, y: &Channel) -> Result<f64> {
        self.prepare(x, y)?.evaluate(x, y)
    }
}

#[derive(Debug, Clone, Copy)]
enum Frozen {
    None,
    MandersThresholds { alpha_x: f64, alpha_y: f64 },
    ScanFloors {
        floor_x: Option<f64>,
        floor_y: Option<f64>,
    },
}

/// A statistic with its data-dependent settings frozen.
#[derive(Debug, Clone, Copy)]
pub struct PreparedStatistic {
    kind: Statistic,
    frozen: Frozen,
}

impl PreparedStatistic {
    pub fn name(&self) -> &'static str {
        self.kind.name()
    }

    /// Evaluates the statistic on a channel pair. Degenerate scans (no pixel
    /// pair above both thresholds anywhere on the grid) map to negative
    /// infinity per the scan convention.
    pub fn evaluate(&self, x: &Channel, y: &Channel) -> Result<f64> {
        let sample = PairedSample::from_channels(x, y)?;
        match (self.kind, self.frozen) {
            (Statistic::Pearson, _) => pearson(&sample),
            (Statistic::MandersM1, Frozen::MandersThresholds { alpha_x, alpha_y }) => {
                Ok(manders(&sample, alpha_x, alpha_y)?.m1)
            }
            (Statistic::MandersM2, Frozen::MandersThresholds { alpha_x, alpha_y }) => {
                Ok(manders(&sample, alpha_x, alpha_y)?.m2)
            }
            (Statistic::TauStarApp(_), Frozen::ScanFloors { floor_x, floor_y }) => {
                let grid = build_grid(sample.len(), GridMode::Approx)?
                    .with_floors(floor_x, floor_y);
                Ok(tau_star(&sample, &grid)?.value_or_neg_infinity())
            }
            (Statistic::TauStarFull(_), Frozen::ScanFloors { floor_x, floor_y }) => {
                let grid =
                    build_grid(sample.len(), GridMode::Full)?.with_floors(floor_x, floor_y);
                Ok(tau_star(&sample, &grid)?.value_or_neg_infinity())
            }
            _ => unreachable!("prepare() pairs each statistic with its frozen state"),
        }
    }
}

/// Anything that scores a channel pair. Implemented by [`Statistic`] with
/// fresh per-image preparation; test code substitutes stubs.
pub trait ChannelStatistic: Sync {
    fn name(&self) -> &str;
    fn evaluate(&self, x: &Channel, y: &Channel) -> Result<f64>;
}

impl ChannelStatistic for Statistic {
    fn name(&self) -> &str {
        Statistic::name(self)
    }

    fn evaluate(&self, x: &Channel, y: &Channel) -> Result<f64> {
        Statistic::evaluate(self, x, y)
    }
}
