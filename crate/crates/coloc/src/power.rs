//! Monte-Carlo critical values and power curves.
//!
//! The critical value of a statistic is an upper quantile of its simulated
//! null distribution; power is the fraction of simulated alternatives whose
//! statistic strictly exceeds that critical value. Runs are independent and
//! evaluated in parallel with per-run seed substreams.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::derive_seed;
use crate::simgen::{sample_alternative, sample_null, CopulaParams};
use crate::stat::ChannelStatistic;

/// Monte-Carlo estimate of the `1 - alpha` null quantile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalValue {
    pub statistic_name: String,
    pub alpha: f64,
    pub value: f64,
    pub null_runs: usize,
}

/// One point of a power curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerPoint {
    pub statistic_name: String,
    pub r_threshold: f64,
    pub theta: f64,
    pub runs: usize,
    pub rejections: usize,
    pub beta: f64,
}

/// Rejection rate over simulated null images, for size checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RejectionRate {
    pub statistic_name: String,
    pub runs: usize,
    pub rejections: usize,
    pub rate: f64,
}

/// Simulates `null_runs` independent null images, evaluates `stat` on each,
/// and returns the `ceil((1 - alpha) * null_runs)`-th order statistic.
pub fn critical_value(
    stat: &dyn ChannelStatistic,
    params: &CopulaParams,
    alpha: f64,
    null_runs: usize,
    seed: u64,
) -> Result<CriticalValue> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "alpha must lie in (0, 1), got {alpha}"
        )));
    }
    let min_runs = (1.0 / alpha).ceil() as usize;
    if null_runs < min_runs {
        return Err(Error::InvalidParameter(format!(
            "need at least {min_runs} null runs for alpha = {alpha}, got {null_runs}"
        )));
    }
    let mut values: Vec<f64> = (0..null_runs)
        .into_par_iter()
        .map(|run| {
            let (x, y) = sample_null(params, derive_seed(seed, run as u64));
            stat.evaluate(&x, &y)
        })
        .collect::<Result<Vec<f64>>>()?;
    values.sort_unstable_by(f64::total_cmp);
    let rank = ((1.0 - alpha) * null_runs as f64).ceil() as usize;
    let rank = rank.clamp(1, null_runs);
    Ok(CriticalValue {
        statistic_name: stat.name().to_string(),
        alpha,
        value: values[rank - 1],
        null_runs,
    })
}

/// Estimates power at every `(R, theta)` combination.
///
/// For each grid point, simulates `runs` alternative images and counts runs
/// whose statistic strictly exceeds the critical value. The critical value
/// must have been computed for the same statistic.
pub fn power_sweep(
    stat: &dyn ChannelStatistic,
    params: &CopulaParams,
    r_list: &[f64],
    theta_list: &[f64],
    runs: usize,
    critical: &CriticalValue,
    seed: u64,
) -> Result<Vec<PowerPoint>> {
    if critical.statistic_name != stat.name() {
        return Err(Error::InvalidParameter(format!(
            "critical value was computed for '{}', not '{}'",
            critical.statistic_name,
            stat.name()
        )));
    }
    if runs == 0 {
        return Err(Error::InvalidParameter("need at least one run".into()));
    }
    let mut points = Vec::with_capacity(r_list.len() * theta_list.len());
    for (ri, &r) in r_list.iter().enumerate() {
        for (ti, &theta) in theta_list.iter().enumerate() {
            let point_params = CopulaParams {
                r_threshold: r,
                theta,
                ..*params
            };
            point_params.validate()?;
            let point_index = (ri * theta_list.len() + ti) as u64;
            let rejections = (0..runs)
                .into_par_iter()
                .map(|run| -> Result<usize> {
                    let img_seed =
                        derive_seed(seed, point_index * runs as u64 + run as u64);
                    let (x, y) = sample_alternative(&point_params, img_seed)?;
                    Ok((stat.evaluate(&x, &y)? > critical.value) as usize)
                })
                .try_reduce(|| 0usize, |a, b| Ok(a + b))?;
            points.push(PowerPoint {
                statistic_name: stat.name().to_string(),
                r_threshold: r,
                theta,
                runs,
                rejections,
                beta: rejections as f64 / runs as f64,
            });
        }
    }
    Ok(points)
}

/// Rejection rate of `stat > critical` over freshly simulated null images.
pub fn empirical_size(
    stat: &dyn ChannelStatistic,
    params: &CopulaParams,
    critical: &CriticalValue,
    runs: usize,
    seed: u64,
) -> Result<RejectionRate> {
    if critical.statistic_name != stat.name() {
        return Err(Error::InvalidParameter(format!(
            "critical value was computed for '{}', not '{}'",
            critical.statistic_name,
            stat.name()
        )));
    }
    if runs == 0 {
        return Err(Error::InvalidParameter("need at least one run".into()));
    }
    let rejections = (0..runs)
        .into_par_iter()
        .map(|run| -> Result<usize> {
            let (x, y) = sample_null(params, derive_seed(seed, run as u64));
            Ok((stat.evaluate(&x, &y)? > critical.value) as usize)
        })
        .try_reduce(|| 0usize, |a, b| Ok(a + b))?;
    Ok(RejectionRate {
        statistic_name: stat.name().to_string(),
        runs,
        rejections,
        rate: rejections as f64 / runs as f64,
    })
}
