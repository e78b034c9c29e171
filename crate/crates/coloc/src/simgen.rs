//! Synthetic dual-channel image generators.
//!
//! The null generator draws each pixel's channels independently from a
//! heavy-tailed monotone transform of uniforms. The alternative mixes a
//! Clayton-copula component on the upper-right square `[R,1]^2` of the
//! uniform scale with a flat background elsewhere, so dependence exists only
//! above the signal threshold. A small Farlie-Gumbel-Morgenstern sampler
//! produces weakly dependent paired samples. Channels are optionally blurred
//! with a Gaussian point-spread function.
//!
//! Per-pixel substreams keyed by `(seed, pixel index)` make every generator
//! reproducible under any parallel fill order.

use rand::Rng;

use crate::channel::Channel;
use crate::error::{Error, Result};
use crate::rankcorr::PairedSample;
use crate::rng::substream;

/// Parameters for the copula image model.
///
/// `r_threshold` is the uniform-scale level above which the channels are
/// dependent; `theta` the Clayton dependence strength; `psf_sigma` the
/// Gaussian blur width in pixels (0 disables blurring).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CopulaParams {
    pub width: usize,
    pub height: usize,
    pub r_threshold: f64,
    pub theta: f64,
    pub psf_sigma: f64,
}

impl CopulaParams {
    pub fn validate(&self) -> Result<()> {
        if self.width == 0 || self.height == 0 {
            return Err(Error::InvalidParameter(
                "image dimensions must be positive".into(),
            ));
        }
        if !(0.0..1.0).contains(&self.r_threshold) {
            return Err(Error::InvalidParameter(format!(
                "r_threshold must lie in [0, 1), got {}",
                self.r_threshold
            )));
        }
        if !self.theta.is_finite() || self.theta <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "theta must be positive and finite, got {}",
                self.theta
            )));
        }
        if !self.psf_sigma.is_finite() || self.psf_sigma < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "psf_sigma must be nonnegative and finite, got {}",
                self.psf_sigma
            )));
        }
        Ok(())
    }
}

/// The monotone transform applied to uniform draws: `exp(8 (u - 1/2))`.
///
/// Maps `[0, 1]` onto roughly `[0.018, 54.6]` with median 1, mimicking the
/// long-tailed intensity histograms of fluorescence images.
pub fn intensity_from_uniform(u: f64) -> f64 {
    (8.0 * (u - 0.5)).exp()
}

/// Simulates an independent (null) channel pair and blurs each channel.
pub fn sample_null(params: &CopulaParams, seed: u64) -> (Channel, Channel) {
    let (w, h) = (params.width, params.height);
    let mut xs = Vec::with_capacity(w * h);
    let mut ys = Vec::with_capacity(w * h);
    for i in 0..w * h {
        let mut rng = substream(seed, i as u64);
        let u: f64 = rng.random();
        let v: f64 = rng.random();
        xs.push(intensity_from_uniform(u));
        ys.push(intensity_from_uniform(v));
    }
    let x = Channel::new(w, h, xs).expect("transform yields finite positives");
    let y = Channel::new(w, h, ys).expect("transform yields finite positives");
    (
        gaussian_blur(&x, params.psf_sigma),
        gaussian_blur(&y, params.psf_sigma),
    )
}

/// Conditional-quantile sampler for the Clayton copula.
///
/// Given `u` and a uniform `w`, returns the `w`-quantile of `V | U = u`,
/// i.e. `v = ((w^(-theta/(1+theta)) - 1) u^(-theta) + 1)^(-1/theta)`.
/// Evaluated in log space so large `theta` does not overflow.
pub fn clayton_conditional(theta: f64, u: f64, w: f64) -> Result<f64> {
    if !theta.is_finite() || theta <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "theta must be positive and finite, got {theta}"
        )));
    }
    for (name, v) in [("u", u), ("w", w)] {
        if !(v > 0.0 && v < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "{name} must lie in the open interval (0, 1), got {v}"
            )));
        }
    }
    // a = w^(-theta/(1+theta)) - 1 > 0 for w in (0,1).
    let a = (-theta / (1.0 + theta) * w.ln()).exp() - 1.0;
    // ln(a * u^-theta + 1) via softplus of t = ln a - theta ln u.
    let t = a.ln() - theta * u.ln();
    let softplus = if t > 0.0 {
        t + (-t).exp().ln_1p()
    } else {
        t.exp().ln_1p()
    };
    Ok((-softplus / theta).exp())
}

/// Simulates a colocalized channel pair under the Clayton mixture model and
/// blurs each channel.
///
/// Per pixel: with probability `(1-R)^2` the uniform pair comes from the
/// Clayton copula rescaled into `[R,1]^2`; otherwise it is uniform on the
/// complement, sampled exactly by splitting the complement into two strips.
pub fn sample_alternative(params: &CopulaParams, seed: u64) -> Result<(Channel, Channel)> {
    params.validate()?;
    let (w, h) = (params.width, params.height);
    let r = params.r_threshold;
    let theta = params.theta;
    let mut xs = Vec::with_capacity(w * h);
    let mut ys = Vec::with_capacity(w * h);
    for i in 0..w * h {
        let mut rng = substream(seed, i as u64);
        let (u, v) = sample_mixture_uniform(&mut rng, r, theta)?;
        xs.push(intensity_from_uniform(u));
        ys.push(intensity_from_uniform(v));
    }
    let x = Channel::new(w, h, xs).expect("transform yields finite positives");
    let y = Channel::new(w, h, ys).expect("transform yields finite positives");
    Ok((
        gaussian_blur(&x, params.psf_sigma),
        gaussian_blur(&y, params.psf_sigma),
    ))
}

fn sample_mixture_uniform(
    rng: &mut rand_chacha::ChaCha8Rng,
    r: f64,
    theta: f64,
) -> Result<(f64, f64)> {
    let signal_mass = (1.0 - r) * (1.0 - r);
    let branch: f64 = rng.random();
    if branch < signal_mass {
        let u: f64 = rng.sample(rand::distr::Open01);
        let w: f64 = rng.sample(rand::distr::Open01);
        let v = clayton_conditional(theta, u, w)?;
        Ok((r + (1.0 - r) * u, r + (1.0 - r) * v))
    } else {
        // Complement of [R,1]^2, split into [0,R) x [0,1] and [R,1] x [0,R)
        // with area-proportional choice; total complement area is R(2-R).
        let pick: f64 = rng.random();
        let left_strip_share = 1.0 / (2.0 - r);
        if pick < left_strip_share {
            Ok((r * rng.random::<f64>(), rng.random()))
        } else {
            Ok((r + (1.0 - r) * rng.random::<f64>(), r * rng.random::<f64>()))
        }
    }
}

/// Conditional-quantile sampler for the Farlie-Gumbel-Morgenstern copula
/// with density `1 + gamma (1-2u)(1-2v)`.
///
/// Uses the quadratic inverse in its cancellation-free conjugate form,
/// which degrades gracefully to `v = w` as the coefficient vanishes.
pub fn fgm_conditional(gamma: f64, u: f64, w: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Error::InvalidParameter(format!(
            "gamma must lie in [0, 1], got {gamma}"
        )));
    }
    for (name, v) in [("u", u), ("w", w)] {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::InvalidParameter(format!(
                "{name} must lie in [0, 1], got {v}"
            )));
        }
    }
    if w == 0.0 {
        return Ok(0.0);
    }
    let a = gamma * (1.0 - 2.0 * u);
    let disc = (a + 1.0) * (a + 1.0) - 4.0 * a * w;
    Ok(2.0 * w / ((a + 1.0) + disc.sqrt()))
}

/// Draws a paired sample from the Farlie-Gumbel-Morgenstern mixture: with
/// probability `(1-U)^2` a weakly dependent FGM pair rescaled into `[U,1]^2`,
/// otherwise uniform on the complement. Values stay on the uniform scale.
pub fn sample_fgm_variant(
    u_floor: f64,
    gamma: f64,
    n: usize,
    seed: u64,
) -> Result<PairedSample> {
    if !(0.0..1.0).contains(&u_floor) {
        return Err(Error::InvalidParameter(format!(
            "u_floor must lie in [0, 1), got {u_floor}"
        )));
    }
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Error::InvalidParameter(format!(
            "gamma must lie in [0, 1], got {gamma}"
        )));
    }
    let signal_mass = (1.0 - u_floor) * (1.0 - u_floor);
    let mut xs = Vec::with_capacity(n);
    let mut ys = Vec::with_capacity(n);
    for i in 0..n {
        let mut rng = substream(seed, i as u64);
        let branch: f64 = rng.random();
        if branch < signal_mass {
            let u: f64 = rng.random();
            let w: f64 = rng.random();
            let v = fgm_conditional(gamma, u, w)?;
            xs.push(u_floor + (1.0 - u_floor) * u);
            ys.push(u_floor + (1.0 - u_floor) * v);
        } else {
            let pick: f64 = rng.random();
            if pick < 1.0 / (2.0 - u_floor) {
                xs.push(u_floor * rng.random::<f64>());
                ys.push(rng.random());
            } else {
                xs.push(u_floor + (1.0 - u_floor) * rng.random::<f64>());
                ys.push(u_floor * rng.random::<f64>());
            }
        }
    }
    PairedSample::new(xs, ys)
}

/// Separable Gaussian blur with a normalized kernel truncated at radius
/// `ceil(3 sigma)` and symmetric (edge-repeating) boundary reflection.
/// `sigma = 0` returns the input unchanged.
///
/// # Panics
/// Panics if `sigma` is negative or not finite.
pub fn gaussian_blur(ch: &Channel, sigma: f64) -> Channel {
    assert!(
        sigma >= 0.0 && sigma.is_finite(),
        "sigma must be nonnegative and finite"
    );
    if sigma == 0.0 {
        return ch.clone();
    }
    let radius = (3.0 * sigma).ceil() as usize;
    let mut kernel = Vec::with_capacity(2 * radius + 1);
    for k in -(radius as isize)..=(radius as isize) {
        let kf = k as f64;
        kernel.push((-kf * kf / (2.0 * sigma * sigma)).exp());
    }
    let norm: f64 = kernel.iter().sum();
    for w in &mut kernel {
        *w /= norm;
    }

    let (width, height) = (ch.width(), ch.height());
    let src = ch.pixels();
    // Horizontal pass.
    let mut mid = vec![0.0f64; width * height];
    for y in 0..height {
        let row = &src[y * width..(y + 1) * width];
        let out = &mut mid[y * width..(y + 1) * width];
        convolve_line(row, out, &kernel, radius);
    }
    // Vertical pass on columns.
    let mut out = vec![0.0f64; width * height];
    let mut column = vec![0.0f64; height];
    let mut blurred = vec![0.0f64; height];
    for x in 0..width {
        for y in 0..height {
            column[y] = mid[y * width + x];
        }
        convolve_line(&column, &mut blurred, &kernel, radius);
        for y in 0..height {
            out[y * width + x] = blurred[y];
        }
    }
    Channel::new(width, height, out).expect("blur preserves finiteness and sign")
}

fn convolve_line(src: &[f64], dst: &mut [f64], kernel: &[f64], radius: usize) {
    let n = src.len() as isize;
    for (i, out) in dst.iter_mut().enumerate() {
        let mut acc = 0.0;
        for (k, &w) in kernel.iter().enumerate() {
            let idx = i as isize + k as isize - radius as isize;
            acc += w * src[reflect_index(idx, n)];
        }
        *out = acc;
    }
}

/// Symmetric reflection with edge repetition, extended periodically so any
/// radius is safe: ..., 1, 0 | 0, 1, ..., n-1 | n-1, n-2, ...
fn reflect_index(idx: isize, n: isize) -> usize {
    debug_assert!(n > 0);
    let period = 2 * n;
    let m = idx.rem_euclid(period);
    if m < n {
        m as usize
    } else {
        (period - 1 - m) as usize
    }
}
