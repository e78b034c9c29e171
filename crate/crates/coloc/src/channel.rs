//! Single-channel image data.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A 2-D grid of nonnegative pixel intensities, stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Channel {
    width: usize,
    height: usize,
    pixels: Vec<f64>,
}

impl Channel {
    /// Builds a channel, checking that every intensity is finite and
    /// nonnegative and that the pixel count matches `width * height`.
    pub fn new(width: usize, height: usize, pixels: Vec<f64>) -> Result<Self> {
        if pixels.len() != width * height {
            return Err(Error::InvalidParameter(format!(
                "expected {} pixels for a {}x{} channel, got {}",
                width * height,
                width,
                height,
                pixels.len()
            )));
        }
        for (index, &v) in pixels.iter().enumerate() {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidIntensity { index });
            }
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    /// Builds a channel by evaluating `f(x, y)` at every pixel.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut pixels = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                pixels.push(f(x, y));
            }
        }
        Self {
            width,
            height,
            pixels,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn len(&self) -> usize {
        self.pixels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pixels.is_empty()
    }

    pub fn pixels(&self) -> &[f64] {
        &self.pixels
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        debug_assert!(x < self.width && y < self.height);
        self.pixels[y * self.width + x]
    }

    /// Returns the top-left `new_width x new_height` crop.
    pub fn crop(&self, new_width: usize, new_height: usize) -> Result<Self> {
        if new_width > self.width || new_height > self.height {
            return Err(Error::InvalidParameter(format!(
                "cannot crop {}x{} to {}x{}",
                self.width, self.height, new_width, new_height
            )));
        }
        if new_width == self.width && new_height == self.height {
            return Ok(self.clone());
        }
        let mut pixels = Vec::with_capacity(new_width * new_height);
        for y in 0..new_height {
            let row = &self.pixels[y * self.width..y * self.width + new_width];
            pixels.extend_from_slice(row);
        }
        Ok(Self {
            width: new_width,
            height: new_height,
            pixels,
        })
    }

    /// True when both channels have the same width and height.
    pub fn same_dims(&self, other: &Channel) -> bool {
        self.width == other.width && self.height == other.height
    }

    pub(crate) fn dimension_mismatch(&self, other: &Channel) -> Error {
        Error::DimensionMismatch {
            left_width: self.width,
            left_height: self.height,
            right_width: other.width,
            right_height: other.height,
        }
    }
}
