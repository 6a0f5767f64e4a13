//! Grayscale images with gray values normalized to `[0, 1]`.

use crate::error::{Error, Result};

/// Row-major grayscale image, pixels in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageGray {
    height: usize,
    width: usize,
    pixels: Vec<f64>,
}

impl ImageGray {
    /// Builds an image, rejecting out-of-gamut or non-finite pixels.
    pub fn new(height: usize, width: usize, pixels: Vec<f64>) -> Result<Self> {
        check_shape(height, width, pixels.len())?;
        if let Some(p) = pixels.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(Error::InvalidArgument(format!(
                "pixel value {p} outside [0, 1]"
            )));
        }
        Ok(Self {
            height,
            width,
            pixels,
        })
    }

    /// Builds an image from arbitrary values, clamping each into `[0, 1]`.
    /// NaN maps to 0.
    pub fn from_clamped(height: usize, width: usize, mut pixels: Vec<f64>) -> Result<Self> {
        check_shape(height, width, pixels.len())?;
        for p in &mut pixels {
            *p = if p.is_nan() { 0.0 } else { p.clamp(0.0, 1.0) };
        }
        Ok(Self {
            height,
            width,
            pixels,
        })
    }

    pub fn filled(height: usize, width: usize, value: f64) -> Result<Self> {
        Self::new(height, width, vec![value; height * width])
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
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

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.pixels[row * self.width + col]
    }

    pub fn same_geometry(&self, other: &ImageGray) -> bool {
        self.height == other.height && self.width == other.width
    }
}

fn check_shape(height: usize, width: usize, len: usize) -> Result<()> {
    if height == 0 || width == 0 {
        return Err(Error::Geometry(format!(
            "image dimensions must be positive, got {height}x{width}"
        )));
    }
    if height * width != len {
        return Err(Error::Geometry(format!(
            "{height}x{width} image needs {} pixels, got {len}",
            height * width
        )));
    }
    Ok(())
}
