//! MSE and PSNR for images with peak value 1.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::image::ImageGray;

pub fn mse(a: &ImageGray, b: &ImageGray) -> Result<f64> {
    if !a.same_geometry(b) {
        return Err(Error::Geometry(format!(
            "{}x{} vs {}x{}",
            a.height(),
            a.width(),
            b.height(),
            b.width()
        )));
    }
    let sum: f64 = a
        .pixels()
        .iter()
        .zip(b.pixels())
        .map(|(x, y)| (x - y) * (x - y))
        .sum();
    Ok(sum / a.len() as f64)
}

/// `10·log₁₀(1/mse)`; zero error gives `f64::INFINITY`.
pub fn psnr_from_mse(mse: f64) -> f64 {
    if mse == 0.0 {
        f64::INFINITY
    } else {
        -10.0 * mse.log10()
    }
}

pub fn psnr(a: &ImageGray, b: &ImageGray) -> Result<f64> {
    Ok(psnr_from_mse(mse(a, b)?))
}

/// Adds i.i.d. `N(0, sigma2)` noise to every pixel and clamps to `[0, 1]`.
pub fn add_noise(image: &ImageGray, sigma2: f64, seed: u64) -> Result<ImageGray> {
    if !(sigma2 >= 0.0) || !sigma2.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "noise variance must be non-negative, got {sigma2}"
        )));
    }
    if sigma2 == 0.0 {
        return Ok(image.clone());
    }
    let normal = Normal::new(0.0, sigma2.sqrt()).expect("positive std");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let px = image
        .pixels()
        .iter()
        .map(|p| p + normal.sample(&mut rng))
        .collect();
    ImageGray::from_clamped(image.height(), image.width(), px)
}

/// The noise samples [`add_noise`] would add for `seed`, before clamping.
pub fn noise_samples(len: usize, sigma2: f64, seed: u64) -> Vec<f64> {
    let normal = Normal::new(0.0, sigma2.sqrt()).expect("non-negative std");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..len).map(|_| normal.sample(&mut rng)).collect()
}
