//! Synthetic domain-specific corpus.
//!
//! Every image shares one hidden structure: a fixed random orthonormal
//! basis per zig-zag DCT sub-band and a power-law variance profile
//! `σ_j² ∝ j^(−α)` over the global coefficient index `j = 1..n`. Images
//! are independent draws of those coefficients around a flat mid-gray
//! mean, so train and test sets come from the same distribution.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::image::ImageGray;
use crate::normal::mix;
use crate::preprocess::{scan_order, Dct2};

/// Largest sub-band used for the hidden rotations.
const MAX_BASIS_BLOCK: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub n_train: usize,
    pub n_test: usize,
    pub height: usize,
    pub width: usize,
    pub decay_alpha: f64,
    pub seed: u64,
    /// Sub-bands of the hidden basis; must divide `height·width`.
    pub subbands: usize,
    /// Root-mean-square pixel deviation from the mean level.
    pub pixel_std: f64,
    pub mean_level: f64,
}

impl SynthConfig {
    /// Defaults: mean level 0.5, pixel deviation 0.12, and the fewest
    /// sub-bands that keep each block at most 64 coefficients long.
    pub fn new(
        n_train: usize,
        n_test: usize,
        height: usize,
        width: usize,
        decay_alpha: f64,
        seed: u64,
    ) -> Self {
        let n = height * width;
        let subbands = (1..=n)
            .find(|m| n % m == 0 && n / m <= MAX_BASIS_BLOCK)
            .unwrap_or(1);
        Self {
            n_train,
            n_test,
            height,
            width,
            decay_alpha,
            seed,
            subbands,
            pixel_std: 0.12,
            mean_level: 0.5,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SynthCorpus {
    pub train: Vec<ImageGray>,
    pub test: Vec<ImageGray>,
}

/// Unnormalized profile `j^(−α)` for `j = 1..=n`.
pub fn synth_variance_profile(n: usize, decay_alpha: f64) -> Vec<f64> {
    (1..=n).map(|j| (j as f64).powf(-decay_alpha)).collect()
}

fn random_orthonormal(size: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = DMatrix::from_fn(size, size, |_, _| StandardNormal.sample(&mut rng));
    let qr = g.qr();
    let mut q = qr.q();
    // fix column signs so the basis is Haar-distributed and deterministic
    let r = qr.r();
    for k in 0..size {
        if r[(k, k)] < 0.0 {
            q.column_mut(k).neg_mut();
        }
    }
    q
}

pub fn synth_corpus(config: &SynthConfig) -> Result<SynthCorpus> {
    let (h, w) = (config.height, config.width);
    let n = h * w;
    if n == 0 || config.n_train == 0 || config.n_test == 0 {
        return Err(Error::InvalidArgument(
            "corpus sizes must be positive".into(),
        ));
    }
    if config.subbands == 0 || n % config.subbands != 0 {
        return Err(Error::Geometry(format!(
            "{} sub-bands do not divide n = {n}",
            config.subbands
        )));
    }
    if !(config.pixel_std > 0.0) || !(0.0..=1.0).contains(&config.mean_level) {
        return Err(Error::InvalidArgument(
            "pixel_std must be positive and mean_level in [0, 1]".into(),
        ));
    }
    let s = n / config.subbands;
    let mut profile = synth_variance_profile(n, config.decay_alpha);
    // orthonormal transforms preserve energy: Σσ² = n · pixel_std²
    let scale = n as f64 * config.pixel_std.powi(2) / profile.iter().sum::<f64>();
    profile.iter_mut().for_each(|v| *v *= scale);
    let stds: Vec<f64> = profile.iter().map(|v| v.sqrt()).collect();

    let bases: Vec<DMatrix<f64>> = (0..config.subbands)
        .into_par_iter()
        .map(|m| random_orthonormal(s, mix(config.seed, m as u64)))
        .collect();
    let dct = Dct2::new(h, w);
    let order = scan_order(h, w);
    let dc = config.mean_level * (n as f64).sqrt();

    let draw = |stream: u64, count: usize| -> Vec<ImageGray> {
        (0..count)
            .into_par_iter()
            .map(|i| {
                let mut rng = ChaCha8Rng::seed_from_u64(mix(mix(config.seed, stream), i as u64));
                let coeffs: Vec<f64> = stds
                    .iter()
                    .map(|sd| {
                        let z: f64 = StandardNormal.sample(&mut rng);
                        sd * z
                    })
                    .collect();
                let mut zz = vec![0.0; n];
                for (m, basis) in bases.iter().enumerate() {
                    let c = &coeffs[m * s..(m + 1) * s];
                    for (i, z) in zz[m * s..(m + 1) * s].iter_mut().enumerate() {
                        *z = (0..s).map(|k| basis[(i, k)] * c[k]).sum();
                    }
                }
                zz[0] += dc;
                let mut dct_coeffs = vec![0.0; n];
                for (&o, &z) in order.iter().zip(&zz) {
                    dct_coeffs[o] = z;
                }
                let px = dct.inverse(&dct_coeffs).expect("geometry is consistent");
                ImageGray::from_clamped(h, w, px).expect("geometry is consistent")
            })
            .collect()
    };
    Ok(SynthCorpus {
        train: draw(u64::MAX - 1, config.n_train),
        test: draw(u64::MAX, config.n_test),
    })
}
