//! Global decorrelating transform for whole images.
//!
//! An image is taken through an orthonormal 2D DCT, scanned in zig-zag
//! order, and cut into `M` equal-length sub-bands. Each sub-band gets its
//! own PCA rotation (all components kept) learned on a training set. The
//! result is a length-`H·W` vector whose dimensions are close to
//! uncorrelated and whose variances decay within each sub-band.
//!
//! Sub-band PCA needs `M·(n/M)²` rotation entries instead of the `n²` of a
//! global PCA, which keeps the estimate stable on modest training sets.

pub mod dct;
pub mod zigzag;

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::image::ImageGray;

pub use dct::Dct2;
pub use zigzag::{inverse_zigzag, scan_order, zigzag};

/// Orthonormality tolerance for a learned rotation, `max |RᵀR − I|`.
pub const ORTHONORMAL_TOL: f64 = 1e-8;

/// Learned sub-band means and rotations plus the image geometry.
#[derive(Debug, Clone)]
pub struct PreprocessModel {
    height: usize,
    width: usize,
    subbands: usize,
    means: Vec<Vec<f64>>,
    /// Row-major `s×s`, column `k` is the `k`-th principal axis.
    rotations: Vec<Vec<f64>>,
    dct: Dct2,
    order: Vec<usize>,
}

impl PartialEq for PreprocessModel {
    fn eq(&self, other: &Self) -> bool {
        self.height == other.height
            && self.width == other.width
            && self.subbands == other.subbands
            && self.means == other.means
            && self.rotations == other.rotations
    }
}

pub fn dct2_forward(image: &ImageGray) -> Vec<f64> {
    Dct2::new(image.height(), image.width())
        .forward(image.pixels())
        .expect("image geometry is consistent")
}

pub fn dct2_inverse(coeffs: &[f64], height: usize, width: usize) -> Result<Vec<f64>> {
    Dct2::new(height, width).inverse(coeffs)
}

impl PreprocessModel {
    /// Assembles a model from stored parts, validating shapes and
    /// orthonormality.
    pub fn from_parts(
        height: usize,
        width: usize,
        subbands: usize,
        means: Vec<Vec<f64>>,
        rotations: Vec<Vec<f64>>,
    ) -> Result<Self> {
        let n = check_geometry(height, width, subbands)?;
        let s = n / subbands;
        if means.len() != subbands || rotations.len() != subbands {
            return Err(Error::Format(format!(
                "expected {subbands} sub-bands, got {} means and {} rotations",
                means.len(),
                rotations.len()
            )));
        }
        for (m, r) in means.iter().zip(&rotations) {
            if m.len() != s || r.len() != s * s {
                return Err(Error::Format("sub-band payload has the wrong size".into()));
            }
            if orthonormality_error(r, s) > ORTHONORMAL_TOL {
                return Err(Error::Format("stored rotation is not orthonormal".into()));
            }
        }
        Ok(Self {
            height,
            width,
            subbands,
            means,
            rotations,
            dct: Dct2::new(height, width),
            order: scan_order(height, width),
        })
    }

    /// Learns per-sub-band means and PCA rotations from training images.
    pub fn fit(images: &[ImageGray], subbands: usize) -> Result<Self> {
        if images.len() < 2 {
            return Err(Error::InvalidArgument(format!(
                "need at least 2 training images, got {}",
                images.len()
            )));
        }
        let (height, width) = (images[0].height(), images[0].width());
        if let Some(bad) = images.iter().find(|im| !im.same_geometry(&images[0])) {
            return Err(Error::Geometry(format!(
                "training images mix {height}x{width} and {}x{}",
                bad.height(),
                bad.width()
            )));
        }
        let n = check_geometry(height, width, subbands)?;
        let s = n / subbands;
        let dct = Dct2::new(height, width);
        let order = scan_order(height, width);

        let scanned: Vec<Vec<f64>> = images
            .par_iter()
            .map(|im| {
                let c = dct.forward(im.pixels()).expect("geometry checked");
                order.iter().map(|&i| c[i]).collect()
            })
            .collect();

        let parts: Vec<(Vec<f64>, Vec<f64>)> = (0..subbands)
            .into_par_iter()
            .map(|m| {
                let band: Vec<&[f64]> = scanned.iter().map(|v| &v[m * s..(m + 1) * s]).collect();
                subband_pca(&band, s)
            })
            .collect();
        let (means, rotations) = parts.into_iter().unzip();
        Ok(Self {
            height,
            width,
            subbands,
            means,
            rotations,
            dct,
            order,
        })
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn subbands(&self) -> usize {
        self.subbands
    }

    pub fn dim(&self) -> usize {
        self.height * self.width
    }

    pub fn subband_len(&self) -> usize {
        self.dim() / self.subbands
    }

    pub fn means(&self) -> &[Vec<f64>] {
        &self.means
    }

    pub fn rotations(&self) -> &[Vec<f64>] {
        &self.rotations
    }

    /// Number of stored rotation entries, `M·(n/M)²`.
    pub fn rotation_parameter_count(&self) -> usize {
        self.rotations.iter().map(Vec::len).sum()
    }

    /// SHA-256 over the geometry, means and rotations (little-endian).
    pub fn digest(&self) -> [u8; 32] {
        let mut h = Sha256::new();
        for g in [self.height, self.width, self.subbands] {
            h.update((g as u64).to_le_bytes());
        }
        for v in self.means.iter().chain(&self.rotations) {
            for x in v {
                h.update(x.to_le_bytes());
            }
        }
        h.finalize().into()
    }

    fn check_image(&self, image: &ImageGray) -> Result<()> {
        if image.height() != self.height || image.width() != self.width {
            return Err(Error::Geometry(format!(
                "model expects {}x{} images, got {}x{}",
                self.height,
                self.width,
                image.height(),
                image.width()
            )));
        }
        Ok(())
    }

    /// DCT, zig-zag, then `Rᵀ(x − μ)` per sub-band.
    pub fn forward(&self, image: &ImageGray) -> Result<Vec<f64>> {
        self.check_image(image)?;
        let c = self.dct.forward(image.pixels())?;
        let s = self.subband_len();
        let mut out = vec![0.0; self.dim()];
        let mut centered = vec![0.0; s];
        for m in 0..self.subbands {
            for (i, d) in centered.iter_mut().enumerate() {
                *d = c[self.order[m * s + i]] - self.means[m][i];
            }
            let r = &self.rotations[m];
            let y = &mut out[m * s..(m + 1) * s];
            for (i, &d) in centered.iter().enumerate() {
                let row = &r[i * s..(i + 1) * s];
                for (yk, rik) in y.iter_mut().zip(row) {
                    *yk += rik * d;
                }
            }
        }
        Ok(out)
    }

    /// Inverse of [`forward`](Self::forward) without clamping.
    pub fn inverse_unclamped(&self, vector: &[f64]) -> Result<Vec<f64>> {
        if vector.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: vector.len(),
            });
        }
        let s = self.subband_len();
        let mut coeffs = vec![0.0; self.dim()];
        for m in 0..self.subbands {
            let r = &self.rotations[m];
            let y = &vector[m * s..(m + 1) * s];
            for i in 0..s {
                let row = &r[i * s..(i + 1) * s];
                let d: f64 = row.iter().zip(y).map(|(a, b)| a * b).sum();
                coeffs[self.order[m * s + i]] = d + self.means[m][i];
            }
        }
        self.dct.inverse(&coeffs)
    }

    /// Maps a decorrelated vector back to an image, clamped to `[0, 1]`.
    pub fn inverse(&self, vector: &[f64]) -> Result<ImageGray> {
        let pixels = self.inverse_unclamped(vector)?;
        ImageGray::from_clamped(self.height, self.width, pixels)
    }
}

fn check_geometry(height: usize, width: usize, subbands: usize) -> Result<usize> {
    let n = height * width;
    if n == 0 {
        return Err(Error::Geometry("empty image geometry".into()));
    }
    if subbands == 0 || n % subbands != 0 {
        return Err(Error::Geometry(format!(
            "{subbands} sub-bands do not divide n = {n}"
        )));
    }
    Ok(n)
}

/// Mean and descending-eigenvalue PCA basis of one sub-band.
fn subband_pca(band: &[&[f64]], s: usize) -> (Vec<f64>, Vec<f64>) {
    let identity = || {
        let mut r = vec![0.0; s * s];
        (0..s).for_each(|i| r[i * s + i] = 1.0);
        r
    };
    if band.iter().all(|v| *v == band[0]) {
        return (band[0].to_vec(), identity());
    }

    let count = band.len() as f64;
    let mut mean = vec![0.0; s];
    for v in band {
        mean.iter_mut().zip(*v).for_each(|(m, x)| *m += x);
    }
    mean.iter_mut().for_each(|m| *m /= count);

    let mut cov = DMatrix::<f64>::zeros(s, s);
    let mut d = vec![0.0; s];
    for v in band {
        d.iter_mut()
            .zip(*v)
            .zip(&mean)
            .for_each(|((di, x), m)| *di = x - m);
        for i in 0..s {
            for j in i..s {
                cov[(i, j)] += d[i] * d[j];
            }
        }
    }
    for i in 0..s {
        for j in i..s {
            let c = cov[(i, j)] / count;
            cov[(i, j)] = c;
            cov[(j, i)] = c;
        }
    }

    let eig = SymmetricEigen::new(cov);
    let mut idx: Vec<usize> = (0..s).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));

    let mut rot = vec![0.0; s * s];
    for (k, &src) in idx.iter().enumerate() {
        let col = eig.eigenvectors.column(src);
        // largest-magnitude entry positive, lowest index on ties
        let mut pivot = 0;
        for i in 1..s {
            if col[i].abs() > col[pivot].abs() {
                pivot = i;
            }
        }
        let sign = if col[pivot] < 0.0 { -1.0 } else { 1.0 };
        for i in 0..s {
            rot[i * s + k] = sign * col[i];
        }
    }
    if orthonormality_error(&rot, s) > ORTHONORMAL_TOL {
        reorthonormalize(&mut rot, s);
    }
    (mean, rot)
}

/// `max |RᵀR − I|` for a row-major `s×s` matrix.
pub fn orthonormality_error(r: &[f64], s: usize) -> f64 {
    let mut worst: f64 = 0.0;
    for a in 0..s {
        for b in a..s {
            let dot: f64 = (0..s).map(|i| r[i * s + a] * r[i * s + b]).sum();
            let target = if a == b { 1.0 } else { 0.0 };
            worst = worst.max((dot - target).abs());
        }
    }
    worst
}

/// Modified Gram–Schmidt over the columns, keeping their order and signs.
fn reorthonormalize(r: &mut [f64], s: usize) {
    for k in 0..s {
        for j in 0..k {
            let dot: f64 = (0..s).map(|i| r[i * s + k] * r[i * s + j]).sum();
            for i in 0..s {
                r[i * s + k] -= dot * r[i * s + j];
            }
        }
        let norm = (0..s).map(|i| r[i * s + k].powi(2)).sum::<f64>().sqrt();
        for i in 0..s {
            r[i * s + k] /= norm;
        }
    }
}
