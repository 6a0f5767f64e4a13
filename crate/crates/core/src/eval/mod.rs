//! Experiment harness: distortion-rate sweeps, denoising by truncation,
//! the k-means baseline and the synthetic corpus.

pub mod kmeans;
pub mod metrics;
pub mod synth;

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::image::ImageGray;
use crate::preprocess::PreprocessModel;
use crate::rrq::{ResidualQuantizer, RrqModel};

pub use kmeans::{kmeans, kmeans_rq_train, lloyd, Clustering, KmeansRq};
pub use metrics::{add_noise, mse, psnr, psnr_from_mse};
pub use synth::{synth_corpus, synth_variance_profile, SynthConfig, SynthCorpus};

/// One point on a distortion-rate curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateDistortionPoint {
    pub layers: usize,
    pub bits_per_pixel: f64,
    /// Mean over images and pixels, gray values in `[0, 1]`.
    pub mse: f64,
    pub psnr_db: f64,
}

/// `1, 2, 4, …` up to `depth`, with `depth` itself always last.
pub fn geometric_grid(depth: usize) -> Vec<usize> {
    let mut grid = Vec::new();
    let mut l = 1;
    while l < depth {
        grid.push(l);
        l *= 2;
    }
    if depth > 0 {
        grid.push(depth);
    }
    grid
}

/// `1..=depth`.
pub fn dense_grid(depth: usize) -> Vec<usize> {
    (1..=depth).collect()
}

fn check_grid(grid: &[usize], depth: usize) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidArgument("empty layer grid".into()));
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument(
            "layer grid must be strictly ascending".into(),
        ));
    }
    if grid[grid.len() - 1] > depth {
        return Err(Error::InvalidArgument(format!(
            "layer grid reaches {} but the model has {depth} layers",
            grid[grid.len() - 1]
        )));
    }
    Ok(())
}

/// Per-image pixel-domain reconstructions at every grid depth,
/// indexed `[image][grid position]`.
pub fn reconstruct_on_grid<Q: ResidualQuantizer>(
    images: &[ImageGray],
    pre: &PreprocessModel,
    model: &Q,
    grid: &[usize],
) -> Result<Vec<Vec<ImageGray>>> {
    check_grid(grid, model.depth())?;
    let xs = images
        .par_iter()
        .map(|im| pre.forward(im))
        .collect::<Result<Vec<_>>>()?;
    let codes = model.encode_batch(&xs, grid[grid.len() - 1])?;
    let recon = model.reconstruct_prefixes(&codes, grid)?;
    recon
        .into_par_iter()
        .map(|per_layer| per_layer.iter().map(|x| pre.inverse(x)).collect())
        .collect()
}

/// Distortion-rate curve of `model` on `images`, one point per grid depth.
pub fn dr_sweep<Q: ResidualQuantizer>(
    images: &[ImageGray],
    pre: &PreprocessModel,
    model: &Q,
    grid: &[usize],
) -> Result<Vec<RateDistortionPoint>> {
    if images.is_empty() {
        return Err(Error::InvalidArgument("no images to evaluate".into()));
    }
    let recon = reconstruct_on_grid(images, pre, model, grid)?;
    let pixels = pre.dim();
    grid.iter()
        .enumerate()
        .map(|(g, &layers)| {
            let total = images
                .iter()
                .zip(&recon)
                .map(|(im, r)| mse(im, &r[g]))
                .sum::<Result<f64>>()?;
            let m = total / images.len() as f64;
            Ok(RateDistortionPoint {
                layers,
                bits_per_pixel: model.prefix_bits(layers) as f64 / pixels as f64,
                mse: m,
                psnr_db: psnr_from_mse(m),
            })
        })
        .collect()
}

/// Depth at which the per-dimension distortion the layers aim for falls
/// to the noise level: the deepest layer whose water level still exceeds
/// `sigma2` (0 if none does).
pub fn heuristic_layer(model: &RrqModel, sigma2: f64) -> usize {
    model
        .layers()
        .iter()
        .rposition(|l| l.gamma > sigma2)
        .map_or(0, |i| i + 1)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DenoiseOptions {
    pub grid: Vec<usize>,
    /// Noise variance used by the truncation heuristic.
    pub sigma2_hint: Option<f64>,
    pub heuristic: bool,
}

/// Denoising outcome for one image.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DenoiseResult {
    pub sigma2_hint: Option<f64>,
    pub layers: Vec<usize>,
    /// PSNR against the clean reference at each grid depth; empty without one.
    pub psnr_db: Vec<f64>,
    /// Oracle choice: grid depth with the highest PSNR (lowest on ties).
    pub best_layer: Option<usize>,
    pub best_psnr_db: Option<f64>,
    pub heuristic_layer: Option<usize>,
    pub heuristic_psnr_db: Option<f64>,
}

/// Reconstructs a noisy image at every grid depth and reports both the
/// oracle and heuristic truncation points.
pub fn denoise(
    noisy: &ImageGray,
    clean: Option<&ImageGray>,
    pre: &PreprocessModel,
    model: &RrqModel,
    options: &DenoiseOptions,
) -> Result<(DenoiseResult, Vec<ImageGray>)> {
    let heuristic = if options.heuristic {
        let s2 = options.sigma2_hint.ok_or_else(|| {
            Error::InvalidArgument("heuristic layer selection needs a noise variance".into())
        })?;
        Some(heuristic_layer(model, s2))
    } else {
        None
    };
    if let Some(c) = clean {
        if !c.same_geometry(noisy) {
            return Err(Error::Geometry(
                "clean reference differs from noisy image".into(),
            ));
        }
    }
    let mut grid = options.grid.clone();
    if let Some(h) = heuristic {
        if !grid.contains(&h) {
            grid.push(h);
            grid.sort_unstable();
        }
    }
    let recon = reconstruct_on_grid(std::slice::from_ref(noisy), pre, model, &grid)?.remove(0);

    let mut result = DenoiseResult {
        sigma2_hint: options.sigma2_hint,
        layers: options.grid.clone(),
        psnr_db: Vec::new(),
        best_layer: None,
        best_psnr_db: None,
        heuristic_layer: heuristic,
        heuristic_psnr_db: None,
    };
    let at = |layer: usize| {
        grid.iter()
            .position(|&g| g == layer)
            .expect("layer on grid")
    };
    if let Some(c) = clean {
        for &l in &options.grid {
            result.psnr_db.push(psnr(c, &recon[at(l)])?);
        }
        let mut best = 0;
        for (i, p) in result.psnr_db.iter().enumerate() {
            if *p > result.psnr_db[best] {
                best = i;
            }
        }
        result.best_layer = Some(options.grid[best]);
        result.best_psnr_db = Some(result.psnr_db[best]);
        if let Some(h) = heuristic {
            result.heuristic_psnr_db = Some(psnr(c, &recon[at(h)])?);
        }
    }
    let images = options.grid.iter().map(|&l| recon[at(l)].clone()).collect();
    Ok((result, images))
}

/// Writes `split,layers,bpp,mse,psnr_db` rows with a header.
pub fn write_dr_csv<W: Write>(out: W, curves: &[(&str, &[RateDistortionPoint])]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["split", "layers", "bpp", "mse", "psnr_db"])
        .map_err(csv_err)?;
    for (split, points) in curves {
        for p in *points {
            w.write_record([
                split.to_string(),
                p.layers.to_string(),
                p.bits_per_pixel.to_string(),
                p.mse.to_string(),
                p.psnr_db.to_string(),
            ])
            .map_err(csv_err)?;
        }
    }
    w.flush()?;
    Ok(())
}

/// One row of `denoise.csv`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DenoiseRow {
    pub sigma2: f64,
    pub layers: usize,
    pub psnr_db: f64,
    pub is_best: bool,
    pub is_heuristic: bool,
}

/// Writes `sigma2,layers,psnr_db,is_best,is_heuristic` rows with a header.
pub fn write_denoise_csv<W: Write>(out: W, rows: &[DenoiseRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row).map_err(csv_err)?;
    }
    if rows.is_empty() {
        w.write_record(["sigma2", "layers", "psnr_db", "is_best", "is_heuristic"])
            .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}
