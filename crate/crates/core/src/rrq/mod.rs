//! Regularized residual quantization.
//!
//! Each layer measures the per-dimension variance of the current training
//! residuals, picks the water level at which reverse water-filling spends
//! exactly `log₂ K` bits, and draws `K` codewords from a zero-mean Gaussian
//! whose variances are the soft-thresholded residual variances. Dimensions
//! under the water level get no codeword energy at all, so early layers are
//! very sparse. Training vectors are then quantized greedily and the
//! residuals carried to the next layer.
//!
//! Codebooks are not stored: a layer is fully described by its codeword
//! count, water level, sparse variance vector and seed, and the codewords
//! are regenerated bit-for-bit on demand (see [`crate::normal`]).

pub mod codebook;

use std::fmt;
use std::sync::{Arc, OnceLock};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::normal::{mix, NormalStream};
use crate::waterfill::{solve_for_rate, VarianceProfile};

pub use codebook::{index_bits, Codebook, IndexCode, ResidualQuantizer};

/// Training stops once every residual variance is at or below this.
pub const DEGENERATE_VARIANCE: f64 = 1e-15;

/// Layers whose codebooks are cached by default.
pub const DEFAULT_CACHE_LAYERS: usize = 64;

/// One trained layer.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerSpec {
    /// 1-based layer number.
    pub index: usize,
    pub k: u32,
    pub gamma: f64,
    /// Dimensions with non-zero codeword variance, strictly increasing.
    pub active: Vec<u32>,
    /// Codeword variances on `active`.
    pub variances: Vec<f64>,
    pub seed: u64,
    /// Total residual variance this layer was trained on.
    pub input_variance_total: f64,
}

impl LayerSpec {
    pub fn new(
        model_seed: u64,
        index: usize,
        k: u32,
        gamma: f64,
        active: Vec<u32>,
        variances: Vec<f64>,
        input_variance_total: f64,
    ) -> Self {
        Self {
            index,
            k,
            gamma,
            active,
            variances,
            seed: layer_seed(model_seed, index),
            input_variance_total,
        }
    }

    fn validate(&self, dim: usize) -> Result<()> {
        if self.k < 2 {
            return Err(Error::Format(format!(
                "layer {} has K = {}",
                self.index, self.k
            )));
        }
        if !(self.gamma > 0.0) || !self.gamma.is_finite() {
            return Err(Error::Format(format!(
                "layer {} has water level {}",
                self.index, self.gamma
            )));
        }
        if self.active.len() != self.variances.len() {
            return Err(Error::Format(
                "sparse variance index/value length mismatch".into(),
            ));
        }
        if self.active.windows(2).any(|w| w[0] >= w[1])
            || self.active.last().is_some_and(|&j| j as usize >= dim)
        {
            return Err(Error::Format(format!(
                "layer {} sparse indices not strictly increasing within 0..{dim}",
                self.index
            )));
        }
        if self.variances.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::Format("negative codeword variance".into()));
        }
        Ok(())
    }
}

/// Seed of layer `index` (1-based): `mix(model_seed, index)`.
pub fn layer_seed(model_seed: u64, index: usize) -> u64 {
    mix(model_seed, index as u64)
}

/// Regenerates the codebook of a layer.
///
/// Codeword `k` reads a fresh normal stream seeded with `mix(layer_seed, k)`
/// and multiplies successive draws by `σ_j` over the active dimensions in
/// increasing order.
pub fn generate_codebook(spec: &LayerSpec, dim: usize) -> Codebook {
    let a = spec.active.len();
    let k = spec.k as usize;
    if a == 0 {
        return Codebook::zeros(dim, k);
    }
    let stds: Vec<f64> = spec.variances.iter().map(|v| v.sqrt()).collect();
    let mut values = vec![0.0; k * a];
    values.par_chunks_mut(a).enumerate().for_each(|(i, row)| {
        let mut z = NormalStream::new(mix(spec.seed, i as u64));
        for (v, s) in row.iter_mut().zip(&stds) {
            *v = s * z.next();
        }
    });
    Codebook::from_sparse(dim, spec.active.clone(), values)
}

/// Lazily filled codebook slots for the first `budget` layers.
struct CodebookCache {
    slots: Vec<OnceLock<Arc<Codebook>>>,
}

impl CodebookCache {
    fn new(layers: usize, budget: usize) -> Self {
        Self {
            slots: (0..layers.min(budget)).map(|_| OnceLock::new()).collect(),
        }
    }
}

/// Trained regularized residual quantizer.
pub struct RrqModel {
    dim: usize,
    model_seed: u64,
    layers: Vec<LayerSpec>,
    preprocess_digest: [u8; 32],
    cache_budget: usize,
    cache: CodebookCache,
}

impl fmt::Debug for RrqModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RrqModel")
            .field("dim", &self.dim)
            .field("model_seed", &self.model_seed)
            .field("depth", &self.layers.len())
            .finish_non_exhaustive()
    }
}

impl Clone for RrqModel {
    fn clone(&self) -> Self {
        Self {
            dim: self.dim,
            model_seed: self.model_seed,
            layers: self.layers.clone(),
            preprocess_digest: self.preprocess_digest,
            cache_budget: self.cache_budget,
            cache: CodebookCache::new(self.layers.len(), self.cache_budget),
        }
    }
}

impl PartialEq for RrqModel {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim
            && self.model_seed == other.model_seed
            && self.layers == other.layers
            && self.preprocess_digest == other.preprocess_digest
    }
}

impl RrqModel {
    pub fn from_parts(
        dim: usize,
        model_seed: u64,
        layers: Vec<LayerSpec>,
        preprocess_digest: [u8; 32],
    ) -> Result<Self> {
        for (i, layer) in layers.iter().enumerate() {
            if layer.index != i + 1 {
                return Err(Error::Format(format!(
                    "layer {} stored at position {}",
                    layer.index,
                    i + 1
                )));
            }
            if layer.seed != layer_seed(model_seed, layer.index) {
                return Err(Error::Format(format!(
                    "layer {} seed mismatch",
                    layer.index
                )));
            }
            layer.validate(dim)?;
        }
        Ok(Self {
            dim,
            model_seed,
            cache: CodebookCache::new(layers.len(), DEFAULT_CACHE_LAYERS),
            layers,
            preprocess_digest,
            cache_budget: DEFAULT_CACHE_LAYERS,
        })
    }

    /// Changes how many leading layers keep their codebooks in memory.
    pub fn with_cache_layers(mut self, budget: usize) -> Self {
        self.cache_budget = budget;
        self.cache = CodebookCache::new(self.layers.len(), budget);
        self
    }

    pub fn model_seed(&self) -> u64 {
        self.model_seed
    }

    pub fn layers(&self) -> &[LayerSpec] {
        &self.layers
    }

    pub fn preprocess_digest(&self) -> &[u8; 32] {
        &self.preprocess_digest
    }

    pub fn set_preprocess_digest(&mut self, digest: [u8; 32]) {
        self.preprocess_digest = digest;
    }

    /// Drops all but the first `layers` layers.
    pub fn truncated(&self, layers: usize) -> RrqModel {
        let keep = self.layers[..layers.min(self.layers.len())].to_vec();
        RrqModel::from_parts(self.dim, self.model_seed, keep, self.preprocess_digest)
            .expect("prefix of a valid model is valid")
            .with_cache_layers(self.cache_budget)
    }
}

impl ResidualQuantizer for RrqModel {
    fn dim(&self) -> usize {
        self.dim
    }

    fn depth(&self) -> usize {
        self.layers.len()
    }

    fn layer_size(&self, layer: usize) -> u32 {
        self.layers[layer].k
    }

    fn layer_codebook(&self, layer: usize) -> Arc<Codebook> {
        let make = || Arc::new(generate_codebook(&self.layers[layer], self.dim));
        match self.cache.slots.get(layer) {
            Some(slot) => slot.get_or_init(make).clone(),
            None => make(),
        }
    }
}

/// Layer shapes and seed for [`train`].
#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    /// `K` of each layer; its length is the requested depth.
    pub layer_sizes: Vec<u32>,
    pub model_seed: u64,
}

impl TrainConfig {
    pub fn uniform(layers: usize, k: u32, model_seed: u64) -> Self {
        Self {
            layer_sizes: vec![k; layers],
            model_seed,
        }
    }
}

/// What happened during training.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainReport {
    pub requested_layers: usize,
    pub early_stopped: bool,
    /// Mean squared residual norm before the first layer.
    pub initial_distortion: f64,
    /// Mean squared residual norm after each trained layer.
    pub layer_distortion: Vec<f64>,
    /// Total residual variance at the input of each trained layer.
    pub layer_input_variance: Vec<f64>,
}

fn mean_sq_residual(xs: &[Vec<f64>], recon: &[Vec<f64>]) -> f64 {
    let total: f64 = xs
        .par_iter()
        .zip(recon.par_iter())
        .map(|(x, r)| x.iter().zip(r).map(|(a, b)| (a - b) * (a - b)).sum::<f64>())
        .collect::<Vec<_>>()
        .iter()
        .sum();
    total / xs.len() as f64
}

fn residual_profile(xs: &[Vec<f64>], recon: &[Vec<f64>], dim: usize) -> VarianceProfile {
    let count = xs.len() as f64;
    let mut mean = vec![0.0; dim];
    for (x, r) in xs.iter().zip(recon) {
        for j in 0..dim {
            mean[j] += x[j] - r[j];
        }
    }
    mean.iter_mut().for_each(|m| *m /= count);
    let mut var = vec![0.0; dim];
    for (x, r) in xs.iter().zip(recon) {
        for j in 0..dim {
            let d = x[j] - r[j] - mean[j];
            var[j] += d * d;
        }
    }
    var.iter_mut().for_each(|v| *v /= count);
    VarianceProfile::new(var).expect("variances are finite and non-negative")
}

/// Trains a regularized residual quantizer on decorrelated vectors.
///
/// Residual means are not subtracted; the variance profile is measured
/// about them and the codewords stay zero-mean.
pub fn train(xs: &[Vec<f64>], config: &TrainConfig) -> Result<(RrqModel, TrainReport)> {
    if xs.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 training vectors, got {}",
            xs.len()
        )));
    }
    let dim = xs[0].len();
    if dim == 0 {
        return Err(Error::Geometry("zero-dimensional training vectors".into()));
    }
    if let Some(x) = xs.iter().find(|x| x.len() != dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: x.len(),
        });
    }
    if config.layer_sizes.is_empty() {
        return Err(Error::InvalidArgument(
            "at least one layer is required".into(),
        ));
    }
    if let Some(k) = config.layer_sizes.iter().find(|&&k| k < 2) {
        return Err(Error::InvalidArgument(format!("layer size K = {k} < 2")));
    }

    let mut recon = vec![vec![0.0; dim]; xs.len()];
    let mut layers = Vec::with_capacity(config.layer_sizes.len());
    let mut report = TrainReport {
        requested_layers: config.layer_sizes.len(),
        early_stopped: false,
        initial_distortion: mean_sq_residual(xs, &recon),
        layer_distortion: Vec::new(),
        layer_input_variance: Vec::new(),
    };

    for (l, &k) in config.layer_sizes.iter().enumerate() {
        let profile = residual_profile(xs, &recon, dim);
        if profile.max() <= DEGENERATE_VARIANCE {
            report.early_stopped = true;
            break;
        }
        let sol = solve_for_rate(&profile, (k as f64).log2())?;
        let (active, variances): (Vec<u32>, Vec<f64>) = sol
            .codeword_variances
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0.0)
            .map(|(j, &c)| (j as u32, c))
            .unzip();
        let spec = LayerSpec::new(
            config.model_seed,
            l + 1,
            k,
            sol.gamma,
            active,
            variances,
            profile.total(),
        );
        let cb = generate_codebook(&spec, dim);
        xs.par_iter()
            .zip(recon.par_iter_mut())
            .for_each_init(Vec::new, |scratch, (x, r)| {
                let i = cb.nearest(x, r, scratch);
                cb.accumulate(i as usize, r);
            });
        report.layer_input_variance.push(profile.total());
        report.layer_distortion.push(mean_sq_residual(xs, &recon));
        layers.push(spec);
    }

    let model = RrqModel::from_parts(dim, config.model_seed, layers, [0; 32])?;
    Ok((model, report))
}
