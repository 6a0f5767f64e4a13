//! Unregularized residual quantization: one Lloyd k-means codebook per
//! layer, trained on the residuals of the previous layers.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::normal::mix;
use crate::rrq::{Codebook, ResidualQuantizer};

pub const DEFAULT_MAX_ITERS: usize = 50;
pub const DEFAULT_TOLERANCE: f64 = 1e-6;

/// Result of one k-means run.
#[derive(Debug, Clone, PartialEq)]
pub struct Clustering {
    pub centroids: Vec<Vec<f64>>,
    pub assignments: Vec<usize>,
    /// Sum of squared distances to the assigned centroid.
    pub sse: f64,
    pub iterations: usize,
    /// How many times an empty cluster was moved onto a far point.
    pub reseeded: usize,
}

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn assign(data: &[Vec<f64>], centroids: &[Vec<f64>]) -> Vec<(usize, f64)> {
    data.par_iter()
        .map(|x| {
            let mut best = (0, f64::INFINITY);
            for (k, c) in centroids.iter().enumerate() {
                let d = dist2(x, c);
                if d < best.1 {
                    best = (k, d);
                }
            }
            best
        })
        .collect()
}

/// k-means++ seeding: first centre uniform, then proportional to squared
/// distance from the nearest chosen centre.
pub fn kmeans_pp_init(data: &[Vec<f64>], k: usize, rng: &mut impl Rng) -> Vec<Vec<f64>> {
    let mut centroids = vec![data[rng.random_range(0..data.len())].clone()];
    let mut nearest: Vec<f64> = data.iter().map(|x| dist2(x, &centroids[0])).collect();
    while centroids.len() < k {
        let total: f64 = nearest.iter().sum();
        let pick = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut idx = data.len() - 1;
            for (i, &d) in nearest.iter().enumerate() {
                if d > 0.0 && target < d {
                    idx = i;
                    break;
                }
                target -= d;
            }
            idx
        } else {
            rng.random_range(0..data.len())
        };
        let c = data[pick].clone();
        nearest
            .iter_mut()
            .zip(data)
            .for_each(|(n, x)| *n = n.min(dist2(x, &c)));
        centroids.push(c);
    }
    centroids
}

/// Lloyd iterations from the given initial centroids.
///
/// Stops after `max_iters` rounds or when the SSE changes by less than
/// `tolerance` relative. An empty cluster is moved onto the point that is
/// currently farthest from its own centroid.
pub fn lloyd(
    data: &[Vec<f64>],
    mut centroids: Vec<Vec<f64>>,
    max_iters: usize,
    tolerance: f64,
) -> Clustering {
    let k = centroids.len();
    let dim = centroids[0].len();
    let mut reseeded = 0;
    let mut prev = f64::INFINITY;
    let mut iterations = 0;
    for _ in 0..max_iters {
        iterations += 1;
        let mut assigned = assign(data, &centroids);
        let mut counts = vec![0usize; k];
        assigned.iter().for_each(|(c, _)| counts[*c] += 1);
        for empty in 0..k {
            if counts[empty] > 0 {
                continue;
            }
            // farthest point among clusters that can spare one
            let far = assigned
                .iter()
                .enumerate()
                .filter(|(_, (c, _))| counts[*c] > 1)
                .max_by(|a, b| a.1 .1.total_cmp(&b.1 .1).then(b.0.cmp(&a.0)))
                .map(|(i, _)| i);
            if let Some(i) = far {
                counts[assigned[i].0] -= 1;
                counts[empty] = 1;
                assigned[i] = (empty, 0.0);
                centroids[empty] = data[i].clone();
                reseeded += 1;
            }
        }
        let mut sums = vec![vec![0.0; dim]; k];
        for (x, (c, _)) in data.iter().zip(&assigned) {
            sums[*c].iter_mut().zip(x).for_each(|(s, v)| *s += v);
        }
        for (c, (sum, &count)) in centroids.iter_mut().zip(sums.iter().zip(&counts)) {
            if count > 0 {
                *c = sum.iter().map(|s| s / count as f64).collect();
            }
        }
        let sse: f64 = data
            .iter()
            .zip(&assigned)
            .map(|(x, (c, _))| dist2(x, &centroids[*c]))
            .sum();
        let converged = prev.is_finite() && (prev - sse).abs() <= tolerance * prev;
        prev = sse;
        if converged {
            break;
        }
    }
    let assigned = assign(data, &centroids);
    Clustering {
        sse: assigned.iter().map(|a| a.1).sum(),
        assignments: assigned.into_iter().map(|a| a.0).collect(),
        centroids,
        iterations,
        reseeded,
    }
}

/// k-means++ seeded Lloyd's algorithm.
pub fn kmeans(data: &[Vec<f64>], k: usize, seed: u64, max_iters: usize) -> Result<Clustering> {
    if data.is_empty() {
        return Err(Error::InvalidArgument("no data".into()));
    }
    if k == 0 || k > data.len() {
        return Err(Error::InvalidArgument(format!(
            "k = {k} must be in 1..={}",
            data.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let init = kmeans_pp_init(data, k, &mut rng);
    Ok(lloyd(data, init, max_iters, DEFAULT_TOLERANCE))
}

/// Residual quantizer with dense k-means codebooks.
#[derive(Debug, Clone)]
pub struct KmeansRq {
    dim: usize,
    codebooks: Vec<Arc<Codebook>>,
    sizes: Vec<u32>,
    /// Mean squared residual norm after each layer on the training set.
    pub layer_distortion: Vec<f64>,
    pub initial_distortion: f64,
}

impl ResidualQuantizer for KmeansRq {
    fn dim(&self) -> usize {
        self.dim
    }

    fn depth(&self) -> usize {
        self.codebooks.len()
    }

    fn layer_size(&self, layer: usize) -> u32 {
        self.sizes[layer]
    }

    fn layer_codebook(&self, layer: usize) -> Arc<Codebook> {
        self.codebooks[layer].clone()
    }
}

/// Trains `layers` k-means layers of `k` centroids on residuals.
pub fn kmeans_rq_train(
    xs: &[Vec<f64>],
    layers: usize,
    k: usize,
    seed: u64,
    max_iters: usize,
) -> Result<KmeansRq> {
    if xs.len() < 2 {
        return Err(Error::InvalidArgument(
            "need at least 2 training vectors".into(),
        ));
    }
    let dim = xs[0].len();
    if let Some(x) = xs.iter().find(|x| x.len() != dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: x.len(),
        });
    }
    if layers == 0 {
        return Err(Error::InvalidArgument(
            "at least one layer is required".into(),
        ));
    }
    let mut recon = vec![vec![0.0; dim]; xs.len()];
    let mean_sq = |recon: &[Vec<f64>]| {
        xs.iter().zip(recon).map(|(x, r)| dist2(x, r)).sum::<f64>() / xs.len() as f64
    };
    let initial_distortion = mean_sq(&recon);
    let mut codebooks = Vec::with_capacity(layers);
    let mut layer_distortion = Vec::with_capacity(layers);
    for l in 0..layers {
        let residuals: Vec<Vec<f64>> = xs
            .iter()
            .zip(&recon)
            .map(|(x, r)| x.iter().zip(r).map(|(a, b)| a - b).collect())
            .collect();
        let clusters = kmeans(&residuals, k, mix(seed, l as u64 + 1), max_iters)?;
        let cb = Codebook::from_dense(dim, &clusters.centroids);
        xs.par_iter()
            .zip(recon.par_iter_mut())
            .for_each_init(Vec::new, |scratch, (x, r)| {
                let i = cb.nearest(x, r, scratch);
                cb.accumulate(i as usize, r);
            });
        layer_distortion.push(mean_sq(&recon));
        codebooks.push(Arc::new(cb));
    }
    Ok(KmeansRq {
        dim,
        codebooks,
        sizes: vec![k as u32; layers],
        layer_distortion,
        initial_distortion,
    })
}
