//! Sparse codebooks and the greedy multi-layer encode/decode shared by
//! every residual quantizer in the crate.

use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};

/// `K` codewords that are non-zero only on a shared set of active dimensions.
///
/// A dense codebook is the special case where every dimension is active.
#[derive(Debug, Clone, PartialEq)]
pub struct Codebook {
    dim: usize,
    active: Vec<u32>,
    /// `K × active.len()`, row per codeword.
    values: Vec<f64>,
    norms: Vec<f64>,
}

impl Codebook {
    pub fn from_sparse(dim: usize, active: Vec<u32>, values: Vec<f64>) -> Self {
        let a = active.len();
        debug_assert!(a == 0 || values.len() % a == 0);
        debug_assert!(active.windows(2).all(|w| w[0] < w[1]));
        debug_assert!(active.last().is_none_or(|&j| (j as usize) < dim));
        let norms = if a == 0 {
            Vec::new()
        } else {
            values
                .chunks_exact(a)
                .map(|c| c.iter().map(|v| v * v).sum())
                .collect()
        };
        Self {
            dim,
            active,
            values,
            norms,
        }
    }

    /// `k` all-zero codewords.
    pub fn zeros(dim: usize, k: usize) -> Self {
        Self {
            dim,
            active: Vec::new(),
            values: Vec::new(),
            norms: vec![0.0; k],
        }
    }

    pub fn from_dense(dim: usize, rows: &[Vec<f64>]) -> Self {
        let active = (0..dim as u32).collect();
        let values = rows.iter().flat_map(|r| r.iter().copied()).collect();
        Self::from_sparse(dim, active, values)
    }

    pub fn len(&self) -> usize {
        self.norms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.norms.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn active(&self) -> &[u32] {
        &self.active
    }

    /// Non-zero entries of codeword `k`, aligned with [`active`](Self::active).
    pub fn codeword_active(&self, k: usize) -> &[f64] {
        let a = self.active.len();
        &self.values[k * a..(k + 1) * a]
    }

    pub fn codeword_dense(&self, k: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        for (&j, &v) in self.active.iter().zip(self.codeword_active(k)) {
            out[j as usize] = v;
        }
        out
    }

    /// Squared norm of codeword `k`.
    pub fn norm2(&self, k: usize) -> f64 {
        self.norms[k]
    }

    /// Nearest codeword to `x − recon` in Euclidean distance; lowest index
    /// wins ties.
    ///
    /// Uses `‖r − c‖² = ‖r‖² − 2⟨r, c⟩ + ‖c‖²` over the active dimensions
    /// and drops `‖r‖²`, which is common to every candidate.
    pub fn nearest(&self, x: &[f64], recon: &[f64], scratch: &mut Vec<f64>) -> u32 {
        let a = self.active.len();
        if a == 0 {
            return 0;
        }
        scratch.clear();
        scratch.extend(
            self.active
                .iter()
                .map(|&j| x[j as usize] - recon[j as usize]),
        );
        let mut best = 0;
        let mut best_score = f64::INFINITY;
        for (k, c) in self.values.chunks_exact(a).enumerate() {
            let dot: f64 = scratch.iter().zip(c).map(|(r, v)| r * v).sum();
            let score = self.norms[k] - 2.0 * dot;
            if score < best_score {
                best_score = score;
                best = k;
            }
        }
        best as u32
    }

    /// `recon += c_k` on the active dimensions.
    pub fn accumulate(&self, k: usize, recon: &mut [f64]) {
        for (&j, &v) in self.active.iter().zip(self.codeword_active(k)) {
            recon[j as usize] += v;
        }
    }
}

/// Per-image code: one codeword index per layer, any prefix of which is a
/// valid lower-rate code.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct IndexCode {
    pub indices: Vec<u32>,
}

impl IndexCode {
    pub fn new(indices: Vec<u32>) -> Self {
        Self { indices }
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn prefix(&self, layers: usize) -> IndexCode {
        IndexCode::new(self.indices[..layers.min(self.indices.len())].to_vec())
    }
}

/// Bits needed for a fixed-width index into `k` codewords, `⌈log₂ k⌉`.
pub fn index_bits(k: u32) -> u32 {
    if k <= 1 {
        0
    } else {
        32 - (k - 1).leading_zeros()
    }
}

/// Multi-layer quantizer whose reconstruction is the sum of one codeword
/// per layer, chosen greedily.
///
/// Encoding keeps the running reconstruction and evaluates residuals as
/// `x − recon`, so the residual after `p` layers is exactly
/// `x − decode(prefix_p)`.
pub trait ResidualQuantizer: Sync {
    fn dim(&self) -> usize;

    /// Number of trained layers.
    fn depth(&self) -> usize;

    /// Codeword count of layer `layer` (0-based).
    fn layer_size(&self, layer: usize) -> u32;

    /// Codebook of layer `layer` (0-based).
    fn layer_codebook(&self, layer: usize) -> Arc<Codebook>;

    /// Fixed-width payload bits for the first `layers` layers.
    fn prefix_bits(&self, layers: usize) -> u64 {
        (0..layers.min(self.depth()))
            .map(|l| index_bits(self.layer_size(l)) as u64)
            .sum()
    }

    fn encode(&self, x: &[f64], layers: usize) -> Result<IndexCode> {
        Ok(self
            .encode_batch(std::slice::from_ref(&x.to_vec()), layers)?
            .remove(0))
    }

    /// Encodes every vector through `layers` layers, one codebook at a time.
    fn encode_batch(&self, xs: &[Vec<f64>], layers: usize) -> Result<Vec<IndexCode>> {
        let n = self.dim();
        if layers > self.depth() {
            return Err(Error::InvalidArgument(format!(
                "requested {layers} layers from a {}-layer model",
                self.depth()
            )));
        }
        if let Some(x) = xs.iter().find(|x| x.len() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: x.len(),
            });
        }
        let mut recon = vec![vec![0.0; n]; xs.len()];
        let mut codes = vec![IndexCode::default(); xs.len()];
        for l in 0..layers {
            let cb = self.layer_codebook(l);
            xs.par_iter()
                .zip(recon.par_iter_mut())
                .zip(codes.par_iter_mut())
                .for_each_init(Vec::new, |scratch, ((x, r), code)| {
                    let k = cb.nearest(x, r, scratch);
                    cb.accumulate(k as usize, r);
                    code.indices.push(k);
                });
        }
        Ok(codes)
    }

    fn check_code(&self, code: &IndexCode) -> Result<()> {
        if code.len() > self.depth() {
            return Err(Error::InvalidArgument(format!(
                "code has {} layers, model has {}",
                code.len(),
                self.depth()
            )));
        }
        for (l, &i) in code.indices.iter().enumerate() {
            let k = self.layer_size(l);
            if i >= k {
                return Err(Error::IndexOutOfRange {
                    layer: l + 1,
                    index: i,
                    k,
                });
            }
        }
        Ok(())
    }

    /// Sum of the indexed codewords.
    fn decode(&self, code: &IndexCode) -> Result<Vec<f64>> {
        Ok(self
            .reconstruct_prefixes(std::slice::from_ref(code), &[code.len()])?
            .remove(0)
            .remove(0))
    }

    /// For every code, the reconstruction after each prefix length in
    /// `grid` (ascending). Output is indexed `[code][grid position]`.
    fn reconstruct_prefixes(
        &self,
        codes: &[IndexCode],
        grid: &[usize],
    ) -> Result<Vec<Vec<Vec<f64>>>> {
        if grid.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::InvalidArgument(
                "layer grid must be ascending".into(),
            ));
        }
        for code in codes {
            self.check_code(code)?;
            if let Some(&g) = grid.last() {
                if g > code.len() {
                    return Err(Error::InvalidArgument(format!(
                        "prefix of {g} layers requested from a {}-layer code",
                        code.len()
                    )));
                }
            }
        }
        let n = self.dim();
        let mut recon = vec![vec![0.0; n]; codes.len()];
        let mut out: Vec<Vec<Vec<f64>>> = vec![Vec::with_capacity(grid.len()); codes.len()];
        let mut next = 0;
        let deepest = grid.last().copied().unwrap_or(0);
        for l in 0..=deepest {
            while next < grid.len() && grid[next] == l {
                for (o, r) in out.iter_mut().zip(&recon) {
                    o.push(r.clone());
                }
                next += 1;
            }
            if l == deepest {
                break;
            }
            let cb = self.layer_codebook(l);
            recon
                .par_iter_mut()
                .zip(codes.par_iter())
                .for_each(|(r, code)| cb.accumulate(code.indices[l] as usize, r));
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_bit_widths() {
        assert_eq!(index_bits(1), 0);
        assert_eq!(index_bits(2), 1);
        assert_eq!(index_bits(4), 2);
        assert_eq!(index_bits(5), 3);
        assert_eq!(index_bits(16), 4);
        assert_eq!(index_bits(256), 8);
        assert_eq!(index_bits(257), 9);
    }

    #[test]
    fn nearest_breaks_ties_low() {
        let cb = Codebook::from_dense(2, &[vec![1.0, 0.0], vec![-1.0, 0.0], vec![0.0, 1.0]]);
        let mut s = Vec::new();
        assert_eq!(cb.nearest(&[0.0, 0.0], &[0.0, 0.0], &mut s), 0);
        assert_eq!(cb.nearest(&[-0.9, 0.1], &[0.0, 0.0], &mut s), 1);
        assert_eq!(cb.nearest(&[0.0, 2.0], &[0.0, 1.0], &mut s), 2);
    }
}
