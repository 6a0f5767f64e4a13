//! Reverse water-filling over independent Gaussian sources.
//!
//! Given per-dimension variances `σ_j²` and a water level `γ`, every
//! dimension whose variance exceeds `γ` is quantized with distortion `γ`;
//! the rest are dropped entirely (distortion equals their variance, zero
//! rate). The codeword variance of a dimension is the soft threshold
//! `(σ_j² − γ)⁺`, which is what drives the sparse random codebooks in
//! [`crate::rrq`].
//!
//! All rates are in bits.

use crate::error::{Error, Result};

/// Bisection stops after this many halvings or when the bracket is
/// narrower than [`REL_WIDTH`] relative to its upper end.
const MAX_ITERS: usize = 200;
const REL_WIDTH: f64 = 1e-12;

/// Per-dimension variance of a (residual) source.
#[derive(Debug, Clone, PartialEq)]
pub struct VarianceProfile {
    variances: Vec<f64>,
}

impl VarianceProfile {
    pub fn new(variances: Vec<f64>) -> Result<Self> {
        if let Some((j, v)) = variances
            .iter()
            .enumerate()
            .find(|(_, v)| !(v.is_finite() && **v >= 0.0))
        {
            return Err(Error::InvalidArgument(format!(
                "variance[{j}] = {v} is not a finite non-negative number"
            )));
        }
        Ok(Self { variances })
    }

    /// Population variance (about the column mean) of each dimension of `rows`.
    pub fn measure<R: AsRef<[f64]>>(rows: &[R], dim: usize) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::InvalidArgument("no samples".into()));
        }
        let mut mean = vec![0.0; dim];
        for row in rows {
            let row = row.as_ref();
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: row.len(),
                });
            }
            for (m, x) in mean.iter_mut().zip(row) {
                *m += x;
            }
        }
        let count = rows.len() as f64;
        mean.iter_mut().for_each(|m| *m /= count);
        let mut var = vec![0.0; dim];
        for row in rows {
            for ((v, x), m) in var.iter_mut().zip(row.as_ref()).zip(&mean) {
                let d = x - m;
                *v += d * d;
            }
        }
        var.iter_mut().for_each(|v| *v /= count);
        Ok(Self { variances: var })
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.variances
    }

    pub fn len(&self) -> usize {
        self.variances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.variances.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.variances.iter().sum()
    }

    pub fn max(&self) -> f64 {
        self.variances.iter().copied().fold(0.0, f64::max)
    }
}

/// Water level together with the per-dimension allocation it induces.
#[derive(Debug, Clone, PartialEq)]
pub struct WaterfillSolution {
    pub gamma: f64,
    /// Distortion left in each dimension, `min(γ, σ_j²)`.
    pub per_dim_distortion: Vec<f64>,
    /// Soft-thresholded codeword variances, `(σ_j² − γ)⁺`.
    pub codeword_variances: Vec<f64>,
    pub active_set_size: usize,
    pub rate_bits: f64,
    /// `target − rate_bits` when a rate target could not be reached; zero otherwise.
    pub rate_gap: f64,
}

impl WaterfillSolution {
    /// Splits `variances` at `gamma`.
    ///
    /// Active dimensions get `codeword = σ² − γ` and `distortion = σ² − codeword`,
    /// so the two parts add back to the input bit for bit (one of the two
    /// subtractions is always exact).
    fn at_gamma(profile: &VarianceProfile, gamma: f64) -> Self {
        let n = profile.len();
        let mut per_dim_distortion = Vec::with_capacity(n);
        let mut codeword_variances = Vec::with_capacity(n);
        let mut active = 0;
        for &v in profile.as_slice() {
            if v > gamma {
                let c = v - gamma;
                codeword_variances.push(c);
                per_dim_distortion.push(v - c);
                active += 1;
            } else {
                codeword_variances.push(0.0);
                per_dim_distortion.push(v);
            }
        }
        Self {
            gamma,
            per_dim_distortion,
            codeword_variances,
            active_set_size: active,
            rate_bits: rate_unchecked(profile, gamma),
            rate_gap: 0.0,
        }
    }

    pub fn total_distortion(&self) -> f64 {
        self.per_dim_distortion.iter().sum()
    }
}

fn rate_unchecked(profile: &VarianceProfile, gamma: f64) -> f64 {
    profile
        .as_slice()
        .iter()
        .filter(|&&v| v > gamma)
        .map(|&v| 0.5 * (v / gamma).log2())
        .sum()
}

/// Rate in bits needed to reach water level `gamma`: `Σ max(0, ½·log₂(σ_j²/γ))`.
pub fn rate_at_gamma(profile: &VarianceProfile, gamma: f64) -> Result<f64> {
    if !(gamma > 0.0) || !gamma.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "water level must be positive, got {gamma}"
        )));
    }
    Ok(rate_unchecked(profile, gamma))
}

/// Finds the water level whose distortions sum to `total_distortion`.
pub fn solve_for_distortion(
    profile: &VarianceProfile,
    total_distortion: f64,
) -> Result<WaterfillSolution> {
    if !(total_distortion > 0.0) || !total_distortion.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "distortion budget must be positive, got {total_distortion}"
        )));
    }
    let energy = profile.total();
    if total_distortion > energy {
        return Err(Error::BudgetExceedsEnergy {
            budget: total_distortion,
            energy,
        });
    }
    let max = profile.max();
    if total_distortion == energy {
        return Ok(WaterfillSolution::at_gamma(profile, max));
    }

    // Σ min(γ, σ_j²) is continuous and strictly increasing on (0, max].
    let allocated = |g: f64| -> f64 { profile.as_slice().iter().map(|&v| v.min(g)).sum() };
    let (mut lo, mut hi) = (0.0_f64, max);
    for _ in 0..MAX_ITERS {
        let mid = 0.5 * (lo + hi);
        if allocated(mid) < total_distortion {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= REL_WIDTH * hi {
            break;
        }
    }
    Ok(WaterfillSolution::at_gamma(profile, 0.5 * (lo + hi)))
}

/// Finds the water level whose rate is closest to `target_bits`.
///
/// When the target cannot be reached numerically, the smallest admissible
/// water level is returned and the shortfall is stored in `rate_gap`.
pub fn solve_for_rate(profile: &VarianceProfile, target_bits: f64) -> Result<WaterfillSolution> {
    if !(target_bits >= 0.0) || !target_bits.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "target rate must be non-negative, got {target_bits}"
        )));
    }
    let max = profile.max();
    if !(max > 0.0) {
        return Err(Error::DegenerateSource);
    }
    if target_bits == 0.0 {
        return Ok(WaterfillSolution::at_gamma(profile, max));
    }

    // rate(γ) ≥ ½·log₂(max/γ), so this floor reaches the target unless it
    // underflows.
    let floor = (max * (-2.0 * target_bits).exp2()).max(f64::MIN_POSITIVE);
    if rate_unchecked(profile, floor) < target_bits {
        let mut sol = WaterfillSolution::at_gamma(profile, floor);
        sol.rate_gap = target_bits - sol.rate_bits;
        return Ok(sol);
    }

    // Bisect on ln γ; rate is strictly decreasing there.
    let (mut lo, mut hi) = (floor.ln(), max.ln());
    for _ in 0..MAX_ITERS {
        let mid = 0.5 * (lo + hi);
        if rate_unchecked(profile, mid.exp()) > target_bits {
            lo = mid;
        } else {
            hi = mid;
        }
        if (hi - lo) <= REL_WIDTH * hi.abs().max(1.0) {
            break;
        }
    }
    Ok(WaterfillSolution::at_gamma(
        profile,
        (0.5 * (lo + hi)).exp(),
    ))
}
