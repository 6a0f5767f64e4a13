//! Bit-reproducible standard-normal stream for codebook generation.
//!
//! Codebooks are never stored, only regenerated from seeds, so the normal
//! generator is part of the model format. The algorithm is fixed:
//!
//! * uniforms: SplitMix64 (`state += 0x9E3779B97F4A7C15`, then the
//!   `30/27/31` xor-shift-multiply finalizer); a draw in `[0, 1)` is
//!   `(x >> 11) · 2⁻⁵³`.
//! * normals: Marsaglia's polar method. Draw `u = 2a − 1`, `v = 2b − 1`
//!   until `0 < s = u² + v² < 1`, then emit `u·f` followed by `v·f` with
//!   `f = sqrt(−2·ln(s)/s)`.
//! * `ln` is [`portable_ln`], built from IEEE add/mul/div only, so the
//!   stream does not depend on the platform libm.
//!
//! The identifier [`GENERATOR_ID`] is written into every model container.

pub const GENERATOR_ID: &str = "splitmix64-polar-ln11-v1";

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

#[inline]
fn finalize(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives a child seed from `seed` and a stream index.
#[inline]
pub fn mix(seed: u64, index: u64) -> u64 {
    finalize(seed.wrapping_add(index.wrapping_add(1).wrapping_mul(GOLDEN)))
}

#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN);
        finalize(self.state)
    }

    /// Uniform in `[0, 1)` with 53 bits of resolution.
    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

/// Standard-normal stream (polar method over [`SplitMix64`]).
#[derive(Debug, Clone)]
pub struct NormalStream {
    uniform: SplitMix64,
    spare: Option<f64>,
}

impl NormalStream {
    pub fn new(seed: u64) -> Self {
        Self {
            uniform: SplitMix64::new(seed),
            spare: None,
        }
    }

    pub fn next(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        loop {
            let u = 2.0 * self.uniform.next_f64() - 1.0;
            let v = 2.0 * self.uniform.next_f64() - 1.0;
            let s = u * u + v * v;
            if s > 0.0 && s < 1.0 {
                let f = (-2.0 * portable_ln(s) / s).sqrt();
                self.spare = Some(v * f);
                return u * f;
            }
        }
    }
}

const LN2_HI: f64 = 6.931_471_803_691_238_164_90e-1;
const LN2_LO: f64 = 1.908_214_929_270_587_700_02e-10;

/// Natural log of a positive finite number using only `+ − × ÷` and bit
/// manipulation. Accurate to a few ulp; identical on every IEEE-754 target.
pub fn portable_ln(x: f64) -> f64 {
    debug_assert!(x > 0.0 && x.is_finite());
    let mut bits = x.to_bits();
    let mut exp: i64 = ((bits >> 52) & 0x7ff) as i64;
    if exp == 0 {
        // subnormal: scale into the normal range first
        let scaled = x * (1u64 << 54) as f64;
        bits = scaled.to_bits();
        exp = ((bits >> 52) & 0x7ff) as i64 - 54;
    }
    let mut e = exp - 1023;
    let mut m = f64::from_bits((bits & 0x000f_ffff_ffff_ffff) | 0x3ff0_0000_0000_0000);
    // keep m in [√½, √2)
    if m > std::f64::consts::SQRT_2 {
        m *= 0.5;
        e += 1;
    }
    // ln m = 2·atanh(t), t = (m−1)/(m+1), |t| < 0.1716
    let t = (m - 1.0) / (m + 1.0);
    let t2 = t * t;
    let mut poly = 1.0 / 23.0;
    let mut k = 21.0;
    while k >= 1.0 {
        poly = poly * t2 + 1.0 / k;
        k -= 2.0;
    }
    let lnm = 2.0 * t * poly;
    let ef = e as f64;
    ef * LN2_HI + (ef * LN2_LO + lnm)
}
