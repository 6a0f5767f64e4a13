//! Separable orthonormal 2D DCT-II.
//!
//! Direct matrix form, `Y = C_H · X · C_Wᵀ`, with
//! `C_N[k][i] = a_k · cos(π (2i + 1) k / 2N)`, `a_0 = √(1/N)`, `a_k = √(2/N)`.
//! Cost is `O(HW(H + W))`, fine for the image sizes this crate targets.

use std::f64::consts::PI;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Dct2 {
    height: usize,
    width: usize,
    rows: Vec<f64>,
    cols: Vec<f64>,
}

fn basis(n: usize) -> Vec<f64> {
    let mut c = vec![0.0; n * n];
    let a0 = (1.0 / n as f64).sqrt();
    let ak = (2.0 / n as f64).sqrt();
    for k in 0..n {
        let a = if k == 0 { a0 } else { ak };
        for i in 0..n {
            c[k * n + i] = a * (PI * (2 * i + 1) as f64 * k as f64 / (2 * n) as f64).cos();
        }
    }
    c
}

impl Dct2 {
    pub fn new(height: usize, width: usize) -> Self {
        Self {
            height,
            width,
            rows: basis(height),
            cols: basis(width),
        }
    }

    fn check(&self, len: usize) -> Result<()> {
        if len != self.height * self.width {
            return Err(Error::Geometry(format!(
                "expected a {}x{} matrix ({} values), got {len}",
                self.height,
                self.width,
                self.height * self.width
            )));
        }
        Ok(())
    }

    /// Forward transform of a row-major `H×W` matrix.
    pub fn forward(&self, input: &[f64]) -> Result<Vec<f64>> {
        self.check(input.len())?;
        let (h, w) = (self.height, self.width);
        // along rows: T[i][l] = Σ_j X[i][j] C_W[l][j]
        let mut tmp = vec![0.0; h * w];
        for i in 0..h {
            let x = &input[i * w..(i + 1) * w];
            for l in 0..w {
                let c = &self.cols[l * w..(l + 1) * w];
                tmp[i * w + l] = x.iter().zip(c).map(|(a, b)| a * b).sum();
            }
        }
        // along columns: Y[k][l] = Σ_i C_H[k][i] T[i][l]
        let mut out = vec![0.0; h * w];
        for k in 0..h {
            let c = &self.rows[k * h..(k + 1) * h];
            let y = &mut out[k * w..(k + 1) * w];
            for (i, &cki) in c.iter().enumerate() {
                let t = &tmp[i * w..(i + 1) * w];
                for (yl, tl) in y.iter_mut().zip(t) {
                    *yl += cki * tl;
                }
            }
        }
        Ok(out)
    }

    /// Inverse transform; output is not clamped.
    pub fn inverse(&self, coeffs: &[f64]) -> Result<Vec<f64>> {
        self.check(coeffs.len())?;
        let (h, w) = (self.height, self.width);
        // T = C_Hᵀ Y
        let mut tmp = vec![0.0; h * w];
        for k in 0..h {
            let c = &self.rows[k * h..(k + 1) * h];
            let y = &coeffs[k * w..(k + 1) * w];
            for (i, &cki) in c.iter().enumerate() {
                let t = &mut tmp[i * w..(i + 1) * w];
                for (tl, yl) in t.iter_mut().zip(y) {
                    *tl += cki * yl;
                }
            }
        }
        // X = T C_W
        let mut out = vec![0.0; h * w];
        for i in 0..h {
            let t = &tmp[i * w..(i + 1) * w];
            let x = &mut out[i * w..(i + 1) * w];
            for (l, &tl) in t.iter().enumerate() {
                let c = &self.cols[l * w..(l + 1) * w];
                for (xj, cj) in x.iter_mut().zip(c) {
                    *xj += tl * cj;
                }
            }
        }
        Ok(out)
    }
}
