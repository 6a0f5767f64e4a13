//! Zig-zag vectorization of rectangular matrices.
//!
//! Anti-diagonals `d = 0..=H+W−2` are visited in order. Even diagonals run
//! from their lower-left cell up and to the right, odd ones from the
//! upper-right cell down and to the left (the JPEG scan, generalized).

use crate::error::{Error, Result};

/// Flat row-major matrix index of each zig-zag position.
pub fn scan_order(height: usize, width: usize) -> Vec<usize> {
    let mut order = Vec::with_capacity(height * width);
    if height == 0 || width == 0 {
        return order;
    }
    for d in 0..height + width - 1 {
        if d % 2 == 0 {
            let mut row = d.min(height - 1);
            let mut col = d - row;
            loop {
                order.push(row * width + col);
                if row == 0 || col + 1 == width {
                    break;
                }
                row -= 1;
                col += 1;
            }
        } else {
            let mut col = d.min(width - 1);
            let mut row = d - col;
            loop {
                order.push(row * width + col);
                if col == 0 || row + 1 == height {
                    break;
                }
                row += 1;
                col -= 1;
            }
        }
    }
    order
}

pub fn zigzag(matrix: &[f64], height: usize, width: usize) -> Result<Vec<f64>> {
    check(matrix.len(), height, width)?;
    Ok(scan_order(height, width)
        .iter()
        .map(|&i| matrix[i])
        .collect())
}

pub fn inverse_zigzag(vector: &[f64], height: usize, width: usize) -> Result<Vec<f64>> {
    check(vector.len(), height, width)?;
    let mut out = vec![0.0; vector.len()];
    for (&i, &v) in scan_order(height, width).iter().zip(vector) {
        out[i] = v;
    }
    Ok(out)
}

fn check(len: usize, height: usize, width: usize) -> Result<()> {
    if len != height * width {
        return Err(Error::DimensionMismatch {
            expected: height * width,
            got: len,
        });
    }
    Ok(())
}
