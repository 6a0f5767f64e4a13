//! Binary PGM (`P5`) import and export.
//!
//! Both 8-bit and 16-bit (big-endian) samples are read; a sample `v` maps to
//! `v / maxval`. Export always writes 8-bit samples, rounding `p · 255`.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::image::ImageGray;

pub fn decode(bytes: &[u8]) -> Result<ImageGray> {
    let mut cursor = Header { bytes, pos: 0 };
    if cursor.bytes.get(..2) != Some(b"P5") {
        return Err(Error::BadMagic { expected: "P5" });
    }
    cursor.pos = 2;
    let width = cursor.number()?;
    let height = cursor.number()?;
    let maxval = cursor.number()?;
    if maxval == 0 || maxval > 65535 {
        return Err(Error::Format(format!("PGM maxval {maxval} out of range")));
    }
    // exactly one whitespace byte separates the header from the raster
    match cursor.bytes.get(cursor.pos) {
        Some(b) if b.is_ascii_whitespace() => cursor.pos += 1,
        _ => return Err(Error::Format("missing raster separator".into())),
    }
    let raster = &bytes[cursor.pos..];
    let count = width * height;
    let scale = maxval as f64;
    let pixels: Vec<f64> = if maxval < 256 {
        if raster.len() < count {
            return Err(Error::Truncated(format!(
                "PGM raster has {} of {count} samples",
                raster.len()
            )));
        }
        raster[..count].iter().map(|&v| v as f64 / scale).collect()
    } else {
        if raster.len() < 2 * count {
            return Err(Error::Truncated(format!(
                "PGM raster has {} of {} bytes",
                raster.len(),
                2 * count
            )));
        }
        raster[..2 * count]
            .chunks_exact(2)
            .map(|c| u16::from_be_bytes([c[0], c[1]]) as f64 / scale)
            .collect()
    };
    // samples above maxval are malformed; clamp rather than reject
    ImageGray::from_clamped(height, width, pixels)
}

pub fn encode(image: &ImageGray) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", image.width(), image.height()).into_bytes();
    out.extend(
        image
            .pixels()
            .iter()
            .map(|&p| (p.clamp(0.0, 1.0) * 255.0).round() as u8),
    );
    out
}

pub fn read(path: impl AsRef<Path>) -> Result<ImageGray> {
    decode(&fs::read(path)?)
}

pub fn write(path: impl AsRef<Path>, image: &ImageGray) -> Result<()> {
    let mut file = fs::File::create(path)?;
    file.write_all(&encode(image))?;
    Ok(())
}

struct Header<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Header<'_> {
    fn skip_space_and_comments(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b == b'#' {
                while let Some(&c) = self.bytes.get(self.pos) {
                    self.pos += 1;
                    if c == b'\n' || c == b'\r' {
                        break;
                    }
                }
            } else if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn number(&mut self) -> Result<usize> {
        self.skip_space_and_comments();
        let start = self.pos;
        while self.bytes.get(self.pos).is_some_and(|b| b.is_ascii_digit()) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(Error::Format("expected a number in PGM header".into()));
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::Format("PGM header number overflow".into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eight_bit_roundtrip() {
        let img = ImageGray::new(2, 3, vec![0.0, 1.0, 0.2, 0.4, 0.6, 0.8]).unwrap();
        let back = decode(&encode(&img)).unwrap();
        assert_eq!(back.height(), 2);
        assert_eq!(back.width(), 3);
        for (a, b) in img.pixels().iter().zip(back.pixels()) {
            assert!((a - b).abs() <= 0.5 / 255.0 + 1e-12);
        }
    }

    #[test]
    fn sixteen_bit_with_comment() {
        let mut bytes = b"P5\n# a comment\n2 1\n65535\n".to_vec();
        bytes.extend_from_slice(&[0xff, 0xff, 0x80, 0x00]);
        let img = decode(&bytes).unwrap();
        assert_eq!(img.pixels()[0], 1.0);
        assert_eq!(img.pixels()[1], 32768.0 / 65535.0);
    }

    #[test]
    fn eight_bit_maps_v_over_255() {
        let mut bytes = b"P5 1 1 255\n".to_vec();
        bytes.push(51);
        assert_eq!(decode(&bytes).unwrap().pixels()[0], 51.0 / 255.0);
    }

    #[test]
    fn truncated_raster() {
        let mut bytes = b"P5\n2 2\n255\n".to_vec();
        bytes.extend_from_slice(&[1, 2, 3]);
        assert!(matches!(decode(&bytes), Err(Error::Truncated(_))));
        assert!(matches!(
            decode(b"P2\n1 1\n255\n0"),
            Err(Error::BadMagic { .. })
        ));
    }
}
