//! On-disk formats: the `.rrqm` model container and the `.rrq` bitstream.
//!
//! All multi-byte scalars are little-endian.
//!
//! # Model container (`.rrqm`, version 1)
//!
//! | field                         | type                                   |
//! |-------------------------------|----------------------------------------|
//! | magic `"RRQM"`                | 4 bytes                                |
//! | version                       | `u16` = 1                              |
//! | height, width, subbands, n    | 4 × `u32`                              |
//! | normal generator id           | `u8` length + ASCII                    |
//! | model seed                    | `u64`                                  |
//! | layer count L                 | `u32`                                  |
//! | per layer                     | `u32` K, `f64` γ, `f64` input variance total, `u32` count, count × (`u32` index, `f64` variance) |
//! | sub-band means                | n × `f64`                              |
//! | rotations (row-major)         | M × (n/M)² × `f64`                     |
//! | SHA-256 of everything above   | 32 bytes                               |
//!
//! # Bitstream (`.rrq`)
//!
//! | field                         | type                                   |
//! |-------------------------------|----------------------------------------|
//! | magic `"RRQ1"`                | 4 bytes                                |
//! | model hash prefix             | first 8 bytes of the container SHA-256 |
//! | image count                   | `u32`                                  |
//! | per image                     | `u16` layers used, then indices MSB-first with `⌈log₂ K⁽ˡ⁾⌉` bits each, zero-padded to a byte |
//!
//! No entropy coding is applied; the payload of an image is exactly
//! `Σ_{l ≤ layers} ⌈log₂ K⁽ˡ⁾⌉` bits.

pub mod bits;

use std::fs;
use std::path::Path;
use std::sync::OnceLock;

use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::image::ImageGray;
use crate::normal::GENERATOR_ID;
use crate::preprocess::PreprocessModel;
use crate::rrq::{index_bits, IndexCode, LayerSpec, ResidualQuantizer, RrqModel};

use bits::{BitReader, BitWriter};

pub const MODEL_MAGIC: &[u8; 4] = b"RRQM";
pub const STREAM_MAGIC: &[u8; 4] = b"RRQ1";
pub const MODEL_VERSION: u16 = 1;

/// Preprocessing transform and quantizer stored together.
#[derive(Debug, Clone)]
pub struct ModelBundle {
    pre: PreprocessModel,
    rrq: RrqModel,
    digest: OnceLock<[u8; 32]>,
}

impl PartialEq for ModelBundle {
    fn eq(&self, other: &Self) -> bool {
        self.pre == other.pre && self.rrq == other.rrq
    }
}

impl ModelBundle {
    /// Binds a quantizer to the transform it was trained behind.
    ///
    /// A quantizer that does not yet reference a transform (all-zero
    /// digest) is bound to `pre`; one that references another transform
    /// is rejected.
    pub fn new(pre: PreprocessModel, mut rrq: RrqModel) -> Result<Self> {
        if rrq.dim() != pre.dim() {
            return Err(Error::DimensionMismatch {
                expected: pre.dim(),
                got: rrq.dim(),
            });
        }
        let digest = pre.digest();
        if *rrq.preprocess_digest() == [0; 32] {
            rrq.set_preprocess_digest(digest);
        } else if *rrq.preprocess_digest() != digest {
            return Err(Error::HashMismatch);
        }
        Ok(Self {
            pre,
            rrq,
            digest: OnceLock::new(),
        })
    }

    pub fn preprocess(&self) -> &PreprocessModel {
        &self.pre
    }

    pub fn quantizer(&self) -> &RrqModel {
        &self.rrq
    }

    /// SHA-256 of the serialized container body.
    pub fn digest(&self) -> [u8; 32] {
        *self.digest.get_or_init(|| {
            let bytes = self.body_bytes();
            Sha256::digest(&bytes).into()
        })
    }

    pub fn tag(&self) -> [u8; 8] {
        let d = self.digest();
        d[..8].try_into().expect("8 bytes")
    }

    fn body_bytes(&self) -> Vec<u8> {
        let pre = &self.pre;
        let layers = self.rrq.layers();
        let mut out = Vec::with_capacity(container_len(
            pre.dim(),
            pre.subbands(),
            layers.iter().map(|l| l.active.len()),
        ));
        out.extend_from_slice(MODEL_MAGIC);
        out.extend_from_slice(&MODEL_VERSION.to_le_bytes());
        for g in [pre.height(), pre.width(), pre.subbands(), pre.dim()] {
            out.extend_from_slice(&(g as u32).to_le_bytes());
        }
        out.push(GENERATOR_ID.len() as u8);
        out.extend_from_slice(GENERATOR_ID.as_bytes());
        out.extend_from_slice(&self.rrq.model_seed().to_le_bytes());
        out.extend_from_slice(&(layers.len() as u32).to_le_bytes());
        for layer in layers {
            out.extend_from_slice(&layer.k.to_le_bytes());
            out.extend_from_slice(&layer.gamma.to_le_bytes());
            out.extend_from_slice(&layer.input_variance_total.to_le_bytes());
            out.extend_from_slice(&(layer.active.len() as u32).to_le_bytes());
            for (j, v) in layer.active.iter().zip(&layer.variances) {
                out.extend_from_slice(&j.to_le_bytes());
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        for v in pre.means().iter().chain(pre.rotations()) {
            for x in v {
                out.extend_from_slice(&x.to_le_bytes());
            }
        }
        out
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = self.body_bytes();
        let digest: [u8; 32] = Sha256::digest(&out).into();
        let _ = self.digest.set(digest);
        out.extend_from_slice(&digest);
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < 4 + 32 {
            return Err(Error::Truncated("model container too short".into()));
        }
        if &bytes[..4] != MODEL_MAGIC {
            return Err(Error::BadMagic { expected: "RRQM" });
        }
        let (body, stored) = bytes.split_at(bytes.len() - 32);
        let digest: [u8; 32] = Sha256::digest(body).into();
        if digest != stored {
            return Err(Error::HashMismatch);
        }

        let mut r = Reader::new(&body[4..]);
        let version = r.u16()?;
        if version != MODEL_VERSION {
            return Err(Error::UnknownVersion(version));
        }
        let height = r.u32()? as usize;
        let width = r.u32()? as usize;
        let subbands = r.u32()? as usize;
        let n = r.u32()? as usize;
        if height.checked_mul(width) != Some(n) || subbands == 0 || n % subbands != 0 {
            return Err(Error::Format(format!(
                "inconsistent geometry {height}x{width}, n = {n}, M = {subbands}"
            )));
        }
        let id_len = r.u8()? as usize;
        let id = String::from_utf8_lossy(r.take(id_len)?).into_owned();
        if id != GENERATOR_ID {
            return Err(Error::UnknownGenerator(id));
        }
        let model_seed = r.u64()?;
        let depth = r.u32()? as usize;
        let mut layers = Vec::with_capacity(depth.min(1 << 16));
        for l in 1..=depth {
            let k = r.u32()?;
            let gamma = r.f64()?;
            let input_variance_total = r.f64()?;
            let count = r.u32()? as usize;
            if count > n {
                return Err(Error::Format(format!(
                    "layer {l} lists {count} > n entries"
                )));
            }
            let mut active = Vec::with_capacity(count);
            let mut variances = Vec::with_capacity(count);
            for _ in 0..count {
                active.push(r.u32()?);
                variances.push(r.f64()?);
            }
            layers.push(LayerSpec::new(
                model_seed,
                l,
                k,
                gamma,
                active,
                variances,
                input_variance_total,
            ));
        }
        let s = n / subbands;
        let mut means = Vec::with_capacity(subbands);
        for _ in 0..subbands {
            means.push(r.f64_vec(s)?);
        }
        let mut rotations = Vec::with_capacity(subbands);
        for _ in 0..subbands {
            rotations.push(r.f64_vec(s * s)?);
        }
        if !r.is_empty() {
            return Err(Error::Format("trailing bytes after rotations".into()));
        }
        let pre = PreprocessModel::from_parts(height, width, subbands, means, rotations)?;
        let rrq = RrqModel::from_parts(n, model_seed, layers, pre.digest())?;
        let bundle = Self::new(pre, rrq)?;
        let _ = bundle.digest.set(digest);
        Ok(bundle)
    }
}

/// Container size in bytes for a model with the given geometry and
/// per-layer active-set sizes.
pub fn container_len(n: usize, subbands: usize, active: impl Iterator<Item = usize>) -> usize {
    let s = n / subbands;
    let header = 4 + 2 + 16 + 1 + GENERATOR_ID.len() + 8 + 4;
    let layers: usize = active.map(|a| 4 + 8 + 8 + 4 + 12 * a).sum();
    header + layers + 8 * n + 8 * subbands * s * s + 32
}

pub fn save_model(path: impl AsRef<Path>, bundle: &ModelBundle) -> Result<()> {
    fs::write(path, bundle.to_bytes())?;
    Ok(())
}

pub fn load_model(path: impl AsRef<Path>) -> Result<ModelBundle> {
    ModelBundle::from_bytes(&fs::read(path)?)
}

/// Layer codes for a batch of images, tied to one model by hash prefix.
#[derive(Debug, Clone, PartialEq)]
pub struct Bitstream {
    pub model_tag: [u8; 8],
    pub codes: Vec<IndexCode>,
}

impl Bitstream {
    /// Serializes with the index widths of `model`.
    pub fn to_bytes(&self, model: &impl ResidualQuantizer) -> Result<Vec<u8>> {
        let mut out = Vec::new();
        out.extend_from_slice(STREAM_MAGIC);
        out.extend_from_slice(&self.model_tag);
        out.extend_from_slice(&(self.codes.len() as u32).to_le_bytes());
        for code in &self.codes {
            model.check_code(code)?;
            let layers = u16::try_from(code.len())
                .map_err(|_| Error::InvalidArgument("more than 65535 layers".into()))?;
            out.extend_from_slice(&layers.to_le_bytes());
            let mut w = BitWriter::new();
            for (l, &i) in code.indices.iter().enumerate() {
                w.put(i, index_bits(model.layer_size(l)));
            }
            out.extend(w.finish());
        }
        Ok(out)
    }

    /// Parses a whole stream; fails without returning partial results.
    pub fn from_bytes(bytes: &[u8], model: &impl ResidualQuantizer) -> Result<Self> {
        let mut r = Reader::new(bytes);
        if r.take(4)
            .map_err(|_| Error::BadMagic { expected: "RRQ1" })?
            != STREAM_MAGIC
        {
            return Err(Error::BadMagic { expected: "RRQ1" });
        }
        let model_tag: [u8; 8] = r.take(8)?.try_into().expect("8 bytes");
        let count = r.u32()? as usize;
        let mut codes = Vec::with_capacity(count.min(1 << 20));
        for img in 0..count {
            let layers = r
                .u16()
                .map_err(|_| Error::Truncated(format!("image {img} header missing")))?
                as usize;
            if layers > model.depth() {
                return Err(Error::Format(format!(
                    "image {img} uses {layers} layers, model has {}",
                    model.depth()
                )));
            }
            let mut br = BitReader::new(r.rest());
            let mut indices = Vec::with_capacity(layers);
            for l in 0..layers {
                let i = br
                    .get(index_bits(model.layer_size(l)))
                    .map_err(|_| Error::Truncated(format!("image {img} cut at layer {}", l + 1)))?;
                indices.push(i);
            }
            let used = br.consumed_bytes();
            r.take(used)?;
            let code = IndexCode::new(indices);
            model.check_code(&code)?;
            codes.push(code);
        }
        if !r.is_empty() {
            return Err(Error::Format("trailing bytes after last image".into()));
        }
        Ok(Self { model_tag, codes })
    }

    /// Index payload bits of image `i` (header and padding excluded).
    pub fn payload_bits(&self, i: usize, model: &impl ResidualQuantizer) -> u64 {
        model.prefix_bits(self.codes[i].len())
    }
}

/// Rate of a fixed-width code through `layers` layers, in bits per pixel.
pub fn bits_per_pixel(model: &impl ResidualQuantizer, layers: usize, pixels: usize) -> f64 {
    model.prefix_bits(layers) as f64 / pixels as f64
}

/// Encodes images through the first `layers` layers.
pub fn compress(images: &[ImageGray], bundle: &ModelBundle, layers: usize) -> Result<Bitstream> {
    let pre = bundle.preprocess();
    let xs = images
        .par_iter()
        .map(|im| pre.forward(im))
        .collect::<Result<Vec<_>>>()?;
    let codes = bundle.quantizer().encode_batch(&xs, layers)?;
    Ok(Bitstream {
        model_tag: bundle.tag(),
        codes,
    })
}

/// Reconstructs images; the stream must carry this model's hash prefix.
pub fn decompress(stream: &Bitstream, bundle: &ModelBundle) -> Result<Vec<ImageGray>> {
    if stream.model_tag != bundle.tag() {
        return Err(Error::HashMismatch);
    }
    let rrq = bundle.quantizer();
    stream
        .codes
        .par_iter()
        .map(|code| {
            let x = rrq.decode(code)?;
            bundle.preprocess().inverse(&x)
        })
        .collect()
}

pub fn compress_to_bytes(
    images: &[ImageGray],
    bundle: &ModelBundle,
    layers: usize,
) -> Result<Vec<u8>> {
    compress(images, bundle, layers)?.to_bytes(bundle.quantizer())
}

pub fn decompress_bytes(bytes: &[u8], bundle: &ModelBundle) -> Result<Vec<ImageGray>> {
    // check the tag before trusting the layer widths
    if bytes.len() >= 12 && &bytes[..4] == STREAM_MAGIC && bytes[4..12] != bundle.tag() {
        return Err(Error::HashMismatch);
    }
    let stream = Bitstream::from_bytes(bytes, bundle.quantizer())?;
    decompress(&stream, bundle)
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn new(bytes: &'a [u8]) -> Self {
        Self { bytes, pos: 0 }
    }

    fn take(&mut self, len: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(len)
            .filter(|&e| e <= self.bytes.len())
            .ok_or_else(|| {
                Error::Truncated(format!("needed {len} bytes at offset {}", self.pos))
            })?;
        let out = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(out)
    }

    fn rest(&self) -> &'a [u8] {
        &self.bytes[self.pos..]
    }

    fn is_empty(&self) -> bool {
        self.pos == self.bytes.len()
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(
            self.take(2)?.try_into().expect("2 bytes"),
        ))
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(
            self.take(4)?.try_into().expect("4 bytes"),
        ))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(
            self.take(8)?.try_into().expect("8 bytes"),
        ))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(
            self.take(8)?.try_into().expect("8 bytes"),
        ))
    }

    fn f64_vec(&mut self, len: usize) -> Result<Vec<f64>> {
        let raw = self.take(
            len.checked_mul(8)
                .ok_or_else(|| Error::Format("size overflow".into()))?,
        )?;
        Ok(raw
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
            .collect())
    }
}
